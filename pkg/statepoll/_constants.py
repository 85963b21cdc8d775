""" Package-level Constants for StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = [
    "STOCHASTIC_TOL",
    "SOLUTION_TOL",
    "CONDITION_WARN",
    "STRICT_MARGIN",
    "EIGEN_MARGIN",
    "IMAG_TOL",
    "A3_TOL",
    "RHO_DEGENERATE_TOL",
    "MAX_FACES",
    "EPSILON_FLOOR",
    "EPSILON_FALLBACK",
    "EPSILON_SCALE",
    "MIN_HORIZON",
    "DEFAULT_WARMUP",
    "DEFAULT_REPLICATIONS",
    "DEFAULT_DRIFT_THRESHOLD",
    "DRIFT_SEGMENTS",
    "RNG_BLOCK",
    "BOOTSTRAP_RESAMPLES",
    "ORACLE_MAX_STATES",
    "ORACLE_MAX_STATIONS",
    "ORACLE_PMF_FLOOR",
    "MOMENT_TOL",
    "TABLE_DIGITS",
    "VERSION",
]

STOCHASTIC_TOL = 1e-12
SOLUTION_TOL = 1e-10
CONDITION_WARN = 1e12
STRICT_MARGIN = 1e-9
EIGEN_MARGIN = 1e-9
IMAG_TOL = 1e-9
A3_TOL = 1e-12
RHO_DEGENERATE_TOL = 1e-12

MAX_FACES = 2**20 - 1
EPSILON_FLOOR = 1e-12
EPSILON_FALLBACK = 1e-6
EPSILON_SCALE = 1e-3

MIN_HORIZON = 10_000
DEFAULT_WARMUP = 0.1
DEFAULT_REPLICATIONS = 10
DEFAULT_DRIFT_THRESHOLD = 0.01
DRIFT_SEGMENTS = 10
RNG_BLOCK = 1 << 14
BOOTSTRAP_RESAMPLES = 200

ORACLE_MAX_STATES = 2_000_000
ORACLE_MAX_STATIONS = 3
ORACLE_PMF_FLOOR = 1e-18

MOMENT_TOL = 1e-9
TABLE_DIGITS = 6
VERSION = "0.1.0a1"
