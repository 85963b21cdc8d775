""" Stationary law of the server position

Copyright (c) 2021 IdmFoundInHim, under MIT License

The unknowns are the polling probabilities F and the mean interval
tau_bar between two polling instants. Stations whose index is in a
`saturated` set always serve, so they route by P and take tau; every
other station may be found empty.
"""
__all__ = [
    "flow_residuals",
    "necessary_conditions",
    "solve_flow_system",
    "solve_server_distribution",
]

import logging
from collections.abc import Set

import numpy as np
import scipy.linalg

from ._constants import (
    CONDITION_WARN,
    RHO_DEGENERATE_TOL,
    SOLUTION_TOL,
    STRICT_MARGIN,
)
from .errors import (
    DegenerateTraffic,
    MultipleEssentialClasses,
    SingularSystem,
)
from .model import (
    arrival_matrices,
    compatibility_check,
    essential_classes,
    traffic_summary,
)
from .types import (
    Condition,
    ConditionReport,
    PollingModel,
    ServerDistribution,
)
from .utilities import readonly

logger = logging.getLogger(__name__)


def _solve_dense(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        condition = np.linalg.cond(matrix)
    except np.linalg.LinAlgError as err:
        raise SingularSystem(f"flow system is not solvable ({err})") from err
    if not np.isfinite(condition) or condition > 1 / np.finfo(float).eps:
        raise SingularSystem(
            f"flow system is rank-deficient (condition {condition:.3g})"
        )
    if condition > CONDITION_WARN:
        logger.warning("flow system condition number %.3g", condition)
    try:
        solution = scipy.linalg.solve(matrix, rhs)
    except (scipy.linalg.LinAlgError, ValueError) as err:
        raise SingularSystem(str(err)) from err
    residual = np.max(np.abs(matrix @ solution - rhs))
    if residual > SOLUTION_TOL:
        logger.warning("flow system residual %.3g", residual)
    return solution


def solve_flow_system(
    m: PollingModel, saturated: Set[int] = frozenset()
) -> tuple[np.ndarray, float, float]:
    """Solve the N+1 flow equations with `saturated` queues held busy

    Returns the stationary server position, the mean polling interval
    and the traffic index of the unsaturated stations. With nothing
    saturated this is the system of the original polling model.
    """
    n = m.n
    busy = np.zeros(n, dtype=bool)
    busy[list(saturated)] = True
    routing = np.where(busy[:, None], m.p, m.p_tilde)
    free_lam = np.where(busy, 0.0, m.lam)
    drift = free_lam @ (m.p - m.p_tilde)
    rho_hat = float(free_lam @ (m.tau - m.tau_tilde))
    if abs(rho_hat - 1) <= RHO_DEGENERATE_TOL:
        where = "{" + ",".join(str(s + 1) for s in sorted(saturated)) + "}"
        raise DegenerateTraffic(rho_hat, where if saturated else "")
    interval = np.where(busy, m.tau, m.tau_tilde)

    matrix = np.zeros((n + 1, n + 1))
    matrix[:n, :n] = np.eye(n) - routing.T
    matrix[:n, n] = -drift
    # one balance row is redundant; normalization replaces it
    matrix[n - 1, :n] = 1.0
    matrix[n - 1, n] = 0.0
    matrix[n, :n] = -interval
    matrix[n, n] = 1 - rho_hat
    rhs = np.zeros(n + 1)
    rhs[n - 1] = 1.0

    solution = _solve_dense(matrix, rhs)
    return solution[:n], float(solution[n]), rho_hat


def solve_server_distribution(m: PollingModel) -> ServerDistribution:
    """F, F-tilde, tau_bar and mean cycle times of a polling model

    Raises DegenerateTraffic when rho_hat is 1 and
    MultipleEssentialClasses when P-tilde is not uniquely absorbing;
    both are checked before anything is solved.
    """
    traffic = traffic_summary(m)
    if traffic.degenerate:
        raise DegenerateTraffic(traffic.rho_hat)
    classes = essential_classes(m.p_tilde)
    if len(classes) > 1:
        residuals = compatibility_check(m, classes)
        raise MultipleEssentialClasses(
            [sorted(c) for c in classes], residuals
        )

    f, tau_bar, rho_hat = solve_flow_system(m)
    f_tilde = f - m.lam * tau_bar
    if (f_tilde < 0).any():
        logger.info(
            "negative F-tilde at stations %s",
            [int(j) + 1 for j in np.flatnonzero(f_tilde < 0)],
        )
    psi = f / tau_bar
    defect = abs(psi @ m.tau_tilde - (1 - rho_hat))
    if defect > SOLUTION_TOL:
        logger.warning("psi normalization defect %.3g", defect)
    with np.errstate(divide="ignore"):
        cycle = np.where(f > 0, tau_bar / np.where(f > 0, f, 1), np.inf)
    return ServerDistribution(
        readonly(f), readonly(f_tilde), tau_bar, readonly(cycle), rho_hat
    )


def flow_residuals(
    m: PollingModel, d: ServerDistribution
) -> tuple[float, float]:
    """Max-norm residuals of the probability and flux balances"""
    eye = np.eye(m.n)
    arrivals = arrival_matrices(m)
    proba = d.f @ (eye - m.p) - d.f_tilde @ (m.p_tilde - m.p)
    flux = d.f @ (eye - arrivals.a_mat) - d.f_tilde @ (
        eye - arrivals.a_mat + arrivals.a_tilde_mat
    )
    return float(np.max(np.abs(proba))), float(np.max(np.abs(flux)))


def necessary_conditions(
    m: PollingModel, d: ServerDistribution
) -> ConditionReport:
    """Margins of rho_hat < 1, lambda_i tau_bar < F_i and the load bound

    A condition passes only when its margin exceeds 1e-9.
    """
    margins = [("rho_hat < 1", 1 - d.rho_hat)]
    margins.extend(
        (f"lambda_{i + 1} tau_bar < F_{i + 1}", float(d.f_tilde[i]))
        for i in range(m.n)
    )
    margins.append(("1 - sum lambda tau > 0", 1 - float(m.lam @ m.tau)))
    return ConditionReport(
        tuple(
            Condition(name, margin > STRICT_MARGIN, margin)
            for name, margin in margins
        )
    )
