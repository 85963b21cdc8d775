""" Record types for static type checking and immutable results

Copyright (c) 2021 IdmFoundInHim, under MIT License

Stations are stored 0-based; everything rendered for a person is 1-based.
Arrays held by these records are marked read-only by their builders.
"""
from __future__ import annotations

__all__ = [
    "ArrivalMatrices",
    "AssumptionCheck",
    "AssumptionReport",
    "Batch",
    "CirculantBasis",
    "Classification",
    "ClassificationResult",
    "CompoundPoissonSpec",
    "Condition",
    "ConditionReport",
    "Estimate",
    "Face",
    "FaceDirection",
    "FaceValue",
    "FaceVerdict",
    "FunctionalResidual",
    "InducedChainSolution",
    "LyapunovCertificate",
    "MomentFields",
    "OracleResult",
    "PollingModel",
    "ReplicationRecord",
    "RunManifest",
    "ServerDistribution",
    "SimConfig",
    "SimulationEstimate",
    "StrategyRow",
    "StrategyTable",
    "SweepResult",
    "SymmetricProfile",
    "TrafficSummary",
    "Violation",
]

from enum import Enum
from typing import Any, NamedTuple

import numpy as np
from frozendict import frozendict

from .errors import MissingMoments


class Batch(NamedTuple):
    """Batch-size law summary: mean b and second moment b^(2)"""

    mean: float = 1.0
    second: float = 1.0


class PollingModel(NamedTuple):
    n: int
    p: np.ndarray
    p_tilde: np.ndarray
    lam: np.ndarray
    tau: np.ndarray
    tau_tilde: np.ndarray
    tau2: np.ndarray | None = None
    tau_tilde2: np.ndarray | None = None
    batch: Batch | None = None

    @property
    def lambda_hat(self) -> np.ndarray:
        """Per-station rate of batch epochs"""
        return self.lam / (self.batch.mean if self.batch else 1.0)


class Violation(NamedTuple):
    path: str
    message: str
    defect: float

    def __str__(self) -> str:
        return f"{self.path}: {self.message} (defect {self.defect:.3g})"


class TrafficSummary(NamedTuple):
    rho_hat: float
    load_sum: float
    degenerate: bool


class ArrivalMatrices(NamedTuple):
    a_mat: np.ndarray
    a_tilde_mat: np.ndarray


class ServerDistribution(NamedTuple):
    f: np.ndarray
    f_tilde: np.ndarray
    tau_bar: float
    cycle: np.ndarray
    rho_hat: float


class Condition(NamedTuple):
    name: str
    passed: bool
    margin: float


class ConditionReport(NamedTuple):
    conditions: tuple[Condition, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.conditions)


class Face(NamedTuple):
    """Set of saturated stations (0-based)"""

    stations: frozenset[int]

    def __str__(self) -> str:
        return "{" + ",".join(str(s + 1) for s in sorted(self.stations)) + "}"

    def with_station(self, station: int) -> Face:
        return Face(self.stations | {station})


class FaceVerdict(Enum):
    ERGODIC = "ergodic"
    NON_ERGODIC = "non-ergodic"
    CONJECTURED_ERGODIC = "conjectured-ergodic"
    UNDETERMINED = "undetermined"


class FaceDirection(Enum):
    INGOING = "ingoing"
    OUTGOING = "outgoing"
    NEUTRAL = "neutral"


class InducedChainSolution(NamedTuple):
    face: Face
    pi: np.ndarray
    rho_hat_l: float
    tau_bar_l: float
    v: np.ndarray
    ergodic_flag: FaceVerdict


class FaceValue(NamedTuple):
    total: float
    coordinates: frozendict[int, float]


class LyapunovCertificate(NamedTuple):
    u: np.ndarray
    epsilon: float
    face_values: frozendict[Face, FaceValue]
    valid: bool
    conjecture_based: bool = False


class SweepResult(NamedTuple):
    order: tuple[int, ...]
    trajectory: tuple[tuple[Face, float], ...]
    verdict: Classification
    notes: tuple[str, ...] = ()


class Classification(Enum):
    ERGODIC = "Ergodic"
    TRANSIENT = "Transient"
    NOT_ERGODIC = "NotErgodic"
    INCONCLUSIVE = "Inconclusive"


class ClassificationResult(NamedTuple):
    verdict: Classification
    conjecture_based: bool
    distribution: ServerDistribution
    conditions: ConditionReport
    faces: frozendict[Face, InducedChainSolution] = frozendict()
    certificate: LyapunovCertificate | None = None
    sweep: SweepResult | None = None
    notes: tuple[str, ...] = ()


class CirculantBasis(NamedTuple):
    omega: np.ndarray
    v: np.ndarray


class AssumptionCheck(NamedTuple):
    name: str
    passed: bool
    defect: float
    detail: str = ""


class AssumptionReport(NamedTuple):
    a1: AssumptionCheck
    a2: AssumptionCheck
    a3: AssumptionCheck

    @property
    def passed(self) -> bool:
        return self.a1.passed and self.a2.passed and self.a3.passed


class SymmetricProfile(NamedTuple):
    """Distance-indexed data of a rotationally symmetric system

    Vectors indexed by distance or eigenvalue number k hold entry k at
    position k - 1, so position N - 1 holds the d = N (k = N) term.
    `alpha_bar` and `alpha_bar2` are None outside the stable region.
    """

    n: int
    p_dist: np.ndarray
    p_tilde_dist: np.ndarray
    alpha: float
    alpha_tilde: float
    alpha2: np.ndarray
    alpha_tilde2: np.ndarray
    mu: np.ndarray
    mu_tilde: np.ndarray
    alpha_bar: float | None = None
    alpha_bar2: np.ndarray | None = None


class MomentFields(NamedTuple):
    alpha: float
    alpha_tilde: float
    alpha2: np.ndarray
    alpha_tilde2: np.ndarray


class CompoundPoissonSpec(NamedTuple):
    lambda_hat: float
    tau: float
    tau2: float
    tau_tilde: float
    tau_tilde2: float
    b: float = 1.0
    b2: float = 1.0
    w: float | None = None
    w2: float | None = None
    sigma: float | None = None
    sigma2: float | None = None

    @property
    def lam(self) -> float:
        return self.lambda_hat * self.b

    @classmethod
    def state_independent(
        cls,
        lambda_hat: float,
        w: float,
        w2: float,
        sigma: float,
        sigma2: float,
        b: float = 1.0,
        b2: float = 1.0,
    ) -> CompoundPoissonSpec:
        """Switchover w then service sigma after a service, w alone
        after an empty station"""
        return cls(
            lambda_hat,
            w + sigma,
            w2 + 2 * w * sigma + sigma2,
            w,
            w2,
            b,
            b2,
            w,
            w2,
            sigma,
            sigma2,
        )

    def bernoulli(self, pi: float) -> CompoundPoissonSpec:
        """Inter-poll moments when the server stays with probability
        1 - pi after a service and the self-switchover is zero"""
        w, w2, sigma, sigma2 = _require_switchover(self)
        return self._replace(
            tau=pi * w + sigma,
            tau2=pi * w2 + 2 * pi * w * sigma + sigma2,
            tau_tilde=w,
            tau_tilde2=w2,
        )


def _require_switchover(
    spec: CompoundPoissonSpec,
) -> tuple[float, float, float, float]:
    if None in (spec.w, spec.w2, spec.sigma, spec.sigma2):
        raise MissingMoments("switchover", "the Bernoulli composition")
    return (
        float(spec.w),  # type: ignore[arg-type]
        float(spec.w2),  # type: ignore[arg-type]
        float(spec.sigma),  # type: ignore[arg-type]
        float(spec.sigma2),  # type: ignore[arg-type]
    )


class StrategyRow(NamedTuple):
    name: str
    p_dist: np.ndarray
    mean_wait: float
    eigen_sum: float
    cyclic: bool


class StrategyTable(NamedTuple):
    rows: tuple[StrategyRow, ...]
    cyclic_is_minimal: bool | None


class SimConfig(NamedTuple):
    horizon: int
    warmup_fraction: float = 0.1
    seed: int = 0
    replications: int = 10
    travel_law: str = "deterministic"
    batch_law: Any = None
    drift_threshold: float = 0.01
    strict: bool = False


class Estimate(NamedTuple):
    mean: Any
    se: Any


class ReplicationRecord(NamedTuple):
    index: int
    events: int
    f: np.ndarray
    f_tilde: np.ndarray
    empty_probability: np.ndarray
    queue_at_polling: np.ndarray
    queue_mean: np.ndarray
    wait: float
    cycle: np.ndarray
    tau_bar: float
    drift: float


class SimulationEstimate(NamedTuple):
    f: Estimate
    f_tilde: Estimate
    empty_probability: Estimate
    queue_at_polling: Estimate
    queue_mean: Estimate
    wait: Estimate
    cycle: Estimate
    tau_bar: Estimate
    replications: tuple[ReplicationRecord, ...]
    unstable: bool
    drift: float

    def rows(self) -> tuple[list[str], list[list[Any]]]:
        """Header and one row per replication, in a fixed column order"""
        n = len(self.f.mean)
        vectors = (
            "f",
            "f_tilde",
            "empty_probability",
            "queue_at_polling",
            "queue_mean",
        )
        header = ["replication", "events"]
        for name in vectors:
            header.extend(f"{name}_{i + 1}" for i in range(n))
        header.append("wait")
        header.extend(f"cycle_{i + 1}" for i in range(n))
        header.extend(["tau_bar", "drift"])
        rows = []
        for rep in self.replications:
            row: list[Any] = [rep.index + 1, rep.events]
            for name in vectors:
                row.extend(float(v) for v in getattr(rep, name))
            row.append(rep.wait)
            row.extend(float(v) for v in rep.cycle)
            row.extend([rep.tau_bar, rep.drift])
            rows.append(row)
        return header, rows


class FunctionalResidual(NamedTuple):
    z: np.ndarray
    residual: float
    se: float
    vector: np.ndarray


class OracleResult(NamedTuple):
    f: np.ndarray
    f_tilde: np.ndarray
    queue_at_polling: np.ndarray
    queue_mean: np.ndarray
    tail_bound: float
    states: int


class RunManifest(NamedTuple):
    command: str
    path: str
    options: frozendict[str, Any]
    version: str
    seed: int | None = None
