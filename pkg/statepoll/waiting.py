""" Mean waiting times under compound Poisson arrivals

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = [
    "compound_poisson_moments",
    "head_of_line_defect",
    "is_pure_shift",
    "mean_wait",
    "mean_wait_bernoulli",
    "mean_wait_exhaustive",
    "mean_wait_state_independent",
    "profile_from_model",
    "profile_from_spec",
    "spec_from_model",
    "strategy_compare",
]

import logging
from collections.abc import Iterable, Mapping, Sequence
from math import gcd

import numpy as np

from ._constants import STOCHASTIC_TOL
from .errors import AssumptionViolated, MissingMoments, UnstableRegime
from .symmetric import (
    circulant_eigenvalues,
    eigen_sum,
    empty_probability,
    mean_queue_at_polling,
    real_part,
    routing_distances,
    symmetric_profile,
)
from .types import (
    Batch,
    CompoundPoissonSpec,
    MomentFields,
    PollingModel,
    StrategyRow,
    StrategyTable,
    SymmetricProfile,
)
from .utilities import as_vector, readonly

logger = logging.getLogger(__name__)


def compound_poisson_moments(
    spec: CompoundPoissonSpec, n: int
) -> MomentFields:
    """Mean and second factorial moments of arrivals between polls

    Only the same-station entry (d = N) carries the batch term.
    """
    lam = spec.lam
    batch = spec.lambda_hat * (spec.b2 - spec.b)
    alpha2 = np.full(n, lam**2 * spec.tau2)
    alpha2[-1] += batch * spec.tau
    alpha_tilde2 = np.full(n, lam**2 * spec.tau_tilde2)
    alpha_tilde2[-1] += batch * spec.tau_tilde
    return MomentFields(
        lam * spec.tau,
        lam * spec.tau_tilde,
        readonly(alpha2),
        readonly(alpha_tilde2),
    )


def spec_from_model(
    m: PollingModel, switchover: Mapping[str, float] | None = None
) -> CompoundPoissonSpec:
    """Scalars of a symmetric model, taken at station 1

    `switchover` may carry w, w2, sigma and sigma2 for the strategy
    specializations.
    """
    for field in ("tau2", "tau_tilde2"):
        if getattr(m, field) is None:
            raise MissingMoments(field, "the waiting-time analysis")
    batch = m.batch or Batch()
    extra = {}
    if switchover is not None:
        try:
            extra = {k: float(switchover[k]) for k in ("w", "w2", "sigma")}
            extra["sigma2"] = float(switchover["sigma2"])
        except KeyError as err:
            raise MissingMoments(
                f"switchover.{err.args[0]}", "the strategy formulas"
            ) from err
    return CompoundPoissonSpec(
        float(m.lam[0]) / batch.mean,
        float(m.tau[0]),
        float(m.tau2[0]),  # type: ignore[index]
        float(m.tau_tilde[0]),
        float(m.tau_tilde2[0]),  # type: ignore[index]
        batch.mean,
        batch.second,
        **extra,
    )


def profile_from_spec(
    spec: CompoundPoissonSpec,
    p_dist: Iterable[float],
    p_tilde_dist: Iterable[float],
) -> SymmetricProfile:
    p_dist = as_vector(p_dist)
    n = len(p_dist)
    return symmetric_profile(
        n, p_dist, p_tilde_dist, compound_poisson_moments(spec, n)
    )


def profile_from_model(m: PollingModel) -> SymmetricProfile:
    return profile_from_spec(
        spec_from_model(m),
        routing_distances(m.p),
        routing_distances(m.p_tilde),
    )


def _stable(n: int, lam: float, tau: float) -> float:
    stable = 1 - n * lam * tau
    if stable <= 0:
        raise UnstableRegime(n * lam * tau)
    return stable


def mean_wait(
    spec: CompoundPoissonSpec,
    mu: Sequence[complex],
    mu_tilde: Sequence[complex],
) -> float:
    """Mean stationary waiting time of a customer

    `mu` and `mu_tilde` are the eigenvalues of P and P-tilde numbered
    1..N, the unit eigenvalue last.
    """
    mu = np.asarray(mu, dtype=complex)
    mu_tilde = np.asarray(mu_tilde, dtype=complex)
    n = len(mu)
    stable = _stable(n, spec.lam, spec.tau)
    cycle = eigen_sum(mu_tilde)
    cross = real_part(
        np.sum((mu[:-1] - mu_tilde[:-1]) / (1 - mu_tilde[:-1]))
    )
    batch = (spec.b2 - spec.b) / (2 * spec.b)
    return (
        spec.tau_tilde / stable * cycle
        + n * spec.lam * spec.tau2 / (2 * stable)
        + spec.tau_tilde2 / (2 * spec.tau_tilde)
        + batch
        * (
            (spec.tau + (n - 1) * spec.tau_tilde) / stable
            - spec.tau_tilde / stable * cross
        )
    )


def _switchover(spec: CompoundPoissonSpec) -> tuple[float, ...]:
    if None in (spec.w, spec.w2, spec.sigma, spec.sigma2):
        raise MissingMoments("switchover", "the strategy formulas")
    return spec.w, spec.w2, spec.sigma, spec.sigma2  # type: ignore


def mean_wait_state_independent(
    spec: CompoundPoissonSpec, mu: Sequence[complex]
) -> float:
    """Mean wait of 1-limited Markovian polling with P = P-tilde,
    switchover w after every visit and service sigma"""
    w, w2, sigma, sigma2 = _switchover(spec)
    n = len(mu)
    stable = _stable(n, spec.lam, w + sigma)
    return (
        w / stable * eigen_sum(mu)
        + n * spec.lam * (w2 + 2 * w * sigma + sigma2) / (2 * stable)
        + w2 / (2 * w)
        + (spec.b2 - spec.b) / (2 * spec.b) * (n * w + sigma) / stable
    )


def _require_poisson(spec: CompoundPoissonSpec, what: str):
    if abs(spec.b2 - spec.b) > STOCHASTIC_TOL:
        raise AssumptionViolated(f"{what} needs single (Poisson) arrivals")


def mean_wait_bernoulli(
    spec: CompoundPoissonSpec, p_tilde_dist: Iterable[float], pi: float
) -> float:
    """Mean wait when the server leaves a served station with
    probability `pi` and otherwise serves it again at no switchover"""
    if not 0 <= pi <= 1:
        raise ValueError(f"exit probability {pi} outside [0, 1]")
    _require_poisson(spec, "the Bernoulli formula")
    w, w2, sigma, sigma2 = _switchover(spec)
    mu_tilde = circulant_eigenvalues(as_vector(p_tilde_dist))
    n = len(mu_tilde)
    stable = _stable(n, spec.lam, pi * w + sigma)
    second = pi * w2 + 2 * pi * w * sigma + sigma2
    return (
        w / stable * eigen_sum(mu_tilde)
        + n * spec.lam * second / (2 * stable)
        + w2 / (2 * w)
    )


def mean_wait_exhaustive(
    spec: CompoundPoissonSpec, p_tilde_dist: Iterable[float]
) -> float:
    """Mean wait when each visit empties the station"""
    _require_poisson(spec, "the exhaustive formula")
    w, w2, sigma, sigma2 = _switchover(spec)
    mu_tilde = circulant_eigenvalues(as_vector(p_tilde_dist))
    n = len(mu_tilde)
    stable = _stable(n, spec.lam, sigma)
    return (
        w / stable * eigen_sum(mu_tilde)
        + n * spec.lam * sigma2 / (2 * stable)
        + w2 / (2 * w)
    )


def head_of_line_defect(
    spec: CompoundPoissonSpec,
    p_dist: Iterable[float],
    p_tilde_dist: Iterable[float],
) -> float:
    """Relative gap between E[X_m | S=m, X_m>0] and 1 + lambda E[W]
    plus the mean number of batch companions ahead"""
    prof = profile_from_spec(spec, p_dist, p_tilde_dist)
    found = mean_queue_at_polling(prof) / (1 - empty_probability(prof))
    wait = mean_wait(spec, prof.mu, prof.mu_tilde)
    expected = 1 + spec.lam * wait + (spec.b2 - spec.b) / (2 * spec.b)
    return abs(found - expected) / max(abs(expected), 1.0)


def is_pure_shift(p_dist: Iterable[float]) -> bool:
    """True for routing by a fixed step co-prime with N"""
    p_dist = np.asarray(p_dist, dtype=float)
    n = len(p_dist)
    step = int(np.argmax(p_dist)) + 1
    return (
        abs(p_dist[step - 1] - 1) <= STOCHASTIC_TOL
        and step < n
        and gcd(step, n) == 1
    )


def strategy_compare(
    spec: CompoundPoissonSpec,
    candidates: Mapping[str, Iterable[float]],
) -> StrategyTable:
    """Rank Markovian polling strategies (P = P-tilde) by mean wait"""
    rows = []
    for name, dist in candidates.items():
        p_dist = as_vector(dist)
        mu = circulant_eigenvalues(p_dist)
        rows.append(
            StrategyRow(
                name,
                p_dist,
                mean_wait(spec, mu, mu),
                eigen_sum(mu),
                is_pure_shift(p_dist),
            )
        )
    rows.sort(key=lambda r: (r.mean_wait, r.name))
    cyclic = [r.mean_wait for r in rows if r.cyclic]
    minimal = None
    if cyclic:
        minimal = min(cyclic) <= rows[0].mean_wait + 1e-12
        if not minimal:
            logger.warning("a cyclic strategy is not the fastest")
    return StrategyTable(tuple(rows), minimal)
