""" Exact stationary law of a truncated polling chain

Copyright (c) 2021 IdmFoundInHim, under MIT License

The chain (S, X) is built with every queue capped at `cap`. Arrivals
that would push a queue past the cap are dropped, and the stationary
probability of dropping anything is reported as the error budget.
"""
__all__ = ["truncated_chain_oracle"]

import logging
from math import ceil, log

import numpy as np
import scipy.sparse
import scipy.sparse.linalg
from scipy.special import gammaln
from scipy.stats import poisson

from ._constants import (
    ORACLE_MAX_STATES,
    ORACLE_MAX_STATIONS,
    ORACLE_PMF_FLOOR,
)
from .errors import (
    ModelValidationError,
    SingularSystem,
    StateSpaceTooLarge,
    UnsupportedLaw,
)
from .laws import (
    Deterministic,
    Exponential,
    FixedBatch,
    TwoPoint,
    TravelLaw,
    resolve_batch_law,
    resolve_travel_laws,
)
from .model import validate_model
from .types import OracleResult, PollingModel
from .utilities import readonly

logger = logging.getLogger(__name__)

_EXTENDED_CELLS = 4_000_000


def _fold(grid: np.ndarray, nmax: int) -> np.ndarray:
    """Lump every count of nmax or more into the nmax bin"""
    for axis in range(grid.ndim):
        head = np.take(grid, range(nmax), axis=axis)
        tail = np.take(grid, range(nmax, grid.shape[axis]), axis=axis)
        grid = np.concatenate(
            [head, tail.sum(axis=axis, keepdims=True)], axis=axis
        )
    return grid


def _poisson_grid(rates: np.ndarray, t: float, nmax: int) -> np.ndarray:
    grid = np.ones(())
    k = np.arange(nmax)
    for rate in rates:
        marginal = np.append(
            poisson.pmf(k, rate * t), poisson.sf(nmax - 1, rate * t)
        )
        grid = np.multiply.outer(grid, marginal)
    return grid


def _exponential_grid(
    rates: np.ndarray, mean: float, nmax: int
) -> np.ndarray:
    """Joint batch counts over an exponential interval

    P(n) = K! / prod n_q! * prod (l_q m)^n_q / (1 + L m)^(K + 1) with
    K = sum n_q; the total K is geometric, which bounds the grid.
    """
    n = len(rates)
    total = float(rates.sum() * mean)
    ratio = total / (1 + total)
    limit = max(nmax, ceil(log(ORACLE_PMF_FLOOR) / log(ratio)))
    limit = max(nmax, min(limit, int(_EXTENDED_CELLS ** (1 / n)) - 1))
    counts = np.indices((limit + 1,) * n)
    size = counts.sum(axis=0)
    log_pmf = (
        gammaln(size + 1)
        - gammaln(counts + 1).sum(axis=0)
        + np.tensordot(np.log(rates * mean), counts, axes=1)
        - (size + 1) * np.log1p(total)
    )
    grid = _fold(np.exp(log_pmf), nmax)
    grid[(nmax,) * n] += max(0.0, 1 - grid.sum())
    return grid


def _count_grid(
    law: TravelLaw, rates: np.ndarray, nmax: int
) -> np.ndarray:
    """Batch counts per station over one interval, capped at nmax"""
    if isinstance(law, Deterministic):
        grid = _poisson_grid(rates, law.mean, nmax)
    elif isinstance(law, Exponential):
        grid = _exponential_grid(rates, law.mean, nmax)
    elif isinstance(law, TwoPoint):
        low, high, p_high = law.support
        grid = (1 - p_high) * _poisson_grid(
            rates, low, nmax
        ) + p_high * _poisson_grid(rates, high, nmax)
    else:
        raise UnsupportedLaw(f"no batch-count law for {law}")
    small = grid < ORACLE_PMF_FLOOR
    grid[(nmax,) * len(rates)] += grid[small].sum()
    grid[small] = 0.0
    return grid


def truncated_chain_oracle(
    m: PollingModel, cap: int, travel_law: str = "deterministic"
) -> OracleResult:
    """Stationary marginals of (S, X) with queues capped at `cap`

    The tail bound is the stationary probability that a transition
    loses arrivals to the cap; marginals are within it of the
    untruncated ones.
    """
    if violations := validate_model(m):
        raise ModelValidationError(violations)
    n = m.n
    if n > ORACLE_MAX_STATIONS:
        raise ValueError(
            f"the oracle handles at most {ORACLE_MAX_STATIONS} stations"
        )
    if cap < 1:
        raise ValueError(f"queue cap {cap} must be positive")
    per_station = (cap + 1) ** n
    states = n * per_station
    if states > ORACLE_MAX_STATES:
        raise StateSpaceTooLarge(states, ORACLE_MAX_STATES)
    batch = resolve_batch_law(m)
    if not isinstance(batch, FixedBatch):
        raise UnsupportedLaw(
            f"the oracle needs a fixed batch size, not {batch}"
        )
    laws, tilde_laws = resolve_travel_laws(m, travel_law)

    nmax = ceil(cap / batch.size)
    shape = (cap + 1,) * n
    x = np.indices(shape).reshape(n, -1).T
    rows, cols, probs = [], [], []
    overflow = np.zeros((n, per_station))
    for s in range(n):
        for served, law, routing in (
            (True, laws[s], m.p[s]),
            (False, tilde_laws[s], m.p_tilde[s]),
        ):
            origin = np.flatnonzero((x[:, s] > 0) == served)
            if not origin.size:
                continue
            grid = _count_grid(law, m.lambda_hat, nmax)
            support = np.argwhere(grid > 0)
            weight = grid[tuple(support.T)]
            start = x[origin]
            if served:
                start = start - np.eye(n, dtype=int)[s]
            raw = start[:, None, :] + batch.size * support[None, :, :]
            lost = ((raw > cap) | (support[None] == nmax)).any(axis=2)
            overflow[s, origin] = lost @ weight
            target = np.ravel_multi_index(
                np.minimum(raw, cap).reshape(-1, n).T, shape
            )
            mass = np.tile(weight, len(origin))
            source = np.repeat(s * per_station + origin, len(weight))
            for step in np.flatnonzero(routing):
                rows.append(source)
                cols.append(step * per_station + target)
                probs.append(routing[step] * mass)

    transitions = scipy.sparse.coo_matrix(
        (np.concatenate(probs), (np.concatenate(rows), np.concatenate(cols))),
        shape=(states, states),
    ).tocsr()
    system = scipy.sparse.vstack(
        [
            (transitions.T - scipy.sparse.identity(states)).tocsr()[:-1],
            scipy.sparse.csr_matrix(np.ones((1, states))),
        ]
    ).tocsc()
    rhs = np.zeros(states)
    rhs[-1] = 1.0
    pi = scipy.sparse.linalg.spsolve(system, rhs)
    if not np.isfinite(pi).all():
        raise SingularSystem("truncated chain has no unique stationary law")
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()

    by_station = pi.reshape(n, per_station)
    f = by_station.sum(axis=1)
    f_tilde = np.array([by_station[s, x[:, s] == 0].sum() for s in range(n)])
    with np.errstate(divide="ignore", invalid="ignore"):
        found = np.array([by_station[s] @ x[:, s] for s in range(n)]) / f
    tail_bound = float(np.sum(by_station * overflow))
    logger.info(
        "oracle solved %d states, tail bound %.3g", states, tail_bound
    )
    return OracleResult(
        readonly(f),
        readonly(f_tilde),
        readonly(found),
        readonly(by_station.sum(axis=0) @ x),
        tail_bound,
        states,
    )
