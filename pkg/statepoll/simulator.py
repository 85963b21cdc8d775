""" Monte-Carlo simulation of the polling-instant chain

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = ["functional_residual", "simulate", "sim_config"]

import logging
from bisect import bisect_right
from collections import deque
from collections.abc import Callable, Iterable, Sequence
from functools import partial
from math import ceil, sqrt

import numpy as np
from more_itertools import chunked
from scipy.stats import linregress

from ._constants import (
    BOOTSTRAP_RESAMPLES,
    DEFAULT_DRIFT_THRESHOLD,
    DEFAULT_REPLICATIONS,
    DEFAULT_WARMUP,
    DRIFT_SEGMENTS,
    MIN_HORIZON,
    RNG_BLOCK,
)
from .errors import ModelValidationError, UnstableDetected
from .laws import resolve_batch_law, resolve_travel_laws
from .model import validate_model
from .types import (
    Estimate,
    FunctionalResidual,
    PollingModel,
    ReplicationRecord,
    SimConfig,
    SimulationEstimate,
)
from .utilities import readonly

logger = logging.getLogger(__name__)


def sim_config(
    horizon: int,
    warmup_fraction: float = DEFAULT_WARMUP,
    seed: int = 0,
    replications: int = DEFAULT_REPLICATIONS,
    travel_law: str = "deterministic",
    batch_law=None,
    drift_threshold: float = DEFAULT_DRIFT_THRESHOLD,
    strict: bool = False,
) -> SimConfig:
    """Build a checked simulation configuration"""
    if horizon < MIN_HORIZON:
        raise ValueError(f"horizon {horizon} is below {MIN_HORIZON} events")
    if not 0 <= warmup_fraction < 1:
        raise ValueError(f"warmup fraction {warmup_fraction} not in [0, 1)")
    if replications < 1:
        raise ValueError("at least one replication is needed")
    if not 0 <= seed < 2**64:
        raise ValueError(f"seed {seed} is not an unsigned 64-bit integer")
    return SimConfig(
        int(horizon),
        float(warmup_fraction),
        int(seed),
        int(replications),
        travel_law,
        batch_law,
        float(drift_threshold),
        strict,
    )


class _Draws:
    """Block-buffered scalar draws"""

    def __init__(self, draw: Callable[[int], np.ndarray]):
        self._draw = draw
        self._block: list = []
        self._next = 0

    def __call__(self):
        if self._next == len(self._block):
            self._block = self._draw(RNG_BLOCK).tolist()
            self._next = 0
        self._next += 1
        return self._block[self._next - 1]


def _router(rows: np.ndarray, uniform: _Draws) -> Callable[[int], int]:
    cumulative = [np.cumsum(row).tolist() for row in rows]
    last = len(rows) - 1

    def route(station: int) -> int:
        return min(bisect_right(cumulative[station], uniform()), last)

    return route


def _drift(totals: np.ndarray) -> float:
    """Slope, per polling event, of the segment means of the total queue"""
    size = ceil(len(totals) / DRIFT_SEGMENTS)
    segments = [np.mean(chunk) for chunk in chunked(totals, size)]
    if len(segments) < 2:
        return 0.0
    centers = size * np.arange(len(segments)) + size / 2
    return float(linregress(centers, segments).slope)


def _replicate(
    m: PollingModel,
    cfg: SimConfig,
    rng: np.random.Generator,
    index: int,
    z_points: np.ndarray | None = None,
) -> tuple[ReplicationRecord, np.ndarray | None, np.ndarray | None]:
    n = m.n
    laws, tilde_laws = resolve_travel_laws(m, cfg.travel_law)
    batch_law = resolve_batch_law(m, cfg.batch_law)
    uniform = _Draws(rng.random)
    gap = _Draws(rng.standard_exponential)
    batch = _Draws(partial(batch_law.sample, rng))
    travel = [_Draws(partial(law.sample, rng)) for law in laws]
    tilde_travel = [_Draws(partial(law.sample, rng)) for law in tilde_laws]
    route = _router(m.p, uniform)
    tilde_route = _router(m.p_tilde, uniform)
    scale = (1 / m.lambda_hat).tolist()

    queues: list[deque[float]] = [deque() for _ in range(n)]
    next_arrival = [gap() * scale[q] for q in range(n)]
    warm = int(cfg.horizon * cfg.warmup_fraction)
    polls = cfg.horizon - warm
    counts, empties, found = [0] * n, [0] * n, [0] * n
    length_sum = [0] * n
    cycle_sum, cycle_count = [0.0] * n, [0] * n
    last_visit: list[float | None] = [None] * n
    wait_sum, served = 0.0, 0
    totals = np.empty(polls, dtype=np.int64)
    generating = tilde_generating = None
    if z_points is not None:
        generating = np.zeros((len(z_points), n), dtype=complex)
        tilde_generating = np.zeros((len(z_points), n), dtype=complex)

    t, t_warm, s = 0.0, 0.0, 0
    for event in range(cfg.horizon):
        for q in range(n):
            while next_arrival[q] <= t:
                queues[q].extend([next_arrival[q]] * batch())
                next_arrival[q] += gap() * scale[q]
        length = len(queues[s])
        if event >= warm:
            if event == warm:
                t_warm = t
            lengths = [len(queue) for queue in queues]
            counts[s] += 1
            found[s] += length
            if length == 0:
                empties[s] += 1
            for q in range(n):
                length_sum[q] += lengths[q]
            totals[event - warm] = sum(lengths)
            if last_visit[s] is not None:
                cycle_sum[s] += t - last_visit[s]
                cycle_count[s] += 1
            if z_points is not None:
                powers = np.prod(z_points ** np.array(lengths), axis=1)
                generating[:, s] += powers
                if length == 0:
                    tilde_generating[:, s] += powers
        last_visit[s] = t
        if length:
            epoch = queues[s].popleft()
            if event >= warm:
                wait_sum += t - epoch
                served += 1
            t += travel[s]()
            s = route(s)
        else:
            t += tilde_travel[s]()
            s = tilde_route(s)

    counts_arr = np.array(counts, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        record = ReplicationRecord(
            index,
            polls,
            readonly(counts_arr / polls),
            readonly(np.array(empties) / polls),
            readonly(np.array(empties) / counts_arr),
            readonly(np.array(found) / counts_arr),
            readonly(np.array(length_sum) / polls),
            wait_sum / served if served else float("nan"),
            readonly(np.array(cycle_sum) / np.array(cycle_count)),
            (t - t_warm) / polls,
            _drift(totals),
        )
    if z_points is None:
        return record, None, None
    return record, generating / polls, tilde_generating / polls


def _streams(cfg: SimConfig, extra: int = 0) -> list[np.random.Generator]:
    children = np.random.SeedSequence(cfg.seed).spawn(
        cfg.replications + extra
    )
    return [np.random.default_rng(child) for child in children]


def _estimate(values: Sequence) -> Estimate:
    data = np.array(values, dtype=float)
    mean = data.mean(axis=0)
    if len(data) < 2:
        se = np.full_like(mean, np.nan)
    else:
        se = data.std(axis=0, ddof=1) / sqrt(len(data))
    if data.ndim == 1:
        return Estimate(float(mean), float(se))
    return Estimate(readonly(mean), readonly(se))


def _require_valid(m: PollingModel):
    if violations := validate_model(m):
        raise ModelValidationError(violations)


def simulate(m: PollingModel, cfg: SimConfig) -> SimulationEstimate:
    """Estimate the stationary quantities over independent replications

    Each replication draws from its own stream spawned from the seed.
    A total queue length growing faster than `cfg.drift_threshold`
    per polling event marks the run unstable; with `cfg.strict` this
    raises UnstableDetected carrying the estimate.
    """
    _require_valid(m)
    records = tuple(
        _replicate(m, cfg, rng, index)[0]
        for index, rng in enumerate(_streams(cfg))
    )
    drift = float(np.mean([r.drift for r in records]))
    estimate = SimulationEstimate(
        *(
            _estimate([getattr(r, name) for r in records])
            for name in (
                "f",
                "f_tilde",
                "empty_probability",
                "queue_at_polling",
                "queue_mean",
                "wait",
                "cycle",
                "tau_bar",
            )
        ),
        replications=records,
        unstable=drift > cfg.drift_threshold,
        drift=drift,
    )
    if estimate.unstable:
        logger.warning(
            "total queue length drifts by %.4g per polling event", drift
        )
        if cfg.strict:
            raise UnstableDetected(estimate, drift)
    return estimate


def functional_residual(
    m: PollingModel,
    cfg: SimConfig,
    z_points: Iterable[Sequence[complex]],
    permutation: Sequence[int] | None = None,
) -> tuple[FunctionalResidual, ...]:
    """Empirical residual of the generating-function balance

    For each z the simulated F(z) and F~(z) are plugged into
    [I - A Delta(z)] F(z) - [A~(z) - A Delta(z)] F~(z), whose exact
    value is zero. `permutation` relabels the estimates first, which
    breaks the balance for asymmetric models.
    """
    _require_valid(m)
    n = m.n
    z_all = np.array(list(z_points), dtype=complex).reshape(-1, n)
    if (np.abs(z_all) > 1 + 1e-12).any() or (z_all == 0).any():
        raise ValueError("z points must lie in the punctured unit polydisc")
    laws, tilde_laws = resolve_travel_laws(m, cfg.travel_law)
    batch_law = resolve_batch_law(m, cfg.batch_law)

    runs = [
        _replicate(m, cfg, rng, index, z_all)
        for index, rng in enumerate(_streams(cfg))
    ]
    generating = np.array([run[1] for run in runs])
    tilde_generating = np.array([run[2] for run in runs])
    if permutation is not None:
        generating = generating[:, :, list(permutation)]
        tilde_generating = tilde_generating[:, :, list(permutation)]

    resample = _streams(cfg, extra=1)[-1].integers(
        0, cfg.replications, size=(BOOTSTRAP_RESAMPLES, cfg.replications)
    )
    results = []
    for k, z in enumerate(z_all):
        exponent = np.sum(
            m.lambda_hat * (1 - np.array([batch_law.pgf(v) for v in z]))
        )
        a = np.array([law.laplace(exponent) for law in laws])
        a_tilde = np.array([law.laplace(exponent) for law in tilde_laws])
        a_mat = (m.p * a[:, None]).T
        a_delta = a_mat / z[None, :]
        a_tilde_mat = (m.p_tilde * a_tilde[:, None]).T
        vectors = (
            generating[:, k] @ (np.eye(n) - a_delta).T
            - tilde_generating[:, k] @ (a_tilde_mat - a_delta).T
        )
        center = vectors.mean(axis=0)
        boot = vectors[resample].mean(axis=1)
        spread = np.linalg.norm(boot - center, axis=1)
        results.append(
            FunctionalResidual(
                readonly(z.copy()),
                float(np.linalg.norm(center)),
                float(np.sqrt(np.mean(spread**2))),
                readonly(center),
            )
        )
    return tuple(results)
