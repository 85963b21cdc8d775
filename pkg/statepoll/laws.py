""" Travel-time and batch-size laws

Copyright (c) 2021 IdmFoundInHim, under MIT License

A travel law is the distribution of the time between two polling
instants; it is summarized elsewhere by its first two moments. Batch
laws describe how many customers arrive together.
"""
from __future__ import annotations

__all__ = [
    "Deterministic",
    "Exponential",
    "FixedBatch",
    "GeometricBatch",
    "TRAVEL_LAWS",
    "TwoPoint",
    "resolve_batch_law",
    "resolve_travel_laws",
]

from math import isclose, sqrt
from typing import NamedTuple, Union

import numpy as np
import scipy.stats

from ._constants import MOMENT_TOL
from .errors import MissingMoments, UnsupportedLaw
from .types import Batch, PollingModel


class Deterministic(NamedTuple):
    mean: float

    @property
    def second(self) -> float:
        return self.mean**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return np.full(size, self.mean)

    def laplace(self, s: complex) -> complex:
        """E[exp(-s T)]"""
        return np.exp(-s * self.mean)


class Exponential(NamedTuple):
    mean: float

    @property
    def second(self) -> float:
        return 2 * self.mean**2

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.exponential(self.mean, size)

    def laplace(self, s: complex) -> complex:
        return 1 / (1 + s * self.mean)


class TwoPoint(NamedTuple):
    """Two-valued law matching a mean and a second moment

    Uses the symmetric support mean +/- sd when it stays nonnegative,
    otherwise {0, second / mean}.
    """

    mean: float
    second: float

    @property
    def support(self) -> tuple[float, float, float]:
        """(low, high, probability of high)"""
        variance = self.second - self.mean**2
        if variance < -MOMENT_TOL * max(1.0, self.second) or self.mean <= 0:
            raise UnsupportedLaw(
                f"no two-point law with mean {self.mean} "
                f"and second moment {self.second}"
            )
        sd = sqrt(max(variance, 0.0))
        if self.mean >= sd:
            return self.mean - sd, self.mean + sd, 0.5
        return 0.0, self.second / self.mean, self.mean**2 / self.second

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        low, high, p_high = self.support
        return np.where(rng.random(size) < p_high, high, low)

    def laplace(self, s: complex) -> complex:
        low, high, p_high = self.support
        return (1 - p_high) * np.exp(-s * low) + p_high * np.exp(-s * high)


TravelLaw = Union[Deterministic, Exponential, TwoPoint]
TRAVEL_LAWS = ("deterministic", "exponential", "two-point")


class FixedBatch(NamedTuple):
    size: int = 1

    @property
    def moments(self) -> Batch:
        return Batch(float(self.size), float(self.size**2))

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return np.full(count, self.size, dtype=np.int64)

    def pmf(self, k: np.ndarray) -> np.ndarray:
        return (np.asarray(k) == self.size).astype(float)

    def pgf(self, z: complex) -> complex:
        return z**self.size


class GeometricBatch(NamedTuple):
    """Batch sizes 1, 2, ... with P(k) = p (1 - p)^(k - 1), p = 1/mean"""

    mean: float

    @property
    def moments(self) -> Batch:
        return Batch(self.mean, 2 * self.mean**2 - self.mean)

    def sample(self, rng: np.random.Generator, count: int) -> np.ndarray:
        return rng.geometric(1 / self.mean, count)

    def pmf(self, k: np.ndarray) -> np.ndarray:
        return scipy.stats.geom.pmf(k, 1 / self.mean)

    def pgf(self, z: complex) -> complex:
        p = 1 / self.mean
        return p * z / (1 - (1 - p) * z)


BatchLaw = Union[FixedBatch, GeometricBatch]


def _matching(kind: str, mean: float, second: float | None) -> TravelLaw:
    if kind == "deterministic":
        law: TravelLaw = Deterministic(mean)
    elif kind == "exponential":
        law = Exponential(mean)
    elif kind == "two-point":
        if second is None:
            raise MissingMoments("tau2", "the two-point travel law")
        law = TwoPoint(mean, second)
        _ = law.support  # raises when no such law exists
    else:
        raise UnsupportedLaw(f"unknown travel law '{kind}'")
    if second is not None and not isclose(
        law.second, second, rel_tol=MOMENT_TOL, abs_tol=MOMENT_TOL
    ):
        raise UnsupportedLaw(
            f"{kind} law with mean {mean:.6g} has second moment "
            f"{law.second:.6g}, not {second:.6g}"
        )
    return law


def resolve_travel_laws(
    m: PollingModel, kind: str = "deterministic"
) -> tuple[tuple[TravelLaw, ...], tuple[TravelLaw, ...]]:
    """Per-station laws after a service and after an empty visit"""
    return (
        tuple(
            _matching(
                kind, float(mean), None if m.tau2 is None else m.tau2[i]
            )
            for i, mean in enumerate(m.tau)
        ),
        tuple(
            _matching(
                kind,
                float(mean),
                None if m.tau_tilde2 is None else m.tau_tilde2[i],
            )
            for i, mean in enumerate(m.tau_tilde)
        ),
    )


def resolve_batch_law(
    m: PollingModel, law: BatchLaw | None = None
) -> BatchLaw:
    """The batch law to simulate, consistent with the model's moments"""
    target = m.batch or Batch()
    if law is None:
        if isclose(target.second, target.mean**2, rel_tol=MOMENT_TOL):
            if not float(target.mean).is_integer():
                raise UnsupportedLaw(f"batch mean {target.mean} is fractional")
            law = FixedBatch(int(target.mean))
        else:
            law = GeometricBatch(target.mean)
    if not all(
        isclose(a, b, rel_tol=MOMENT_TOL)
        for a, b in zip(law.moments, target)
    ):
        raise UnsupportedLaw(
            f"batch law {law} has moments {tuple(law.moments)}, "
            f"not {tuple(target)}"
        )
    return law
