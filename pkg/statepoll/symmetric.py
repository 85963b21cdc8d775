""" Rotationally symmetric polling systems

Copyright (c) 2021 IdmFoundInHim, under MIT License

Distances and eigenvalue numbers run 1..N and are stored at position
k - 1, so the last entry of every such vector is the k = N term.
"""
__all__ = [
    "charpoly_eigen_sum",
    "check_assumptions",
    "circulant_basis",
    "circulant_eigenvalues",
    "circulant_matrix",
    "eigen_sum",
    "empty_probability",
    "mean_queue_arbitrary",
    "mean_queue_at_polling",
    "real_part",
    "routing_distances",
    "symmetric_profile",
]

import logging
from collections.abc import Iterable

import numpy as np

from ._constants import A3_TOL, EIGEN_MARGIN, IMAG_TOL, STOCHASTIC_TOL
from .errors import ComplexResidual, DegenerateEigenvalue, UnstableRegime
from .types import (
    AssumptionCheck,
    AssumptionReport,
    CirculantBasis,
    MomentFields,
    PollingModel,
    SymmetricProfile,
)
from .utilities import as_vector, readonly

logger = logging.getLogger(__name__)


def _roots(n: int) -> np.ndarray:
    """omega_k^d for k, d in 1..N (rows k, columns d)"""
    k = np.arange(1, n + 1)
    return np.exp(2j * np.pi * np.outer(k, k) / n)


def real_part(value: complex, tol: float = IMAG_TOL) -> float:
    """Real part of a closed form, refusing a visible imaginary part"""
    value = complex(value)
    if abs(value.imag) > tol * (1 + abs(value.real)):
        raise ComplexResidual(value)
    return value.real


def routing_distances(p: np.ndarray) -> np.ndarray:
    """p_d read off the first row of a circulant routing matrix"""
    n = len(p)
    return as_vector([p[0][d % n] for d in range(1, n + 1)])


def circulant_eigenvalues(coeffs: Iterable[float]) -> np.ndarray:
    """sum_d omega_k^d m_d for k = 1..N"""
    coeffs = np.asarray(coeffs, dtype=float)
    return readonly(_roots(len(coeffs)) @ coeffs)


def circulant_basis(n: int) -> CirculantBasis:
    """Roots omega_k and eigenvectors v_k with components omega_k^-i"""
    k = np.arange(1, n + 1)
    omega = np.exp(2j * np.pi * k / n)
    return CirculantBasis(readonly(omega), readonly(_roots(n).conj()))


def circulant_matrix(coeffs: Iterable[float]) -> np.ndarray:
    """M with M[i, j] = m_(i - j), subscripts taken mod N in 1..N"""
    coeffs = np.asarray(coeffs)
    n = len(coeffs)
    i = np.arange(n)
    return readonly(coeffs[(i[:, None] - i[None, :] - 1) % n])


def eigen_sum(mu: Iterable[complex]) -> float:
    """sum over l < N of 1 / (1 - mu_l)"""
    mu = np.asarray(mu, dtype=complex)
    gaps = 1 - mu[:-1]
    for index, gap in enumerate(gaps):
        if abs(gap) <= EIGEN_MARGIN:
            raise DegenerateEigenvalue(index + 1, complex(mu[index]))
    return real_part(np.sum(1 / gaps), 1e-10)


def charpoly_eigen_sum(p: np.ndarray) -> float:
    """d/dx log[det(xI - P) / (x - 1)] at x = 1

    Equals `eigen_sum` of the eigenvalues of a stochastic matrix whose
    eigenvalue 1 is simple.
    """
    quotient, _ = np.polydiv(np.real(np.poly(np.asarray(p))), [1.0, -1.0])
    return float(
        np.polyval(np.polyder(quotient), 1.0) / np.polyval(quotient, 1.0)
    )


def _spread(values: np.ndarray) -> float:
    return float(np.max(values) - np.min(values))


def check_assumptions(m: PollingModel) -> AssumptionReport:
    """Rotational symmetry, simple unit eigenvalue of P-tilde and the
    commutation [I-P][I-P~^T] = [I-P^T][I-P~]"""
    n = m.n
    i = np.arange(n)
    shift = (i[None, :] - i[:, None] - 1) % n
    worst, detail = 0.0, ""
    for name in ("p", "p_tilde"):
        matrix = getattr(m, name)
        dist = routing_distances(matrix)
        gap = np.abs(matrix - dist[shift])
        if gap.max() > worst:
            row, col = np.unravel_index(np.argmax(gap), gap.shape)
            worst = float(gap.max())
            detail = f"{name}[{row + 1},{col + 1}] breaks the circulant"
    for name in ("lam", "tau", "tau_tilde"):
        spread = _spread(getattr(m, name))
        if spread > worst:
            worst, detail = spread, f"{name} is not constant"
    a1 = AssumptionCheck("A1", worst <= STOCHASTIC_TOL, worst, detail)

    mu_tilde = circulant_eigenvalues(routing_distances(m.p_tilde))
    closest = float(np.min(np.abs(1 - mu_tilde[:-1]))) if n > 1 else np.inf
    a2 = AssumptionCheck(
        "A2",
        closest > EIGEN_MARGIN,
        closest,
        "smallest |1 - mu~_k| over k < N",
    )

    eye = np.eye(n)
    defect = float(
        np.max(
            np.abs(
                (eye - m.p) @ (eye - m.p_tilde.T)
                - (eye - m.p.T) @ (eye - m.p_tilde)
            )
        )
    )
    a3 = AssumptionCheck("A3", defect <= A3_TOL, defect)
    return AssumptionReport(a1, a2, a3)


def symmetric_profile(
    n: int,
    p_dist: Iterable[float],
    p_tilde_dist: Iterable[float],
    moments: MomentFields,
) -> SymmetricProfile:
    """Eigenvalues and stationary-mixed moments of a symmetric system

    The mixed moments alpha_bar are only defined when N alpha < 1.
    """
    p_dist = as_vector(p_dist, n)
    p_tilde_dist = as_vector(p_tilde_dist, n)
    alpha2 = as_vector(moments.alpha2, n)
    alpha_tilde2 = as_vector(moments.alpha_tilde2, n)
    profile = SymmetricProfile(
        n,
        p_dist,
        p_tilde_dist,
        float(moments.alpha),
        float(moments.alpha_tilde),
        alpha2,
        alpha_tilde2,
        circulant_eigenvalues(p_dist),
        circulant_eigenvalues(p_tilde_dist),
    )
    if n * profile.alpha >= 1:
        return profile
    empty = empty_probability(profile)
    return profile._replace(
        alpha_bar=(1 - empty) * profile.alpha + empty * profile.alpha_tilde,
        alpha_bar2=readonly((1 - empty) * alpha2 + empty * alpha_tilde2),
    )


def empty_probability(prof: SymmetricProfile) -> float:
    """P(X_m = 0 | S = m)"""
    stable = 1 - prof.n * prof.alpha
    if stable <= 0:
        raise UnstableRegime(prof.n * prof.alpha)
    if prof.alpha_tilde == 0:
        logger.warning("alpha~ = 0: an empty station costs no time")
    return stable / (stable + prof.n * prof.alpha_tilde)


def _terms(prof: SymmetricProfile) -> dict[str, float | complex]:
    if prof.alpha_bar is None or prof.alpha_bar2 is None:
        raise UnstableRegime(prof.n * prof.alpha)
    n = prof.n
    stable = 1 - n * prof.alpha
    halves = _roots(n) @ prof.alpha_bar2 / 2
    mu, mu_tilde = prof.mu[:-1], prof.mu_tilde[:-1]
    return {
        "stable": stable,
        "bias": (1 - n * prof.alpha + n * prof.alpha_tilde) / stable,
        "eigen": eigen_sum(prof.mu_tilde),
        "last": n / 2 * prof.alpha_bar2[-1],
        "spread": n * (prof.alpha - prof.alpha_tilde) / stable,
        "half": prof.alpha_bar2.sum() / 2,
        "cross": np.sum((mu - mu_tilde) / (1 - mu_tilde) * halves[:-1]),
    }


def mean_queue_at_polling(prof: SymmetricProfile) -> float:
    """E[X_m | S = m]"""
    t = _terms(prof)
    n, a_tilde, a_bar = prof.n, prof.alpha_tilde, prof.alpha_bar
    value = (
        n * a_bar
        + n * a_tilde * a_bar / t["stable"] * t["eigen"]
        + t["bias"] * t["last"]
        + t["spread"] * t["half"]
        - n * a_tilde / t["stable"] * t["cross"]
    )
    return real_part(value)


def mean_queue_arbitrary(prof: SymmetricProfile) -> float:
    """E[X_m] at polling instants, for any station m"""
    t = _terms(prof)
    value = (
        prof.alpha_bar
        + prof.alpha_tilde / t["stable"] * t["eigen"]
        + t["bias"] * t["last"]
        + t["spread"] * t["half"]
        - t["bias"] * t["cross"]
    )
    return real_part(value)
