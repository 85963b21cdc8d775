""" Special exceptions for StatePoll

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
from __future__ import annotations

__all__ = [
    "AssumptionViolated",
    "CertificateFailed",
    "ComplexResidual",
    "DegenerateEigenvalue",
    "DegenerateTraffic",
    "FaceLimitExceeded",
    "MissingMoments",
    "ModelValidationError",
    "MultipleEssentialClasses",
    "SingularSystem",
    "StateSpaceTooLarge",
    "UnstableDetected",
    "UnstableRegime",
    "UnsupportedLaw",
]

from collections.abc import Sequence
from typing import Any


class ModelValidationError(ValueError):
    """The model document or instance broke an invariant"""

    def __init__(self, violations: Sequence[Any]):
        super().__init__()
        self.violations = tuple(violations)
        lines = "; ".join(str(v) for v in self.violations)
        self.args = (f"invalid model: {lines}", *self.args)


class MissingMoments(ValueError):
    """A second moment needed by the requested analysis is absent"""

    def __init__(self, field: str, needed_by: str):
        super().__init__()
        self.field = field
        self.args = (f"{needed_by} requires '{field}'", *self.args)


class DegenerateTraffic(ValueError):
    """The traffic index rho-hat equals 1, so the system cannot be solved"""

    def __init__(self, rho_hat: float, face: str = ""):
        super().__init__()
        self.rho_hat = rho_hat
        where = f" on face {face}" if face else ""
        self.args = (f"rho_hat = {rho_hat:.12g}{where} is degenerate",)


class MultipleEssentialClasses(ValueError):
    """P-tilde has several essential classes"""

    def __init__(
        self,
        classes: Sequence[Sequence[int]],
        residuals: Sequence[float],
    ):
        super().__init__()
        self.classes = tuple(tuple(c) for c in classes)
        self.residuals = tuple(residuals)
        shown = ", ".join(
            "{" + ",".join(str(s + 1) for s in c) + f"}}: {r:.6g}"
            for c, r in zip(self.classes, self.residuals)
        )
        self.args = (
            f"p_tilde has {len(self.classes)} essential classes ({shown}); "
            "the chain is never ergodic unless every residual is zero, "
            "and with independent compound Poisson arrivals the system "
            "is never ergodic",
        )


class SingularSystem(ValueError):
    """A linear system was numerically rank-deficient"""


class FaceLimitExceeded(ValueError):
    """Exhaustive face enumeration would visit too many faces"""

    def __init__(self, faces: int, limit: int):
        super().__init__()
        self.args = (f"{faces} faces exceed the limit of {limit}",)


class CertificateFailed(ValueError):
    """The linear Lyapunov function does not decrease on some face"""

    def __init__(self, face: str, coordinate: int, value: float):
        super().__init__()
        self.face = face
        self.coordinate = coordinate
        self.value = value
        self.args = (
            f"certificate fails on face {face} at station {coordinate + 1} "
            f"(f = {value:.6g})",
        )


class AssumptionViolated(ValueError):
    """A structural precondition of a formula does not hold"""


class UnstableRegime(ValueError):
    """A closed form was evaluated outside its stability region"""

    def __init__(self, load: float):
        super().__init__()
        self.load = load
        self.args = (f"load {load:.6g} >= 1: no stationary regime",)


class ComplexResidual(ValueError):
    """A closed form that must be real came out complex"""

    def __init__(self, value: complex):
        super().__init__()
        self.value = value
        self.args = (
            f"imaginary residual {value.imag:.3g} on {value.real:.6g}; "
            "check the symmetry assumptions",
        )


class DegenerateEigenvalue(ValueError):
    """An eigenvalue other than the last equals 1"""

    def __init__(self, index: int, value: complex):
        super().__init__()
        self.index = index
        self.args = (f"eigenvalue {index} = {value:.6g} is too close to 1",)


class UnstableDetected(RuntimeError):
    """The simulated queue grew without bound"""

    def __init__(self, estimate: Any, drift: float):
        super().__init__()
        self.estimate = estimate
        self.drift = drift
        self.args = (
            f"total queue length drifts by {drift:.4g} per polling event",
        )


class UnsupportedLaw(ValueError):
    """A travel or batch law cannot be used for the requested operation"""


class StateSpaceTooLarge(ValueError):
    """The truncated chain would have too many states"""

    def __init__(self, states: int, limit: int):
        super().__init__()
        self.args = (f"{states} states exceed the oracle limit {limit}",)
