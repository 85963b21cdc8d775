""" Polling-model instances, validation and traffic quantities

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
__all__ = [
    "arrival_matrices",
    "compatibility_check",
    "essential_classes",
    "load_model",
    "model_from_mapping",
    "model_to_mapping",
    "permute_model",
    "polling_model",
    "routing_coincides",
    "traffic_summary",
    "validate_model",
]

import json
import logging
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ._constants import RHO_DEGENERATE_TOL, STOCHASTIC_TOL
from .errors import ModelValidationError
from .types import (
    ArrivalMatrices,
    Batch,
    PollingModel,
    TrafficSummary,
    Violation,
)
from .utilities import as_matrix, as_vector, readonly

logger = logging.getLogger(__name__)

_REQUIRED_KEYS = ("n", "p", "p_tilde", "lambda", "tau", "tau_tilde")


def polling_model(
    n: int,
    p: Iterable[Iterable[float]],
    p_tilde: Iterable[Iterable[float]],
    lam: Iterable[float],
    tau: Iterable[float],
    tau_tilde: Iterable[float],
    tau2: Iterable[float] | None = None,
    tau_tilde2: Iterable[float] | None = None,
    batch: Batch | tuple[float, float] | None = None,
) -> PollingModel:
    """Build an immutable model; shapes are checked, values are not

    Use `validate_model` for the value invariants.
    """
    return PollingModel(
        int(n),
        as_matrix(p, n),
        as_matrix(p_tilde, n),
        as_vector(lam, n),
        as_vector(tau, n),
        as_vector(tau_tilde, n),
        None if tau2 is None else as_vector(tau2, n),
        None if tau_tilde2 is None else as_vector(tau_tilde2, n),
        None if batch is None else Batch(*map(float, batch)),
    )


def _non_finite(m: PollingModel) -> list[Violation]:
    fields = {
        "p": m.p,
        "p_tilde": m.p_tilde,
        "lambda": m.lam,
        "tau": m.tau,
        "tau_tilde": m.tau_tilde,
        "tau2": m.tau2,
        "tau_tilde2": m.tau_tilde2,
    }
    if m.batch is not None:
        fields["batch.mean"] = np.array(m.batch.mean)
        fields["batch.second"] = np.array(m.batch.second)
    violations = []
    for name, values in fields.items():
        if values is None:
            continue
        for index in np.argwhere(~np.isfinite(values)):
            label = ",".join(str(i + 1) for i in index)
            violations.append(
                Violation(
                    f"{name}[{label}]" if label else name,
                    "must be a finite number",
                    float("inf"),
                )
            )
    return violations


def validate_model(m: PollingModel) -> tuple[Violation, ...]:
    """Every invariant violation of `m`; an empty tuple means valid

    Non-finite entries, when present, are the only violations reported.
    """
    if violations := _non_finite(m):
        return tuple(violations)
    violations = []
    if m.n < 2:
        violations.append(Violation("n", "at least 2 stations", 2 - m.n))
    for name in ("p", "p_tilde"):
        matrix = getattr(m, name)
        low, high = float(matrix.min()), float(matrix.max())
        if low < 0 or high > 1:
            violations.append(
                Violation(
                    name,
                    "entries must lie in [0, 1]",
                    max(-low, high - 1),
                )
            )
        for row, total in enumerate(matrix.sum(axis=1)):
            if abs(total - 1) > STOCHASTIC_TOL:
                violations.append(
                    Violation(
                        f"{name}[{row + 1}]",
                        f"row sums to {total:.12g}, not 1",
                        abs(total - 1),
                    )
                )
    for name in ("lam", "tau", "tau_tilde"):
        for i, value in enumerate(getattr(m, name)):
            if not value > 0:
                label = "lambda" if name == "lam" else name
                violations.append(
                    Violation(
                        f"{label}[{i + 1}]",
                        f"{label} must be positive",
                        -float(value),
                    )
                )
    for second, first in (("tau2", "tau"), ("tau_tilde2", "tau_tilde")):
        moments = getattr(m, second)
        if moments is None:
            continue
        deficit = getattr(m, first) ** 2 - moments
        for i in np.flatnonzero(deficit > STOCHASTIC_TOL * moments):
            violations.append(
                Violation(
                    f"{second}[{i + 1}]",
                    f"{second} must be at least {first} squared",
                    float(deficit[i]),
                )
            )
    if m.batch is not None:
        if m.batch.mean < 1:
            violations.append(
                Violation("batch.mean", "b must be >= 1", 1 - m.batch.mean)
            )
        if m.batch.second < m.batch.mean:
            violations.append(
                Violation(
                    "batch.second",
                    "b2 must be >= b",
                    m.batch.mean - m.batch.second,
                )
            )
    return tuple(violations)


def essential_classes(p_tilde: np.ndarray) -> tuple[frozenset[int], ...]:
    """Closed communicating classes of `p_tilde`, by smallest member"""
    adjacency = csr_matrix(np.asarray(p_tilde) > 0)
    count, labels = connected_components(
        adjacency, directed=True, connection="strong"
    )
    classes = []
    for label in range(count):
        members = np.flatnonzero(labels == label)
        outside = np.flatnonzero(labels != label)
        if not np.asarray(p_tilde)[np.ix_(members, outside)].any():
            classes.append(frozenset(int(s) for s in members))
    return tuple(sorted(classes, key=min))


def compatibility_check(
    m: PollingModel, classes: Sequence[frozenset[int]]
) -> tuple[float, ...]:
    """Per-class residual of the zero-drift condition

    Each residual must vanish (to 1e-12) for the chain to have any
    chance of ergodicity when p_tilde has several essential classes.
    """
    flow = m.lam @ (m.p - m.p_tilde)
    residuals = tuple(float(flow[sorted(c)].sum()) for c in classes)
    if len(classes) > 1:
        logger.warning(
            "p_tilde has %d essential classes; with independent compound "
            "Poisson arrivals the system is never ergodic",
            len(classes),
        )
    return residuals


def traffic_summary(m: PollingModel) -> TrafficSummary:
    rho_hat = float(np.sum(m.lam * (m.tau - m.tau_tilde)))
    degenerate = abs(rho_hat - 1) <= RHO_DEGENERATE_TOL
    if degenerate:
        logger.warning("rho_hat = %.15g is degenerate", rho_hat)
    return TrafficSummary(rho_hat, float(m.lam @ m.tau), degenerate)


def arrival_matrices(m: PollingModel) -> ArrivalMatrices:
    """Mean arrivals at q between polls, after a service at i or not"""
    return ArrivalMatrices(
        readonly(np.outer(m.tau, m.lam)),
        readonly(np.outer(m.tau_tilde, m.lam)),
    )


def routing_coincides(m: PollingModel) -> bool:
    """True when P and P-tilde agree, i.e. the routing is state-free"""
    return bool(np.max(np.abs(m.p - m.p_tilde)) <= STOCHASTIC_TOL)


def permute_model(m: PollingModel, order: Sequence[int]) -> PollingModel:
    """Relabel stations so that new station k is old station order[k]"""
    index = np.asarray(order, dtype=int)
    if sorted(index.tolist()) != list(range(m.n)):
        raise ValueError(f"{list(order)} is not a permutation of 0..{m.n-1}")
    pick = np.ix_(index, index)
    return polling_model(
        m.n,
        m.p[pick],
        m.p_tilde[pick],
        m.lam[index],
        m.tau[index],
        m.tau_tilde[index],
        None if m.tau2 is None else m.tau2[index],
        None if m.tau_tilde2 is None else m.tau_tilde2[index],
        m.batch,
    )


def model_from_mapping(
    doc: Mapping[str, Any], validate: bool = True
) -> PollingModel:
    """Build a model from a parsed model document

    Keys: n, p, p_tilde, lambda, tau, tau_tilde, and optionally tau2,
    tau_tilde2 and batch {mean, second}. Unknown keys are ignored so
    that documents can carry extra blocks such as `switchover`.
    """
    missing = [k for k in _REQUIRED_KEYS if k not in doc]
    if missing:
        raise ModelValidationError(
            [Violation(k, "missing key", float("nan")) for k in missing]
        )
    batch = doc.get("batch")
    try:
        m = polling_model(
            int(doc["n"]),
            doc["p"],
            doc["p_tilde"],
            doc["lambda"],
            doc["tau"],
            doc["tau_tilde"],
            doc.get("tau2"),
            doc.get("tau_tilde2"),
            None
            if batch is None
            else Batch(float(batch["mean"]), float(batch["second"])),
        )
    except (TypeError, ValueError, KeyError) as err:
        raise ModelValidationError(
            [Violation("document", str(err), float("nan"))]
        ) from err
    if validate and (violations := validate_model(m)):
        raise ModelValidationError(violations)
    return m


def model_to_mapping(m: PollingModel) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "n": m.n,
        "p": m.p.tolist(),
        "p_tilde": m.p_tilde.tolist(),
        "lambda": m.lam.tolist(),
        "tau": m.tau.tolist(),
        "tau_tilde": m.tau_tilde.tolist(),
    }
    if m.tau2 is not None:
        doc["tau2"] = m.tau2.tolist()
    if m.tau_tilde2 is not None:
        doc["tau_tilde2"] = m.tau_tilde2.tolist()
    if m.batch is not None:
        doc["batch"] = {"mean": m.batch.mean, "second": m.batch.second}
    return doc


def load_model(path: str) -> tuple[PollingModel, dict[str, Any]]:
    """Read and validate a model document, returning it with the raw
    mapping (for blocks that are not part of the model)"""
    with open(path) as document:
        doc = json.load(document)
    if not isinstance(doc, Mapping):
        raise ModelValidationError(
            [Violation("document", "must be a JSON object", float("nan"))]
        )
    return model_from_mapping(doc), dict(doc)
