""" Ergodicity of the polling random walk

Copyright (c) 2021 IdmFoundInHim, under MIT License

A face is the set of queues held saturated. The empty face is the
polling model itself; the full face is ergodic by definition and its
induced chain is the routing chain P.
"""
__all__ = [
    "classify",
    "compare_defect",
    "drift",
    "face_direction",
    "induced_classes",
    "lyapunov_certificate",
    "lyapunov_coordinates",
    "solve_induced_chain",
    "transience_sweep",
]

import logging
from collections.abc import Iterable, Sequence

import numpy as np
from frozendict import frozendict

from ._constants import (
    EPSILON_FALLBACK,
    EPSILON_FLOOR,
    EPSILON_SCALE,
    MAX_FACES,
    STRICT_MARGIN,
)
from .errors import AssumptionViolated, CertificateFailed, FaceLimitExceeded
from .model import essential_classes, routing_coincides
from .server import (
    necessary_conditions,
    solve_flow_system,
    solve_server_distribution,
)
from .types import (
    Classification,
    ClassificationResult,
    Face,
    FaceDirection,
    FaceValue,
    FaceVerdict,
    InducedChainSolution,
    LyapunovCertificate,
    PollingModel,
    SweepResult,
)
from .utilities import iter_faces, readonly

logger = logging.getLogger(__name__)


def induced_classes(
    m: PollingModel, face: Face
) -> tuple[frozenset[int], ...]:
    """Closed classes of the server position with `face` held saturated

    A saturated station always leaves by P. A free station leaves by P
    while it has work and by P-tilde once empty, so both count.
    """
    busy = np.zeros(m.n, dtype=bool)
    busy[list(face.stations)] = True
    return essential_classes(np.where(busy[:, None], m.p, m.p + m.p_tilde))


def solve_induced_chain(m: PollingModel, face: Face) -> InducedChainSolution:
    """Server law, mean interval and second vector field on `face`

    When the server can be trapped in more than one class of stations
    the induced chain has no unique law: pi, tau_bar and v are NaN and
    the face is flagged undetermined. The full face stays ergodic.
    """
    full = len(face.stations) == m.n
    classes = induced_classes(m, face)
    if len(classes) > 1:
        logger.info(
            "face %s: server trapped in %d classes", face, len(classes)
        )
        free = [j for j in range(m.n) if j not in face.stations]
        rho_hat_l = float(m.lam[free] @ (m.tau - m.tau_tilde)[free])
        nan = readonly(np.full(m.n, np.nan))
        flag = FaceVerdict.ERGODIC if full else FaceVerdict.UNDETERMINED
        return InducedChainSolution(face, nan, rho_hat_l, np.nan, nan, flag)
    pi, tau_bar_l, rho_hat_l = solve_flow_system(m, face.stations)
    saturated = sorted(face.stations)
    v = np.zeros(m.n)
    v[saturated] = m.lam[saturated] * tau_bar_l - pi[saturated]
    if full:
        flag = FaceVerdict.ERGODIC
    else:
        free = [j for j in range(m.n) if j not in face.stations]
        margin = np.min(pi[free] - m.lam[free] * tau_bar_l)
        if margin <= STRICT_MARGIN:
            flag = FaceVerdict.NON_ERGODIC
        elif routing_coincides(m):
            flag = FaceVerdict.ERGODIC
        else:
            flag = FaceVerdict.CONJECTURED_ERGODIC
    return InducedChainSolution(
        face, readonly(pi), rho_hat_l, tau_bar_l, readonly(v), flag
    )


def drift(m: PollingModel, s: int, x: Sequence[int]) -> np.ndarray:
    """Mean queue increments over one polling interval at station s"""
    if x[s] > 0:
        step = m.lam * m.tau[s]
        step[s] -= 1
        return step
    return m.lam * m.tau_tilde[s]


def lyapunov_coordinates(
    m: PollingModel, x: Iterable[float], rho_hat: float | None = None
) -> np.ndarray:
    """f_i(x) = x_i + lambda_i sum_j x_j (tau_j - tau~_j) / (1 - rho_hat)"""
    x = np.asarray(x, dtype=float)
    if rho_hat is None:
        rho_hat = float(m.lam @ (m.tau - m.tau_tilde))
    return x + m.lam * (x @ (m.tau - m.tau_tilde)) / (1 - rho_hat)


def _initial_epsilon(m: PollingModel) -> float:
    gaps = m.tau_tilde - m.tau
    if (gaps > 0).any():
        return EPSILON_SCALE * float(gaps[gaps > 0].min())
    return EPSILON_FALLBACK


def _face_values(
    m: PollingModel, sols: Sequence[InducedChainSolution], u: np.ndarray
) -> frozendict[Face, FaceValue]:
    values = {}
    for sol in sols:
        coords = lyapunov_coordinates(m, sol.v)
        values[sol.face] = FaceValue(
            float(u @ coords),
            frozendict(
                {int(i): float(coords[i]) for i in sorted(sol.face.stations)}
            ),
        )
    return frozendict(values)


def lyapunov_certificate(
    m: PollingModel,
    sols: Iterable[InducedChainSolution],
    strict: bool = True,
) -> LyapunovCertificate:
    """Linear Lyapunov function f = sum u_i f_i over the ergodic faces

    The certificate holds when f is positive on every basis direction
    and every saturated coordinate f_i(v) of every ergodic face, and
    f(v) itself, is below -1e-9. The weight floor epsilon is shrunk by
    tens until the certificate holds or 1e-12 is passed. Raises
    CertificateFailed unless `strict` is off. Faces without a unique
    induced law carry no vector field and are left out.
    """
    faces = [
        s
        for s in sols
        if s.face.stations
        and s.ergodic_flag != FaceVerdict.NON_ERGODIC
        and np.isfinite(s.v).all()
    ]
    conjecture = any(
        s.ergodic_flag == FaceVerdict.CONJECTURED_ERGODIC for s in faces
    )
    # coordinates of f on the basis vectors do not depend on u
    basis = np.array([lyapunov_coordinates(m, e) for e in np.eye(m.n)])
    epsilon = _initial_epsilon(m)
    while True:
        u = np.maximum(m.tau_tilde - m.tau, epsilon)
        values = _face_values(m, faces, u)
        positive = basis @ u
        failure = _first_failure(values, positive)
        if failure is None or epsilon / 10 < EPSILON_FLOOR:
            break
        logger.info("certificate failed at epsilon %.3g; retrying", epsilon)
        epsilon /= 10
    certificate = LyapunovCertificate(
        readonly(u), epsilon, values, failure is None, conjecture
    )
    if failure is not None and strict:
        raise CertificateFailed(*failure)
    return certificate


def _first_failure(
    values: frozendict[Face, FaceValue], positive: np.ndarray
) -> tuple[str, int, float] | None:
    for k, value in enumerate(positive):
        if not value > 0:
            return "{}", k, float(value)
    for face, value in values.items():
        for i, coord in value.coordinates.items():
            if coord >= -STRICT_MARGIN:
                return str(face), i, coord
        if value.total >= -STRICT_MARGIN:
            worst = max(value.coordinates, key=value.coordinates.get)
            return str(face), worst, value.total
    return None


def face_direction(
    sol: InducedChainSolution, subface: Face
) -> FaceDirection:
    """Whether the second vector field on `sol.face` points into
    `subface` (its extra coordinates all decrease) or away from it"""
    if not subface.stations < sol.face.stations:
        raise ValueError(f"{subface} is not a strict subface of {sol.face}")
    extra = sorted(sol.face.stations - subface.stations)
    components = sol.v[extra]
    if (components < -STRICT_MARGIN).all():
        return FaceDirection.INGOING
    if (components > STRICT_MARGIN).all():
        return FaceDirection.OUTGOING
    return FaceDirection.NEUTRAL


def _require_coinciding(m: PollingModel, what: str):
    if not routing_coincides(m):
        raise AssumptionViolated(f"{what} requires P = P-tilde")


def _scaled_flux(m: PollingModel, face: Face, k: int, f_k: float) -> float:
    sol = solve_induced_chain(m, face)
    return (m.lam[k] * sol.tau_bar_l - f_k) * (1 - sol.rho_hat_l)


def compare_defect(m: PollingModel, face: Face, k: int) -> float:
    """Relative defect between the scaled flux margins of station k on
    `face` and on `face` plus k; zero when P = P-tilde"""
    _require_coinciding(m, "the face comparison identity")
    if k in face.stations:
        raise ValueError(f"station {k + 1} already saturated in {face}")
    f_k = float(solve_server_distribution(m).f[k])
    lower = _scaled_flux(m, face, k, f_k)
    upper = _scaled_flux(m, face.with_station(k), k, f_k)
    scale = max(abs(lower), abs(upper), f_k, np.finfo(float).tiny)
    return abs(upper - lower) / scale


def transience_sweep(m: PollingModel) -> SweepResult:
    """Walk the faces {i..N} in ascending order of lambda_i / F_i

    Stops at the first face whose newest free coordinate drifts upward.
    """
    _require_coinciding(m, "the transience sweep")
    d = solve_server_distribution(m)
    with np.errstate(divide="ignore"):
        ratios = m.lam / d.f
    order = tuple(sorted(range(m.n), key=lambda i: (ratios[i], i)))
    notes = tuple(
        f"OrderingTie: stations {a + 1} and {b + 1} share lambda/F; "
        "ordered by index"
        for a, b in zip(order, order[1:])
        if np.isclose(ratios[a], ratios[b], rtol=1e-12, atol=0)
    )
    trajectory = []
    verdict = None
    for position, station in enumerate(order):
        face = Face(frozenset(order[position:]))
        value = float(solve_induced_chain(m, face).v[station])
        trajectory.append((face, value))
        if value > STRICT_MARGIN:
            verdict = Classification.TRANSIENT
            break
        if value >= -STRICT_MARGIN:
            verdict = Classification.INCONCLUSIVE
            break
    if verdict is None:
        verdict = (
            Classification.ERGODIC
            if d.rho_hat < 1 - STRICT_MARGIN
            else Classification.TRANSIENT
        )
    return SweepResult(order, tuple(trajectory), verdict, notes)


def classify(
    m: PollingModel, max_faces: int = MAX_FACES
) -> ClassificationResult:
    """Ergodic, Transient, NotErgodic or Inconclusive, with evidence"""
    d = solve_server_distribution(m)
    conditions = necessary_conditions(m, d)
    coincide = routing_coincides(m)
    margins = [c.margin for c in conditions.conditions]
    sweep = transience_sweep(m) if coincide and d.rho_hat < 1 else None

    if min(margins) < -STRICT_MARGIN:
        transient = coincide and (
            d.rho_hat > 1 + STRICT_MARGIN
            or (m.lam * d.tau_bar - d.f > STRICT_MARGIN).any()
        )
        verdict = (
            Classification.TRANSIENT
            if transient
            else Classification.NOT_ERGODIC
        )
        return ClassificationResult(
            verdict, False, d, conditions, sweep=sweep
        )
    if min(margins) <= STRICT_MARGIN:
        return ClassificationResult(
            Classification.INCONCLUSIVE,
            False,
            d,
            conditions,
            sweep=sweep,
            notes=("a necessary condition holds with equality",),
        )

    if 2**m.n - 1 > max_faces:
        raise FaceLimitExceeded(2**m.n - 1, max_faces)
    sols = frozendict(
        {face: solve_induced_chain(m, face) for face in iter_faces(m.n)}
    )
    certificate = lyapunov_certificate(m, sols.values(), strict=False)
    trapped = [
        f"face {face}: server trapped in "
        f"{len(induced_classes(m, face))} classes of stations"
        for face, sol in sols.items()
        if not np.isfinite(sol.v).all()
    ]
    if trapped:
        verdict = Classification.INCONCLUSIVE
        notes = tuple(trapped)
    elif certificate.valid:
        verdict = Classification.ERGODIC
        notes = ()
    else:
        verdict = Classification.INCONCLUSIVE
        notes = ("the linear Lyapunov certificate does not hold",)
    return ClassificationResult(
        verdict,
        verdict == Classification.ERGODIC and not coincide,
        d,
        conditions,
        sols,
        certificate,
        sweep,
        notes,
    )
