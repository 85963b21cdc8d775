""" Tests for faces, the Lyapunov certificate and classification

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import cyclic, polling_models, symmetric_pair
from statepoll import (
    AssumptionViolated,
    CertificateFailed,
    FaceLimitExceeded,
    classify,
    compare_defect,
    drift,
    face_direction,
    face_of,
    full_face,
    iter_faces,
    lyapunov_certificate,
    lyapunov_coordinates,
    permute_model,
    polling_model,
    sim_config,
    simulate,
    solve_induced_chain,
    solve_server_distribution,
    transience_sweep,
)
from statepoll.types import (
    Classification,
    Face,
    FaceDirection,
    FaceVerdict,
)


def test_empty_face_is_the_model(taxicab):
    sol = solve_induced_chain(taxicab, Face(frozenset()))
    d = solve_server_distribution(taxicab)
    assert sol.pi == pytest.approx(d.f)
    assert sol.tau_bar_l == pytest.approx(d.tau_bar)
    assert not sol.v.any()


def test_full_face_follows_the_routing_chain(taxicab):
    sol = solve_induced_chain(taxicab, full_face(2))
    assert sol.pi == pytest.approx([0.5, 0.5])
    assert sol.tau_bar_l == pytest.approx(1)
    assert sol.rho_hat_l == 0
    assert sol.v == pytest.approx([-0.4, -0.3])
    assert sol.ergodic_flag == FaceVerdict.ERGODIC


def test_single_saturated_station(taxicab):
    sol = solve_induced_chain(taxicab, face_of([1]))
    assert sol.pi == pytest.approx([5 / 13, 8 / 13])
    assert sol.tau_bar_l == pytest.approx(10 / 13)
    assert sol.v == pytest.approx([1 / 13 - 5 / 13, 0])
    assert sol.ergodic_flag == FaceVerdict.CONJECTURED_ERGODIC


def test_overloaded_free_station_makes_face_non_ergodic(overloaded_pair):
    sol = solve_induced_chain(overloaded_pair, face_of([1]))
    assert sol.ergodic_flag == FaceVerdict.NON_ERGODIC


def test_drift_field(taxicab):
    assert drift(taxicab, 0, [2, 0]) == pytest.approx([-0.9, 0.2])
    assert drift(taxicab, 1, [2, 0]) == pytest.approx([0.05, 0.1])


def test_lyapunov_coordinates_are_linear(coinciding):
    x, y = np.array([1.0, 2.0]), np.array([-3.0, 0.5])
    assert lyapunov_coordinates(coinciding, 2 * x + y) == pytest.approx(
        2 * lyapunov_coordinates(coinciding, x)
        + lyapunov_coordinates(coinciding, y)
    )


def test_coordinates_of_the_full_face_field(coinciding):
    sol = solve_induced_chain(coinciding, full_face(2))
    d = solve_server_distribution(coinciding)
    coords = lyapunov_coordinates(coinciding, sol.v)
    assert coords == pytest.approx(coinciding.lam * d.tau_bar - d.f)


def test_face_direction(taxicab):
    sol = solve_induced_chain(taxicab, full_face(2))
    assert face_direction(sol, face_of([1])) == FaceDirection.INGOING
    with pytest.raises(ValueError):
        face_direction(sol, full_face(2))


def test_certificate_on_taxicab_rests_on_conjecture(taxicab):
    sols = [solve_induced_chain(taxicab, f) for f in iter_faces(2)]
    cert = lyapunov_certificate(taxicab, sols)
    assert cert.valid
    assert cert.conjecture_based
    assert all(v.total < 0 for v in cert.face_values.values())
    assert (cert.u > 0).all()


def test_certificate_holds_when_conditions_hold(stable_pair):
    sols = [solve_induced_chain(stable_pair, f) for f in iter_faces(2)]
    cert = lyapunov_certificate(stable_pair, sols)
    assert cert.valid
    assert not cert.conjecture_based


def test_certificate_fails_at_the_full_face(overloaded_pair):
    sols = [solve_induced_chain(overloaded_pair, f) for f in iter_faces(2)]
    with pytest.raises(CertificateFailed) as err:
        lyapunov_certificate(overloaded_pair, sols)
    assert "{1,2}" in str(err.value)
    assert not lyapunov_certificate(overloaded_pair, sols, strict=False).valid


def test_face_comparison_identity(coinciding):
    for face in (Face(frozenset()), face_of([2])):
        assert compare_defect(coinciding, face, 0) <= 1e-9


def test_face_comparison_needs_coinciding_routing(taxicab):
    with pytest.raises(AssumptionViolated):
        compare_defect(taxicab, Face(frozenset()), 0)


def test_sweep_on_stable_pair(stable_pair):
    sweep = transience_sweep(stable_pair)
    assert sweep.verdict == Classification.ERGODIC
    assert sweep.order == (0, 1)
    assert [value for _, value in sweep.trajectory] == pytest.approx(
        [-0.2, -0.2]
    )
    assert sweep.notes and sweep.notes[0].startswith("OrderingTie")


def test_sweep_stops_at_first_outward_face(overloaded_pair):
    sweep = transience_sweep(overloaded_pair)
    assert sweep.verdict == Classification.TRANSIENT
    assert len(sweep.trajectory) == 1
    assert sweep.trajectory[0][1] == pytest.approx(0.1)


def test_classify_stable_pair(stable_pair):
    result = classify(stable_pair)
    assert result.verdict == Classification.ERGODIC
    assert not result.conjecture_based
    assert result.certificate.valid


def test_classify_overloaded_pair(overloaded_pair):
    result = classify(overloaded_pair)
    assert result.verdict == Classification.TRANSIENT
    assert result.sweep.verdict == Classification.TRANSIENT


def test_classify_taxicab_is_conjecture_based(taxicab):
    result = classify(taxicab)
    assert result.verdict == Classification.ERGODIC
    assert result.conjecture_based
    assert result.sweep is None
    assert set(result.faces) == set(iter_faces(2))


def test_face_limit_counts_faces(taxicab):
    with pytest.raises(FaceLimitExceeded) as err:
        classify(taxicab, max_faces=2)
    assert "3 faces" in str(err.value)
    assert classify(taxicab, max_faces=3).verdict == Classification.ERGODIC


@pytest.mark.parametrize(
    "lam, verdict",
    [
        (0.3, Classification.ERGODIC),
        (0.45, Classification.ERGODIC),
        (0.55, Classification.TRANSIENT),
        (0.6, Classification.TRANSIENT),
    ],
)
def test_symmetric_pair_threshold_agrees_with_simulation(lam, verdict):
    m = symmetric_pair(lam)
    assert classify(m).verdict == verdict
    est = simulate(m, sim_config(20_000, replications=2))
    assert est.unstable == (verdict == Classification.TRANSIENT)


def test_trapped_server_is_inconclusive():
    m = polling_model(3, np.eye(3), cyclic(3), [0.05] * 3, [1] * 3, [0.5] * 3)
    result = classify(m)
    assert result.verdict == Classification.INCONCLUSIVE
    assert result.distribution.f == pytest.approx([1 / 3] * 3)
    for face in (face_of([1, 2]), face_of([1, 3]), face_of([2, 3])):
        sol = result.faces[face]
        assert sol.ergodic_flag == FaceVerdict.UNDETERMINED
        assert np.isnan(sol.v).all()
    single = result.faces[face_of([1])]
    assert single.pi == pytest.approx([0.9, 0.05, 0.05])
    assert single.tau_bar_l == pytest.approx(1)
    assert single.ergodic_flag == FaceVerdict.NON_ERGODIC
    assert result.faces[full_face(3)].ergodic_flag == FaceVerdict.ERGODIC
    assert "face {1,2}: server trapped in 2 classes" in result.notes[0]
    assert "face {1,2,3}: server trapped in 3 classes" in result.notes[-1]
    assert not result.certificate.face_values


@given(polling_models(coinciding=True))
@settings(deadline=None)
def test_face_comparison_identity_on_every_face(m):
    for face in iter_faces(m.n, include_empty=True):
        for k in set(range(m.n)) - face.stations:
            assert compare_defect(m, face, k) <= 1e-9


@given(polling_models())
@settings(deadline=None)
def test_free_traffic_stays_below_one(m):
    if 1 - m.lam @ m.tau > 0:
        for face in iter_faces(m.n, include_empty=True):
            assert solve_induced_chain(m, face).rho_hat_l < 1


@given(polling_models(max_n=3))
@settings(deadline=None)
def test_relabelling_stations_relabels_the_verdict(m):
    order = list(reversed(range(m.n)))
    before = classify(m)
    after = classify(permute_model(m, order))
    assert after.verdict == before.verdict
    assert after.conjecture_based == before.conjecture_based
    for face, sol in after.faces.items():
        old = Face(frozenset(order[k] for k in face.stations))
        assert sol.v == pytest.approx(before.faces[old].v[order], abs=1e-9)
