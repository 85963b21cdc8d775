""" Tests for circulant routing and symmetric queue lengths

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import SWAP, cyclic
from statepoll import (
    ComplexResidual,
    DegenerateEigenvalue,
    UnstableRegime,
    charpoly_eigen_sum,
    check_assumptions,
    circulant_basis,
    circulant_eigenvalues,
    circulant_matrix,
    eigen_sum,
    empty_probability,
    mean_queue_arbitrary,
    mean_queue_at_polling,
    polling_model,
    profile_from_model,
    real_part,
    routing_distances,
    symmetric_profile,
    truncated_chain_oracle,
)
from statepoll.types import MomentFields

circulant_rows = st.integers(min_value=2, max_value=6).flatmap(
    lambda n: st.lists(
        st.floats(min_value=0.01, max_value=1.0), min_size=n, max_size=n
    )
)


def _moments(alpha, alpha_tilde, n, second=0.0, tilde_second=0.0):
    return MomentFields(
        alpha, alpha_tilde, np.full(n, second), np.full(n, tilde_second)
    )


def test_cyclic_model_meets_every_assumption():
    m = polling_model(
        3, cyclic(3), cyclic(3), [0.1] * 3, [1.5] * 3, [0.5] * 3
    )
    assert check_assumptions(m).passed


def test_distance_symmetric_routing_commutes():
    p = np.array([[0, 0.5, 0.5], [0.5, 0, 0.5], [0.5, 0.5, 0]])
    m = polling_model(3, p, p, [0.1] * 3, [1] * 3, [0.5] * 3)
    assert check_assumptions(m).passed


def test_non_circulant_routing_fails_rotational_symmetry():
    p = np.array([[0, 1, 0], [1, 0, 0], [0, 1, 0]])
    m = polling_model(3, p, cyclic(3), [0.1] * 3, [1] * 3, [0.5] * 3)
    report = check_assumptions(m)
    assert not report.a1.passed
    assert report.a1.detail.startswith("p[")
    assert not report.passed


def test_eigenvalues_of_standard_routings():
    omega = np.exp(2j * np.pi * np.arange(1, 5) / 4)
    assert circulant_eigenvalues([1, 0, 0, 0]) == pytest.approx(omega)
    assert circulant_eigenvalues([0, 0, 0, 1]) == pytest.approx([1] * 4)
    uniform = circulant_eigenvalues([0.25] * 4)
    assert uniform == pytest.approx([0, 0, 0, 1], abs=1e-12)


def test_basis_diagonalizes_the_routing_matrix():
    dist = np.array([0.2, 0.5, 0.3])
    p = circulant_matrix(dist).T
    basis = circulant_basis(3)
    mu = circulant_eigenvalues(dist)
    for k in range(3):
        v = np.exp(2j * np.pi * (k + 1) * np.arange(3) / 3)
        assert p @ v == pytest.approx(mu[k] * v)
    assert basis.omega[-1] == pytest.approx(1)


def test_routing_distances_read_the_first_row():
    assert routing_distances(cyclic(4)).tolist() == [1, 0, 0, 0]
    assert routing_distances(np.eye(3)).tolist() == [0, 0, 1]


def test_eigen_sum_of_cyclic_and_uniform():
    assert eigen_sum(circulant_eigenvalues([1, 0, 0, 0])) == pytest.approx(
        1.5
    )
    assert eigen_sum(circulant_eigenvalues([0.2] * 5)) == pytest.approx(4)


@pytest.mark.parametrize("n", range(2, 13))
def test_eigen_sums_of_cyclic_and_uniform_routing(n):
    shift = np.zeros(n)
    shift[0] = 1.0
    cyclic_sum = eigen_sum(circulant_eigenvalues(shift))
    uniform_sum = eigen_sum(circulant_eigenvalues(np.full(n, 1 / n)))
    assert cyclic_sum == pytest.approx((n - 1) / 2, abs=1e-10)
    assert uniform_sum == pytest.approx(n - 1, abs=1e-10)


def test_eigen_sum_refuses_a_second_unit_eigenvalue():
    with pytest.raises(DegenerateEigenvalue):
        eigen_sum(circulant_eigenvalues([0, 0, 1]))


@given(circulant_rows)
def test_cyclic_routing_minimizes_the_eigen_sum(weights):
    dist = np.array(weights) / sum(weights)
    n = len(dist)
    assert eigen_sum(circulant_eigenvalues(dist)) >= (n - 1) / 2 - 1e-10


@given(circulant_rows)
def test_characteristic_polynomial_agrees(weights):
    dist = np.array(weights) / sum(weights)
    direct = eigen_sum(circulant_eigenvalues(dist))
    via_poly = charpoly_eigen_sum(circulant_matrix(dist))
    assert via_poly == pytest.approx(direct, rel=1e-6)


def test_real_part_refuses_imaginary_residue():
    assert real_part(2 + 1e-13j) == 2
    with pytest.raises(ComplexResidual):
        real_part(2 + 1e-3j)


def test_empty_probability_examples():
    profile = symmetric_profile(2, [1, 0], [1, 0], _moments(0.1, 0.1, 2))
    assert empty_probability(profile) == pytest.approx(0.8)
    profile = symmetric_profile(2, [1, 0], [1, 0], _moments(0.1, 0.2, 2))
    assert empty_probability(profile) == pytest.approx(2 / 3)


def test_free_empty_visits_are_flagged(caplog):
    profile = symmetric_profile(2, [1, 0], [1, 0], _moments(0.1, 0.0, 2))
    assert empty_probability(profile) == 1
    assert "alpha~ = 0" in caplog.text


def test_overload_has_no_mean_queue():
    profile = symmetric_profile(2, [1, 0], [1, 0], _moments(0.6, 0.1, 2))
    assert profile.alpha_bar is None
    with pytest.raises(UnstableRegime):
        mean_queue_at_polling(profile)
    with pytest.raises(UnstableRegime):
        empty_probability(profile)


def test_deterministic_cyclic_pair():
    moments = MomentFields(
        0.15, 0.05, np.full(2, 0.0225), np.full(2, 0.0025)
    )
    profile = symmetric_profile(2, [1, 0], [1, 0], moments)
    assert empty_probability(profile) == pytest.approx(0.875)
    assert profile.alpha_bar == pytest.approx(0.0625)
    assert mean_queue_at_polling(profile) == pytest.approx(0.136607, abs=1e-6)


def test_first_order_term_alone():
    moments = _moments(0.1, 1e-9, 3)
    profile = symmetric_profile(3, [1, 0, 0], [1, 0, 0], moments)
    assert mean_queue_at_polling(profile) == pytest.approx(
        3 * profile.alpha_bar
    )


def test_distance_symmetric_queue_is_real():
    dist = [0.5, 0.5, 0]
    moments = _moments(0.1, 0.05, 3, 0.02, 0.005)
    profile = symmetric_profile(3, dist, dist, moments)
    assert isinstance(mean_queue_at_polling(profile), float)
    assert isinstance(mean_queue_arbitrary(profile), float)


def test_mean_queue_of_the_cyclic_pair_matches_the_oracle(cyclic_service):
    exact = truncated_chain_oracle(cyclic_service, 40)
    profile = profile_from_model(cyclic_service)
    assert mean_queue_arbitrary(profile) == pytest.approx(0.105357, abs=1e-6)
    assert exact.queue_mean == pytest.approx(
        [mean_queue_arbitrary(profile)] * 2, abs=1e-6
    )


def test_mean_queues_with_state_dependent_routing_match_the_oracle():
    rows = [[0.3, 0.7], [0.7, 0.3]]
    m = polling_model(
        2, rows, SWAP, [0.1] * 2, [1.5] * 2, [0.5] * 2, [2.25] * 2, [0.25] * 2
    )
    assert check_assumptions(m).passed
    exact = truncated_chain_oracle(m, 40)
    assert exact.states == 3362
    profile = profile_from_model(m)
    assert exact.queue_mean == pytest.approx(
        [mean_queue_arbitrary(profile)] * 2, abs=1e-6
    )
    assert exact.queue_at_polling == pytest.approx(
        [mean_queue_at_polling(profile)] * 2, abs=1e-6
    )
