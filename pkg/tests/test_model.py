""" Tests for model construction, validation and documents

Copyright (c) 2021 IdmFoundInHim, under MIT License
"""
import json

import numpy as np
import pytest
from hypothesis import given

from conftest import SWAP, UNIFORM2, cyclic, polling_models
from statepoll import (
    ModelValidationError,
    arrival_matrices,
    compatibility_check,
    essential_classes,
    load_model,
    model_from_mapping,
    model_to_mapping,
    permute_model,
    polling_model,
    routing_coincides,
    traffic_summary,
    validate_model,
)


def test_valid_cyclic_model_has_no_violations():
    m = polling_model(2, SWAP, SWAP, [0.1, 0.1], [1, 1], [1, 1])
    assert validate_model(m) == ()


def test_row_sum_violation_names_the_row():
    m = polling_model(
        2, [[0.5, 0.4], [0, 1]], SWAP, [0.1, 0.1], [1, 1], [1, 1]
    )
    (violation,) = validate_model(m)
    assert violation.path == "p[1]"
    assert "row sums to" in violation.message
    assert violation.defect == pytest.approx(0.1)


def test_nonpositive_tau_tilde_is_reported():
    m = polling_model(2, SWAP, SWAP, [0.1, 0.1], [1, 1], [0, 1])
    (violation,) = validate_model(m)
    assert violation.path == "tau_tilde[1]"
    assert violation.message == "tau_tilde must be positive"


def test_second_moment_below_square_is_reported():
    m = polling_model(
        2, SWAP, SWAP, [0.1, 0.1], [1, 2], [1, 1], tau2=[1, 3]
    )
    (violation,) = validate_model(m)
    assert violation.path == "tau2[2]"


def test_non_finite_entries_are_the_only_violations():
    p = [[float("nan"), 1], [1, 0]]
    m = polling_model(
        2, p, SWAP, [0.1, float("inf")], [1, 1], [1, 1], batch=(1, 1)
    )
    paths = [v.path for v in validate_model(m)]
    assert paths == ["p[1,1]", "lambda[2]"]
    m = polling_model(
        2, SWAP, SWAP, [0.1, 0.1], [1, 1], [1, 1], batch=(np.nan, 2)
    )
    (violation,) = validate_model(m)
    assert violation.path == "batch.mean"
    assert violation.message == "must be a finite number"


def test_documented_bounds_on_stations_and_batches():
    single = polling_model(1, [[1]], [[1]], [0.1], [1], [1])
    assert [v.path for v in validate_model(single)] == ["n"]
    m = polling_model(2, SWAP, SWAP, [0.1, 0.1], [1, 1], [1, 1], batch=(2, 3))
    assert validate_model(m) == ()
    m = polling_model(
        2, SWAP, SWAP, [0.1, 0.1], [1, 1], [1, 1], batch=(2, 1.5)
    )
    (violation,) = validate_model(m)
    assert violation.path == "batch.second"


def test_irreducible_two_cycle_is_one_class():
    assert essential_classes(np.array(SWAP)) == (frozenset({0, 1}),)


def test_identity_gives_two_absorbing_classes():
    assert essential_classes(np.eye(2)) == (frozenset({0}), frozenset({1}))


def test_inessential_station_is_left_out():
    p_tilde = np.array([[0, 1, 0], [1, 0, 0], [0.5, 0.5, 0]])
    assert essential_classes(p_tilde) == (frozenset({0, 1}),)


def test_compatibility_residuals_vanish_when_routing_coincides():
    m = polling_model(2, np.eye(2), np.eye(2), [1, 2], [1, 1], [1, 1])
    assert compatibility_check(m, essential_classes(m.p_tilde)) == (0, 0)


def test_compatibility_residual_of_reducible_p_tilde(caplog):
    m = polling_model(2, SWAP, np.eye(2), [1, 2], [0.1, 0.1], [1, 1])
    residuals = compatibility_check(m, essential_classes(m.p_tilde))
    assert residuals == pytest.approx((1.0, -1.0))
    assert "never ergodic" in caplog.text


def test_traffic_summary_examples():
    m = polling_model(2, SWAP, UNIFORM2, [0.1, 0.2], [1, 1], [0.5, 0.5])
    assert traffic_summary(m).rho_hat == pytest.approx(0.15)
    m = polling_model(2, SWAP, SWAP, [0.3, 0.3], [1, 1], [1, 1])
    summary = traffic_summary(m)
    assert summary.rho_hat == 0
    assert summary.load_sum == pytest.approx(0.6)
    assert not summary.degenerate


def test_degenerate_traffic_is_flagged():
    m = polling_model(2, SWAP, SWAP, [0.5, 0.5], [2, 2], [1, 1])
    assert traffic_summary(m).degenerate


@given(polling_models())
def test_arrival_matrices_are_outer_products(m):
    arrivals = arrival_matrices(m)
    assert np.allclose(arrivals.a_mat, m.tau[:, None] * m.lam[None, :])
    assert np.allclose(
        arrivals.a_tilde_mat, m.tau_tilde[:, None] * m.lam[None, :]
    )


def test_permutation_relabels_every_field():
    m = polling_model(
        3,
        cyclic(3),
        np.full((3, 3), 1 / 3),
        [0.1, 0.2, 0.3],
        [1, 2, 3],
        [4, 5, 6],
    )
    moved = permute_model(m, [2, 0, 1])
    assert moved.lam.tolist() == [0.3, 0.1, 0.2]
    assert moved.tau_tilde.tolist() == [6, 4, 5]
    assert moved.p[1, 2] == m.p[0, 1]
    with pytest.raises(ValueError):
        permute_model(m, [0, 0, 1])


def test_routing_coincides():
    assert routing_coincides(
        polling_model(2, SWAP, SWAP, [1, 1], [1, 1], [1, 1])
    )
    assert not routing_coincides(
        polling_model(2, SWAP, UNIFORM2, [1, 1], [1, 1], [1, 1])
    )


def test_document_round_trip_keeps_optional_blocks():
    m = polling_model(
        2,
        SWAP,
        UNIFORM2,
        [0.1, 0.2],
        [1, 1],
        [0.5, 0.5],
        [1, 1],
        [0.25, 0.25],
        (2, 6),
    )
    again = model_from_mapping(model_to_mapping(m))
    assert np.array_equal(again.p_tilde, m.p_tilde)
    assert again.batch == m.batch
    assert again.tau_tilde2.tolist() == [0.25, 0.25]


def test_missing_keys_are_violations():
    with pytest.raises(ModelValidationError) as err:
        model_from_mapping({"n": 2, "p": SWAP})
    paths = {v.path for v in err.value.violations}
    assert paths == {"p_tilde", "lambda", "tau", "tau_tilde"}


def test_bad_shape_is_a_violation():
    doc = model_to_mapping(
        polling_model(2, SWAP, SWAP, [1, 1], [1, 1], [1, 1])
    )
    doc["lambda"] = [1, 2, 3]
    with pytest.raises(ModelValidationError):
        model_from_mapping(doc)


def test_load_model_returns_raw_document(model_path):
    m, doc = load_model(model_path("cyclic"))
    assert m.n == 2
    assert doc["switchover"]["w"] == 0.5


def test_load_model_rejects_non_objects(tmp_path):
    target = tmp_path / "list.json"
    target.write_text(json.dumps([1, 2]))
    with pytest.raises(ModelValidationError):
        load_model(str(target))
