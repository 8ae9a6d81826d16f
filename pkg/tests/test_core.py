"""Tests for the core types: indexing helpers, tables, configurations, files.

The neighborhood codec is checked against hand-written digit expansions and
by full round-trips.  Random initial conditions are checked with chi-square
goodness-of-fit tests at pinned seeds (deterministic, no flake): the
density-balanced mode must make every ones-count equally likely.
"""

import json

import numpy as np
import pytest

from scamix import (
    Configuration,
    Geometry,
    Lut,
    Plut,
    ValidationError,
    as_deterministic,
    config_random,
    load_rule,
    lut_to_plut,
    make_lut,
    save_rule,
    validate_plut,
)
from scamix.core import MAX_STATES, digit_matrix, ind_digits, neighborhood_index, one_hot


# ---------------------------------------------------------------------------
# indexing helpers


def test_one_hot_basis_vector():
    v = one_hot(2, 4)
    assert v.tolist() == [0.0, 0.0, 1.0, 0.0]
    assert v.dtype == np.float64


@pytest.mark.parametrize("index", [-1, 4, 99])
def test_one_hot_rejects_out_of_range(index):
    with pytest.raises(ValidationError):
        one_hot(index, 4)


def test_ind_digits_hand_cases():
    # 1-based index, digits most significant first, each in [1, N]
    assert ind_digits(1, 2, 3) == (1, 1, 1)
    assert ind_digits(2, 2, 3) == (1, 1, 2)
    assert ind_digits(5, 2, 3) == (2, 1, 1)
    assert ind_digits(8, 2, 3) == (2, 2, 2)
    assert ind_digits(1, 3, 2) == (1, 1)
    assert ind_digits(9, 3, 2) == (3, 3)


@pytest.mark.parametrize("n_states,window", [(2, 3), (3, 3), (4, 1), (2, 5)])
def test_index_digit_round_trip(n_states, window):
    for i in range(1, n_states**window + 1):
        digits = ind_digits(i, n_states, window)
        assert len(digits) == window
        assert all(1 <= d <= n_states for d in digits)
        assert neighborhood_index(digits, n_states) == i


@pytest.mark.parametrize("i", [0, 9, -3])
def test_ind_digits_rejects_out_of_range(i):
    with pytest.raises(ValidationError):
        ind_digits(i, 2, 3)


def test_neighborhood_index_rejects_bad_digit():
    with pytest.raises(ValidationError):
        neighborhood_index((1, 3, 1), 2)
    with pytest.raises(ValidationError):
        neighborhood_index((0, 1), 2)


def test_digit_matrix_matches_ind_digits():
    for n_states, window in [(2, 3), (3, 3)]:
        mat = digit_matrix(n_states, window)
        assert mat.shape == (n_states**window, window)
        for k in range(mat.shape[0]):
            assert tuple(int(d) + 1 for d in mat[k]) == ind_digits(k + 1, n_states, window)
        assert not mat.flags.writeable


# ---------------------------------------------------------------------------
# geometry and configurations


def test_geometry_window():
    assert Geometry(10, 0).window == 1
    assert Geometry(10, 1).window == 3
    assert Geometry(10, 3).window == 7


@pytest.mark.parametrize("cells,radius", [(0, 1), (-2, 1), (5, -1), (3, 2)])
def test_geometry_rejects_bad_shape(cells, radius):
    with pytest.raises(ValidationError):
        Geometry(cells, radius)


def test_configuration_holds_frozen_states():
    cfg = Configuration(Geometry(4, 1), 2, [0, 1, 1, 0])
    assert cfg.states.dtype == np.uint8
    assert cfg.states.tolist() == [0, 1, 1, 0]
    with pytest.raises(ValueError):
        cfg.states[0] = 1


def test_configuration_rejects_bad_data():
    geo = Geometry(3, 1)
    with pytest.raises(ValidationError):
        Configuration(geo, 2, [0, 1])  # wrong length
    with pytest.raises(ValidationError):
        Configuration(geo, 2, [0, 1, 2])  # state out of range
    with pytest.raises(ValidationError):
        Configuration(geo, 1, [0, 0, 0])  # too few states
    with pytest.raises(ValidationError):
        Configuration(geo, MAX_STATES + 1, [0, 0, 0])


# ---------------------------------------------------------------------------
# deterministic tables


def test_lut_shape_and_freeze():
    lut = make_lut([0, 1, 1, 0, 1, 0, 0, 1], 2, 1)
    assert lut.window == 3
    assert lut.table_size == 8
    with pytest.raises(ValueError):
        lut.outputs[0] = 1


def test_lut_rejects_bad_outputs():
    with pytest.raises(ValidationError):
        make_lut([0, 1, 2, 0, 0, 0, 0, 0], 2, 1)  # output out of range
    with pytest.raises(ValidationError):
        make_lut([0, 1, 0], 2, 1)  # wrong table size
    with pytest.raises(ValidationError):
        make_lut([0, 0], 1, 0)  # too few states
    with pytest.raises(ValidationError):
        make_lut([0] * (MAX_STATES + 1), MAX_STATES + 1, 0)


# ---------------------------------------------------------------------------
# probabilistic tables


def test_plut_accepts_valid_rows():
    rows = np.array([[0.25, 0.75], [1.0, 0.0]])
    plut = Plut(2, 0, rows)
    assert plut.table_size == 2
    assert plut.window == 1
    assert not plut.rows.flags.writeable


def test_plut_rejects_bad_rows():
    good = np.full((8, 2), 0.5)
    Plut(2, 1, good)  # sanity
    bad = good.copy()
    bad[3] = [-0.1, 1.1]
    with pytest.raises(ValidationError, match="row 4"):
        Plut(2, 1, bad)
    bad = good.copy()
    bad[5] = [0.9, 0.3]
    with pytest.raises(ValidationError, match="row 6"):
        Plut(2, 1, bad)
    bad = good.copy()
    bad[0, 0] = np.nan
    with pytest.raises(ValidationError, match="row 1"):
        Plut(2, 1, bad)
    with pytest.raises(ValidationError):
        Plut(2, 1, np.full((4, 2), 0.5))  # wrong row count


def test_plut_row_sum_tolerance_boundary():
    rows = np.array([[0.5, 0.5 + 5e-10], [0.5, 0.5]])
    Plut(2, 0, rows)  # inside the documented tolerance
    rows = np.array([[0.5, 0.5 + 5e-9], [0.5, 0.5]])
    with pytest.raises(ValidationError):
        Plut(2, 0, rows)


def test_validate_plut_infers_shape():
    assert validate_plut(np.full((2, 2), 0.5)).radius == 0
    assert validate_plut(np.full((8, 2), 0.5)).radius == 1
    assert validate_plut(np.full((32, 2), 0.5)).radius == 2
    three = np.full((27, 3), 1.0 / 3.0)
    plut = validate_plut(three)
    assert (plut.n_states, plut.radius) == (3, 1)


@pytest.mark.parametrize("shape", [(6, 2), (4, 2), (9, 2), (12, 2), (9, 3)])
def test_validate_plut_rejects_non_window_row_counts(shape):
    with pytest.raises(ValidationError):
        validate_plut(np.full(shape, 1.0 / shape[1]))


def test_validate_plut_rejects_non_tables():
    with pytest.raises(ValidationError):
        validate_plut(np.zeros(8))
    with pytest.raises(ValidationError):
        validate_plut(np.zeros((8, 2, 1)))


# ---------------------------------------------------------------------------
# deterministic embedding round trip


def test_lut_to_plut_rows_are_one_hot():
    lut = make_lut([1, 0, 1, 1, 0, 0, 1, 0], 2, 1)
    plut = lut_to_plut(lut)
    expected = np.zeros((8, 2))
    expected[np.arange(8), lut.outputs] = 1.0
    assert np.array_equal(plut.rows, expected)


def test_as_deterministic_round_trip():
    lut = make_lut([2, 0, 1], 3, 0)
    back = as_deterministic(lut_to_plut(lut))
    assert back is not None
    assert np.array_equal(back.outputs, lut.outputs)
    assert (back.n_states, back.radius) == (3, 0)


def test_as_deterministic_rejects_mixtures():
    rows = np.full((8, 2), 0.5)
    assert as_deterministic(Plut(2, 1, rows)) is None
    rows = np.zeros((8, 2))
    rows[:, 0] = 1.0
    rows[3] = [1.0 - 1e-12, 1e-12]  # nearly but not exactly one-hot
    assert as_deterministic(Plut(2, 1, rows)) is None


# ---------------------------------------------------------------------------
# random initial conditions


def test_config_random_is_deterministic_per_seed():
    geo = Geometry(40, 1)
    a = config_random(geo, 3, "uniform", 7)
    b = config_random(geo, 3, "uniform", 7)
    c = config_random(geo, 3, "uniform", 8)
    assert np.array_equal(a.states, b.states)
    assert not np.array_equal(a.states, c.states)
    assert a.states.max() < 3


def test_config_random_accepts_generator():
    geo = Geometry(10, 1)
    a = config_random(geo, 2, "uniform", np.random.default_rng(5))
    b = config_random(geo, 2, "uniform", np.random.default_rng(5))
    assert np.array_equal(a.states, b.states)


def test_config_random_uniform_state_frequencies():
    # chi-square goodness of fit against the uniform distribution over
    # 4 states; critical value 11.345 (3 degrees of freedom, alpha = 0.01)
    geo = Geometry(12000, 1)
    cfg = config_random(geo, 4, "uniform", 123)
    counts = np.bincount(cfg.states, minlength=4)
    expected = 12000 / 4
    stat = ((counts - expected) ** 2 / expected).sum()
    assert stat < 11.345


def test_config_random_density_balanced_ones_counts_uniform():
    # the two-stage scheme makes every ones-count 0..M equally likely;
    # chi-square against uniform over 30 bins at M = 29 cells,
    # critical value 49.588 (29 degrees of freedom, alpha = 0.01)
    geo = Geometry(29, 1)
    rng = np.random.default_rng(123)
    draws = 3000
    ones = np.array(
        [config_random(geo, 2, "density-balanced", rng).states.sum() for _ in range(draws)]
    )
    counts = np.bincount(ones, minlength=30)
    expected = draws / 30
    stat = ((counts - expected) ** 2 / expected).sum()
    assert stat < 49.588


def test_config_random_rejects_bad_mode():
    geo = Geometry(10, 1)
    with pytest.raises(ValidationError):
        config_random(geo, 2, "clustered", 0)
    with pytest.raises(ValidationError):
        config_random(geo, 3, "density-balanced", 0)  # binary only


# ---------------------------------------------------------------------------
# rule files


def test_rule_file_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    rows = rng.random((8, 2))
    rows /= rows.sum(axis=1, keepdims=True)
    plut = Plut(2, 1, rows)
    path = tmp_path / "rule.json"
    save_rule(path, plut)
    back = load_rule(path)
    assert (back.n_states, back.radius) == (2, 1)
    assert np.array_equal(back.rows, plut.rows)


def test_rule_file_accepts_deterministic_tables(tmp_path):
    lut = make_lut([0, 1, 1, 1, 0, 1, 1, 0], 2, 1)
    path = tmp_path / "det.json"
    save_rule(path, lut)
    back = as_deterministic(load_rule(path))
    assert back is not None
    assert np.array_equal(back.outputs, lut.outputs)


def test_load_rule_rejects_malformed_documents(tmp_path):
    path = tmp_path / "bad.json"

    path.write_text("{not json")
    with pytest.raises(ValidationError):
        load_rule(path)

    path.write_text(json.dumps([1, 2, 3]))
    with pytest.raises(ValidationError):
        load_rule(path)

    path.write_text(json.dumps({"states": 2, "radius": 1}))
    with pytest.raises(ValidationError, match="rows"):
        load_rule(path)

    path.write_text(json.dumps({"states": "2", "radius": 1, "rows": [[1.0, 0.0]] * 8}))
    with pytest.raises(ValidationError):
        load_rule(path)

    path.write_text(json.dumps({"states": 2, "radius": 1, "rows": [[1.0, 0.0]] * 4}))
    with pytest.raises(ValidationError):
        load_rule(path)


def test_load_rule_rejects_non_finite_values(tmp_path):
    path = tmp_path / "nan.json"
    rows = [[1.0, 0.0]] * 8
    text = json.dumps({"states": 2, "radius": 1, "rows": rows})
    path.write_text(text.replace("1.0, 0.0", "NaN, 0.0", 1))
    with pytest.raises(ValidationError):
        load_rule(path)


def test_load_rule_rejects_bad_distributions(tmp_path):
    path = tmp_path / "bad.json"
    rows = [[1.0, 0.0]] * 8
    rows[2] = [0.7, 0.7]
    path.write_text(json.dumps({"states": 2, "radius": 1, "rows": rows}))
    with pytest.raises(ValidationError, match="row 3"):
        load_rule(path)
