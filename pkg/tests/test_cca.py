"""Tests for the distribution-evolution engine.

The vectorized step is checked cell-by-cell against the reference
per-window evaluator (which accumulates one product term per neighborhood,
with no factorization) and against a hand-computed radius-0 case.  The
evolution must keep every cell on the probability simplex, embed
deterministic rules exactly, and be linear in the lookup table.
"""

import numpy as np
import pytest

from scamix import (
    Configuration,
    ContinuousConfiguration,
    ContinuousTrajectory,
    Geometry,
    Plut,
    ValidationError,
    cca_converged,
    cca_evolve,
    cca_local_eval,
    cca_step,
    config_random,
    density_trace,
    eca_lut,
    lift,
    lut_evolve,
    lut_to_plut,
    mixture_plut,
)


def random_plut(rng, n_states=2, radius=1):
    rows = rng.random((n_states ** (2 * radius + 1), n_states))
    rows /= rows.sum(axis=1, keepdims=True)
    return Plut(n_states, radius, rows)


def random_simplex_config(rng, cells, n_states, radius=1):
    probs = rng.random((cells, n_states))
    probs /= probs.sum(axis=1, keepdims=True)
    return ContinuousConfiguration(Geometry(cells, radius), probs)


# ---------------------------------------------------------------------------
# lifting


def test_lift_is_exact_one_hot():
    cfg = Configuration(Geometry(5, 1), 3, [0, 2, 1, 2, 0])
    lifted = lift(cfg)
    expected = np.zeros((5, 3))
    expected[np.arange(5), cfg.states] = 1.0
    assert np.array_equal(lifted.cells, expected)


def test_continuous_configuration_validates_simplex():
    geo = Geometry(3, 1)
    ContinuousConfiguration(geo, np.full((3, 2), 0.5))  # sanity
    with pytest.raises(ValidationError):
        ContinuousConfiguration(geo, np.full((3, 2), 0.6))  # rows sum to 1.2
    with pytest.raises(ValidationError):
        ContinuousConfiguration(geo, np.array([[1.2, -0.2]] * 3))
    with pytest.raises(ValidationError):
        ContinuousConfiguration(geo, np.full((4, 2), 0.5))  # wrong cell count


# ---------------------------------------------------------------------------
# the local evaluation


def test_local_eval_hand_case_radius_zero():
    # window of one cell: output j = sum_i P[i, j] * s[i]
    plut = Plut(2, 0, np.array([[0.3, 0.7], [0.2, 0.8]]))
    out = cca_local_eval(plut, np.array([[0.4, 0.6]]))
    assert np.abs(out - [0.4 * 0.3 + 0.6 * 0.2, 0.4 * 0.7 + 0.6 * 0.8]).max() < 1e-15


def test_local_eval_hand_case_radius_one():
    # fully concentrated window picks out exactly one table row
    rng = np.random.default_rng(0)
    plut = random_plut(rng)
    window = np.array([[0.0, 1.0], [1.0, 0.0], [0.0, 1.0]])  # states 1,0,1 -> code 5
    assert np.array_equal(cca_local_eval(plut, window), plut.rows[5])


def test_local_eval_rejects_bad_windows():
    plut = Plut(2, 0, np.array([[0.3, 0.7], [0.2, 0.8]]))
    with pytest.raises(ValidationError):
        cca_local_eval(plut, np.array([[0.4, 0.7]]))  # off the simplex
    with pytest.raises(ValidationError):
        cca_local_eval(plut, np.array([[0.5, 0.5], [0.5, 0.5]]))  # wrong shape


@pytest.mark.parametrize("n_states,radius", [(2, 1), (3, 1), (2, 2), (4, 0)])
def test_step_matches_reference_evaluator(n_states, radius):
    rng = np.random.default_rng(7)
    plut = random_plut(rng, n_states, radius)
    cfg = random_simplex_config(rng, 9, n_states, radius)
    stepped = cca_step(plut, cfg).cells
    window = 2 * radius + 1
    padded = np.vstack([cfg.cells[-radius:], cfg.cells, cfg.cells[:radius]]) if radius else cfg.cells
    for c in range(9):
        ref = cca_local_eval(plut, padded[c : c + window])
        assert np.abs(stepped[c] - ref).max() < 1e-12


# ---------------------------------------------------------------------------
# evolution properties


def test_evolution_stays_on_simplex():
    rng = np.random.default_rng(11)
    plut = random_plut(rng, 3, 1)
    cfg = random_simplex_config(rng, 20, 3)
    traj = cca_evolve(plut, cfg, 100)
    sums = traj.probs.sum(axis=2)
    assert np.abs(sums - 1.0).max() < 1e-12
    assert traj.probs.min() >= 0.0
    assert traj.probs.max() <= 1.0


def test_step_is_linear_in_the_table():
    # mixing tables then stepping equals stepping then mixing
    rng = np.random.default_rng(3)
    components = [(0.5, eca_lut(184)), (0.3, eca_lut(232)), (0.2, eca_lut(150))]
    mixed = mixture_plut(components)
    cfg = random_simplex_config(rng, 12, 2)
    direct = cca_step(mixed, cfg).cells
    combined = sum(a * cca_step(lut_to_plut(lut), cfg).cells for a, lut in components)
    assert np.abs(direct - combined).max() < 1e-12


def test_deterministic_rules_evolve_one_hot_exactly():
    geo = Geometry(13, 1)
    init = config_random(geo, 2, "uniform", 5)
    for rule in (30, 90, 110, 184):
        lut = eca_lut(rule)
        discrete = lut_evolve(lut, init, 12)
        traj = cca_evolve(lut_to_plut(lut), init, 12)
        expected = np.zeros((13, 13, 2))
        np.put_along_axis(expected, discrete.rows[..., None].astype(np.int64), 1.0, axis=2)
        assert np.array_equal(traj.probs, expected)


def test_evolve_accepts_discrete_and_lifted_inits_identically():
    rng = np.random.default_rng(9)
    plut = random_plut(rng)
    init = config_random(Geometry(10, 1), 2, "uniform", 2)
    a = cca_evolve(plut, init, 4).probs
    b = cca_evolve(plut, lift(init), 4).probs
    assert np.array_equal(a, b)


def test_evolve_validates_inputs():
    rng = np.random.default_rng(1)
    plut = random_plut(rng)
    init = config_random(Geometry(10, 1), 2, "uniform", 0)
    with pytest.raises(ValidationError):
        cca_evolve(plut, init, -1)
    with pytest.raises(ValidationError):
        cca_evolve(plut, config_random(Geometry(10, 2), 2, "uniform", 0), 3)
    with pytest.raises(ValidationError):
        cca_evolve(random_plut(rng, 3, 1), init, 3)


def test_trajectory_accessors():
    rng = np.random.default_rng(4)
    plut = random_plut(rng)
    init = config_random(Geometry(8, 1), 2, "uniform", 1)
    traj = cca_evolve(plut, init, 6)
    assert traj.steps == 6
    assert traj.n_states == 2
    assert traj.probs.shape == (7, 8, 2)
    assert np.array_equal(traj.step(3).cells, traj.probs[3])
    with pytest.raises(ValueError):
        traj.probs[0, 0, 0] = 0.5


# ---------------------------------------------------------------------------
# convergence detection and density


def test_cca_converged_detects_agreement():
    geo = Geometry(4, 1)
    tight = ContinuousConfiguration(
        geo, np.column_stack([[0.2, 0.2001, 0.1999, 0.2], [0.8, 0.7999, 0.8001, 0.8]])
    )
    ok, majority = cca_converged(tight, epsilon=0.001)
    assert ok and majority == 1
    ok, majority = cca_converged(tight, epsilon=0.0001)
    assert not ok and majority is None


def test_cca_converged_majority_zero():
    geo = Geometry(3, 1)
    cfg = ContinuousConfiguration(geo, np.column_stack([[0.9, 0.9, 0.9], [0.1, 0.1, 0.1]]))
    assert cca_converged(cfg) == (True, 0)


def test_cca_converged_validates():
    geo = Geometry(3, 1)
    ternary = ContinuousConfiguration(geo, np.full((3, 3), 1.0 / 3.0))
    with pytest.raises(ValidationError):
        cca_converged(ternary)
    binary = ContinuousConfiguration(geo, np.full((3, 2), 0.5))
    with pytest.raises(ValidationError):
        cca_converged(binary, epsilon=0.0)


def test_density_trace_values():
    geo = Geometry(2, 0)
    probs = np.array(
        [
            [[1.0, 0.0], [0.0, 1.0]],
            [[0.25, 0.75], [0.75, 0.25]],
        ]
    )
    traj = ContinuousTrajectory(geo, probs)
    assert np.array_equal(density_trace(traj), [0.5, 0.5])
    with pytest.raises(ValidationError):
        density_trace(ContinuousTrajectory(geo, np.full((1, 2, 3), 1.0 / 3.0)))
