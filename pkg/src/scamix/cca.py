"""Deterministic evolution of cell-wise probability distributions.

A stochastic automaton never needs to be sampled to know its cell-wise
state distributions: lifting each cell to a point of the probability
simplex and applying the multilinear rule below evolves the exact
distributions step by step.  The local rule for output component j is

    f_j(s_1, ..., s_R) = sum_i  P[i, j] * prod_m  s_m[digit_m(i)]

where i ranges over all N**R neighborhoods and digit_m(i) is the m-th
base-N digit of i-1.  For one-hot inputs the product picks out exactly one
table row, so deterministic automata evolve unchanged.

Everything here is double precision and deterministic; within one step the
per-cell summation order is fixed, so results are reproducible bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Configuration, Geometry, Plut, ValidationError, digit_matrix

SIMPLEX_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class ContinuousConfiguration:
    """One distribution over states per cell; rows live on the simplex."""

    geometry: Geometry
    cells: np.ndarray

    def __post_init__(self) -> None:
        cells = np.ascontiguousarray(self.cells, dtype=np.float64)
        if cells.ndim != 2 or cells.shape[0] != self.geometry.cells:
            raise ValidationError(
                f"expected ({self.geometry.cells}, N) cell distributions, got {cells.shape}"
            )
        _check_simplex(cells)
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    @property
    def n_states(self) -> int:
        return self.cells.shape[1]


@dataclass(frozen=True, eq=False)
class ContinuousTrajectory:
    """Distributions for every cell at steps 0..T (step 0 = initial)."""

    geometry: Geometry
    probs: np.ndarray

    def __post_init__(self) -> None:
        probs = np.ascontiguousarray(self.probs, dtype=np.float64)
        if probs.ndim != 3 or probs.shape[1] != self.geometry.cells:
            raise ValidationError(f"expected (T+1, M, N) probabilities, got {probs.shape}")
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)

    @property
    def steps(self) -> int:
        return self.probs.shape[0] - 1

    @property
    def n_states(self) -> int:
        return self.probs.shape[2]

    def step(self, t: int) -> ContinuousConfiguration:
        return ContinuousConfiguration(self.geometry, self.probs[t])


def _check_simplex(cells: np.ndarray) -> None:
    if not np.isfinite(cells).all():
        raise ValidationError("non-finite probability entry")
    if (cells < 0).any() or (cells > 1).any():
        raise ValidationError("probability entry outside [0, 1]")
    off = np.abs(cells.sum(axis=-1) - 1.0)
    if (off > SIMPLEX_TOL).any():
        raise ValidationError(
            f"cell distribution sums off by {off.max():.3g}, tolerance {SIMPLEX_TOL}"
        )


def lift(config: Configuration) -> ContinuousConfiguration:
    """One-hot embedding of a discrete configuration (exact, no smoothing)."""
    m = config.geometry.cells
    cells = np.zeros((m, config.n_states))
    cells[np.arange(m), config.states] = 1.0
    return ContinuousConfiguration(config.geometry, cells)


def cca_local_eval(plut: Plut, window) -> np.ndarray:
    """Reference evaluation of the local rule on one window of distributions.

    Accumulates one product term per neighborhood index, with no
    factorization, exactly as the defining sum is written.  Optimized paths
    must agree with this one to within 1e-12.
    """
    win = np.ascontiguousarray(window, dtype=np.float64)
    if win.shape != (plut.window, plut.n_states):
        raise ValidationError(
            f"expected window shape ({plut.window}, {plut.n_states}), got {win.shape}"
        )
    _check_simplex(win)
    digits = digit_matrix(plut.n_states, plut.window)
    out = np.zeros(plut.n_states)
    for i in range(plut.table_size):
        weight = 1.0
        for m in range(plut.window):
            weight *= win[m, digits[i, m]]
        out += weight * plut.rows[i]
    return out


def _window_weights(cells: np.ndarray, digits: np.ndarray, radius: int) -> np.ndarray:
    """Probability of each neighborhood at each cell: (..., M, N**R).

    cells has shape (..., M, N); cell i's window spans cells i-r..i+r on the
    ring.  Entry [..., i, k] is the product over window positions of the
    probability that the position holds the state demanded by neighborhood k.
    """
    weights = None
    for m in range(digits.shape[1]):
        shifted = np.roll(cells, radius - m, axis=-2)
        part = shifted[..., digits[:, m]]
        weights = part if weights is None else weights * part
    return weights


def _step_array(rows: np.ndarray, cells: np.ndarray, digits: np.ndarray, radius: int) -> np.ndarray:
    return _window_weights(cells, digits, radius) @ rows


def cca_step(plut: Plut, config: ContinuousConfiguration) -> ContinuousConfiguration:
    """One synchronous step of the distribution evolution."""
    if plut.n_states != config.n_states:
        raise ValidationError(
            f"rule has {plut.n_states} states but configuration has {config.n_states}"
        )
    if plut.radius != config.geometry.radius:
        raise ValidationError(
            f"rule radius {plut.radius} does not match geometry radius {config.geometry.radius}"
        )
    digits = digit_matrix(plut.n_states, plut.window)
    nxt = _step_array(plut.rows, config.cells, digits, plut.radius)
    _renormalize(nxt)
    return ContinuousConfiguration(config.geometry, nxt)


def _renormalize(cells: np.ndarray) -> None:
    """Snap rows back onto the simplex in place.

    Rounding leaves row sums at 1 +/- a few ulp; without this, iteration
    amplifies the offset by roughly the window size per step, which overwhelms
    long runs.  Clipping first keeps entries in [0, 1]; dividing by the row
    sum (which is at least the largest entry) cannot push them back out.
    One-hot rows sum to exactly 1, so deterministic evolution is untouched.
    """
    np.clip(cells, 0.0, 1.0, out=cells)
    cells /= cells.sum(axis=-1, keepdims=True)


def cca_evolve(
    plut: Plut, init: Configuration | ContinuousConfiguration, steps: int
) -> ContinuousTrajectory:
    """Evolve distributions for ``steps`` steps; discrete inits are lifted."""
    if steps < 0:
        raise ValidationError(f"step count must be nonnegative, got {steps}")
    start = lift(init) if isinstance(init, Configuration) else init
    if plut.n_states != start.n_states:
        raise ValidationError(
            f"rule has {plut.n_states} states but initial condition has {start.n_states}"
        )
    if plut.radius != start.geometry.radius:
        raise ValidationError(
            f"rule radius {plut.radius} does not match geometry radius {start.geometry.radius}"
        )
    digits = digit_matrix(plut.n_states, plut.window)
    probs = np.empty((steps + 1, start.geometry.cells, start.n_states))
    probs[0] = start.cells
    for t in range(steps):
        nxt = _step_array(plut.rows, probs[t], digits, plut.radius)
        _renormalize(nxt)
        probs[t + 1] = nxt
    return ContinuousTrajectory(start.geometry, probs)


def cca_converged(
    config: ContinuousConfiguration, epsilon: float = 0.001
) -> tuple[bool, int | None]:
    """Whether all cells agree to within ``epsilon``, and the majority state.

    Convergence means the spread (max minus min over cells) of the state-1
    probability is below epsilon.  The majority state is 1 when the mean
    state-1 probability exceeds 0.5, else 0; it is None when not converged.
    Binary rules only.
    """
    if config.n_states != 2:
        raise ValidationError("convergence detection is defined for 2 states only")
    if epsilon <= 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    p1 = config.cells[:, 1]
    if p1.max() - p1.min() < epsilon:
        return True, int(p1.mean() > 0.5)
    return False, None


def density_trace(traj: ContinuousTrajectory) -> np.ndarray:
    """Mean state-1 probability at each step (binary rules only)."""
    if traj.n_states != 2:
        raise ValidationError("density traces are defined for 2 states only")
    return traj.probs[:, :, 1].mean(axis=1)
