"""Seeded stochastic simulation of probabilistic rules.

Randomness contract: all draws come from numpy's PCG64 generator.  A run is
addressed by a master seed plus a tuple of nonnegative integers (the stream
path), combined through ``SeedSequence(master, spawn_key=path)``, so any
sample of any experiment can be reproduced in isolation and concurrent tasks
get provably independent streams.  Within one step every cell consumes one
uniform draw, in cell order 0..M-1; vector draws fill in that same order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bitpack import pack_bits
from .cca import ContinuousTrajectory
from .core import Configuration, Geometry, Lut, Plut, ValidationError

#: samples per batch in estimate_pi; bounds the pre-drawn uniform buffer
_ESTIMATE_CHUNK = 4096


def derive_rng(master: int, *path: int) -> np.random.Generator:
    """PCG64 stream for (master seed, derivation path)."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master, spawn_key=path)))


@dataclass(frozen=True, eq=False)
class SpaceTimeDiagram:
    """Configurations at steps 0..T, row 0 the initial condition."""

    geometry: Geometry
    n_states: int
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.uint8)
        if rows.ndim != 2 or rows.shape[1] != self.geometry.cells:
            raise ValidationError(f"expected (T+1, {self.geometry.cells}) rows, got {rows.shape}")
        if rows.size and rows.max() >= self.n_states:
            raise ValidationError(f"state {rows.max()} out of range for {self.n_states} states")
        rows.flags.writeable = False
        object.__setattr__(self, "rows", rows)

    @property
    def steps(self) -> int:
        return self.rows.shape[0] - 1

    def step(self, t: int) -> Configuration:
        return Configuration(self.geometry, self.n_states, self.rows[t])

    def packed(self) -> np.ndarray:
        """Rows bit-packed 64 cells per word (binary diagrams only)."""
        if self.n_states != 2:
            raise ValidationError("bit packing applies to binary diagrams only")
        return pack_bits(self.rows)


def _codes(states: np.ndarray, n_states: int, radius: int) -> np.ndarray:
    """0-based neighborhood index of every cell; states shape (..., M)."""
    window = 2 * radius + 1
    wide = states.astype(np.int64)
    codes = np.zeros_like(wide)
    for m in range(window):
        codes = codes * n_states + np.roll(wide, radius - m, axis=-1)
    return codes


def _check_rule_config(plut: Plut, config: Configuration) -> None:
    if plut.n_states != config.n_states:
        raise ValidationError(
            f"rule has {plut.n_states} states but configuration has {config.n_states}"
        )
    if plut.radius != config.geometry.radius:
        raise ValidationError(
            f"rule radius {plut.radius} does not match geometry radius {config.geometry.radius}"
        )


def _draw_states(cdf: np.ndarray, codes: np.ndarray, uniforms: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw per cell: smallest state whose cumulative mass > u."""
    return (uniforms[..., None] >= cdf[codes][..., :-1]).sum(axis=-1, dtype=np.uint8)


def sca_step(plut: Plut, config: Configuration, rng: np.random.Generator) -> Configuration:
    """One synchronous step: every cell samples its pLUT row independently."""
    _check_rule_config(plut, config)
    cdf = np.cumsum(plut.rows, axis=1)
    codes = _codes(config.states, plut.n_states, plut.radius)
    nxt = _draw_states(cdf, codes, rng.random(config.geometry.cells))
    return Configuration(config.geometry, plut.n_states, nxt)


def sca_evolve(
    plut: Plut, init: Configuration, steps: int, seed: int, stream: tuple[int, ...] = ()
) -> SpaceTimeDiagram:
    """Simulate ``steps`` steps from the PCG64 stream (seed, *stream)."""
    if steps < 0:
        raise ValidationError(f"step count must be nonnegative, got {steps}")
    _check_rule_config(plut, init)
    rng = derive_rng(seed, *stream)
    cdf = np.cumsum(plut.rows, axis=1)
    m = init.geometry.cells
    rows = np.empty((steps + 1, m), dtype=np.uint8)
    rows[0] = init.states
    for t in range(steps):
        codes = _codes(rows[t], plut.n_states, plut.radius)
        rows[t + 1] = _draw_states(cdf, codes, rng.random(m))
    return SpaceTimeDiagram(init.geometry, plut.n_states, rows)


def lut_evolve(lut: Lut, init: Configuration, steps: int) -> SpaceTimeDiagram:
    """Deterministic evolution of a lookup-table rule (no randomness)."""
    if steps < 0:
        raise ValidationError(f"step count must be nonnegative, got {steps}")
    if lut.n_states != init.n_states:
        raise ValidationError(
            f"rule has {lut.n_states} states but configuration has {init.n_states}"
        )
    if lut.radius != init.geometry.radius:
        raise ValidationError(
            f"rule radius {lut.radius} does not match geometry radius {init.geometry.radius}"
        )
    rows = np.empty((steps + 1, init.geometry.cells), dtype=np.uint8)
    rows[0] = init.states
    for t in range(steps):
        rows[t + 1] = lut.outputs[_codes(rows[t], lut.n_states, lut.radius)]
    return SpaceTimeDiagram(init.geometry, lut.n_states, rows)


def mixture_step(
    components: list[tuple[float, Lut]], config: Configuration, rng: np.random.Generator
) -> Configuration:
    """One step of a stochastic mixture of deterministic rules.

    Each cell independently selects component i with probability alpha_i and
    applies that rule to its own window.  One uniform draw per cell, in cell
    order.  All components must share radius and state count (widen narrower
    rules first).
    """
    if not components:
        raise ValidationError("a mixture needs at least one component")
    alphas = np.array([a for a, _ in components], dtype=np.float64)
    luts = [lut for _, lut in components]
    if (alphas < 0).any():
        raise ValidationError(f"negative mixture weight {alphas.min()}")
    if abs(alphas.sum() - 1.0) > 1e-9:
        raise ValidationError(f"mixture weights sum to {alphas.sum()!r}, expected 1")
    first = luts[0]
    for lut in luts[1:]:
        if lut.radius != first.radius:
            raise ValidationError("mixture components have different radii; widen them first")
        if lut.n_states != first.n_states:
            raise ValidationError("mixture components have different state counts")
    if first.n_states != config.n_states:
        raise ValidationError(
            f"mixture has {first.n_states} states but configuration has {config.n_states}"
        )
    if first.radius != config.geometry.radius:
        raise ValidationError(
            f"mixture radius {first.radius} does not match geometry radius "
            f"{config.geometry.radius}"
        )
    outputs = np.stack([lut.outputs for lut in luts])
    cum = np.cumsum(alphas)
    u = rng.random(config.geometry.cells)
    chosen = np.minimum(np.searchsorted(cum, u, side="right"), len(luts) - 1)
    codes = _codes(config.states, first.n_states, first.radius)
    return Configuration(config.geometry, first.n_states, outputs[chosen, codes])


def _evolve_batch(
    plut: Plut, init_states: np.ndarray, steps: int, uniforms: np.ndarray
) -> np.ndarray:
    """Evolve a batch of runs with pre-drawn uniforms.

    init_states has shape (B, M) and uniforms (B, steps, M); run b consumes
    uniforms[b, t] at step t, exactly the draws sca_evolve would make, so a
    batched run is bitwise identical to B independent runs.  Returns
    (B, steps+1, M).
    """
    cdf = np.cumsum(plut.rows, axis=1)
    batch, m = init_states.shape
    rows = np.empty((batch, steps + 1, m), dtype=np.uint8)
    rows[:, 0] = init_states
    for t in range(steps):
        codes = _codes(rows[:, t], plut.n_states, plut.radius)
        rows[:, t + 1] = _draw_states(cdf, codes, uniforms[:, t])
    return rows


def estimate_pi(
    plut: Plut, init: Configuration, steps: int, samples: int, seed: int
) -> ContinuousTrajectory:
    """Monte-Carlo estimate of the cell-wise state distributions.

    Runs ``samples`` independent simulations (sample i uses the stream
    (seed, i), so any one of them can be reproduced with sca_evolve) and
    returns per (step, cell, state) frequencies.  Counts are integers and
    each sample lands in exactly one state, so the frequencies of every
    (step, cell) are exact ratios summing to ``samples``/``samples``.
    """
    if samples < 1:
        raise ValidationError(f"need at least one sample, got {samples}")
    _check_rule_config(plut, init)
    m = init.geometry.cells
    counts = np.zeros((steps + 1, m, plut.n_states), dtype=np.int64)
    init_row = init.states[None, :]
    for start in range(0, samples, _ESTIMATE_CHUNK):
        batch = min(_ESTIMATE_CHUNK, samples - start)
        uniforms = np.empty((batch, steps, m))
        for b in range(batch):
            uniforms[b] = derive_rng(seed, start + b).random((steps, m))
        rows = _evolve_batch(plut, np.repeat(init_row, batch, axis=0), steps, uniforms)
        for s in range(plut.n_states):
            counts[:, :, s] += (rows == s).sum(axis=0)
    return ContinuousTrajectory(init.geometry, counts / samples)
