"""Core types for one-dimensional cellular automata on a ring.

States are identified by 0-based integer indices ``0..N-1``; the equivalent
one-hot basis vector is derived with :func:`one_hot`.  Neighborhood indices
follow the 1-based convention used throughout the documentation: neighborhood
``i`` (``1 <= i <= N**R``) consists of the cell states ``ind_digits(i) - 1``,
left to right.  Arrays are stored 0-based.

A probabilistic lookup table (:class:`Plut`) stores one row per neighborhood;
row ``k`` is the distribution of the next cell state conditioned on the
neighborhood with index ``k+1`` (1-based ``k+1``).  Deterministic tables
(:class:`Lut`) store one output state per neighborhood.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

MAX_STATES = 16
MAX_TABLE = 2**24
ROW_SUM_TOL = 1e-9


class ValidationError(ValueError):
    """Raised when supplied data violates a documented constraint."""


def one_hot(index: int, n_states: int) -> np.ndarray:
    """Basis vector for a state index: entry ``index`` is 1, the rest 0."""
    if not 0 <= index < n_states:
        raise ValidationError(f"state index {index} out of range for {n_states} states")
    v = np.zeros(n_states)
    v[index] = 1.0
    return v


def ind_digits(i: int, n_states: int, window: int) -> tuple[int, ...]:
    """Digits (1-based) of neighborhood index ``i``.

    Returns the ``window`` base-``n_states`` digits of ``i - 1``, most
    significant first, each shifted up by one so digits lie in ``[1, N]``.
    The m-th digit identifies the state of the m-th cell of the window
    (left to right).
    """
    table = n_states**window
    if not 1 <= i <= table:
        raise ValidationError(f"neighborhood index {i} out of range [1, {table}]")
    rem = i - 1
    digits = []
    for _ in range(window):
        rem, d = divmod(rem, n_states)
        digits.append(d + 1)
    return tuple(reversed(digits))


def neighborhood_index(digits: tuple[int, ...] | list[int], n_states: int) -> int:
    """Inverse of :func:`ind_digits`: 1-based index of a digit vector."""
    i = 0
    for d in digits:
        if not 1 <= d <= n_states:
            raise ValidationError(f"digit {d} out of range [1, {n_states}]")
        i = i * n_states + (d - 1)
    return i + 1


@lru_cache(maxsize=8)
def digit_matrix(n_states: int, window: int) -> np.ndarray:
    """All neighborhood digit vectors, 0-based, as an (N**R, R) array.

    Row ``k`` holds the cell states of neighborhood ``k+1`` (1-based), i.e.
    ``ind_digits(k+1) - 1``.
    """
    table = n_states**window
    codes = np.arange(table)
    cols = []
    for m in range(window):
        cols.append((codes // n_states ** (window - 1 - m)) % n_states)
    out = np.stack(cols, axis=1).astype(np.uint8)
    out.flags.writeable = False
    return out


def _check_limits(n_states: int, window: int) -> None:
    if n_states < 2:
        raise ValidationError(f"need at least 2 states, got {n_states}")
    if n_states > MAX_STATES:
        raise ValidationError(f"{n_states} states exceeds the supported maximum {MAX_STATES}")
    if n_states**window > MAX_TABLE:
        raise ValidationError(
            f"table size {n_states}**{window} exceeds the supported maximum {MAX_TABLE}"
        )


def _freeze(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Geometry:
    """Ring of ``cells`` cells with a symmetric neighborhood of ``radius``.

    The boundary is periodic.  The window size is ``2 * radius + 1`` and may
    not exceed the number of cells (rules are typically much narrower than
    the lattice).
    """

    cells: int
    radius: int

    def __post_init__(self) -> None:
        if self.cells < 1:
            raise ValidationError(f"need at least one cell, got {self.cells}")
        if self.radius < 0:
            raise ValidationError(f"radius must be nonnegative, got {self.radius}")
        if self.window > self.cells:
            raise ValidationError(
                f"window {self.window} does not fit on a ring of {self.cells} cells"
            )

    @property
    def window(self) -> int:
        return 2 * self.radius + 1


@dataclass(frozen=True, eq=False)
class Configuration:
    """States of every cell on the ring at one instant."""

    geometry: Geometry
    n_states: int
    states: np.ndarray

    def __post_init__(self) -> None:
        states = np.ascontiguousarray(self.states, dtype=np.uint8)
        if states.shape != (self.geometry.cells,):
            raise ValidationError(
                f"expected {self.geometry.cells} cell states, got shape {states.shape}"
            )
        if self.n_states < 2 or self.n_states > MAX_STATES:
            raise ValidationError(f"unsupported state count {self.n_states}")
        if states.size and states.max() >= self.n_states:
            raise ValidationError(
                f"cell state {states.max()} out of range for {self.n_states} states"
            )
        object.__setattr__(self, "states", _freeze(states))


@dataclass(frozen=True, eq=False)
class Lut:
    """Deterministic lookup table: one output state per neighborhood."""

    n_states: int
    radius: int
    outputs: np.ndarray

    def __post_init__(self) -> None:
        _check_limits(self.n_states, self.window)
        outputs = np.ascontiguousarray(self.outputs, dtype=np.uint8)
        if outputs.shape != (self.table_size,):
            raise ValidationError(
                f"expected {self.table_size} outputs, got shape {outputs.shape}"
            )
        if outputs.size and outputs.max() >= self.n_states:
            raise ValidationError(
                f"output state {outputs.max()} out of range for {self.n_states} states"
            )
        object.__setattr__(self, "outputs", _freeze(outputs))

    @property
    def window(self) -> int:
        return 2 * self.radius + 1

    @property
    def table_size(self) -> int:
        return self.n_states**self.window


@dataclass(frozen=True, eq=False)
class Plut:
    """Probabilistic lookup table: one next-state distribution per neighborhood.

    Row ``k`` (0-based) is the distribution conditioned on the neighborhood
    with 1-based index ``k + 1``.  Rows must be genuine distributions: entries
    in [0, 1] summing to 1 within ``ROW_SUM_TOL``.  Inputs are never
    renormalized; out-of-tolerance rows are rejected so data errors stay
    visible.
    """

    n_states: int
    radius: int
    rows: np.ndarray

    def __post_init__(self) -> None:
        rows = np.ascontiguousarray(self.rows, dtype=np.float64)
        _check_rows(rows, self.n_states, self.window, ROW_SUM_TOL)
        object.__setattr__(self, "rows", _freeze(rows))

    @property
    def window(self) -> int:
        return 2 * self.radius + 1

    @property
    def table_size(self) -> int:
        return self.n_states**self.window


def _check_rows(rows: np.ndarray, n_states: int, window: int, tol: float) -> None:
    _check_limits(n_states, window)
    table = n_states**window
    if rows.shape != (table, n_states):
        raise ValidationError(
            f"expected table shape ({table}, {n_states}), got {rows.shape}"
        )
    if not np.isfinite(rows).all():
        bad = int(np.argwhere(~np.isfinite(rows).all(axis=1))[0, 0])
        raise ValidationError(f"row {bad + 1}: non-finite entry")
    if (rows < 0).any():
        bad = int(np.argwhere((rows < 0).any(axis=1))[0, 0])
        raise ValidationError(f"row {bad + 1}: negative entry {rows[bad].min()}")
    if (rows > 1).any():
        bad = int(np.argwhere((rows > 1).any(axis=1))[0, 0])
        raise ValidationError(f"row {bad + 1}: entry {rows[bad].max()} exceeds 1")
    sums = rows.sum(axis=1)
    off = np.abs(sums - 1.0)
    if (off > tol).any():
        bad = int(off.argmax())
        raise ValidationError(
            f"row {bad + 1}: entries sum to {sums[bad]!r}, outside 1 +/- {tol}"
        )


def validate_plut(rows, tol: float = ROW_SUM_TOL) -> Plut:
    """Validate raw rows and build a :class:`Plut`.

    ``rows`` is anything array-like of shape (N**R, N); the state count is
    taken from the row length and the window size from the row count.  Every
    entry must lie in [0, 1] and every row must sum to 1 within ``tol``.
    Raises :class:`ValidationError` naming the first offending row (1-based).
    """
    arr = np.ascontiguousarray(rows, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"expected a 2-d table, got shape {arr.shape}")
    n_states = arr.shape[1]
    window = _infer_window(arr.shape[0], n_states)
    _check_rows(arr, n_states, window, tol)
    return Plut(n_states, (window - 1) // 2, arr)


def _infer_window(n_rows: int, n_states: int) -> int:
    if n_states >= 2:
        window = 1
        size = n_states
        while size < n_rows and window <= 64:
            window += 2
            size = n_states**window
        if size == n_rows and window % 2 == 1:
            return window
    raise ValidationError(
        f"{n_rows} rows of width {n_states} do not form an odd-window table"
    )


def make_lut(outputs, n_states: int, radius: int) -> Lut:
    """Build a deterministic table from a list of output states."""
    return Lut(n_states, radius, np.asarray(outputs))


def lut_to_plut(lut: Lut) -> Plut:
    """Embed a deterministic table as a pLUT with one-hot rows."""
    rows = np.zeros((lut.table_size, lut.n_states))
    rows[np.arange(lut.table_size), lut.outputs] = 1.0
    return Plut(lut.n_states, lut.radius, rows)


def as_deterministic(plut: Plut) -> Lut | None:
    """Return the equivalent Lut when every row is exactly one-hot, else None."""
    hits = plut.rows == 1.0
    if (hits.sum(axis=1) == 1).all() and (plut.rows[~hits] == 0.0).all():
        return Lut(plut.n_states, plut.radius, plut.rows.argmax(axis=1))
    return None


def config_random(geometry: Geometry, n_states: int, mode: str, seed) -> Configuration:
    """Random configuration, deterministic given the seed.

    mode="uniform": every cell independently uniform over the states.
    mode="density-balanced" (binary only): first draw p uniform on [0, 1],
    then set each cell to state 0 with probability p.  Under this two-stage
    scheme every count of ones is equally likely, so initial densities are
    uniformly distributed.

    ``seed`` may be an integer or a ``numpy.random.Generator``.
    """
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    m = geometry.cells
    if mode == "uniform":
        states = rng.integers(0, n_states, size=m, dtype=np.uint8)
    elif mode == "density-balanced":
        if n_states != 2:
            raise ValidationError("density-balanced initial conditions require 2 states")
        p = rng.random()
        states = (rng.random(m) >= p).astype(np.uint8)
    else:
        raise ValidationError(f"unknown sampling mode {mode!r}")
    return Configuration(geometry, n_states, states)


def _reject_nonfinite(token: str) -> float:
    raise ValidationError(f"non-finite value {token!r} in rule file")


def load_rule(path) -> Plut:
    """Read a rule file: JSON with keys states, radius, rows.

    Rows are ordered by 1-based neighborhood index; a deterministic rule is
    the same format with one-hot rows.  Non-finite values are rejected and
    the table is fully validated.
    """
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh, parse_constant=_reject_nonfinite)
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: not valid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ValidationError(f"{path}: expected a JSON object")
    for key in ("states", "radius", "rows"):
        if key not in doc:
            raise ValidationError(f"{path}: missing key {key!r}")
    n_states, radius = doc["states"], doc["radius"]
    if not isinstance(n_states, int) or not isinstance(radius, int):
        raise ValidationError(f"{path}: states and radius must be integers")
    rows = np.asarray(doc["rows"], dtype=np.float64)
    expected = (n_states ** (2 * radius + 1), n_states)
    if rows.ndim != 2 or rows.shape != expected:
        raise ValidationError(
            f"{path}: expected rows of shape {expected}, got {rows.shape}"
        )
    _check_rows(rows, n_states, 2 * radius + 1, ROW_SUM_TOL)
    return Plut(n_states, radius, rows)


def save_rule(path, rule: Plut | Lut) -> None:
    """Write a rule file (see :func:`load_rule` for the format)."""
    plut = lut_to_plut(rule) if isinstance(rule, Lut) else rule
    doc = {
        "states": plut.n_states,
        "radius": plut.radius,
        "rows": plut.rows.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")
