"""Greedy decomposition of probabilistic rules into deterministic mixtures.

The algorithm repeatedly extracts the heaviest deterministic rule the table
still supports: take each row's largest entry, let alpha be the smallest of
those maxima, record (alpha, chosen outputs) and subtract alpha from the
chosen entries.  Every pass zeroes at least one new entry, so a table with
Z entries yields at most Z components, with non-increasing weights; no
mixture representation of the same table can give its leading component
more weight than the first alpha found here.

The method applies to any row-stochastic matrix, not only rule tables;
:func:`decompose_stochastic_matrix` is that general entry point and
:func:`greedy_decompose` wraps it for rule tables.

Arithmetic: tables whose entries are short decimals (at most 18 fractional
digits in shortest-repr form, which covers hand-written constants like 0.4)
are decomposed in exact integer arithmetic on a common power-of-ten scale,
so weights like 0.4/0.3/0.2/0.1 come out exactly.  Tables that cannot be
scaled into int64 fall back to extended-precision floats (80-bit on x86),
which keeps the weight sum and the reconstruction within ~1e-16 of the
table instead of the ~1e-13 plain double subtraction chains would give.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from decimal import Decimal
from typing import Sequence

import numpy as np

from .core import ROW_SUM_TOL, Lut, Plut, ValidationError

#: default tolerance when judging whether a decomposition rebuilds a table
ZERO_TOL = 1e-12

#: leftover extended-precision mass below this counts as exhausted
_EXHAUST_TOL = 1e-15

#: beyond this many fractional digits the integer path would overflow int64
_MAX_DECIMAL_PLACES = 18

_TIE_BREAKS = ("lowest", "highest")


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Weighted deterministic rules, heaviest first.

    Construction checks structure only: matching lengths, shared component
    shape, weights in (0, 1], and the component-count bound.  Whether the
    weights sum to 1 and actually rebuild a given table is the job of
    :func:`decomposition_valid`, so that near-miss decompositions can be
    represented and then rejected with a reason.  greedy_decompose outputs
    additionally carry non-increasing weights summing to 1.
    """

    alphas: tuple[float, ...]
    components: tuple[Lut, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alphas", tuple(float(a) for a in self.alphas))
        object.__setattr__(self, "components", tuple(self.components))
        if not self.components:
            raise ValidationError("a decomposition needs at least one component")
        if len(self.alphas) != len(self.components):
            raise ValidationError(
                f"{len(self.alphas)} weights for {len(self.components)} components"
            )
        first = self.components[0]
        for lut in self.components[1:]:
            if lut.n_states != first.n_states or lut.radius != first.radius:
                raise ValidationError("components must share state count and radius")
        for alpha in self.alphas:
            if not math.isfinite(alpha) or not 0 < alpha <= 1:
                raise ValidationError(f"component weight {alpha!r} outside (0, 1]")
        limit = first.n_states * first.table_size
        if len(self.alphas) > limit:
            raise ValidationError(f"{len(self.alphas)} components exceed the bound {limit}")

    @property
    def n_states(self) -> int:
        return self.components[0].n_states

    @property
    def radius(self) -> int:
        return self.components[0].radius


def _argmax_rows(table: np.ndarray, tie_break: str) -> np.ndarray:
    """Per-row argmax; ties go to the lowest or highest state index."""
    if tie_break == "lowest":
        return table.argmax(axis=1)
    return table.shape[1] - 1 - table[:, ::-1].argmax(axis=1)


def _decimal_scaled(rows: np.ndarray) -> tuple[np.ndarray, int] | None:
    """Rewrite entries as integers on a shared power-of-ten scale.

    Reads each float at its shortest decimal form (repr).  Returns None when
    any entry needs more than 18 fractional digits, in which case the float
    path takes over.
    """
    decimals = [Decimal(repr(x)) for x in rows.ravel().tolist()]
    places = 0
    for d in decimals:
        exponent = d.as_tuple().exponent
        if exponent < -_MAX_DECIMAL_PLACES:
            return None
        places = max(places, -exponent)
    ints = [int(d.scaleb(places)) for d in decimals]
    return np.array(ints, dtype=np.int64).reshape(rows.shape), places


def _greedy_int(
    table: np.ndarray, places: int, tie_break: str
) -> tuple[list[float], list[np.ndarray]]:
    scale = 10**places
    work = table.copy()
    row_idx = np.arange(work.shape[0])
    alphas: list[float] = []
    selections: list[np.ndarray] = []
    for _ in range(work.size):
        sel = _argmax_rows(work, tie_break)
        alpha = int(work[row_idx, sel].min())
        if alpha == 0:
            break
        work[row_idx, sel] -= alpha
        alphas.append(alpha / scale)
        selections.append(sel)
        if not work.any():
            break
    else:
        raise RuntimeError("greedy decomposition failed to terminate")
    return alphas, selections


def _greedy_float(table: np.ndarray, tie_break: str) -> tuple[list[float], list[np.ndarray]]:
    work = table.astype(np.longdouble, copy=True)
    row_idx = np.arange(work.shape[0])
    alphas: list[float] = []
    selections: list[np.ndarray] = []
    for _ in range(work.size):
        sel = _argmax_rows(work, tie_break)
        alpha = work[row_idx, sel].min()
        if alpha <= _EXHAUST_TOL:
            break
        # alpha is the smallest selected entry, so the subtraction cannot
        # drive any entry negative even after rounding
        work[row_idx, sel] -= alpha
        alphas.append(float(alpha))
        selections.append(sel)
    return alphas, selections


def _check_stochastic(matrix: np.ndarray) -> np.ndarray:
    matrix = np.ascontiguousarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise ValidationError(f"expected a 2-D stochastic matrix, got shape {matrix.shape}")
    if not np.isfinite(matrix).all():
        raise ValidationError("non-finite matrix entry")
    if (matrix < 0).any() or (matrix > 1).any():
        raise ValidationError("matrix entries must lie in [0, 1]")
    off = np.abs(matrix.sum(axis=1) - 1.0)
    if (off > ROW_SUM_TOL).any():
        raise ValidationError(
            f"row sums off by up to {off.max():.3g}, tolerance {ROW_SUM_TOL}"
        )
    return matrix


def decompose_stochastic_matrix(
    matrix, tie_break: str = "lowest"
) -> tuple[tuple[float, ...], tuple[tuple[int, ...], ...]]:
    """Greedy decomposition of any row-stochastic matrix.

    Returns (alphas, selections) where selections[m][k] is the column chosen
    in row k by the m-th extracted deterministic table.  Rows may be any
    count — the method does not require a rule-table shape.
    """
    if tie_break not in _TIE_BREAKS:
        raise ValidationError(f"tie_break must be one of {_TIE_BREAKS}, got {tie_break!r}")
    work = _check_stochastic(matrix)
    scaled = _decimal_scaled(work)
    if scaled is not None:
        alphas, selections = _greedy_int(scaled[0], scaled[1], tie_break)
    else:
        alphas, selections = _greedy_float(work, tie_break)
    return tuple(alphas), tuple(tuple(int(s) for s in sel) for sel in selections)


def greedy_decompose(plut: Plut, tie_break: str = "lowest") -> Decomposition:
    """Decompose a probabilistic rule into a deterministic mixture.

    The output weights are non-increasing, sum to 1 (up to any row-sum
    imbalance the input table itself carries), and the first weight is
    maximal over all decompositions of the same table.
    """
    alphas, selections = decompose_stochastic_matrix(plut.rows, tie_break)
    components = tuple(Lut(plut.n_states, plut.radius, sel) for sel in selections)
    return Decomposition(alphas, components)


def mixture_plut(components: Sequence[tuple[float, Lut]]) -> Plut:
    """Table of the rule that plays component i with probability alpha_i."""
    if not components:
        raise ValidationError("a mixture needs at least one component")
    first = components[0][1]
    for _, lut in components:
        if lut.n_states != first.n_states or lut.radius != first.radius:
            raise ValidationError("mixture components must share state count and radius")
    rows = np.zeros((first.table_size, first.n_states))
    idx = np.arange(first.table_size)
    for alpha, lut in components:
        if not math.isfinite(alpha) or alpha < 0:
            raise ValidationError(f"mixture weight {alpha!r} must be nonnegative")
        rows[idx, lut.outputs] += alpha
    return Plut(first.n_states, first.radius, rows)


def recompose(decomposition: Decomposition) -> Plut:
    """Rebuild the probabilistic rule a decomposition represents."""
    return mixture_plut(list(zip(decomposition.alphas, decomposition.components)))


def dominant_component(plut: Plut, tie_break: str = "lowest") -> tuple[float, Lut]:
    """The heaviest deterministic component of a rule and its weight.

    Equals the first element of greedy_decompose: the weight is the smallest
    row maximum of the table, attained by the per-row argmax rule.  No
    decomposition of the table can weight any component more heavily.
    """
    if tie_break not in _TIE_BREAKS:
        raise ValidationError(f"tie_break must be one of {_TIE_BREAKS}, got {tie_break!r}")
    sel = _argmax_rows(plut.rows, tie_break)
    alpha = float(plut.rows[np.arange(plut.rows.shape[0]), sel].min())
    return alpha, Lut(plut.n_states, plut.radius, sel)


def _raw_recompose(decomposition: Decomposition) -> np.ndarray:
    first = decomposition.components[0]
    rows = np.zeros((first.table_size, first.n_states))
    idx = np.arange(first.table_size)
    for alpha, lut in zip(decomposition.alphas, decomposition.components):
        rows[idx, lut.outputs] += alpha
    return rows


def decomposition_issues(
    decomposition: Decomposition, plut: Plut, tol: float = ZERO_TOL
) -> list[str]:
    """Reasons the decomposition fails to represent ``plut`` (empty = valid).

    Checks weight range, weight sum within tol, shape agreement, and
    entrywise reconstruction within tol.
    """
    issues: list[str] = []
    total = math.fsum(decomposition.alphas)
    if abs(total - 1.0) > tol:
        issues.append(f"weights sum to {total!r}, off by more than {tol}")
    if decomposition.n_states != plut.n_states or decomposition.radius != plut.radius:
        issues.append(
            f"component shape ({decomposition.n_states} states, radius "
            f"{decomposition.radius}) does not match the rule "
            f"({plut.n_states} states, radius {plut.radius})"
        )
        return issues
    gap = float(np.abs(_raw_recompose(decomposition) - plut.rows).max())
    if gap > tol:
        issues.append(f"reconstruction off by {gap:.3g}, tolerance {tol}")
    return issues


def decomposition_valid(
    decomposition: Decomposition, plut: Plut, tol: float = ZERO_TOL
) -> bool:
    """Whether the decomposition rebuilds ``plut`` within ``tol``."""
    return not decomposition_issues(decomposition, plut, tol)


def reconstruction_error(decomposition: Decomposition, plut: Plut) -> float:
    """Largest entrywise gap between the rebuilt table and ``plut``."""
    if decomposition.n_states != plut.n_states or decomposition.radius != plut.radius:
        raise ValidationError("decomposition and rule have different shapes")
    return float(np.abs(_raw_recompose(decomposition) - plut.rows).max())