"""Constructors for the named rule families.

Binary radius-1 rules use the standard Wolfram numbering: reading the table
outputs for neighborhoods 8..1 as a binary number gives the rule number, so
bit ``b`` of the number is the output for the neighborhood whose cells spell
``b`` in binary (left cell most significant).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import (
    Lut,
    Plut,
    ValidationError,
    as_deterministic,
    digit_matrix,
    load_rule,
    lut_to_plut,
)


def eca_lut(n: int) -> Lut:
    """Binary radius-1 rule with Wolfram number ``n``."""
    if not 0 <= int(n) <= 255 or int(n) != n:
        raise ValidationError(f"rule number {n!r} out of range [0, 255]")
    outputs = (int(n) >> np.arange(8)) & 1
    return Lut(2, 1, outputs)


def lut_number(lut: Lut) -> int:
    """Wolfram number of a binary radius-1 table (inverse of eca_lut)."""
    if lut.n_states != 2 or lut.radius != 1:
        raise ValidationError("rule numbering is defined for 2 states and radius 1 only")
    return int((lut.outputs.astype(np.int64) << np.arange(8)).sum())


def identity_lut(n_states: int, radius: int = 0) -> Lut:
    """Rule that keeps every cell in its current state."""
    centers = digit_matrix(n_states, 2 * radius + 1)[:, radius]
    return Lut(n_states, radius, centers)


def widen_radius(rule: Lut | Plut, r_new: int):
    """Re-express a rule with a larger radius without changing its behavior.

    Every wide neighborhood maps to the table entry of its centered
    sub-window, so evolution under the widened rule is unchanged.
    """
    if r_new < rule.radius:
        raise ValidationError(
            f"cannot narrow a rule of radius {rule.radius} to radius {r_new}"
        )
    if r_new == rule.radius:
        return rule
    n = rule.n_states
    off = r_new - rule.radius
    digits = digit_matrix(n, 2 * r_new + 1)[:, off : off + rule.window].astype(np.int64)
    powers = n ** np.arange(rule.window - 1, -1, -1, dtype=np.int64)
    sub = digits @ powers
    if isinstance(rule, Lut):
        return Lut(n, r_new, rule.outputs[sub])
    return Plut(n, r_new, rule.rows[sub])


def alpha_async_plut(base: Lut, alpha: float) -> Plut:
    """pLUT of the partially-synchronous variant of a deterministic rule.

    Each cell applies ``base`` with probability ``alpha`` (the synchrony
    rate) and otherwise keeps its current state; when the two branches agree
    their probabilities add.  alpha=1 recovers the base rule, alpha=0 the
    identity rule.
    """
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"synchrony rate {alpha!r} outside [0, 1]")
    n = base.n_states
    centers = digit_matrix(n, base.window)[:, base.radius]
    rows = np.zeros((base.table_size, n))
    idx = np.arange(base.table_size)
    rows[idx, base.outputs] += alpha
    rows[idx, centers] += 1.0 - alpha
    return Plut(n, base.radius, rows)


def c3_plut(eta: float) -> Plut:
    """Binary density-classifier rule with noise parameter ``eta``.

    Probability of state 1 per neighborhood (left, center, right):
    111 -> 1, 110 -> eta, 101 -> 1, 100 -> 1-eta,
    011 -> 1, 010 -> 0, 001 -> 0, 000 -> 0.
    At eta=0 this is the deterministic traffic rule (number 184).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValidationError(f"noise parameter {eta!r} outside [0, 1]")
    comp = 1.0 - eta
    # rows indexed by neighborhood code 0..7 = (left, center, right) in binary;
    # both columns are written from closed forms so table entries are exact
    p1 = [0.0, 0.0, 0.0, 1.0, comp, 1.0, eta, 1.0]
    p0 = [1.0, 1.0, 1.0, 0.0, eta, 0.0, comp, 0.0]
    return Plut(2, 1, np.column_stack([p0, p1]))


@dataclass(frozen=True)
class TotalisticParams:
    """Probabilities of reaching state 1 for singly/doubly occupied windows."""

    p1: float
    p2: float

    def __post_init__(self) -> None:
        for name, p in (("p1", self.p1), ("p2", self.p2)):
            if not 0.0 <= p <= 1.0:
                raise ValidationError(f"{name}={p!r} outside [0, 1]")


def totalistic_plut(params: TotalisticParams | tuple[float, float]) -> Plut:
    """Binary rule whose next state depends only on the number of ones.

    Probability of state 1: zero ones -> 0, one one -> p1, two ones -> p2,
    three ones -> 1.
    """
    if not isinstance(params, TotalisticParams):
        params = TotalisticParams(*params)
    a, b = params.p1, params.p2
    ca, cb = 1.0 - a, 1.0 - b
    p1 = [0.0, a, a, b, a, b, b, 1.0]
    p0 = [1.0, ca, ca, cb, ca, cb, cb, 0.0]
    return Plut(2, 1, np.column_stack([p0, p1]))


def parse_rule_spec(spec: str) -> Plut:
    """Parse a command-line rule specifier into a pLUT.

    Forms: ``eca:150``, ``aaca:150:0.9``, ``c3:0.1``, ``totalistic:0.3:0.7``,
    ``file:<path>``.
    """
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    try:
        if kind == "eca" and len(parts) == 1:
            return lut_to_plut(eca_lut(int(parts[0])))
        if kind == "aaca" and len(parts) == 2:
            return alpha_async_plut(eca_lut(int(parts[0])), _prob(parts[1]))
        if kind == "c3" and len(parts) == 1:
            return c3_plut(_prob(parts[0]))
        if kind == "totalistic" and len(parts) == 2:
            return totalistic_plut((_prob(parts[0]), _prob(parts[1])))
    except ValueError as exc:
        raise ValidationError(f"bad rule specifier {spec!r}: {exc}") from exc
    if kind == "file" and rest:
        return load_rule(rest)
    raise ValidationError(
        f"unrecognized rule specifier {spec!r}; expected eca:N, aaca:N:alpha, "
        "c3:eta, totalistic:p1:p2, or file:<path>"
    )


def rule_spec_lut(spec: str) -> Lut:
    """Parse a rule specifier that must denote a deterministic rule."""
    plut = parse_rule_spec(spec)
    lut = as_deterministic(plut)
    if lut is None:
        raise ValidationError(f"rule specifier {spec!r} is not deterministic")
    return lut


def _prob(text: str) -> float:
    value = float(text)
    if not np.isfinite(value):
        raise ValidationError(f"probability {text!r} is not finite")
    return value
