"""Negation, conjunction and disjunction of confidence levels.

Combining the confidence of two events requires an assumption about how
the events interact.  Five interaction modes are supported:

* ``ign`` ignorance: nothing known, Frechet-style worst-case bounds;
* ``ind`` independence: occurrence of one event says nothing about the other;
* ``pc``  positive correlation: the events overlap as much as possible;
* ``nc``  negative correlation: the events overlap as little as possible;
* ``me``  mutual exclusion: negative correlation with belief mass summing
  to at most 1 (applicability is checked, not assumed).

Every binary result is clamped to [0,1] componentwise, so arithmetic
rounding can never produce an out-of-range probability.  The true level
``<[1,1],[0,0]>`` acts as identity for conjunction and annihilator for
disjunction, the false level ``<[0,0],[1,1]>`` dually; these laws hold for
all five modes and are applied before any mode-specific precondition, so
e.g. a mutually-exclusive disjunction with a false disjunct is always
legal.
"""

from __future__ import annotations

import enum
from typing import Iterable

from .confidence import ConfidenceLevel, Order, bottom, top

__all__ = [
    "Mode",
    "ModeError",
    "negate",
    "conjoin",
    "disjoin",
    "conjoin_all",
    "disjoin_all",
]

_TRUE = top(Order.TRUTH)
_FALSE = bottom(Order.TRUTH)


class Mode(enum.Enum):
    """Event-interaction assumption selecting the combination formulas."""

    IGNORANCE = "ign"
    INDEPENDENCE = "ind"
    POSITIVE_CORRELATION = "pc"
    NEGATIVE_CORRELATION = "nc"
    MUTUAL_EXCLUSION = "me"

    def __str__(self):
        return self.value


class ModeError(ValueError):
    """A mode's applicability condition is violated (mutual exclusion)."""


def _clamp(x: float) -> float:
    if x < 0.0:
        return 0.0
    if x > 1.0:
        return 1.0
    return x


def _level(a: float, b: float, g: float, d: float) -> ConfidenceLevel:
    return ConfidenceLevel._make(_clamp(a), _clamp(b), _clamp(g), _clamp(d))


def negate(c: ConfidenceLevel) -> ConfidenceLevel:
    """Negation swaps belief and doubt."""
    a, b, g, d = c.components
    return ConfidenceLevel._make(g, d, a, b)


def _check_me(c1: ConfidenceLevel, c2: ConfidenceLevel) -> None:
    a1, b1 = c1.belief_lo, c1.belief_hi
    a2, b2 = c2.belief_lo, c2.belief_hi
    if not (a1 + a2 <= b1 + b2 <= 1.0):
        raise ModeError(
            "mutual exclusion needs belief sums a1+a2 <= b1+b2 <= 1, got "
            f"{a1}+{a2} and {b1}+{b2}"
        )


def conjoin(mode: Mode, c1: ConfidenceLevel, c2: ConfidenceLevel) -> ConfidenceLevel:
    """Confidence of the conjunction of two events under the given mode."""
    if c1 == _TRUE:
        return c2
    if c2 == _TRUE:
        return c1
    if c1 == _FALSE or c2 == _FALSE:
        return _FALSE
    a1, b1, g1, d1 = c1.components
    a2, b2, g2, d2 = c2.components
    if mode is Mode.IGNORANCE:
        return _level(max(0.0, a1 + a2 - 1.0), min(b1, b2),
                      max(g1, g2), min(1.0, d1 + d2))
    if mode is Mode.INDEPENDENCE:
        return _level(a1 * a2, b1 * b2,
                      1.0 - (1.0 - g1) * (1.0 - g2),
                      1.0 - (1.0 - d1) * (1.0 - d2))
    if mode is Mode.POSITIVE_CORRELATION:
        return _level(min(a1, a2), min(b1, b2), max(g1, g2), max(d1, d2))
    if mode is Mode.NEGATIVE_CORRELATION:
        return _level(max(0.0, a1 + a2 - 1.0), max(0.0, b1 + b2 - 1.0),
                      min(1.0, g1 + g2), min(1.0, d1 + d2))
    _check_me(c1, c2)
    return _level(0.0, 0.0, min(1.0, g1 + g2), min(1.0, d1 + d2))


def disjoin(mode: Mode, c1: ConfidenceLevel, c2: ConfidenceLevel) -> ConfidenceLevel:
    """Confidence of the disjunction of two events under the given mode."""
    if c1 == _FALSE:
        return c2
    if c2 == _FALSE:
        return c1
    if c1 == _TRUE or c2 == _TRUE:
        return _TRUE
    a1, b1, g1, d1 = c1.components
    a2, b2, g2, d2 = c2.components
    if mode is Mode.IGNORANCE:
        return _level(max(a1, a2), min(1.0, b1 + b2),
                      max(0.0, g1 + g2 - 1.0), min(d1, d2))
    if mode is Mode.INDEPENDENCE:
        return _level(1.0 - (1.0 - a1) * (1.0 - a2),
                      1.0 - (1.0 - b1) * (1.0 - b2),
                      g1 * g2, d1 * d2)
    if mode is Mode.POSITIVE_CORRELATION:
        return _level(max(a1, a2), max(b1, b2), min(g1, g2), min(d1, d2))
    if mode is Mode.NEGATIVE_CORRELATION:
        return _level(min(1.0, a1 + a2), min(1.0, b1 + b2),
                      max(0.0, g1 + g2 - 1.0), max(0.0, d1 + d2 - 1.0))
    _check_me(c1, c2)
    # Belief sums are uncapped by the mode's definition; the clamp is a
    # defensive guarantee that outputs stay raw-valid.
    return _level(min(1.0, a1 + a2), min(1.0, b1 + b2),
                  max(0.0, g1 + g2 - 1.0), max(0.0, d1 + d2 - 1.0))


def conjoin_all(mode: Mode, levels: Iterable[ConfidenceLevel]) -> ConfidenceLevel:
    """Left fold of :func:`conjoin` in the given order; empty -> true."""
    acc = _TRUE
    for c in levels:
        acc = conjoin(mode, acc, c)
    return acc


def disjoin_all(mode: Mode, levels: Iterable[ConfidenceLevel]) -> ConfidenceLevel:
    """Left fold of :func:`disjoin` in the given order; empty -> false."""
    acc = _FALSE
    for c in levels:
        acc = disjoin(mode, acc, c)
    return acc
