"""Confidence levels and their three-lattice algebra.

A confidence level ``<[a,b],[g,d]>`` pairs two closed subintervals of
[0,1]: ``[a,b]`` bounds the probability that an event is known to be true
(belief), ``[g,d]`` bounds the probability that it is known to be false
(doubt).  Belief and doubt are deliberately not complements: a source of
evidence may be silent about an event, so the two intervals are carried
independently.

The set of confidence levels is partially ordered three ways:

* truth     -- belief up, doubt down;
* knowledge -- both belief and doubt up (more committed opinion);
* precision -- both intervals narrower.

Each order is a complete lattice with componentwise min/max meets and
joins, and the three lattices interlace: meet and join of any one order
are monotone with respect to the other two.
"""

from __future__ import annotations

import enum

__all__ = [
    "ConfidenceLevel",
    "InvalidConfidenceError",
    "Order",
    "EQ_TOLERANCE",
    "leq",
    "meet",
    "join",
    "top",
    "bottom",
    "is_consistent",
    "is_reduced",
    "reduce",
    "format_confidence",
    "format_probability",
]

# Componentwise tolerance used by tests when comparing computed levels.
# Engine-level fixpoint detection is bit-exact and does not use this.
EQ_TOLERANCE = 1e-12

_FIELDS = ("belief_lo", "belief_hi", "doubt_lo", "doubt_hi")


class InvalidConfidenceError(ValueError):
    """A component is outside [0,1], or an inconsistent level was reduced."""


class Order(enum.Enum):
    """The three lattice orders on confidence levels."""

    TRUTH = "truth"
    KNOWLEDGE = "knowledge"
    PRECISION = "precision"


class ConfidenceLevel:
    """An immutable belief/doubt interval pair ``<[a,b],[g,d]>``.

    Components must lie in [0,1].  ``a <= b`` is *not* required here: the
    precision-top element ``<[1,0],[1,0]>`` and precision joins legitimately
    produce empty intervals.  Interval well-formedness is the business of
    :func:`is_consistent` / :func:`is_reduced`.
    """

    __slots__ = _FIELDS

    belief_lo: float
    belief_hi: float
    doubt_lo: float
    doubt_hi: float

    def __init__(self, belief_lo, belief_hi, doubt_lo, doubt_hi):
        for name, raw in zip(_FIELDS, (belief_lo, belief_hi, doubt_lo, doubt_hi)):
            x = float(raw)
            if not 0.0 <= x <= 1.0:
                raise InvalidConfidenceError(f"{name}={raw!r} outside [0, 1]")
            object.__setattr__(self, name, x)

    @classmethod
    def _make(cls, a: float, b: float, g: float, d: float) -> "ConfidenceLevel":
        # Internal fast path for arithmetic results that are already
        # clamped floats; skips the range re-check.
        self = object.__new__(cls)
        object.__setattr__(self, "belief_lo", a)
        object.__setattr__(self, "belief_hi", b)
        object.__setattr__(self, "doubt_lo", g)
        object.__setattr__(self, "doubt_hi", d)
        return self

    def __setattr__(self, name, value):
        raise AttributeError("ConfidenceLevel is immutable")

    @property
    def components(self) -> tuple[float, float, float, float]:
        return (self.belief_lo, self.belief_hi, self.doubt_lo, self.doubt_hi)

    def close_to(self, other: "ConfidenceLevel", tol: float = EQ_TOLERANCE) -> bool:
        return all(abs(x - y) <= tol for x, y in zip(self.components, other.components))

    def __eq__(self, other):
        if not isinstance(other, ConfidenceLevel):
            return NotImplemented
        return self.components == other.components

    def __hash__(self):
        return hash(self.components)

    def __repr__(self):
        return "ConfidenceLevel(%r, %r, %r, %r)" % self.components

    def __str__(self):
        return format_confidence(self)


def format_probability(x: float) -> str:
    """Render a probability with at most 6 significant decimals."""
    return format(x, ".6g")


def format_confidence(c: ConfidenceLevel) -> str:
    """Canonical text form ``<[a,b],[g,d]>`` used by the CLI and parser."""
    a, b, g, d = (format_probability(x) for x in c.components)
    return f"<[{a},{b}],[{g},{d}]>"


_TOP = {
    Order.TRUTH: ConfidenceLevel(1, 1, 0, 0),
    Order.KNOWLEDGE: ConfidenceLevel(1, 1, 1, 1),
    Order.PRECISION: ConfidenceLevel(1, 0, 1, 0),
}
_BOTTOM = {
    Order.TRUTH: ConfidenceLevel(0, 0, 1, 1),
    Order.KNOWLEDGE: ConfidenceLevel(0, 0, 0, 0),
    Order.PRECISION: ConfidenceLevel(0, 1, 0, 1),
}


def top(order: Order) -> ConfidenceLevel:
    """Greatest element of the given order."""
    return _TOP[order]


def bottom(order: Order) -> ConfidenceLevel:
    """Least element of the given order."""
    return _BOTTOM[order]


def leq(order: Order, c1: ConfidenceLevel, c2: ConfidenceLevel) -> bool:
    """Componentwise comparison of ``c1 <= c2`` in the given order."""
    a1, b1, g1, d1 = c1.components
    a2, b2, g2, d2 = c2.components
    if order is Order.TRUTH:
        return a1 <= a2 and b1 <= b2 and g2 <= g1 and d2 <= d1
    if order is Order.KNOWLEDGE:
        return a1 <= a2 and b1 <= b2 and g1 <= g2 and d1 <= d2
    return a1 <= a2 and b2 <= b1 and g1 <= g2 and d2 <= d1


def meet(order: Order, c1: ConfidenceLevel, c2: ConfidenceLevel) -> ConfidenceLevel:
    """Greatest lower bound of ``c1`` and ``c2`` in the given order."""
    a1, b1, g1, d1 = c1.components
    a2, b2, g2, d2 = c2.components
    if order is Order.TRUTH:
        return ConfidenceLevel._make(min(a1, a2), min(b1, b2), max(g1, g2), max(d1, d2))
    if order is Order.KNOWLEDGE:
        return ConfidenceLevel._make(min(a1, a2), min(b1, b2), min(g1, g2), min(d1, d2))
    return ConfidenceLevel._make(min(a1, a2), max(b1, b2), min(g1, g2), max(d1, d2))


def join(order: Order, c1: ConfidenceLevel, c2: ConfidenceLevel) -> ConfidenceLevel:
    """Least upper bound of ``c1`` and ``c2`` in the given order."""
    a1, b1, g1, d1 = c1.components
    a2, b2, g2, d2 = c2.components
    if order is Order.TRUTH:
        return ConfidenceLevel._make(max(a1, a2), max(b1, b2), min(g1, g2), min(d1, d2))
    if order is Order.KNOWLEDGE:
        return ConfidenceLevel._make(max(a1, a2), max(b1, b2), max(g1, g2), max(d1, d2))
    return ConfidenceLevel._make(max(a1, a2), min(b1, b2), max(g1, g2), min(d1, d2))


def is_consistent(c: ConfidenceLevel) -> bool:
    """True iff some world distribution realizes the level.

    Requires non-empty intervals and ``belief_lo + doubt_lo <= 1``.
    """
    a, b, g, d = c.components
    return a <= b and g <= d and a + g <= 1.0


def is_reduced(c: ConfidenceLevel) -> bool:
    """True iff every point of either interval extends to a full solution.

    On top of consistency this trims unattainable upper bounds:
    ``belief_lo + doubt_hi <= 1`` and ``belief_hi + doubt_lo <= 1``.
    """
    a, b, g, d = c.components
    return a <= b and g <= d and a + d <= 1.0 and b + g <= 1.0


def reduce(c: ConfidenceLevel) -> ConfidenceLevel:
    """Trim upper bounds to the reduced, probabilistically equivalent form.

    ``belief_hi`` is capped at ``1 - doubt_lo`` and ``doubt_hi`` at
    ``1 - belief_lo``.  Lower bounds are preserved.  Raises
    :class:`InvalidConfidenceError` on inconsistent input.
    """
    if not is_consistent(c):
        raise InvalidConfidenceError(f"cannot reduce inconsistent level {c}")
    if is_reduced(c):
        return c
    a, b, g, d = c.components
    # max() guards against 1-x rounding a hair below the opposite lower
    # bound, which would un-order the interval by one ulp.
    b2 = min(b, max(a, 1.0 - g))
    d2 = min(d, max(g, 1.0 - a))
    return ConfidenceLevel._make(a, b2, g, d2)
