"""Possible-worlds oracles for the binary combination formulas.

Two events, each true/false/unknown, span nine joint worlds with
probabilities ``w[i][j]``.  The marginal belief/doubt intervals of the
two events constrain the nine probabilities linearly; a combination
formula is correct iff its output interval equals the exact range of the
total probability mass on the worlds where the compound event is true
(respectively false).

Under ignorance the constraint set is exactly that linear system, so the
range of any world-sum objective is found exactly by enumerating basic
feasible solutions: the simplex equality plus 8 active constraints chosen
from the 17 inequalities (8 interval sides + 9 nonnegativity), i.e.
C(17,8) = 24310 candidate 9x9 systems.  The basis matrices are 0/1 and
independent of the inputs, so their inverses are precomputed once.

Under independence the joint distribution is a product of the two
marginal distributions, which makes the constraints nonlinear; the
oracle instead sweeps a grid over both marginal simplices and extremizes
the same objectives over all product distributions, accurate to the grid
step.

These oracles exist to validate the closed forms; the evaluation engine
never calls them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import FrozenSet, NamedTuple, Tuple

import numpy as np

from .confidence import ConfidenceLevel

__all__ = [
    "WORLD_LABELS",
    "WorldDistribution",
    "LinearProgram",
    "LpExtremes",
    "OracleInfeasibleError",
    "lp_extremes",
    "ignorance_oracle",
    "independence_oracle",
]

# World order: F-state major, G-state minor, states ordered true/false/unknown.
_STATES = ("1", "0", "u")
WORLD_LABELS: Tuple[Tuple[str, str], ...] = tuple(
    (i, j) for i in _STATES for j in _STATES
)

_F_TRUE = tuple(k for k, (i, _) in enumerate(WORLD_LABELS) if i == "1")
_F_FALSE = tuple(k for k, (i, _) in enumerate(WORLD_LABELS) if i == "0")
_G_TRUE = tuple(k for k, (_, j) in enumerate(WORLD_LABELS) if j == "1")
_G_FALSE = tuple(k for k, (_, j) in enumerate(WORLD_LABELS) if j == "0")

# Worlds where the compound event is true / false (three-valued logic:
# a conjunction is false iff some conjunct is false, a disjunction is
# true iff some disjunct is true).
CONJ_TRUE = frozenset(
    k for k, (i, j) in enumerate(WORLD_LABELS) if i == "1" and j == "1"
)
CONJ_FALSE = frozenset(
    k for k, (i, j) in enumerate(WORLD_LABELS) if i == "0" or j == "0"
)
DISJ_TRUE = frozenset(
    k for k, (i, j) in enumerate(WORLD_LABELS) if i == "1" or j == "1"
)
DISJ_FALSE = frozenset(
    k for k, (i, j) in enumerate(WORLD_LABELS) if i == "0" and j == "0"
)

_FEAS_TOL = 1e-9


class OracleInfeasibleError(ValueError):
    """The constrained world polytope is empty (non-reduced inputs)."""


@dataclass(frozen=True)
class WorldDistribution:
    """Nine world probabilities in :data:`WORLD_LABELS` order."""

    probs: Tuple[float, ...]

    def __post_init__(self):
        if len(self.probs) != 9:
            raise ValueError("expected 9 world probabilities")
        cleaned = []
        for p in self.probs:
            if p < -_FEAS_TOL:
                raise ValueError(f"negative world probability {p}")
            cleaned.append(max(0.0, float(p)))
        total = sum(cleaned)
        if abs(total - 1.0) > _FEAS_TOL:
            raise ValueError(f"world probabilities sum to {total}, not 1")
        object.__setattr__(self, "probs", tuple(cleaned))

    def mass(self, worlds) -> float:
        return sum(self.probs[k] for k in worlds)


@dataclass(frozen=True)
class LinearProgram:
    """Interval constraints of two events plus a world-sum objective."""

    f_belief: Tuple[float, float]
    f_doubt: Tuple[float, float]
    g_belief: Tuple[float, float]
    g_doubt: Tuple[float, float]
    objective: FrozenSet[int]

    def __post_init__(self):
        if not self.objective <= frozenset(range(9)):
            raise ValueError("objective must be a subset of the 9 worlds")

    @classmethod
    def for_events(cls, c1: ConfidenceLevel, c2: ConfidenceLevel,
                   objective) -> "LinearProgram":
        return cls(
            (c1.belief_lo, c1.belief_hi), (c1.doubt_lo, c1.doubt_hi),
            (c2.belief_lo, c2.belief_hi), (c2.doubt_lo, c2.doubt_hi),
            frozenset(objective),
        )


class LpExtremes(NamedTuple):
    lo: float
    hi: float
    arg_lo: WorldDistribution
    arg_hi: WorldDistribution


def _marginal_rows() -> np.ndarray:
    rows = np.zeros((4, 9))
    for r, idxs in enumerate((_F_TRUE, _F_FALSE, _G_TRUE, _G_FALSE)):
        rows[r, list(idxs)] = 1.0
    return rows


_MARGINAL_ROWS = _marginal_rows()

# The 17 inequality constraints: indices 0..7 are the interval sides
# (row r lower at 2r, upper at 2r+1), 8..16 are nonnegativity of w_k.
_INEQ_ROWS = np.vstack([
    np.repeat(_MARGINAL_ROWS, 2, axis=0),  # 0..7
    np.eye(9),                             # 8..16
])

_basis_cache: Tuple[np.ndarray, np.ndarray] | None = None


def _bases() -> Tuple[np.ndarray, np.ndarray]:
    """Invertible basis matrices: (combos, inverses).

    A basis is the simplex equality plus 8 of the 17 inequality rows.
    The matrices contain only 0/1 entries, so a determinant of magnitude
    below 1/2 means exactly singular.
    """
    global _basis_cache
    if _basis_cache is not None:
        return _basis_cache
    combos = np.array(list(itertools.combinations(range(17), 8)), dtype=np.intp)
    mats = np.empty((len(combos), 9, 9))
    mats[:, 0, :] = 1.0
    mats[:, 1:, :] = _INEQ_ROWS[combos]
    dets = np.linalg.det(mats)
    ok = np.abs(dets) > 0.5
    _basis_cache = (combos[ok], np.linalg.inv(mats[ok]))
    return _basis_cache


def _feasible_vertices(lp: LinearProgram) -> np.ndarray:
    combos, invs = _bases()
    lows = np.array([lp.f_belief[0], lp.f_doubt[0], lp.g_belief[0], lp.g_doubt[0]])
    highs = np.array([lp.f_belief[1], lp.f_doubt[1], lp.g_belief[1], lp.g_doubt[1]])
    # RHS of inequality constraint k when chosen as an active equation.
    rhs = np.empty(17)
    rhs[0:8:2] = lows
    rhs[1:8:2] = highs
    rhs[8:] = 0.0

    b = np.empty((len(combos), 9))
    b[:, 0] = 1.0
    b[:, 1:] = rhs[combos]
    x = np.einsum("mij,mj->mi", invs, b)

    margins = x @ _MARGINAL_ROWS.T
    feas = (
        (x >= -_FEAS_TOL).all(axis=1)
        & (margins >= lows - _FEAS_TOL).all(axis=1)
        & (margins <= highs + _FEAS_TOL).all(axis=1)
        & (np.abs(x.sum(axis=1) - 1.0) <= _FEAS_TOL)
    )
    return x[feas]


def lp_extremes(lp: LinearProgram) -> LpExtremes:
    """Exact extrema of the objective over the world polytope.

    Enumerates all basic feasible solutions; raises
    :class:`OracleInfeasibleError` when none exists.
    """
    verts = _feasible_vertices(lp)
    if len(verts) == 0:
        raise OracleInfeasibleError("world polytope is empty")
    obj = verts[:, sorted(lp.objective)].sum(axis=1) if lp.objective else \
        np.zeros(len(verts))
    i_lo = int(np.argmin(obj))
    i_hi = int(np.argmax(obj))
    return LpExtremes(
        float(obj[i_lo]), float(obj[i_hi]),
        WorldDistribution(tuple(verts[i_lo])),
        WorldDistribution(tuple(verts[i_hi])),
    )


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def ignorance_oracle(op: str, c1: ConfidenceLevel,
                     c2: ConfidenceLevel) -> ConfidenceLevel:
    """Exact combination bounds assuming nothing about event interaction.

    ``op`` is ``"conj"`` or ``"disj"``.  The belief interval is the range
    of probability mass on worlds where the compound event is true, the
    doubt interval that of the worlds where it is false.
    """
    if op == "conj":
        true_worlds, false_worlds = CONJ_TRUE, CONJ_FALSE
    elif op == "disj":
        true_worlds, false_worlds = DISJ_TRUE, DISJ_FALSE
    else:
        raise ValueError(f"op must be 'conj' or 'disj', got {op!r}")
    verts = _feasible_vertices(LinearProgram.for_events(c1, c2, frozenset()))
    if len(verts) == 0:
        raise OracleInfeasibleError("world polytope is empty")
    t = verts[:, sorted(true_worlds)].sum(axis=1)
    f = verts[:, sorted(false_worlds)].sum(axis=1)
    return ConfidenceLevel(
        _clamp01(float(t.min())), _clamp01(float(t.max())),
        _clamp01(float(f.min())), _clamp01(float(f.max())),
    )


def _marginal_grid(belief: Tuple[float, float], doubt: Tuple[float, float],
                   step: float) -> np.ndarray:
    """Feasible (true, false, unknown) marginals on a grid."""

    def axis(lo: float, hi: float) -> np.ndarray:
        pts = np.arange(lo, hi, step)
        return np.unique(np.append(pts, hi))

    p1 = axis(*belief)
    p0 = axis(*doubt)
    grid_t, grid_f = np.meshgrid(p1, p0, indexing="ij")
    t = grid_t.ravel()
    f = grid_f.ravel()
    keep = t + f <= 1.0 + 1e-12
    t, f = t[keep], f[keep]
    if len(t) == 0:
        raise OracleInfeasibleError("marginal grid is empty")
    u = np.clip(1.0 - t - f, 0.0, 1.0)
    return np.column_stack([t, f, u])


def _state_mask(worlds: FrozenSet[int]) -> np.ndarray:
    m = np.zeros((3, 3))
    for k in worlds:
        i, j = WORLD_LABELS[k]
        m[_STATES.index(i), _STATES.index(j)] = 1.0
    return m


def _product_extremes(p: np.ndarray, q: np.ndarray,
                      mask: np.ndarray) -> Tuple[float, float]:
    lo = np.inf
    hi = -np.inf
    pm = p @ mask
    qt = q.T
    chunk = max(1, (4 << 20) // max(1, q.shape[0] * 8))
    for start in range(0, pm.shape[0], chunk):
        vals = pm[start:start + chunk] @ qt
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    return lo, hi


def independence_oracle(op: str, c1: ConfidenceLevel, c2: ConfidenceLevel,
                        grid_step: float = 0.01) -> ConfidenceLevel:
    """Grid-search combination bounds for independent events.

    Sweeps both marginal simplices on a grid (endpoints included), forms
    all product world distributions and extremizes the true-worlds and
    false-worlds mass.  Accurate to O(grid_step).
    """
    if op == "conj":
        true_worlds, false_worlds = CONJ_TRUE, CONJ_FALSE
    elif op == "disj":
        true_worlds, false_worlds = DISJ_TRUE, DISJ_FALSE
    else:
        raise ValueError(f"op must be 'conj' or 'disj', got {op!r}")
    p = _marginal_grid((c1.belief_lo, c1.belief_hi),
                       (c1.doubt_lo, c1.doubt_hi), grid_step)
    q = _marginal_grid((c2.belief_lo, c2.belief_hi),
                       (c2.doubt_lo, c2.doubt_hi), grid_step)
    t_lo, t_hi = _product_extremes(p, q, _state_mask(true_worlds))
    f_lo, f_hi = _product_extremes(p, q, _state_mask(false_worlds))
    return ConfidenceLevel(
        _clamp01(t_lo), _clamp01(t_hi), _clamp01(f_lo), _clamp01(f_hi)
    )
