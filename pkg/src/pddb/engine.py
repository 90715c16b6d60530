"""Bottom-up fixpoint evaluation of rule programs.

A valuation maps ground atoms to confidence levels; atoms not stored are
implicitly at the false level ``<[0,0],[1,1]>``.  One evaluation step
fires every ground rule instance against the current valuation, combines
per-head contributions under the head predicate's disjunctive mode, and
rebuilds the valuation from scratch.  Iterating from the empty valuation
produces an ascending chain in the truth order whose limit is the least
valuation satisfying the program.

Grounding never materializes the full Herbrand instantiation: rule bodies
are joined against the stored (non-false) atoms only.  This is sound
because a false body atom annihilates the body conjunction and a false
contribution is the identity of every disjunction, so skipped instances
cannot change any result.

Determinism is part of the contract: per-head contributions are combined
in canonical order (rule index ascending, then lexicographically by the
ground substitution), fixpoint detection is bit-exact equality, and two
runs of :func:`evaluate` return bit-identical results.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

from . import confidence as _conf
from .confidence import ConfidenceLevel, Order, bottom, leq
from .lang import (
    Atom,
    Const,
    PProgram,
    PRule,
    apply_subst,
    atom_key,
    match_atom,
    term_key,
    validate,
)
from .modes import Mode, conjoin_all, disjoin_all

__all__ = [
    "Valuation",
    "FixpointOptions",
    "FixpointResult",
    "ValidationError",
    "StrictModeError",
    "rule_conf",
    "atom_conf",
    "tp_step",
    "evaluate",
    "satisfies",
    "query",
    "reduce_facts",
]

_BOT_T = bottom(Order.TRUTH)


class ValidationError(ValueError):
    """The program has validation errors; carries the diagnostics."""

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        msgs = "; ".join(f"{d.code}: {d.message}" for d in self.diagnostics)
        super().__init__(msgs or "validation failed")


class StrictModeError(ValidationError):
    """Strict evaluation refused a termination-hazard program."""


class Valuation:
    """Finite map from ground atoms to confidence levels.

    Atoms holding exactly the false level are never stored; lookups of
    absent atoms return it.
    """

    __slots__ = ("_map",)

    def __init__(self, mapping: Optional[Mapping[Atom, ConfidenceLevel]] = None):
        m = {}
        if mapping:
            for atom, conf in mapping.items():
                if conf != _BOT_T:
                    m[atom] = conf
        self._map = m

    def __getitem__(self, atom: Atom) -> ConfidenceLevel:
        return self._map.get(atom, _BOT_T)

    get = __getitem__

    def __contains__(self, atom: Atom) -> bool:
        return atom in self._map

    def __len__(self) -> int:
        return len(self._map)

    def __iter__(self):
        return iter(self._map)

    def atoms(self):
        return self._map.keys()

    def items(self):
        return self._map.items()

    def sorted_items(self):
        return sorted(self._map.items(), key=lambda kv: atom_key(kv[0]))

    def __eq__(self, other):
        if not isinstance(other, Valuation):
            return NotImplemented
        return self._map == other._map

    def __hash__(self):
        raise TypeError("Valuation is not hashable")

    def __repr__(self):
        inner = ", ".join(f"{a}: {c}" for a, c in self.sorted_items())
        return f"Valuation({{{inner}}})"

    def leq_t(self, other: "Valuation") -> bool:
        """Pointwise truth-order comparison over the union of atoms."""
        for atom in set(self._map) | set(other._map):
            if not leq(Order.TRUTH, self[atom], other[atom]):
                return False
        return True


@dataclass(frozen=True)
class FixpointOptions:
    max_iters: int = 10_000
    eps: float = 0.0
    strict: bool = False

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.eps < 0:
            raise ValueError("eps must be nonnegative")


@dataclass(frozen=True)
class FixpointResult:
    valuation: Valuation
    iterations: int
    status: str  # "exact" | "approximate"
    residual: float

    @property
    def exact(self) -> bool:
        return self.status == "exact"


# ---- grounding -------------------------------------------------------


class _AtomIndex:
    """Lookup of stored atoms by predicate and bound argument positions."""

    def __init__(self, valuation: Valuation):
        self.by_pred: dict = {}
        for atom in valuation.atoms():
            self.by_pred.setdefault(atom.pred, []).append(atom)
        self._cache: dict = {}

    def candidates(self, pattern: Atom) -> list:
        atoms = self.by_pred.get(pattern.pred)
        if not atoms:
            return []
        bound = tuple(
            i for i, t in enumerate(pattern.args) if isinstance(t, Const)
        )
        if len(bound) == len(pattern.args):
            return [pattern] if any(a == pattern for a in atoms) else []
        if not bound:
            return atoms
        key = (pattern.pred, bound)
        index = self._cache.get(key)
        if index is None:
            index = {}
            for atom in atoms:
                vals = tuple(atom.args[i] for i in bound)
                index.setdefault(vals, []).append(atom)
            self._cache[key] = index
        vals = tuple(pattern.args[i] for i in bound)
        return index.get(vals, [])


@dataclass(frozen=True)
class _Instance:
    """A ground rule instance that fired against the current valuation."""

    rule_index: int
    theta: dict = field(compare=False)
    theta_key: tuple = ()
    head: Atom = None  # type: ignore[assignment]
    body: tuple = ()


def _rule_var_order(rule: PRule) -> tuple:
    return tuple(sorted(rule.variables()))


def _theta_key(theta: Mapping, var_order: tuple) -> tuple:
    return tuple(term_key(theta[v]) for v in var_order)


def _match_rule(rule: PRule, index: _AtomIndex,
                seed: Optional[dict] = None) -> Iterable[dict]:
    """All body matches of one rule against the indexed valuation."""
    bindings = [dict(seed) if seed else {}]
    for batom in rule.body:
        if not bindings:
            return []
        new = []
        for theta in bindings:
            pattern = apply_subst(batom, theta)
            for ground in index.candidates(pattern):
                ext = match_atom(pattern, ground, theta)
                if ext is not None:
                    new.append(ext)
        bindings = new
    return bindings


def _instances_of_rule(rule: PRule, rule_index: int, index: _AtomIndex,
                       seed: Optional[dict] = None) -> list:
    """Deduplicated, canonically ordered ground instances of one rule.

    Two substitutions yielding the same ground head and the same multiset
    of ground body atoms count as one instance (the canonically least
    substitution is kept), mirroring set semantics over ground rules.
    """
    var_order = _rule_var_order(rule)
    found = []
    for theta in _match_rule(rule, index, seed):
        head = apply_subst(rule.head, theta)
        body = tuple(apply_subst(b, theta) for b in rule.body)
        found.append((_theta_key(theta, var_order), theta, head, body))
    found.sort(key=lambda t: t[0])
    out = []
    seen = set()
    for tkey, theta, head, body in found:
        dedup = (head, tuple(sorted(body, key=atom_key)))
        if dedup in seen:
            continue
        seen.add(dedup)
        out.append(_Instance(rule_index, theta, tkey, head, body))
    return out


def _contributions(program: PProgram, v: Valuation) -> dict:
    """Head atom -> list of instances, in canonical combination order."""
    index = _AtomIndex(v)
    per_head: dict = {}
    for rule_index, rule in enumerate(program.rules):
        for inst in _instances_of_rule(rule, rule_index, index):
            per_head.setdefault(inst.head, []).append(inst)
    # Instances arrive rule-index-major and theta-sorted within a rule, so
    # each list is already in canonical order; keep an explicit sort as
    # the documented contract.
    for insts in per_head.values():
        insts.sort(key=lambda i: (i.rule_index, i.theta_key))
    return per_head


def instances_for_atom(program: PProgram, v: Valuation, atom: Atom) -> list:
    """Ground instances whose head equals ``atom``, canonically ordered."""
    index = _AtomIndex(v)
    out = []
    for rule_index, rule in enumerate(program.rules):
        seed = match_atom(rule.head, atom)
        if seed is None:
            continue
        out.extend(_instances_of_rule(rule, rule_index, index, seed))
    out.sort(key=lambda i: (i.rule_index, i.theta_key))
    return out


# ---- the immediate-consequence operator ------------------------------


def rule_conf(rule: PRule, v: Valuation) -> ConfidenceLevel:
    """Confidence a ground rule instance propagates to its head.

    The rule's own confidence is conjoined first, then the body atom
    values in body order, all under the rule's conjunctive mode.  For a
    fact this is just the fact's confidence.
    """
    if not rule.is_ground():
        raise ValueError(f"rule instance is not ground: {rule}")
    return conjoin_all(
        rule.conj_mode,
        itertools.chain((rule.confidence,), (v[b] for b in rule.body)),
    )


def _instance_conf(program: PProgram, inst: _Instance, v: Valuation) -> ConfidenceLevel:
    rule = program.rules[inst.rule_index]
    return conjoin_all(
        rule.conj_mode,
        itertools.chain((rule.confidence,), (v[b] for b in inst.body)),
    )


def atom_conf(program: PProgram, v: Valuation, atom: Atom) -> ConfidenceLevel:
    """Combined confidence of all derivations of ``atom`` under ``v``."""
    insts = instances_for_atom(program, v, atom)
    if not insts:
        return _BOT_T
    mode = program.disj_mode_of(atom.pred)
    return disjoin_all(mode, (_instance_conf(program, i, v) for i in insts))


def tp_step(program: PProgram, v: Valuation) -> Valuation:
    """One application of the immediate-consequence operator."""
    per_head = _contributions(program, v)
    out = {}
    for head in sorted(per_head, key=atom_key):
        mode = program.disj_mode_of(head.pred)
        val = disjoin_all(
            mode, (_instance_conf(program, i, v) for i in per_head[head])
        )
        if val != _BOT_T:
            out[head] = val
    return Valuation(out)


def reduce_facts(program: PProgram) -> PProgram:
    """Replace every fact's confidence by its reduced form.

    Reduction is probabilistically equivalent and makes the combination
    formulas tight; it is applied once at load time, never inside the
    algebra.
    """
    rules = tuple(
        PRule(r.head, r.body, _conf.reduce(r.confidence),
              r.conj_mode, r.disj_mode, r.span) if r.is_fact else r
        for r in program.rules
    )
    return PProgram(rules)


def _residual(old: Valuation, new: Valuation) -> float:
    worst = 0.0
    for atom in set(old.atoms()) | set(new.atoms()):
        for x, y in zip(old[atom].components, new[atom].components):
            diff = abs(x - y)
            if diff > worst:
                worst = diff
    return worst


def evaluate(program: PProgram,
             options: Optional[FixpointOptions] = None) -> FixpointResult:
    """Iterate from the empty valuation to a (near-)fixpoint.

    Stops with status ``exact`` on bit-exact equality of consecutive
    valuations, or ``approximate`` when the residual drops to
    ``options.eps`` (if positive) or ``max_iters`` is exhausted.  An
    approximate result is a sound truth-order lower bound of the limit
    because the iteration chain ascends.
    """
    opts = options or FixpointOptions()
    diags = validate(program)
    errors = [d for d in diags if d.is_error()]
    if errors:
        raise ValidationError(errors)
    if opts.strict:
        hazards = [d for d in diags if d.code == "NONTERMINATING_MODE"]
        if hazards:
            raise StrictModeError(hazards)

    prog = reduce_facts(program)
    v = Valuation()
    residual = 0.0
    for i in range(1, opts.max_iters + 1):
        w = tp_step(prog, v)
        if w == v:
            return FixpointResult(w, i, "exact", 0.0)
        residual = _residual(v, w)
        v = w
        if opts.eps > 0.0 and residual <= opts.eps:
            return FixpointResult(v, i, "approximate", residual)
    return FixpointResult(v, opts.max_iters, "approximate", residual)


def satisfies(program: PProgram, v: Valuation) -> bool:
    """Check the satisfaction conditions of the program under ``v``.

    Every fired ground rule instance must propagate at most ``v(head)``
    (truth order), and the combined per-atom confidence must also stay
    below ``v``.  Instances with a false body atom propagate the false
    level and need no explicit check.
    """
    per_head = _contributions(program, v)
    for head, insts in per_head.items():
        target = v[head]
        confs = [_instance_conf(program, i, v) for i in insts]
        for c in confs:
            if not leq(Order.TRUTH, c, target):
                return False
        mode = program.disj_mode_of(head.pred)
        if not leq(Order.TRUTH, disjoin_all(mode, confs), target):
            return False
    return True


def query(result: FixpointResult, pattern: Atom) -> list:
    """Match ``pattern`` against the result valuation.

    Returns ``(bindings, confidence)`` pairs sorted canonically by the
    matched atom; atoms at the false level are never present.  An unknown
    predicate yields an empty list and a warning.
    """
    val = result.valuation
    preds = {a.pred for a in val.atoms()}
    if pattern.pred not in preds:
        warnings.warn(f"predicate '{pattern.pred}' has no derived atoms",
                      stacklevel=2)
        return []
    hits = []
    for atom, conf in val.sorted_items():
        theta = match_atom(pattern, atom)
        if theta is not None:
            hits.append((theta, conf))
    return hits
