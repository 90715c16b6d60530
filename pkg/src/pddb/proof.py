"""Disjunctive proof trees: construction, evaluation and shape checks.

Derivations of uncertain facts cannot be considered one at a time: the
confidences of *all* derivations of a goal must be disjoined under the
goal predicate's mode.  A disjunctive proof tree therefore alternates
goal nodes (one per subgoal, children = the rule applications deriving
it) and rule nodes (one per applied rule instance, children = its body
subgoals).  Confidence is computed bottom-up: a childless goal node is a
failure and counts as the false level, a rule node conjoins its rule
confidence with its children under the rule's conjunctive mode, a goal
node disjoins its children under its predicate's disjunctive mode.

:func:`build_ddt` mirrors ``k`` evaluation steps of the engine exactly:
the tree built for an atom at depth ``k`` computes, bit for bit, the
value the engine assigns after ``k`` steps.  Trees share repeated
(atom, level) subtrees as a DAG; metrics such as simplicity violations
treat the tree as fully expanded.

Failure nodes are retained rather than pruned; since the false level is
the disjunction identity and conjunction annihilator they never change a
computed confidence, and pruning stays a separate, testable transform
(:func:`prune_repeated_goals`).
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass, field
from typing import Mapping, Optional, Union

from .confidence import ConfidenceLevel, Order, bottom
from .engine import (
    FixpointOptions,
    FixpointResult,
    Valuation,
    evaluate,
    instances_for_atom,
    reduce_facts,
    tp_step,
)
from .lang import Atom, PProgram, atom_key
from .modes import Mode, conjoin_all, disjoin_all

__all__ = [
    "GoalNode",
    "RuleNode",
    "DptNode",
    "ProofResult",
    "ProofError",
    "dpt_confidence",
    "is_well_formed",
    "build_ddt",
    "simplicity_violations",
    "is_simple",
    "prune_repeated_goals",
    "prove",
]

_BOT_T = bottom(Order.TRUTH)

# Renamed-apart variables are written base~n; '~' cannot occur in source
# variable names, so stripping at the first '~' recovers the rule's own name.
_RENAME_SEP = "~"


class ProofError(ValueError):
    """Raised for goals the proof machinery does not handle (non-ground)."""


@dataclass(frozen=True)
class RuleNode:
    """One rule application: the rule's head instance and substitution."""

    rule_index: int
    head: Atom
    confidence: ConfidenceLevel
    conj_mode: Mode
    subst: Mapping[str, object] = field(default_factory=dict)
    children: tuple = ()  # goal nodes, one per body atom


@dataclass(frozen=True)
class GoalNode:
    """A (sub)goal with the rule applications deriving it.

    No children means a failure node, valued at the false level.
    """

    atom: Atom
    disj_mode: Mode
    children: tuple = ()  # rule nodes


DptNode = Union[GoalNode, RuleNode]


@dataclass(frozen=True)
class ProofResult:
    confidence: ConfidenceLevel
    tree: GoalNode
    depth: int
    exact: bool


def _original_var(name: str) -> str:
    return name.split(_RENAME_SEP, 1)[0]


def dpt_confidence(tree: DptNode) -> ConfidenceLevel:
    """Bottom-up confidence of a finite tree (shared subtrees cached)."""
    cache: dict = {}

    def conf(node: DptNode) -> ConfidenceLevel:
        got = cache.get(id(node))
        if got is not None:
            return got
        if isinstance(node, GoalNode):
            if not node.children:
                out = _BOT_T
            else:
                out = disjoin_all(node.disj_mode,
                                  (conf(r) for r in node.children))
        else:
            out = conjoin_all(
                node.conj_mode,
                itertools.chain((node.confidence,),
                                (conf(g) for g in node.children)),
            )
        cache[id(node)] = out
        return out

    return conf(tree)


def _branch_signatures(goal: GoalNode, cache: dict) -> list:
    """One signature per branch rooted at ``goal``.

    A branch picks one rule child per goal node and keeps all goal
    children of a rule node; its signature is the chosen rule instance
    (index plus substitution over the rules' own variable names) together
    with the chosen sub-branches.  Two branches describe the same
    classical proof exactly when their signatures are equal.
    """
    got = cache.get(id(goal))
    if got is not None:
        return got
    if not goal.children:
        sigs = [()]
    else:
        sigs = []
        for rc in goal.children:
            theta = tuple(sorted(
                (_original_var(k), repr(v)) for k, v in rc.subst.items()
            ))
            child_sigs = [_branch_signatures(g, cache) for g in rc.children]
            for combo in itertools.product(*child_sigs):
                sigs.append((rc.rule_index, theta, combo))
    cache[id(goal)] = sigs
    return sigs


def is_well_formed(tree: GoalNode) -> bool:
    """Check substitution compatibility and branch distinctness.

    All substitutions in the tree must agree on shared variable names,
    every rule node's head must match its parent goal, and at every goal
    node no two branches may carry the same associated substitution
    (i.e. repeat the same classical proof).  Failure leaves are allowed;
    they stand for the false level and are neutral in every combination.
    """
    bindings: dict = {}

    def compatible(goal: GoalNode) -> bool:
        for rc in goal.children:
            if rc.head != goal.atom:
                return False
            for var, term in rc.subst.items():
                seen = bindings.get(var)
                if seen is None:
                    bindings[var] = term
                elif seen != term:
                    return False
            for g in rc.children:
                if not compatible(g):
                    return False
        return True

    if not compatible(tree):
        return False

    sig_cache: dict = {}

    def distinct(goal: GoalNode) -> bool:
        sigs = _branch_signatures(goal, sig_cache)
        if len(sigs) != len(set(sigs)):
            return False
        return all(
            distinct(g) for rc in goal.children for g in rc.children
        )

    return distinct(tree)


def build_ddt(program: PProgram, goal: Atom, k: int) -> GoalNode:
    """Derivation tree mirroring ``k`` evaluation steps for ``goal``.

    The confidence of the returned tree equals the engine's value for the
    goal after ``k`` steps, bit for bit.  ``k = 0`` yields a bare failure
    node.  Repeated (atom, level) subgoals share one subtree; rule
    variables are renamed apart per rule node so all substitutions in the
    tree are trivially compatible.
    """
    if not goal.is_ground():
        raise ProofError(f"goal must be ground: {goal}")
    if k < 0:
        raise ValueError("k must be >= 0")
    prog = reduce_facts(program)
    chain = [Valuation()]
    for _ in range(max(0, k - 1)):
        chain.append(tp_step(prog, chain[-1]))

    memo: dict = {}
    counter = itertools.count()

    def node(atom: Atom, level: int) -> GoalNode:
        key = (atom, level)
        got = memo.get(key)
        if got is not None:
            return got
        mode = prog.disj_mode_of(atom.pred)
        if level == 0:
            out = GoalNode(atom, mode, ())
        else:
            rule_children = []
            for inst in instances_for_atom(prog, chain[level - 1], atom):
                rule = prog.rules[inst.rule_index]
                uid = next(counter)
                theta = {
                    f"{name}{_RENAME_SEP}{uid}": term
                    for name, term in inst.theta.items()
                }
                goals = tuple(node(b, level - 1) for b in inst.body)
                rule_children.append(RuleNode(
                    inst.rule_index, atom, rule.confidence,
                    rule.conj_mode, theta, goals,
                ))
            out = GoalNode(atom, mode, tuple(rule_children))
        memo[key] = out
        return out

    return node(goal, k)


def _branch_labels(goal: GoalNode, cache: dict) -> list:
    """Goal-label multiset of every branch rooted at ``goal``."""
    got = cache.get(id(goal))
    if got is not None:
        return got
    own = Counter((goal.atom,))
    if not goal.children:
        out = [own]
    else:
        out = []
        for rc in goal.children:
            child_lists = [_branch_labels(g, cache) for g in rc.children]
            for combo in itertools.product(*child_lists):
                merged = own.copy()
                for c in combo:
                    merged.update(c)
                out.append(merged)
    cache[id(goal)] = out
    return out


def simplicity_violations(tree: GoalNode, atom: Atom) -> int:
    """Count repeated occurrences of ``atom`` along branches.

    A branch containing the atom n times contributes n-1; branches not
    containing it contribute nothing.
    """
    cache: dict = {}
    total = 0
    for branch in _branch_labels(tree, cache):
        n = branch.get(atom, 0)
        if n:
            total += n - 1
    return total


def is_simple(tree: GoalNode) -> bool:
    """True iff no branch repeats any goal atom."""
    cache: dict = {}
    for branch in _branch_labels(tree, cache):
        if any(n > 1 for n in branch.values()):
            return False
    return True


def prune_repeated_goals(tree: GoalNode) -> GoalNode:
    """Replace goals repeating an ancestor goal atom by failure nodes.

    With positive correlation as the recursive disjunctive mode this
    transformation provably leaves the computed confidence unchanged
    (absorption); it is exposed separately so that claim stays testable.
    Shared subtrees are expanded because pruning depends on the path.
    """

    def walk(goal: GoalNode, ancestors: frozenset) -> GoalNode:
        if goal.atom in ancestors:
            return GoalNode(goal.atom, goal.disj_mode, ())
        inner = ancestors | {goal.atom}
        rules = tuple(
            RuleNode(rc.rule_index, rc.head, rc.confidence, rc.conj_mode,
                     rc.subst, tuple(walk(g, inner) for g in rc.children))
            for rc in goal.children
        )
        return GoalNode(goal.atom, goal.disj_mode, rules)

    return walk(tree, frozenset())


def prove(program: PProgram, goal: Atom, depth: Optional[int] = None,
          options: Optional[FixpointOptions] = None,
          _result: Optional[FixpointResult] = None) -> ProofResult:
    """Evaluate the program and build a proof tree for a ground goal.

    If the fixpoint is exact at step ``k*``, the tree is built at depth
    ``k*`` and its confidence equals the fixpoint value of the goal.
    Otherwise a depth-limited tree is returned (default: the number of
    steps the engine ran); its confidence is a truth-order lower bound of
    the engine's approximate value.
    """
    if not goal.is_ground():
        raise ProofError(f"prove needs a ground goal, got {goal}")
    result = _result if _result is not None else evaluate(program, options)
    if result.exact:
        k = result.iterations - 1
        exact = True
    else:
        k = depth if depth is not None else result.iterations
        exact = False
    tree = build_ddt(program, goal, k)
    return ProofResult(dpt_confidence(tree), tree, k, exact)
