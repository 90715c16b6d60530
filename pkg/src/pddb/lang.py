"""Abstract syntax of rule programs and their static validation.

A program is a finite list of rules ``head <conf> <- body ; modes``.  Each
rule carries a confidence level, a conjunctive mode for combining its own
confidence with the body subgoals, and a disjunctive mode for combining
the confidences of different derivations of its head predicate.  All
rules defining one predicate must agree on the disjunctive mode.

Rules must be range restricted (every head variable occurs in the body),
which forces facts to be ground.  Validation reports errors and warnings
as diagnostics rather than raising; the diagnostic codes are:

========================  ========================================
ARITY_MISMATCH            predicate used with two different arities
RANGE_RESTRICTION         head variable missing from the body
CONF_INCONSISTENT         rule confidence violates consistency
MODE_AGREEMENT            same head predicate, different disj modes
CONF_NOT_REDUCED          (warning) rule confidence not reduced
NONTERMINATING_MODE       (warning) recursive predicate whose
                          disjunctive mode is not ``pc``
========================  ========================================
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Iterator, Mapping, Optional, Union

from .confidence import ConfidenceLevel, is_consistent, is_reduced
from .modes import Mode

if TYPE_CHECKING:  # pragma: no cover
    from .parser import SourceSpan

__all__ = [
    "Var",
    "Const",
    "Term",
    "Atom",
    "PRule",
    "PProgram",
    "Diagnostic",
    "DEFAULT_CONJ_MODE",
    "DEFAULT_DISJ_MODE",
    "validate",
    "recursive_predicates",
    "constants_of",
    "apply_subst",
    "match_atom",
    "term_key",
    "atom_key",
]

# Defaults used when the concrete syntax omits a mode: ignorance is the
# most conservative conjunction; pc is the only disjunction guaranteed to
# terminate on recursion over cyclic data.
DEFAULT_CONJ_MODE = Mode.IGNORANCE
DEFAULT_DISJ_MODE = Mode.POSITIVE_CORRELATION


@dataclass(frozen=True)
class Var:
    """A variable; names start uppercase in concrete syntax."""

    name: str


@dataclass(frozen=True)
class Const:
    """A constant: a symbol (possibly quoted in text) or an integer."""

    value: Union[int, str]


Term = Union[Var, Const]


class Atom:
    """A predicate applied to a fixed-length list of terms."""

    __slots__ = ("pred", "args", "_hash")

    def __init__(self, pred: str, args: tuple = ()):
        object.__setattr__(self, "pred", pred)
        object.__setattr__(self, "args", tuple(args))
        object.__setattr__(self, "_hash", hash((pred, self.args)))

    def __setattr__(self, name, value):
        raise AttributeError("Atom is immutable")

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return not any(isinstance(t, Var) for t in self.args)

    def variables(self) -> Iterator[str]:
        for t in self.args:
            if isinstance(t, Var):
                yield t.name

    def __eq__(self, other):
        if not isinstance(other, Atom):
            return NotImplemented
        return self.pred == other.pred and self.args == other.args

    def __hash__(self):
        return self._hash

    def __repr__(self):
        return f"Atom({self.pred!r}, {self.args!r})"

    def __str__(self):
        from .parser import render_atom

        return render_atom(self)


def term_key(t: Term):
    """Total-order sort key over terms: integers, then symbols, then vars."""
    if isinstance(t, Const):
        if isinstance(t.value, int):
            return (0, 0, t.value, "")
        return (0, 1, 0, t.value)
    return (1, 0, 0, t.name)


def atom_key(a: Atom):
    """Canonical sort key for atoms."""
    return (a.pred, len(a.args), tuple(term_key(t) for t in a.args))


def apply_subst(atom: Atom, theta: Mapping[str, Term]) -> Atom:
    """Replace bound variables of ``atom`` according to ``theta``."""
    if not atom.args:
        return atom
    args = tuple(
        theta.get(t.name, t) if isinstance(t, Var) else t for t in atom.args
    )
    return Atom(atom.pred, args)


def match_atom(pattern: Atom, ground: Atom,
               binding: Optional[Mapping[str, Term]] = None) -> Optional[dict]:
    """One-sided match of ``pattern`` against a ground atom.

    Returns the extended binding, or None if they do not match.
    """
    if pattern.pred != ground.pred or len(pattern.args) != len(ground.args):
        return None
    out = dict(binding) if binding else {}
    for pt, gt in zip(pattern.args, ground.args):
        if isinstance(pt, Var):
            seen = out.get(pt.name)
            if seen is None:
                out[pt.name] = gt
            elif seen != gt:
                return None
        elif pt != gt:
            return None
    return out


@dataclass(frozen=True)
class PRule:
    """One rule: ground facts are rules with an empty body."""

    head: Atom
    body: tuple = ()
    confidence: ConfidenceLevel = None  # type: ignore[assignment]
    conj_mode: Mode = DEFAULT_CONJ_MODE
    disj_mode: Mode = DEFAULT_DISJ_MODE
    span: "Optional[SourceSpan]" = field(default=None, compare=False, repr=False)

    @property
    def is_fact(self) -> bool:
        return not self.body

    def variables(self) -> set:
        out = set(self.head.variables())
        for b in self.body:
            out.update(b.variables())
        return out

    def is_ground(self) -> bool:
        return self.head.is_ground() and all(b.is_ground() for b in self.body)


@dataclass(frozen=True)
class PProgram:
    """An ordered, finite collection of rules."""

    rules: tuple = ()

    def predicates(self) -> dict:
        """Predicate name -> arity, for every predicate occurring anywhere."""
        out: dict = {}
        for rule in self.rules:
            for atom in (rule.head, *rule.body):
                out.setdefault(atom.pred, atom.arity)
        return out

    def rules_for(self, pred: str) -> list:
        return [r for r in self.rules if r.head.pred == pred]

    def disj_mode_of(self, pred: str) -> Mode:
        for r in self.rules:
            if r.head.pred == pred:
                return r.disj_mode
        return DEFAULT_DISJ_MODE


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    code: str
    message: str
    rule_index: Optional[int] = None

    def is_error(self) -> bool:
        return self.severity == "error"


def _diag(sev: str, code: str, msg: str, idx: Optional[int]) -> Diagnostic:
    return Diagnostic(sev, code, msg, idx)


def validate(program: PProgram) -> list:
    """Static checks; deterministic, order-stable diagnostic list."""
    diags: list = []
    arities: dict = {}
    disj_modes: dict = {}

    for idx, rule in enumerate(program.rules):
        for atom in (rule.head, *rule.body):
            seen = arities.get(atom.pred)
            if seen is None:
                arities[atom.pred] = atom.arity
            elif seen != atom.arity:
                diags.append(_diag(
                    "error", "ARITY_MISMATCH",
                    f"predicate '{atom.pred}' used with arity {atom.arity} "
                    f"after arity {seen}", idx))

        body_vars = set()
        for b in rule.body:
            body_vars.update(b.variables())
        loose = sorted(set(rule.head.variables()) - body_vars)
        if loose:
            what = "fact must be ground" if rule.is_fact else "head variable(s) not in body"
            diags.append(_diag(
                "error", "RANGE_RESTRICTION",
                f"{what}: {', '.join(loose)}", idx))

        if not is_consistent(rule.confidence):
            diags.append(_diag(
                "error", "CONF_INCONSISTENT",
                f"rule confidence {rule.confidence} is not consistent", idx))
        elif not is_reduced(rule.confidence):
            diags.append(_diag(
                "warning", "CONF_NOT_REDUCED",
                f"rule confidence {rule.confidence} is not reduced", idx))

        prev = disj_modes.get(rule.head.pred)
        if prev is None:
            disj_modes[rule.head.pred] = rule.disj_mode
        elif prev is not rule.disj_mode:
            diags.append(_diag(
                "error", "MODE_AGREEMENT",
                f"rules for '{rule.head.pred}' disagree on disjunctive mode "
                f"({prev.value} vs {rule.disj_mode.value})", idx))

    hazardous = sorted(
        p for p in recursive_predicates(program)
        if disj_modes.get(p, DEFAULT_DISJ_MODE) is not Mode.POSITIVE_CORRELATION
    )
    for pred in hazardous:
        first = next(i for i, r in enumerate(program.rules) if r.head.pred == pred)
        diags.append(_diag(
            "warning", "NONTERMINATING_MODE",
            f"recursive predicate '{pred}' uses disjunctive mode "
            f"'{disj_modes[pred].value}'; the fixpoint may only be reached "
            "in the limit on cyclic data", first))

    return diags


def recursive_predicates(program: PProgram) -> set:
    """Predicates lying on a cycle of the head->body dependency graph."""
    edges: dict = {}
    for rule in program.rules:
        succ = edges.setdefault(rule.head.pred, set())
        for b in rule.body:
            succ.add(b.pred)
    out = set()
    for start in edges:
        # BFS from the successors of `start`; recursive iff it reaches itself.
        seen: set = set()
        frontier = list(edges.get(start, ()))
        while frontier:
            p = frontier.pop()
            if p == start:
                out.add(start)
                break
            if p in seen:
                continue
            seen.add(p)
            frontier.extend(edges.get(p, ()))
    return out


def constants_of(program: PProgram) -> set:
    """All constants occurring anywhere in the program.

    The cardinality of this set is the database-size parameter used when
    talking about data complexity.
    """
    out = set()
    for rule in program.rules:
        for atom in (rule.head, *rule.body):
            for t in atom.args:
                if isinstance(t, Const):
                    out.add(t.value)
    return out
