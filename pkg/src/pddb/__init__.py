"""Deductive database engine over belief/doubt probability intervals.

Rule programs attach a confidence level (a belief interval and a doubt
interval) to every rule and fact, a conjunctive mode for propagating
confidence through rule bodies, and a disjunctive mode for combining the
confidences of different derivations of the same atom.  Bottom-up
evaluation computes the least fixpoint valuation; disjunctive proof trees
certify individual answers.
"""

from .confidence import (
    ConfidenceLevel,
    InvalidConfidenceError,
    Order,
    bottom,
    format_confidence,
    is_consistent,
    is_reduced,
    join,
    leq,
    meet,
    reduce,
    top,
)
from .engine import (
    FixpointOptions,
    FixpointResult,
    StrictModeError,
    ValidationError,
    Valuation,
    atom_conf,
    evaluate,
    query,
    rule_conf,
    satisfies,
    tp_step,
)
from .lang import (
    Atom,
    Const,
    Diagnostic,
    PProgram,
    PRule,
    Var,
    constants_of,
    recursive_predicates,
    validate,
)
from .modes import Mode, ModeError, conjoin, conjoin_all, disjoin, disjoin_all, negate
from .oracle import (
    LinearProgram,
    OracleInfeasibleError,
    WorldDistribution,
    ignorance_oracle,
    independence_oracle,
    lp_extremes,
)
from .parser import ParseError, SourceSpan, parse_program, parse_query, render
from .proof import (
    DptNode,
    GoalNode,
    ProofError,
    ProofResult,
    RuleNode,
    build_ddt,
    dpt_confidence,
    is_simple,
    is_well_formed,
    prove,
    prune_repeated_goals,
    simplicity_violations,
)

__version__ = "0.1.0"
