"""Disjunctive proof trees: evaluation, shape checks, soundness."""

from __future__ import annotations

import pytest

from pddb.confidence import Order, bottom, leq
from pddb.engine import FixpointOptions, Valuation, evaluate, tp_step
from pddb.lang import Atom, Const
from pddb.modes import Mode
from pddb.parser import parse_program
from pddb.proof import (
    GoalNode,
    ProofError,
    RuleNode,
    build_ddt,
    dpt_confidence,
    is_simple,
    is_well_formed,
    prove,
    prune_repeated_goals,
    simplicity_violations,
)

from conftest import c, chain_program_text

BOT = bottom(Order.TRUTH)
TRUE = c(1, 1, 0, 0)


def atom(pred, *args):
    return Atom(pred, tuple(Const(a) for a in args))


def _closure_tree_with_failure():
    """Hand-built height-3 tree for p(1,2) over the tc1 rules.

    Two branches: the direct edge, and the recursive rule with p(3,2)
    left unexpanded as a failure node.
    """
    e12 = GoalNode(atom("e", 1, 2), Mode.POSITIVE_CORRELATION, (
        RuleNode(2, atom("e", 1, 2), TRUE, Mode.IGNORANCE, {}, ()),
    ))
    e13 = GoalNode(atom("e", 1, 3), Mode.POSITIVE_CORRELATION, (
        RuleNode(3, atom("e", 1, 3), TRUE, Mode.IGNORANCE, {}, ()),
    ))
    p32 = GoalNode(atom("p", 3, 2), Mode.POSITIVE_CORRELATION, ())
    direct = RuleNode(1, atom("p", 1, 2), TRUE, Mode.INDEPENDENCE,
                      {"X": Const(1), "Y": Const(2)}, (e12,))
    recursive = RuleNode(0, atom("p", 1, 2), TRUE, Mode.INDEPENDENCE,
                         {"X": Const(1), "Z": Const(3), "Y": Const(2)},
                         (e13, p32))
    return GoalNode(atom("p", 1, 2), Mode.POSITIVE_CORRELATION,
                    (direct, recursive))


class TestDptConfidence:
    def test_failure_leaf_is_false(self):
        leaf = GoalNode(atom("p", 1, 1), Mode.POSITIVE_CORRELATION, ())
        assert dpt_confidence(leaf) == BOT

    def test_singleton_disjunction(self):
        tree = GoalNode(atom("e", 3, 2), Mode.POSITIVE_CORRELATION, (
            RuleNode(0, atom("e", 3, 2), c(0.9, 0.9, 0, 0), Mode.IGNORANCE, {}, ()),
        ))
        assert dpt_confidence(tree) == c(0.9, 0.9, 0, 0)

    def test_failure_branch_is_ignored(self):
        assert dpt_confidence(_closure_tree_with_failure()) == TRUE


class TestWellFormed:
    def test_failure_branches_allowed(self):
        assert is_well_formed(_closure_tree_with_failure())

    def test_duplicate_rule_child_rejected(self):
        leaf = RuleNode(0, Atom("p"), c(0.5, 0.5, 0, 0), Mode.IGNORANCE, {}, ())
        tree = GoalNode(Atom("p"), Mode.IGNORANCE, (leaf, leaf))
        assert not is_well_formed(tree)

    def test_incompatible_substitutions_rejected(self):
        inner = GoalNode(atom("q", 2), Mode.POSITIVE_CORRELATION, (
            RuleNode(1, atom("q", 2), TRUE, Mode.IGNORANCE,
                     {"X": Const(2)}, ()),
        ))
        tree = GoalNode(atom("p", 1), Mode.POSITIVE_CORRELATION, (
            RuleNode(0, atom("p", 1), TRUE, Mode.IGNORANCE,
                     {"X": Const(1)}, (inner,)),
        ))
        assert not is_well_formed(tree)

    def test_head_must_match_parent_goal(self):
        tree = GoalNode(atom("p", 1), Mode.POSITIVE_CORRELATION, (
            RuleNode(0, atom("p", 2), TRUE, Mode.IGNORANCE, {}, ()),
        ))
        assert not is_well_formed(tree)


class TestBuildDdt:
    def test_depth_zero_is_failure(self, tc1):
        tree = build_ddt(tc1, atom("p", 1, 2), 0)
        assert tree.children == ()
        assert dpt_confidence(tree) == BOT

    def test_two_steps_reach_certainty(self, tc1):
        tree = build_ddt(tc1, atom("p", 1, 2), 2)
        assert dpt_confidence(tree) == TRUE

    def test_matches_engine_iterates_bit_exactly(self, tc1, tc2, ex52):
        for prog in (tc1, tc2, ex52):
            res = evaluate(prog)
            k_star = res.iterations - 1
            chain = [Valuation()]
            for _ in range(k_star):
                chain.append(tp_step(prog, chain[-1]))
            atoms = set(res.valuation.atoms()) | {atom("p", 9, 9)}
            for k in range(k_star + 1):
                for a in atoms:
                    if a.pred not in prog.predicates():
                        continue
                    tree = build_ddt(prog, a, k)
                    assert dpt_confidence(tree) == chain[k][a], (a, k)

    def test_trees_are_well_formed(self, tc1, tc2, ex52):
        for prog in (tc1, tc2, ex52):
            res = evaluate(prog)
            for a in res.valuation.atoms():
                tree = build_ddt(prog, a, res.iterations - 1)
                assert is_well_formed(tree)

    def test_nonground_goal_rejected(self, tc1):
        from pddb.lang import Var

        with pytest.raises(ProofError):
            build_ddt(tc1, Atom("p", (Const(1), Var("Y"))), 2)


class TestSimplicity:
    def test_repeated_goal_counts_once(self):
        inner = GoalNode(atom("p", 1, 1), Mode.POSITIVE_CORRELATION, ())
        tree = GoalNode(atom("p", 1, 1), Mode.POSITIVE_CORRELATION, (
            RuleNode(0, atom("p", 1, 1), TRUE, Mode.IGNORANCE, {}, (inner,)),
        ))
        assert simplicity_violations(tree, atom("p", 1, 1)) == 1
        assert not is_simple(tree)

    def test_height_one_tree_is_simple(self):
        tree = GoalNode(Atom("p"), Mode.IGNORANCE, (
            RuleNode(0, Atom("p"), c(0.5, 0.5, 0, 0), Mode.IGNORANCE, {}, ()),
        ))
        assert is_simple(tree)
        assert simplicity_violations(tree, Atom("p")) == 0

    def test_self_loop_tree_is_not_simple(self, tc2):
        tree = build_ddt(tc2, atom("p", 1, 2), 3)
        assert not is_simple(tree)
        assert simplicity_violations(tree, atom("p", 1, 2)) >= 1


class TestPruning:
    def test_pruning_preserves_confidence_under_pc(self):
        text = (
            "p(X,Y) <[1,1],[0,0]> <- e(X,Z), p(Z,Y) ; conj=ind, disj=pc.\n"
            "p(X,Y) <[1,1],[0,0]> <- e(X,Y) ; conj=ind, disj=pc.\n"
            "e(1,2) <[0.9,0.95],[0,0.05]>.\n"
            "e(2,3) <[0.8,0.85],[0.1,0.15]>.\n"
            "e(3,1) <[0.7,0.75],[0.2,0.25]>.\n"
        )
        prog = parse_program(text)
        res = evaluate(prog)
        assert res.exact
        k_star = res.iterations - 1
        for a in res.valuation.atoms():
            if a.pred != "p":
                continue
            tree = build_ddt(prog, a, k_star)
            pruned = prune_repeated_goals(tree)
            assert dpt_confidence(pruned) == dpt_confidence(tree)
            assert is_simple(pruned)


class TestProve:
    def test_certain_path(self, tc1):
        result = prove(tc1, atom("p", 1, 2))
        assert result.exact
        assert result.confidence == TRUE
        assert result.confidence == dpt_confidence(result.tree)

    def test_two_route_goal(self, ex52):
        result = prove(ex52, Atom("a"))
        assert result.exact
        assert result.confidence == c(0.45, 0.8, 0.1, 0.4)

    def test_depth_limited_when_approximate(self, tc2_ign):
        opts = FixpointOptions(max_iters=200)
        result = prove(tc2_ign, atom("p", 1, 2), depth=50, options=opts)
        assert not result.exact
        assert result.depth == 50
        approx = evaluate(tc2_ign, opts).valuation[atom("p", 1, 2)]
        assert leq(Order.TRUTH, result.confidence, approx)
        assert leq(Order.TRUTH, result.confidence, c(0, 1, 0, 0))

    def test_nonground_goal_rejected(self, tc1):
        from pddb.lang import Var

        with pytest.raises(ProofError):
            prove(tc1, Atom("p", (Const(1), Var("Y"))))


def test_soundness_depth_truncations_below_fixpoint(tc1, tc2, ex52):
    for prog in (tc1, tc2, ex52):
        res = evaluate(prog)
        k_star = res.iterations - 1
        for a in res.valuation.atoms():
            for k in range(k_star + 1):
                conf = dpt_confidence(build_ddt(prog, a, k))
                assert leq(Order.TRUTH, conf, res.valuation[a])


def test_chain_proof_scales():
    prog = parse_program(chain_program_text(8))
    result = prove(prog, atom("p", 1, 8))
    assert result.exact and result.confidence == TRUE
