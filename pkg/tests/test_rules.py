import random

import pytest

from msl import formula as fm
from msl import worked
from msl.algebra import dual_algebra
from msl.checks import all_domains, random_frame
from msl.errors import PreconditionError
from msl.frame import Frame, enumerate_frames, is_pretransitive, rank
from msl.maps import DomainSet, is_pmorphism
from msl.rules import (MAX_RULE_ATOMS, CanonicalRuleSpec, element_var, gen_epsilon, gen_gamma,
                       gen_jankov_rule, gen_rho, gen_stable_rule, refutes_epsilon_semantic,
                       refutes_gamma_semantic, refutes_rule_semantic, refutes_syntactic,
                       spec_for_frame, splitting_dichotomy_check)
import oracles

POINT = worked.single_point()
CHAIN2 = worked.chain(2)


def test_rho_of_single_point():
    alg = dual_algebra(POINT)
    rule = gen_rho(alg)
    p0, p1 = fm.Var("p_0"), fm.Var("p_1")
    assert element_var(alg, 0) == p0 and element_var(alg, 1) == p1
    joins = [fm.Iff(element_var(alg, a | b), fm.Or(element_var(alg, a), element_var(alg, b)))
             for a in (0, 1) for b in (0, 1)]
    negs = [fm.Iff(p1, fm.Not(p0)), fm.Iff(p0, fm.Not(p1))]
    dias = [fm.Implies(fm.Dia(p0), p0), fm.Implies(fm.Dia(p1), p0)]
    assert rule.premises == tuple(joins + negs + dias)
    assert len(rule.premises) == 8
    assert rule.conclusions == (p0,)


def test_negation_clause_is_not_a_tautology():
    alg = dual_algebra(POINT)
    negs = [g for g in gen_rho(alg).premises if isinstance(g, fm.Iff) and isinstance(g.right, fm.Not)]
    assert all(g.left != g.right.arg for g in negs)


def test_specialisations():
    alg = dual_algebra(CHAIN2)
    assert gen_stable_rule(alg) == gen_rho(alg, ())
    jankov = gen_jankov_rule(alg)
    assert jankov == gen_rho(alg, range(alg.size))
    extra = [g for g in jankov.premises if g not in gen_stable_rule(alg).premises]
    assert len(extra) == alg.size
    assert all(isinstance(g, fm.Implies) and isinstance(g.right, fm.Dia) for g in extra)


def test_size_cap():
    big = Frame(tuple("abcde"), tuple(frozenset() for _ in range(5)))
    assert MAX_RULE_ATOMS == 4
    with pytest.raises(PreconditionError):
        gen_rho(dual_algebra(big))


def test_edge_free_frames_refute_point_rule():
    rule = gen_rho(dual_algebra(POINT))
    for X in enumerate_frames(3):
        edge_free = not X.edges()
        assert refutes_syntactic(X, rule) == edge_free
        assert (refutes_rule_semantic(X, POINT) is not None) == edge_free


def test_syntactic_matches_brute_force_evaluation():
    alg = dual_algebra(POINT)
    rule = gen_rho(alg, (1,))
    names = sorted(rule.variables)
    for X in enumerate_frames(2):
        assert refutes_syntactic(X, rule) == oracles.rule_refuted(
            X, rule.premises, rule.conclusions, names)


def test_gamma_structure_and_preconditions():
    alg = dual_algebra(POINT)
    g = gen_gamma(alg)
    premises, conclusions = gen_rho(alg).premises, gen_rho(alg).conclusions
    assert g == fm.Implies(fm.conj(fm.box_upto(1, x) for x in premises),
                           fm.disj(fm.box_upto(1, d) for d in conclusions))
    assert CanonicalRuleSpec(alg, (), "gamma").generate() == g
    with pytest.raises(PreconditionError):
        gen_gamma(alg, m=0)
    two = Frame(("a", "b"), (frozenset(), frozenset()))
    with pytest.raises(PreconditionError):
        gen_gamma(dual_algebra(two))
    with pytest.raises(PreconditionError):
        gen_gamma(dual_algebra(worked.f1()), m=1)
    assert gen_gamma(dual_algebra(worked.f1()), m=2) is not None


def test_epsilon_structure_and_preconditions():
    alg = dual_algebra(POINT)
    e = gen_epsilon(alg)
    rule = gen_rho(alg)
    assert e == fm.Implies(fm.And(fm.Box(fm.BOT), fm.conj(rule.premises)), fm.disj(rule.conclusions))
    loop = Frame.from_edges("a", [("a", "a")])
    with pytest.raises(PreconditionError):
        gen_epsilon(dual_algebra(loop))
    with pytest.raises(PreconditionError):
        CanonicalRuleSpec(alg, (), "zeta").generate()


def test_gamma_agreement_on_pretransitive_spaces():
    """Syntactic and semantic gamma deciders agree whenever X is also pretransitive."""
    for m in (1, 2):
        Xs = [X for X in enumerate_frames(3) if is_pretransitive(X, m + 1, 1)]
        for F in enumerate_frames(2, rooted=True, pretransitive=(m + 1, 1)):
            for D in (DomainSet.empty(F), DomainSet.full(F)):
                g = gen_gamma(dual_algebra(F), D.sets, m)
                for X in Xs:
                    sem = refutes_gamma_semantic(X, F, D) is not None
                    assert refutes_syntactic(X, g) == sem


def test_gamma_needs_pretransitive_space():
    # box^1 only reaches one step; without (2,1)-pretransitivity the formula is refuted
    # although no rooted upset maps onto the loop with CDC for {a}
    loop = Frame.from_edges("a", [("a", "a")])
    D = DomainSet(loop, (1,))
    g = gen_gamma(dual_algebra(loop), D.sets, 1)
    X = Frame.from_edges("abc", [("a", "c"), ("b", "a")])
    assert not is_pretransitive(X, 2, 1)
    assert refutes_syntactic(X, g)
    assert refutes_gamma_semantic(X, loop, D) is None


def test_epsilon_agreement_and_dead_end_law():
    full = DomainSet.full(POINT)
    e = gen_epsilon(dual_algebra(POINT), full.sets)
    for X in enumerate_frames(3):
        has_dead_end = any(not X.succ[i] for i in range(len(X)))
        found = refutes_epsilon_semantic(X, POINT, full)
        assert (found is not None) == has_dead_end
        assert refutes_syntactic(X, e) == has_dead_end
    for F in enumerate_frames(2, rooted=True, cycle_free=True):
        for D in all_domains(F):
            e = gen_epsilon(dual_algebra(F), D.sets)
            for X in enumerate_frames(3):
                assert refutes_syntactic(X, e) == (refutes_epsilon_semantic(X, F, D) is not None)


def test_rooted_upset_search_examples(f1):
    u, w = refutes_gamma_semantic(f1, f1)
    assert u == f1.full and w.assign == (0, 1, 2)
    two = Frame.from_edges(["a", "b", "c", "a2", "b2", "c2"],
                           [("a", "b"), ("b", "c"), ("a2", "b2"), ("b2", "c2")])
    u, w = refutes_gamma_semantic(two, f1)
    assert sorted(two.subset_labels(u)) == ["a", "b", "c"]
    with pytest.raises(PreconditionError):
        refutes_gamma_semantic(f1, Frame(("a", "b"), (frozenset(), frozenset())))
    with pytest.raises(PreconditionError):
        refutes_epsilon_semantic(f1, Frame.from_edges("a", [("a", "a")]))


def test_any_upset_variant_is_weaker_requirement():
    for X in enumerate_frames(3):
        for F in enumerate_frames(2, rooted=True):
            rooted = refutes_gamma_semantic(X, F) is not None
            anyu = refutes_gamma_semantic(X, F, any_upset=True) is not None
            assert anyu or not rooted


def test_any_upset_is_strictly_weaker_and_formula_sides_with_rooted():
    two_points = Frame(("a", "b"), (frozenset(), frozenset()))
    assert refutes_gamma_semantic(two_points, CHAIN2) is None
    assert refutes_gamma_semantic(two_points, CHAIN2, any_upset=True) is not None
    assert not refutes_syntactic(two_points, gen_gamma(dual_algebra(CHAIN2), (), 1))


def test_worked_example_refutation(f1):
    w = refutes_rule_semantic(worked.f3(), f1)
    assert w is not None
    assert w.as_labels() == {"a1": "a", "a2": "a", "a3": "a", "a4": "a", "b1": "b", "b2": "b",
                             "c": "c"}


def test_domain_monotonicity():
    rng = random.Random(4)
    for _ in range(200):
        X = random_frame(rng, rng.randint(1, 4))
        F = random_frame(rng, rng.randint(1, 2))
        sets = [s for s in range(1 << len(F)) if rng.random() < 0.5]
        smaller = [s for s in sets if rng.random() < 0.5]
        if refutes_rule_semantic(X, F, DomainSet(F, sets)) is not None:
            assert refutes_rule_semantic(X, F, DomainSet(F, smaller)) is not None


def test_rank_bound_blocks_jankov_refutation():
    # p-morphisms cannot raise rank; plain stable maps can
    raised = 0
    for F in enumerate_frames(3, rooted=True, cycle_free=True):
        root_rank = max(rank(F))
        for X in enumerate_frames(3, cycle_free=True):
            if max(rank(X)) < root_rank:
                assert refutes_epsilon_semantic(X, F, DomainSet.full(F)) is None
                raised += refutes_epsilon_semantic(X, F) is not None
    assert raised > 0


def test_spec_for_frame(f1):
    spec = spec_for_frame(f1, DomainSet.from_labels(f1, [["c"]]), "rho")
    assert spec.domain == (4,)
    with pytest.raises(PreconditionError):
        spec_for_frame(f1, DomainSet.empty(POINT))


def test_bottom_rule_refuted_everywhere():
    for X in enumerate_frames(2):
        assert refutes_syntactic(X, fm.parse_rule("/ false"))


def test_dichotomy_runs():
    for F in (POINT, CHAIN2):
        report = splitting_dichotomy_check(F, 3)
        assert report["frames"] == 116
        assert report["violations"] == []
        for row in report["rows"]:
            G = row["frame"]
            if F is POINT:
                assert row["witness"] == any(not G.succ[i] for i in range(len(G)))
    assert splitting_dichotomy_check(POINT, 0)["frames"] == 0
    with pytest.raises(PreconditionError):
        splitting_dichotomy_check(Frame.from_edges("a", [("a", "a")]), 2)


def test_jankov_witnesses_are_pmorphisms():
    for G in enumerate_frames(3):
        found = refutes_epsilon_semantic(G, CHAIN2, DomainSet.full(CHAIN2))
        if found is not None:
            assert is_pmorphism(found[1])
