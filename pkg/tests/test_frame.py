import json
import random

import pytest
from hypothesis import given, strategies as st

from msl import formula as fm
from msl.errors import BudgetExceeded, PreconditionError
from msl.frame import (OMEGA, Frame, Model, are_isomorphic, canonical_code, enumerate_frames,
                       find_isomorphism, frame_from_dict, frame_to_dict, generated_subframe,
                       is_cycle_free, is_pretransitive, is_rooted, is_upset, max_finite_rank,
                       model_from_dict, model_to_dict, rank, ranks_to_dict, refuting_valuation,
                       roots, truth_set, upsets, validates, validates_rule)
import oracles
from strategies import formulas, frames, models


def test_f1_basics(f1):
    assert rank(f1) == (3, 2, 1)
    assert ranks_to_dict(f1) == {"a": 3, "b": 2, "c": 1}
    assert sorted(upsets(f1), reverse=True) == [7, 6, 4, 0]
    assert f1.subset_labels(roots(f1)) == ["a"]
    assert generated_subframe(f1, 1)[0] == Frame.from_edges("bc", [("b", "c")])
    assert generated_subframe(f1, 0)[0] == f1


def test_omega_ranks():
    loop = Frame.from_edges("ab", [("a", "a"), ("b", "a")])
    assert rank(loop) == (OMEGA, OMEGA)
    assert ranks_to_dict(loop) == {"a": "omega", "b": "omega"}
    mixed = Frame.from_edges("abc", [("a", "b"), ("b", "a"), ("c", "a")])
    tail = Frame.from_edges("abcd", [("a", "a"), ("b", "a"), ("b", "c"), ("c", "d")])
    assert rank(mixed) == (OMEGA,) * 3
    assert rank(tail) == (OMEGA, OMEGA, 2, 1)
    assert max_finite_rank(tail) == 2
    assert OMEGA > 10 ** 9 and not OMEGA <= 5 and 3 < OMEGA


def test_truth_sets(f1):
    m = Model(f1, {"p": ["c"]})
    assert f1.subset_labels(truth_set(m, fm.parse("dia p"))) == ["b"]
    assert f1.subset_labels(truth_set(m, fm.parse("dia dia p"))) == ["a"]
    assert f1.subset_labels(truth_set(m, fm.parse("box false"))) == ["c"]


def test_validity_examples(f1):
    assert validates(f1, fm.parse("box^3 false"))
    assert not validates(f1, fm.parse("box^2 false"))
    assert not validates(f1, fm.parse("dia dia p -> dia p"))
    assert not validates_rule(f1, fm.parse_rule("/ false"))
    assert validates_rule(f1, fm.parse_rule("p / box p"))


def test_refuting_valuation_is_a_real_countermodel(f1):
    f = fm.parse("dia dia p -> dia p")
    val = refuting_valuation(f1, f)
    assert truth_set(Model(f1, val), f) != f1.full


def test_valuation_budget():
    fr = Frame(tuple("abcd"), tuple(frozenset() for _ in range(4)))
    with pytest.raises(BudgetExceeded):
        refuting_valuation(fr, fm.parse("p & q & r & s & t"), budget=2 ** 10)


def test_pretransitive_examples(f1):
    assert is_pretransitive(f1, 3, 1)
    assert not is_pretransitive(f1, 2, 1)
    assert is_pretransitive(f1, 1, 1)
    with pytest.raises(PreconditionError):
        is_pretransitive(f1, -1, 1)


@given(frames(max_points=6))
def test_rank_matches_path_oracle(fr):
    expect = oracles.rank_by_paths(fr)
    got = [None if r is OMEGA else r for r in rank(fr)]
    assert got == expect
    assert is_cycle_free(fr) == (not oracles.has_cycle_dfs(fr))


@given(frames(max_points=6))
def test_upsets_match_powerset(fr):
    got = list(upsets(fr))
    assert len(got) == len(set(got))
    assert sorted(got) == oracles.upsets_by_powerset(fr)
    assert all(is_upset(fr, u) for u in got)


@given(frames(max_points=5), st.integers(0, 4), st.integers(0, 4))
def test_pretransitive_matches_relation_powers(fr, m, n):
    expect = oracles.relation_power(fr, m) <= oracles.relation_power(fr, n)
    assert is_pretransitive(fr, m, n) == expect


@given(models(max_points=5), formulas(names=("p", "q")))
def test_truth_set_matches_pointwise_semantics(model, f):
    fr = model.frame
    val = {k: set(fr_bits(v)) for k, v in model.valuation.items()}
    expect = {x for x in range(len(fr)) if oracles.holds(fr, val, f, x)}
    assert set(fr_bits(truth_set(model, f))) == expect


def fr_bits(mask):
    return [i for i in range(mask.bit_length()) if mask >> i & 1]


@given(frames(max_points=3), formulas(names=("p", "q"), max_leaves=6))
def test_validity_matches_brute_force(fr, f):
    names = sorted(fm.variables(f))
    assert validates(fr, f) == (not oracles.rule_refuted(fr, (), (f,), names))


def test_rule_validity_matches_brute_force():
    rng = random.Random(3)
    from msl.checks import random_formula, random_frame
    for _ in range(150):
        fr = random_frame(rng, rng.randint(1, 3))
        rule = fm.Rule(tuple(random_formula(rng, 2) for _ in range(rng.randint(0, 2))),
                       tuple(random_formula(rng, 2) for _ in range(rng.randint(0, 2))))
        names = sorted(rule.variables)
        assert validates_rule(fr, rule) == (not oracles.rule_refuted(
            fr, rule.premises, rule.conclusions, names))


def test_enumeration_counts_match_known_sequences():
    # unlabelled digraphs with loops allowed, and unlabelled acyclic digraphs
    sizes = [len(list(enumerate_frames(n, min_points=n))) for n in range(1, 5)]
    assert sizes == [2, 10, 104, 3044]
    dags = [len(list(enumerate_frames(n, cycle_free=True, min_points=n))) for n in range(1, 6)]
    assert dags == [1, 2, 6, 31, 302]


def test_enumeration_yields_pairwise_non_isomorphic():
    frs = list(enumerate_frames(3))
    codes = {canonical_code(fr) for fr in frs}
    assert len(codes) == len(frs)
    for n in range(1, 4):
        same = [fr for fr in frs if len(fr) == n]
        for i in range(len(same)):
            for j in range(i + 1, min(len(same), i + 4)):
                assert not oracles.isomorphic(same[i], same[j])


def test_enumeration_filters():
    for fr in enumerate_frames(3, rooted=True, pretransitive=(2, 1)):
        assert is_rooted(fr) and is_pretransitive(fr, 2, 1)
    assert len(list(enumerate_frames(1))) == 2
    assert len(list(enumerate_frames(2, cycle_free=True))) == 3
    with pytest.raises(BudgetExceeded):
        list(enumerate_frames(6))


@given(frames(max_points=5), st.randoms(use_true_random=False))
def test_isomorphism_search_agrees_with_oracle(fr, rnd):
    perm = list(range(len(fr)))
    rnd.shuffle(perm)
    shuffled = Frame(fr.labels, tuple(frozenset(perm[j] for j in fr.succ[perm.index(i)])
                                      for i in range(len(fr))))
    iso = find_isomorphism(fr, shuffled)
    assert iso is not None
    assert all((iso[i], iso[j]) in oracles.rel(shuffled) for i, j in oracles.rel(fr))
    assert canonical_code(fr) == canonical_code(shuffled)


@given(frames(max_points=4), frames(max_points=4))
def test_are_isomorphic_matches_oracle(a, b):
    assert are_isomorphic(a, b) == oracles.isomorphic(a, b)
    assert (canonical_code(a) == canonical_code(b)) == oracles.isomorphic(a, b)


@given(models(max_points=5))
def test_json_round_trip(model):
    data = model_to_dict(model)
    text = json.dumps(data, sort_keys=True)
    again = model_from_dict(json.loads(text))
    assert model_to_dict(again) == data
    assert frame_to_dict(frame_from_dict(frame_to_dict(model.frame))) == frame_to_dict(model.frame)
    assert data["points"] == sorted(data["points"])


def test_frame_validation():
    with pytest.raises(PreconditionError):
        Frame(("a", "a"), (frozenset(), frozenset()))
    with pytest.raises(PreconditionError):
        Frame(("a",), (frozenset({3}),))
    with pytest.raises(PreconditionError):
        frame_from_dict({"points": ["a"], "edges": [["a", "b"]]})
