import random

import pytest
from hypothesis import given

from msl import formula as fm
from msl.checks import random_formula
from msl.errors import ParseError
from strategies import formulas

p, q, r = fm.Var("p"), fm.Var("q"), fm.Var("r")


def test_precedence_and_associativity():
    assert fm.parse("p & q | r") == fm.Or(fm.And(p, q), r)
    assert fm.parse("p -> q -> r") == fm.Implies(p, fm.Implies(q, r))
    assert fm.parse("p <-> q <-> r") == fm.Iff(p, fm.Iff(q, r))
    assert fm.parse("p & q & r") == fm.And(fm.And(p, q), r)
    assert fm.parse("~box p") == fm.Not(fm.Box(p))
    assert fm.parse("dia p & q") == fm.And(fm.Dia(p), q)
    assert fm.parse("p | q -> r <-> p") == fm.Iff(fm.Implies(fm.Or(p, q), r), p)


def test_powers_expand():
    assert fm.parse("box^3 false") == fm.Box(fm.Box(fm.Box(fm.BOT)))
    assert fm.parse("dia^0 p") == p
    assert fm.box_iter(2, p) == fm.Box(fm.Box(p))


def test_printing_is_minimal():
    assert fm.to_text(fm.parse("(p & q) | r")) == "p & q | r"
    assert fm.to_text(fm.parse("p & (q | r)")) == "p & (q | r)"
    assert fm.to_text(fm.parse("(p -> q) -> r")) == "(p -> q) -> r"
    assert fm.to_text(fm.parse("p -> (q -> r)")) == "p -> q -> r"
    assert fm.to_text(fm.parse("~ ~ p")) == "~~p"
    assert fm.to_text(fm.parse("dia (p | q)")) == "dia (p | q)"
    assert fm.to_text(fm.parse("box^2 false")) == "box box false"


def test_parse_error_reports_byte_offset_and_expected():
    with pytest.raises(ParseError) as info:
        fm.parse("p & ")
    assert info.value.offset == 4
    assert "identifier" in info.value.expected and "(" in info.value.expected


def test_parse_error_offset_counts_bytes():
    # the lambda is two bytes in UTF-8
    with pytest.raises(ParseError) as info:
        fm.parse("p & λ")
    assert info.value.offset == 4
    with pytest.raises(ParseError) as info:
        fm.parse("(p & q")
    assert info.value.offset == 6


@pytest.mark.parametrize("text", ["", "p q", "box", "p ->", "(p", "p)", "true false", "p & & q"])
def test_malformed_input_rejected(text):
    with pytest.raises(ParseError):
        fm.parse(text)


def test_keywords_are_not_variables():
    with pytest.raises(ValueError):
        fm.Var("box")


def test_rules():
    rule = fm.parse_rule("p, p -> q / q, r")
    assert rule.premises == (p, fm.Implies(p, q))
    assert rule.conclusions == (q, r)
    assert fm.rule_to_text(rule) == "p, p -> q / q, r"
    assert fm.parse_rule("dia p") == fm.Rule((), (fm.Dia(p),))
    assert fm.rule_to_text(fm.Rule((), (p,))) == "/ p"
    assert fm.rule_to_text(fm.Rule((p,), ())) == "p /"
    assert rule.variables == {"p", "q", "r"}


def test_rule_parse_error_offset_is_absolute():
    with pytest.raises(ParseError) as info:
        fm.parse_rule("p / q, r &")
    assert info.value.offset == 10


def test_subformula_closure():
    closure = fm.subformula_closure(fm.parse("dia (p & box q)"))
    assert {fm.to_text(f) for f in closure} == {"dia (p & box q)", "p & box q", "p", "box q", "q"}


def test_conj_disj_and_upto():
    assert fm.conj([]) == fm.TOP and fm.disj([]) == fm.BOT
    assert fm.conj([p, q, r]) == fm.And(fm.And(p, q), r)
    assert fm.box_upto(2, p) == fm.conj([p, fm.Box(p), fm.Box(fm.Box(p))])
    assert fm.dia_upto(1, p) == fm.disj([p, fm.Dia(p)])


def test_size_and_variables():
    f = fm.parse("p -> dia (q & p)")
    assert fm.size(f) == 6
    assert fm.variables(f) == {"p", "q"}


@given(formulas())
def test_round_trip_property(f):
    assert fm.parse(fm.to_text(f)) == f


def test_round_trip_thousand_random_formulas():
    rng = random.Random(11)
    for _ in range(1000):
        f = random_formula(rng, rng.randint(0, 6), names=("p", "q", "r", "s1"))
        text = fm.to_text(f)
        assert fm.parse(text) == f
        assert fm.to_text(fm.parse(text)) == text
