"""Stable canonical rules and formulas, and their refutation deciders.

Semantic deciders search for stable surjections; the syntactic decider
enumerates valuations and is only feasible for very small inputs. The two
are kept independent so that each can check the other.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as fm
from .algebra import Algebra, dual_algebra, dual_frame, height, is_si
from .errors import PreconditionError
from .frame import (DEFAULT_VALUATION_BUDGET, OMEGA, Frame, enumerate_frames,
                    generated_subframe, induced_subframe, is_cycle_free, is_pretransitive,
                    is_rooted, refuting_valuation, upsets)
from .maps import (DEFAULT_SEARCH_BUDGET, DomainSet, PointMap, find_stable_surjection,
                   is_pmorphism)

MAX_RULE_ATOMS = 4


def element_var(alg, a):
    """``p_<bits>`` with the little-endian bit string of ``a`` over the atoms."""
    return fm.Var("p_" + "".join("1" if a >> i & 1 else "0" for i in range(alg.atom_count)))


def _check_size(alg):
    if alg.atom_count > MAX_RULE_ATOMS:
        raise PreconditionError(
            f"rule materialisation is capped at {MAX_RULE_ATOMS} atoms "
            f"({1 << MAX_RULE_ATOMS} elements); got {alg.atom_count}")
    if alg.atom_count == 0:
        raise PreconditionError("the algebra must have at least one atom")


def rho_parts(alg, domain):
    """Premises and conclusions of the stable canonical rule of ``alg`` and ``domain``."""
    _check_size(alg)
    p = {a: element_var(alg, a) for a in alg.elements()}
    domain = sorted(set(domain))
    if any(not 0 <= a < alg.size for a in domain):
        raise PreconditionError("domain elements must belong to the algebra")
    premises = []
    for a in alg.elements():
        for b in alg.elements():
            premises.append(fm.Iff(p[a | b], fm.Or(p[a], p[b])))
    for a in alg.elements():
        premises.append(fm.Iff(p[alg.neg(a)], fm.Not(p[a])))
    for a in alg.elements():
        premises.append(fm.Implies(fm.Dia(p[a]), p[alg.dia(a)]))
    for a in domain:
        premises.append(fm.Implies(p[alg.dia(a)], fm.Dia(p[a])))
    conclusions = [p[a] for a in alg.elements() if a != alg.top]
    return premises, conclusions


def gen_rho(alg, domain=()):
    premises, conclusions = rho_parts(alg, domain)
    return fm.Rule(tuple(premises), tuple(conclusions))


def gen_stable_rule(alg):
    return gen_rho(alg, ())


def gen_jankov_rule(alg):
    return gen_rho(alg, alg.elements())


def gen_gamma(alg, domain=(), m=1):
    """``AND box^{<=m} premises -> OR box^{<=m} conclusions``."""
    if m < 1:
        raise PreconditionError("gamma needs m >= 1")
    if not is_si(alg):
        raise PreconditionError("gamma needs a subdirectly irreducible algebra")
    if not is_pretransitive(dual_frame(alg), m + 1, 1):
        raise PreconditionError(f"gamma^{m} needs a ({m + 1},1)-pretransitive dual frame")
    premises, conclusions = rho_parts(alg, domain)
    return fm.Implies(fm.conj(fm.box_upto(m, g) for g in premises),
                      fm.disj(fm.box_upto(m, d) for d in conclusions))


def gen_epsilon(alg, domain=()):
    """``(box^{n+1} false & AND box^{<=n} premises) -> OR box^{<=n} conclusions``, n the height."""
    if not is_si(alg):
        raise PreconditionError("epsilon needs a subdirectly irreducible algebra")
    n = height(alg)
    if n is OMEGA:
        raise PreconditionError("epsilon needs an algebra of finite height")
    premises, conclusions = rho_parts(alg, domain)
    return fm.Implies(
        fm.And(fm.box_iter(n + 1, fm.BOT), fm.conj(fm.box_upto(n, g) for g in premises)),
        fm.disj(fm.box_upto(n, d) for d in conclusions))


@dataclass(frozen=True)
class CanonicalRuleSpec:
    """What to generate: ``kind`` is ``rho``, ``gamma`` or ``epsilon``."""

    algebra: Algebra
    domain: tuple = ()
    kind: str = "rho"
    m: int = 1

    def generate(self):
        if self.kind == "rho":
            return gen_rho(self.algebra, self.domain)
        if self.kind == "gamma":
            return gen_gamma(self.algebra, self.domain, self.m)
        if self.kind == "epsilon":
            return gen_epsilon(self.algebra, self.domain)
        raise PreconditionError(f"unknown rule kind {self.kind!r}")


def spec_for_frame(fr, domain, kind="rho", m=1):
    """Rule spec for the dual algebra of ``fr`` with point sets read as elements."""
    if domain.frame != fr:
        raise PreconditionError("domain set must live on the rule's frame")
    return CanonicalRuleSpec(dual_algebra(fr), tuple(domain.sets), kind, m)


# ---------------------------------------------------------------------------
# deciders


def refutes_rule_semantic(X, F, domain=None, budget=DEFAULT_SEARCH_BUDGET):
    """Witness ``X ->> F`` (stable, surjective, CDC) or None."""
    domain = domain if domain is not None else DomainSet.empty(F)
    return find_stable_surjection(X, F, domain, budget=budget)


def _candidate_upsets(X, any_upset):
    if any_upset:
        for u in sorted(upsets(X)):
            if u:
                yield u
        return
    seen = set()
    for x in range(len(X)):
        u = X.reach_mask[x]
        if u not in seen:
            seen.add(u)
            yield u


def _upset_search(X, F, domain, any_upset, budget):
    for u in _candidate_upsets(X, any_upset):
        Y, embed = induced_subframe(X, u)
        w = find_stable_surjection(Y, F, domain, budget=budget)
        if w is not None:
            return u, PointMap(Y, F, w.assign), embed
    return None


def refutes_gamma_semantic(X, F, domain=None, any_upset=False, budget=DEFAULT_SEARCH_BUDGET):
    """``(upset, map)`` with the upset of ``X`` mapping onto ``F``, or None.

    By default only rooted upsets (generated subframes) are tried, in order
    of their least root; ``any_upset`` tries every nonempty upset by bit value.
    """
    domain = domain if domain is not None else DomainSet.empty(F)
    if not is_rooted(F):
        raise PreconditionError("gamma refutation needs a rooted frame")
    found = _upset_search(X, F, domain, any_upset, budget)
    return None if found is None else found[:2]


def refutes_epsilon_semantic(X, F, domain=None, any_upset=False, budget=DEFAULT_SEARCH_BUDGET):
    domain = domain if domain is not None else DomainSet.empty(F)
    if not is_rooted(F):
        raise PreconditionError("epsilon refutation needs a rooted frame")
    if not is_cycle_free(F):
        raise PreconditionError("epsilon refutation needs a cycle-free frame")
    found = _upset_search(X, F, domain, any_upset, budget)
    return None if found is None else found[:2]


def refutes_syntactic(X, rule, budget=DEFAULT_VALUATION_BUDGET):
    """True iff some valuation on ``X`` refutes the rule or formula."""
    return refuting_valuation(X, rule, budget) is not None


# ---------------------------------------------------------------------------
# splitting dichotomy


def splitting_dichotomy_check(F, max_points, budget=DEFAULT_VALUATION_BUDGET, cap=None):
    """Check that every small frame either validates the Jankov formula of ``F``
    or has a rooted upset mapping p-morphically onto ``F``, and never both.
    """
    from .frame import DEFAULT_ENUM_CAP

    if not is_rooted(F) or not is_cycle_free(F):
        raise PreconditionError("the splitting frame must be rooted and cycle-free")
    full = DomainSet.full(F)
    eps = gen_epsilon(dual_algebra(F), full.sets)
    rows = []
    violations = []
    if max_points <= 0:
        return {"frames": 0, "rows": rows, "violations": violations}
    for G in enumerate_frames(max_points, cap=cap or DEFAULT_ENUM_CAP):
        validates_eps = not refutes_syntactic(G, eps, budget)
        found = refutes_epsilon_semantic(G, F, full)
        witness = found is not None
        pmorphic = witness and is_pmorphism(found[1])
        row = {"frame": G, "validates_epsilon": validates_eps, "witness": witness}
        rows.append(row)
        if validates_eps == witness or (witness and not pmorphic):
            violations.append(row)
    return {"frames": len(rows), "rows": rows, "violations": violations}
