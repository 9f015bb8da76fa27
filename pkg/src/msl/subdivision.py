"""The Subdivision Construction.

Given a stable surjection ``f: X -> F`` with CDC for a family ``D``, refine
``F`` level by level. At level ``n`` every point ``v`` of rank ``n + 1`` is
replaced by one fresh point per realised successor signature of its fibre:
the signature of ``x`` records which rank-``<= n`` points ``c`` have a
successor of ``x`` in the fibre of ``c``. Points of infinite rank are never
touched. The result is ``F'`` with ``f': X -> F'`` and ``g: F' -> F`` such
that ``g ∘ f' = f``, ``f'`` is a p-morphism wherever its image has finite
rank, and ``g`` is a stable surjection with CDC for ``D``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvariantViolation, PreconditionError
from .frame import OMEGA, Frame, bits, is_cycle_free, is_pretransitive, max_finite_rank, rank
from .maps import (DomainSet, PointMap, compose, find_stable_surjection, identity,
                   is_pmorphism, is_pmorphism_at, is_stable, is_surjective, satisfies_cdc)


@dataclass(frozen=True)
class Block:
    signature: tuple
    members: tuple
    label: str


@dataclass(frozen=True)
class StepTrace:
    level: int
    C: tuple
    V: tuple
    blocks: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "level": self.level,
            "C": list(self.C),
            "V": list(self.V),
            "blocks": {
                v: [{"signature": "".join(map(str, b.signature)), "point": b.label,
                     "size": len(b.members)} for b in blocks]
                for v, blocks in self.blocks.items()
            },
        }


@dataclass(frozen=True)
class SubdivisionResult:
    F_prime: Frame
    f_prime: PointMap
    g: PointMap
    steps: tuple
    N: int


def _fail(claim, level):
    raise InvariantViolation(f"level {level}: {claim}")


def level_ranks(g_n):
    """Rank in ``F`` of the image of every point of ``F_n``.

    Levels are scheduled by these ranks rather than by ranks in ``F_n``:
    a fresh point can have a smaller rank than the point it replaces (its
    fibre may lack long paths), which lowers the rank of its predecessors
    in ``F_n`` while their fibres still need splitting. The two agree
    whenever no rank drops, as in the worked example.
    """
    ranks_f = rank(g_n.codomain)
    return tuple(ranks_f[g_n(p)] for p in range(len(g_n.domain)))


def check_step_hypotheses(F_n, f_n, g_n, f, n, domain):
    """Raise :class:`PreconditionError` naming the first failing hypothesis."""
    if f_n.codomain != F_n or g_n.domain != F_n:
        raise PreconditionError("maps do not match the level frame")
    ranks = level_ranks(g_n)
    if not (is_stable(f_n) and is_surjective(f_n)):
        raise PreconditionError(f"f_{n} is not a stable surjection")
    for x in range(len(f_n.domain)):
        r = ranks[f_n(x)]
        if r is not OMEGA and r <= n and not is_pmorphism_at(f_n, x):
            raise PreconditionError(f"f_{n} is not a p-morphism at {f_n.domain.labels[x]}")
    if not (is_stable(g_n) and is_surjective(g_n) and satisfies_cdc(g_n, domain)):
        raise PreconditionError(f"g~_{n} is not a stable surjection with CDC")
    if compose(g_n, f_n).assign != f.assign:
        raise PreconditionError(f"g~_{n} ∘ f_{n} differs from f")
    _check_identity_above(g_n, ranks, rank(g_n.codomain), n, PreconditionError)


def _check_identity_above(g, ranks_src, ranks_dst, n, error):
    """``g`` must be a label-preserving bijection between the rank > n parts."""

    def fail(msg):
        raise error(msg)

    high_src = [p for p, r in enumerate(ranks_src) if r > n]
    high_dst = {q for q, r in enumerate(ranks_dst) if r > n}
    images = [g(p) for p in high_src]
    if sorted(images) != sorted(high_dst) or len(set(images)) != len(images):
        fail(f"g is not a bijection between the rank > {n} parts")
    for p in high_src:
        if g.domain.labels[p] != g.codomain.labels[g(p)]:
            fail(f"g moves rank > {n} point {g.domain.labels[p]}")
        for q in high_src:
            if g.domain.has_edge(p, q) != g.codomain.has_edge(g(p), g(q)):
                fail(f"g is not an isomorphism on the rank > {n} parts")


def subdivide_step(F_n, f_n, g_n, n, domain, f=None, check=True, schedule="image"):
    """One level of the construction; returns ``(F_{n+1}, f_{n+1}, g~_{n+1}, trace)``.

    ``schedule="frame"`` picks C and V by rank in ``F_n`` itself; it is kept
    only to exhibit inputs where that choice leaves fibres unsplit, and it
    should be run with ``check=False``.
    """
    if schedule not in ("image", "frame"):
        raise PreconditionError(f"unknown schedule {schedule!r}")
    f = f if f is not None else compose(g_n, f_n)
    if check:
        check_step_hypotheses(F_n, f_n, g_n, f, n, domain)
    X = f_n.domain
    ranks = rank(F_n)
    levels = level_ranks(g_n) if schedule == "image" else ranks
    # C ordered by (rank in F_n, index); signatures are little-endian over C
    C = sorted((p for p, r in enumerate(levels) if r is not OMEGA and r <= n),
               key=lambda p: (ranks[p], p))
    V = [p for p, r in enumerate(levels) if r == n + 1]
    fibre = [0] * len(F_n)
    for x, y in enumerate(f_n.assign):
        fibre[y] |= 1 << x

    blocks = {}
    for v in V:
        by_sig = {}
        for x in bits(fibre[v]):
            succ = X.succ_mask[x]
            sig = tuple(1 if succ & fibre[c] else 0 for c in C)
            by_sig.setdefault(sig, []).append(x)
        ordered = sorted(by_sig.items(), key=lambda kv: _sig_value(kv[0]))
        blocks[v] = [Block(sig, tuple(members), f"{F_n.labels[v]}#{''.join(map(str, sig))}")
                     for sig, members in ordered]

    # new point list: every v replaced in place by its fresh points
    labels, origin, fresh = [], [], []
    new_index = {}
    for p in range(len(F_n)):
        if p in blocks:
            for b in blocks[p]:
                new_index[(p, b.signature)] = len(labels)
                labels.append(b.label)
                origin.append(p)
                fresh.append(b)
        else:
            new_index[p] = len(labels)
            labels.append(F_n.labels[p])
            origin.append(p)
            fresh.append(None)
    if len(set(labels)) != len(labels):
        raise PreconditionError("fresh point label collides with an existing label")

    succ = [set() for _ in labels]
    for a, pa in enumerate(origin):
        for b, pb in enumerate(origin):
            wa, wb = fresh[a], fresh[b]
            if wa is None:
                edge = F_n.has_edge(pa, pb)
            elif wb is None:
                edge = pb in C and wa.signature[C.index(pb)] == 1
            else:
                edge = False
            if edge:
                succ[a].add(b)
    F_next = Frame(tuple(labels), tuple(succ))

    assign = list(f_n.assign)
    for v, bl in blocks.items():
        for b in bl:
            for x in b.members:
                assign[x] = new_index[(v, b.signature)]
    for x, y in enumerate(f_n.assign):
        if y not in blocks:
            assign[x] = new_index[y]
    f_next = PointMap(X, F_next, tuple(assign))
    g_step = PointMap(F_next, F_n, tuple(origin))
    g_next = compose(g_n, g_step)

    trace = StepTrace(
        level=n,
        C=tuple(F_n.labels[c] for c in C),
        V=tuple(F_n.labels[v] for v in V),
        blocks={F_n.labels[v]: tuple(bl) for v, bl in blocks.items()},
    )
    if check:
        _check_claims(F_next, f_next, g_step, g_next, f, n, domain)
        _check_identity_above(g_next, level_ranks(g_next), rank(g_next.codomain), n + 1,
                              InvariantViolation)
    return F_next, f_next, g_next, trace


def _sig_value(sig):
    return sum(bit << i for i, bit in enumerate(sig))


def _check_claims(F_next, f_next, g_step, g_next, f, n, domain):
    level = n + 1
    if not is_surjective(f_next):
        _fail(f"f_{level} is not surjective", level)
    if not is_stable(f_next):
        _fail(f"f_{level} is not stable", level)
    ranks = level_ranks(g_next)
    for x in range(len(f_next.domain)):
        r = ranks[f_next(x)]
        if r is not OMEGA and r <= level and not is_pmorphism_at(f_next, x):
            _fail(f"f_{level} is not a p-morphism at {f_next.domain.labels[x]}", level)
    if not is_surjective(g_next):
        _fail(f"g~_{level} is not surjective", level)
    if not (is_stable(g_step) and is_stable(g_next)):
        _fail(f"g~_{level} is not stable", level)
    if not satisfies_cdc(g_next, domain):
        _fail(f"g~_{level} fails CDC", level)
    if compose(g_next, f_next).assign != f.assign:
        _fail(f"g~_{level} ∘ f_{level} differs from f", level)


def subdivide(f, domain=None, check=True, schedule="image"):
    """Run the construction on a stable surjection ``f`` with CDC for ``domain``."""
    F = f.codomain
    domain = domain if domain is not None else DomainSet.empty(F)
    if domain.frame != F:
        raise PreconditionError("domain set must live on the codomain of f")
    if not is_stable(f):
        raise PreconditionError("f is not stable")
    if not is_surjective(f):
        raise PreconditionError("f is not surjective")
    if not satisfies_cdc(f, domain):
        raise PreconditionError("f does not satisfy CDC for the domain set")

    N = max_finite_rank(F)
    F_n, f_n, g_n = F, f, identity(F)
    steps = []
    for n in range(1, N + 1):
        F_n, f_n, g_n, trace = subdivide_step(F_n, f_n, g_n, n, domain, f=f, check=check,
                                                schedule=schedule)
        steps.append(trace)
    result = SubdivisionResult(F_n, f_n, g_n, tuple(steps), N)
    if check:
        check_result(result, f, domain)
    return result


def check_result(result, f, domain):
    """Assert every guarantee of the construction on a finished result."""
    Fp, fp, g = result.F_prime, result.f_prime, result.g
    F = f.codomain

    def fail(msg):
        raise InvariantViolation(msg)

    if compose(g, fp).assign != f.assign:
        fail("g ∘ f' differs from f")
    if not (is_stable(fp) and is_surjective(fp)):
        fail("f' is not a stable surjection")
    ranks_p = rank(Fp)
    for x in range(len(fp.domain)):
        if ranks_p[fp(x)] is not OMEGA and not is_pmorphism_at(fp, x):
            fail(f"f' is not a p-morphism at {fp.domain.labels[x]}")
    if not (is_stable(g) and is_surjective(g) and satisfies_cdc(g, domain)):
        fail("g is not a stable surjection with CDC")
    ranks_f = rank(F)
    omega_p = [p for p, r in enumerate(ranks_p) if r is OMEGA]
    omega_f = {q for q, r in enumerate(ranks_f) if r is OMEGA}
    if sorted(g(p) for p in omega_p) != sorted(omega_f):
        fail("g is not a bijection between the rank-ω parts")
    for p in omega_p:
        if Fp.labels[p] != F.labels[g(p)]:
            fail(f"rank-ω point {Fp.labels[p]} was relabelled")
        for q in omega_p:
            if Fp.has_edge(p, q) != F.has_edge(g(p), g(q)):
                fail("g is not the identity on the rank-ω part")
    if len(Fp) > len(fp.domain) + len(F):
        fail("F' is larger than |X| + |F|")
    if is_cycle_free(F):
        if not is_cycle_free(Fp):
            fail("F is cycle-free but F' is not")
        if not is_pmorphism(fp):
            fail("F is cycle-free but f' is not a p-morphism")


# ---------------------------------------------------------------------------
# the fmp pipeline on a finite ambient space


def fmp_demo(X, F, domain=None, logic_checks=(), budget=None, valuation_budget=None):
    """Refute ``rho(F, D)`` on ``X``, subdivide, and carry the refutation to ``F'``.

    ``logic_checks`` holds formulas or ``(m, n)`` pretransitivity pairs; each
    is evaluated on ``X`` and on ``F'``.
    """
    from .frame import DEFAULT_VALUATION_BUDGET, validates
    from .formula import Formula, to_text
    from .maps import DEFAULT_SEARCH_BUDGET, pointmap_to_dict, domainset_to_dict
    from .frame import frame_to_dict, ranks_to_dict

    domain = domain if domain is not None else DomainSet.empty(F)
    if not is_cycle_free(F):
        raise PreconditionError("fmp_demo needs a cycle-free target frame")
    witness = find_stable_surjection(X, F, domain, budget=budget or DEFAULT_SEARCH_BUDGET)
    report = {"X": frame_to_dict(X), "F": frame_to_dict(F),
              "cdc": domainset_to_dict(domain)}
    if witness is None:
        report["status"] = "X validates the rule"
        return report, None
    result = subdivide(witness, domain)
    g = result.g
    transfers = is_stable(g) and is_surjective(g) and satisfies_cdc(g, domain)
    checks = []
    for item in logic_checks:
        if isinstance(item, Formula):
            vb = valuation_budget or DEFAULT_VALUATION_BUDGET
            on_x = validates(X, item, vb)
            on_fp = validates(result.F_prime, item, vb)
            checks.append({"check": to_text(item), "X": on_x, "F_prime": on_fp,
                           "agree": on_x == on_fp})
        else:
            m, k = item
            on_x = is_pretransitive(X, m, k)
            on_fp = is_pretransitive(result.F_prime, m, k)
            checks.append({"check": f"pretransitive({m},{k})", "X": on_x,
                           "F_prime": on_fp, "agree": on_x == on_fp})
    report.update({
        "status": "refuted",
        "f": pointmap_to_dict(witness),
        "F_prime": frame_to_dict(result.F_prime),
        "F_prime_ranks": ranks_to_dict(result.F_prime),
        "f_prime": pointmap_to_dict(result.f_prime),
        "g": pointmap_to_dict(g),
        "commutes": compose(g, result.f_prime).assign == witness.assign,
        "f_prime_is_pmorphism": is_pmorphism(result.f_prime),
        "F_prime_refutes_rule": transfers,
        "size_bound_ok": len(result.F_prime) <= len(X) + len(F),
        "trace": [s.to_dict() for s in result.steps],
        "logic_checks": checks,
    })
    return report, result
