"""Acceptance checks, shared by the test suite and ``msl selftest``.

Every check returns a :class:`CheckResult`; none of them raises on a
mathematical failure, so a caller can always print one line per check.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field

from . import formula as fm
from . import worked
from .algebra import dual_algebra, height
from .errors import InvariantViolation
from .filtration import (filtration_truth_lemma_holds, greatest_filtration, least_filtration,
                         verify_definable_filtration)
from .frame import (DEFAULT_VALUATION_BUDGET, OMEGA, Frame, Model, are_isomorphic,
                    enumerate_frames, is_cycle_free, is_pretransitive, rank, validates)
from .maps import DomainSet, PointMap, compose, find_stable_surjection, is_pmorphism
from .rules import gen_rho, refutes_syntactic, splitting_dichotomy_check
from .subdivision import fmp_demo, subdivide


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str = ""
    seconds: float = 0.0
    limit: float | None = None
    failures: list = field(default_factory=list)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        limit = f" (limit {self.limit:g}s)" if self.limit else ""
        return f"[{status}] criterion {self.number}: {self.name}: {self.detail} [{self.seconds:.2f}s{limit}]"


def _timed(number, name, limit=None):
    def wrap(fn):
        def run(*args, **kwargs):
            start = time.perf_counter()
            passed, detail, failures = fn(*args, **kwargs)
            elapsed = time.perf_counter() - start
            if limit is not None and elapsed > limit:
                passed = False
                detail += f"; over time limit"
            return CheckResult(number, name, passed, detail, elapsed, limit, failures[:20])
        run.__name__ = fn.__name__
        run.__doc__ = fn.__doc__
        return run
    return wrap


# ---------------------------------------------------------------------------
# random instances


def random_frame(rng, n, p_edge=None, labels=None):
    p = rng.uniform(0.15, 0.5) if p_edge is None else p_edge
    labels = labels or [f"x{i}" for i in range(n)]
    succ = [{j for j in range(n) if rng.random() < p} for _ in range(n)]
    return Frame(tuple(labels), tuple(succ))


def random_instance(rng, max_x=7, max_f=4, max_d=3):
    """A stable surjection with CDC for a random family ``D``, built from ``F`` upwards.

    ``X`` keeps a random subset of the edges allowed by stability, then gets
    extra edges until CDC holds; adding edges never breaks stability.
    """
    k = rng.randint(1, max_f)
    F = random_frame(rng, k, labels=[chr(ord("a") + i) for i in range(k)])
    sets = [rng.randrange(1, 1 << k) for _ in range(rng.randint(0, max_d))]
    D = DomainSet(F, sets)
    n = rng.randint(k, max_x)
    assign = list(range(k)) + [rng.randrange(k) for _ in range(n - k)]
    rng.shuffle(assign)
    succ = [set() for _ in range(n)]
    keep = rng.uniform(0.3, 0.9)
    for x in range(n):
        for y in range(n):
            if F.has_edge(assign[x], assign[y]) and rng.random() < keep:
                succ[x].add(y)
    for x in range(n):
        for d in D:
            targets = F.succ_mask[assign[x]] & d
            if targets and not any(d >> assign[y] & 1 for y in succ[x]):
                choices = [y for y in range(n) if targets >> assign[y] & 1]
                succ[x].add(rng.choice(choices))
    X = Frame(tuple(f"y{i}" for i in range(n)), tuple(succ))
    return PointMap(X, F, tuple(assign)), D


def random_formula(rng, depth, names=("p", "q")):
    if depth == 0 or rng.random() < 0.25:
        roll = rng.random()
        if roll < 0.1:
            return fm.BOT
        if roll < 0.15:
            return fm.TOP
        return fm.Var(rng.choice(names))
    op = rng.choice(["not", "box", "dia", "dia", "and", "or", "imp"])
    if op in ("not", "box", "dia"):
        arg = random_formula(rng, depth - 1, names)
        return {"not": fm.Not, "box": fm.Box, "dia": fm.Dia}[op](arg)
    left, right = random_formula(rng, depth - 1, names), random_formula(rng, depth - 1, names)
    return {"and": fm.And, "or": fm.Or, "imp": fm.Implies}[op](left, right)


def random_model(rng, max_points=6, names=("p", "q")):
    n = rng.randint(1, max_points)
    fr = random_frame(rng, n)
    return Model(fr, {name: rng.randrange(1 << n) for name in names})


def all_domains(F):
    """Every family of subsets of ``F``."""
    subsets = 1 << len(F)
    for chosen in range(1 << subsets):
        yield DomainSet(F, tuple(s for s in range(subsets) if chosen >> s & 1))


# ---------------------------------------------------------------------------
# criteria


@_timed(1, "worked example reproduces F3", limit=1.0)
def check_worked_example():
    f = worked.f_ex()
    result = subdivide(f, DomainSet.empty(f.codomain))
    failures = []
    if not are_isomorphic(result.F_prime, worked.f3()):
        failures.append("F' is not isomorphic to F3")
    if compose(result.g, result.f_prime).assign != f.assign:
        failures.append("g . f' != f")
    if not is_pmorphism(result.f_prime):
        failures.append("f' is not a p-morphism")
    detail = f"|F'|={len(result.F_prime)}, " + ("all hold" if not failures else "; ".join(failures))
    return not failures, detail, failures


@_timed(2, "subdivision invariants and claims", limit=60.0)
def check_subdivision_suite(seed=0, count=200):
    rng = random.Random(seed)
    failures = []
    runs = 0
    for _ in range(count):
        f, D = random_instance(rng)
        runs += 1
        try:
            subdivide(f, D)
        except InvariantViolation as err:
            failures.append(f"random {f.domain!r} -> {f.codomain!r}: {err}")
    exhaustive = 0
    Xs = list(enumerate_frames(3))
    for F in enumerate_frames(2):
        for D in all_domains(F):
            for X in Xs:
                w = find_stable_surjection(X, F, D)
                if w is None:
                    continue
                exhaustive += 1
                try:
                    subdivide(w, D)
                except InvariantViolation as err:
                    failures.append(f"exhaustive {X!r} -> {F!r}: {err}")
    detail = f"{runs} random + {exhaustive} exhaustive instances, {len(failures)} violations"
    return not failures, detail, failures


@_timed(3, "rule refutation: syntactic equals semantic", limit=300.0)
def check_characterization(budget=DEFAULT_VALUATION_BUDGET):
    failures = []
    total = refuted = 0
    Xs = list(enumerate_frames(3))
    for F in enumerate_frames(2):
        alg = dual_algebra(F)
        for D in all_domains(F):
            rule = gen_rho(alg, D.sets)
            for X in Xs:
                total += 1
                syn = refutes_syntactic(X, rule, budget)
                sem = find_stable_surjection(X, F, D) is not None
                refuted += syn
                if syn != sem:
                    failures.append(f"{X!r} vs {F!r}, D={D.to_labels()}: syntactic={syn}")
    detail = f"{total} instances ({refuted} refuted), {len(failures)} disagreements"
    return not failures, detail, failures


@_timed(4, "subdivision preserves (m+1,1)-pretransitivity")
def check_pretransitivity(max_points=4, ms=(1, 2)):
    failures = []
    pairs = 0
    for m in ms:
        frames = list(enumerate_frames(max_points, pretransitive=(m + 1, 1)))
        for X in frames:
            for F in frames:
                if len(F) > len(X):
                    continue
                w = find_stable_surjection(X, F)
                if w is None:
                    continue
                pairs += 1
                result = subdivide(w)
                if not is_pretransitive(result.F_prime, m + 1, 1):
                    failures.append(f"m={m}: {X!r} -> {F!r} gives {result.F_prime!r}")
    detail = f"{pairs} surjective pairs, {len(failures)} non-pretransitive outputs"
    return not failures, detail, failures


@_timed(5, "height, box^(n+1) false and rank agree")
def check_height_duality(max_points=4, max_n=5):
    failures = []
    frames = 0
    for fr in enumerate_frames(max_points):
        frames += 1
        h = height(dual_algebra(fr))
        ranks = rank(fr)
        top = OMEGA if OMEGA in ranks else max(ranks)
        for n in range(max_n + 1):
            a = h <= n
            b = validates(fr, fm.box_iter(n + 1, fm.BOT))
            c = top <= n + 1
            if not a == b == c:
                failures.append(f"{fr!r}, n={n}: height {a}, formula {b}, rank {c}")
    detail = f"{frames} frames x {max_n + 1} values of n, {len(failures)} mismatches"
    return not failures, detail, failures


@_timed(6, "no stable surjection from cyclic onto cycle-free")
def check_no_cyclic_to_cycle_free(max_x=4, max_f=3):
    failures = []
    pairs = 0
    targets = list(enumerate_frames(max_f, cycle_free=True))
    for X in enumerate_frames(max_x):
        if is_cycle_free(X):
            continue
        for F in targets:
            pairs += 1
            if find_stable_surjection(X, F) is not None:
                failures.append(f"{X!r} -> {F!r}")
    detail = f"{pairs} pairs, {len(failures)} surjections found"
    return not failures, detail, failures


@_timed(7, "filtration truth lemma and definability")
def check_filtrations(seed=0, count=100):
    rng = random.Random(seed)
    failures = []
    for i in range(count):
        model = random_model(rng)
        theta = fm.subformula_closure(random_formula(rng, 3))
        for kind, build in (("least", least_filtration), ("greatest", greatest_filtration)):
            result = build(model, theta)
            if not filtration_truth_lemma_holds(model, result):
                failures.append(f"#{i} {kind}: truth lemma fails")
            if len(result.filtered.frame) > 2 ** len(theta):
                failures.append(f"#{i} {kind}: too many classes")
            verdict = verify_definable_filtration(model, result)
            if not verdict:
                failures.append(f"#{i} {kind}: {verdict.failed}")
    detail = f"{count} models x 2 filtrations, {len(failures)} failures"
    return not failures, detail, failures


@_timed(8, "splitting dichotomy for the point and the 2-chain", limit=120.0)
def check_dichotomy(max_points=3):
    failures = []
    frames = 0
    for F in (worked.single_point(), worked.chain(2)):
        report = splitting_dichotomy_check(F, max_points)
        frames += report["frames"]
        for row in report["violations"]:
            failures.append(f"F={F!r}, G={row['frame']!r}")
    detail = f"{frames} frame checks, {len(failures)} violations"
    return not failures, detail, failures


@_timed(9, "fmp pipeline on refuted cycle-free instances")
def check_fmp_pipeline(budget=DEFAULT_VALUATION_BUDGET, syntactic_limit=2 ** 16):
    """``F'`` must map onto ``F`` with CDC; when the valuation space of
    ``rho(F, D)`` over ``F'`` has at most ``syntactic_limit`` points the
    refutation is also confirmed by the syntactic oracle.
    """
    failures = []
    runs = confirmed = 0
    Xs = list(enumerate_frames(3))
    for F in enumerate_frames(2, cycle_free=True):
        alg = dual_algebra(F)
        for D in all_domains(F):
            rule = gen_rho(alg, D.sets)
            for X in Xs:
                if not refutes_syntactic(X, rule, budget):
                    continue
                runs += 1
                report, result = fmp_demo(X, F, D)
                Fp = result.F_prime if result is not None else None
                tag = f"{X!r} vs {F!r}, D={D.to_labels()}"
                if Fp is None:
                    failures.append(f"{tag}: no witness")
                    continue
                if len(Fp) > len(X) + len(F):
                    failures.append(f"{tag}: |F'|={len(Fp)} too large")
                if not report["F_prime_refutes_rule"] or find_stable_surjection(Fp, F, D) is None:
                    failures.append(f"{tag}: F' does not map onto F with CDC")
                if 1 << (len(Fp) * len(rule.variables)) <= syntactic_limit:
                    confirmed += 1
                    if not refutes_syntactic(Fp, rule, budget):
                        failures.append(f"{tag}: F' validates the rule")
    detail = (f"{runs} refuted instances ({confirmed} confirmed syntactically), "
              f"{len(failures)} failures")
    return not failures, detail, failures


ALL_CHECKS = (check_worked_example, check_subdivision_suite, check_characterization,
              check_pretransitivity, check_height_duality, check_no_cyclic_to_cycle_free,
              check_filtrations, check_dichotomy, check_fmp_pipeline)


def run_all(seed=0, budget=DEFAULT_VALUATION_BUDGET, emit=None):
    results = []
    for check in ALL_CHECKS:
        if check in (check_subdivision_suite, check_filtrations):
            res = check(seed=seed)
        elif check in (check_characterization, check_fmp_pipeline):
            res = check(budget=budget)
        else:
            res = check()
        results.append(res)
        if emit is not None:
            emit(res.line())
    return results
