"""Stable maps between finite frames and the search for stable surjections."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import BudgetExceeded, PreconditionError
from .frame import Frame, bits, frame_from_dict, frame_to_dict, mask_of, rank

DEFAULT_SEARCH_BUDGET = 2 ** 24


@dataclass(frozen=True)
class PointMap:
    domain: Frame
    codomain: Frame
    assign: tuple

    def __post_init__(self):
        assign = tuple(int(y) for y in self.assign)
        if len(assign) != len(self.domain):
            raise PreconditionError("a point map must be total on its domain")
        if any(not (0 <= y < len(self.codomain)) for y in assign):
            raise PreconditionError("point map image out of range")
        object.__setattr__(self, "assign", assign)

    def __call__(self, x):
        return self.assign[x]

    def image_of(self, subset):
        return mask_of(self.assign[x] for x in bits(subset))

    def preimage_of(self, subset):
        return mask_of(x for x, y in enumerate(self.assign) if subset >> y & 1)

    def as_labels(self):
        return {self.domain.labels[x]: self.codomain.labels[y] for x, y in enumerate(self.assign)}


@dataclass(frozen=True)
class DomainSet:
    """A family of point subsets (bit sets) of ``frame``."""

    frame: Frame
    sets: tuple = ()

    def __post_init__(self):
        sets = tuple(dict.fromkeys(int(s) for s in self.sets))
        if any(s & ~self.frame.full for s in sets):
            raise PreconditionError("domain set member leaves the frame")
        object.__setattr__(self, "sets", sets)

    def __iter__(self):
        return iter(self.sets)

    def __len__(self):
        return len(self.sets)

    @classmethod
    def empty(cls, fr):
        return cls(fr, ())

    @classmethod
    def full(cls, fr):
        """Every subset; CDC for this family is the p-morphism back condition."""
        return cls(fr, tuple(range(1 << len(fr))))

    @classmethod
    def from_labels(cls, fr, sets):
        return cls(fr, tuple(fr.subset_from_labels(s) for s in sets))

    def to_labels(self):
        return [sorted(self.frame.subset_labels(s)) for s in self.sets]


def identity(fr):
    return PointMap(fr, fr, tuple(range(len(fr))))


def is_surjective(f):
    return len(set(f.assign)) == len(f.codomain)


def is_stable(f):
    return all(f.codomain.has_edge(f(x), f(y)) for x, y in f.domain.edges())


def satisfies_cdc(f, domain):
    """If ``Q[f(x)]`` meets a member, so does ``f(R[x])``; for every point."""
    cod = f.codomain
    for x in range(len(f.domain)):
        seen = cod.succ_mask[f(x)]
        hit = f.image_of(f.domain.succ_mask[x])
        for d in domain:
            if seen & d and not hit & d:
                return False
    return True


def is_pmorphism_at(f, x):
    needed = f.codomain.succ_mask[f(x)]
    return needed & ~f.image_of(f.domain.succ_mask[x]) == 0


def is_pmorphism(f):
    return is_stable(f) and all(is_pmorphism_at(f, x) for x in range(len(f.domain)))


def is_stable_surjection(f, domain=()):
    return is_stable(f) and is_surjective(f) and satisfies_cdc(f, domain)


def compose(g, f):
    """``g ∘ f``: apply ``f`` first."""
    if f.codomain != g.domain:
        raise PreconditionError("cannot compose: codomain of f is not the domain of g")
    return PointMap(f.domain, g.codomain, tuple(g(y) for y in f.assign))


def find_stable_surjection(x, f, domain=None, budget=DEFAULT_SEARCH_BUDGET):
    """Lexicographically least stable surjection ``x -> f`` with CDC for ``domain``.

    Points of ``x`` are assigned in index order, each trying targets in index
    order, so the first complete assignment found is the lex-least one.
    Partial assignments are cut when an edge between assigned points is not
    preserved, when a point's successors are all assigned and CDC fails, when
    too few points remain to cover the target, or when the target's rank is
    below the point's rank (stable maps never lower rank). ``budget`` bounds
    the number of partial assignments visited.
    """
    sets = tuple(domain) if domain is not None else ()
    n, k = len(x), len(f)
    if n == 0 or k == 0:
        return PointMap(x, f, ()) if n == 0 and k == 0 else None
    if k > n:
        return None
    xr, fr_ = rank(x), rank(f)
    candidates = [[c for c in range(k) if not (fr_[c] < xr[p])] for p in range(n)]
    # CDC for p can be checked once p and all its successors are assigned
    complete_at = [[] for _ in range(n)]
    for p in range(n):
        last = max([p, *x.succ[p]])
        complete_at[last].append(p)
    back = [[q for q in range(p + 1) if q in x.succ[p] or p in x.succ[q]] for p in range(n)]

    assign = [0] * n
    counts = [0] * k
    visited = 0

    def cdc_ok(p):
        seen = f.succ_mask[assign[p]]
        hit = 0
        for q in x.succ[p]:
            hit |= 1 << assign[q]
        return all(not (seen & d) or hit & d for d in sets)

    def extend(p, uncovered):
        nonlocal visited
        if p == n:
            return uncovered == 0
        remaining = n - p
        for c in candidates[p]:
            new_uncovered = uncovered - (1 if counts[c] == 0 else 0)
            if new_uncovered > remaining - 1:
                continue
            visited += 1
            if visited > budget:
                raise BudgetExceeded("stable surjection search", visited, budget)
            assign[p] = c
            ok = True
            for q in back[p]:
                if q in x.succ[p] and not f.has_edge(c, assign[q]):
                    ok = False
                    break
                if p in x.succ[q] and not f.has_edge(assign[q], c):
                    ok = False
                    break
            if ok and sets:
                ok = all(cdc_ok(q) for q in complete_at[p])
            if not ok:
                continue
            counts[c] += 1
            if extend(p + 1, new_uncovered):
                return True
            counts[c] -= 1
        return False

    if extend(0, k):
        return PointMap(x, f, tuple(assign))
    return None


def pointmap_to_dict(f):
    return {"domain": frame_to_dict(f.domain), "codomain": frame_to_dict(f.codomain),
            "assign": dict(sorted(f.as_labels().items()))}


def pointmap_from_dict(data):
    dom = frame_from_dict(data["domain"])
    cod = frame_from_dict(data["codomain"])
    try:
        assign = tuple(cod.index(data["assign"][lab]) for lab in dom.labels)
    except KeyError as err:
        raise PreconditionError(f"map is missing or misnames point {err}") from None
    return PointMap(dom, cod, assign)


def domainset_to_dict(d, over="codomain"):
    return {"over": over, "sets": sorted(d.to_labels())}


def domainset_from_dict(data, fr):
    try:
        return DomainSet.from_labels(fr, data.get("sets", []))
    except KeyError as err:
        raise PreconditionError(f"domain set names unknown point {err}") from None
