"""Finite modal spaces (Kripke frames), models and their combinatorics.

Point subsets are Python ints used as bit sets: bit ``i`` stands for the
point with index ``i``. All spaces are finite, so every subset is clopen and
continuity conditions are vacuous.
"""

from __future__ import annotations

import enum
import itertools
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import formula as fm
from .errors import BudgetExceeded, PreconditionError

DEFAULT_VALUATION_BUDGET = 2 ** 24
DEFAULT_ENUM_CAP = 5
_BLOCK = 2 ** 15


class Omega(enum.Enum):
    """The infinite rank. Compares above every int."""

    OMEGA = "omega"

    def __lt__(self, other):
        return False if isinstance(other, (int, Omega)) else NotImplemented

    def __le__(self, other):
        if isinstance(other, Omega):
            return True
        return False if isinstance(other, int) else NotImplemented

    def __gt__(self, other):
        if isinstance(other, Omega):
            return False
        return True if isinstance(other, int) else NotImplemented

    def __ge__(self, other):
        return True if isinstance(other, (int, Omega)) else NotImplemented

    def __str__(self):
        return "ω"


OMEGA = Omega.OMEGA


def bits(mask):
    """Indices of the set bits of ``mask`` in increasing order."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(indices):
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True, eq=False)
class Frame:
    """A finite Kripke frame with labelled points.

    ``succ[i]`` is the set of successor indices of point ``i``.
    """

    labels: tuple
    succ: tuple

    def __post_init__(self):
        labels = tuple(str(lab) for lab in self.labels)
        succ = tuple(frozenset(s) for s in self.succ)
        if len(set(labels)) != len(labels):
            raise PreconditionError("frame labels must be pairwise distinct")
        if len(succ) != len(labels):
            raise PreconditionError("one successor set per point is required")
        n = len(labels)
        for s in succ:
            if any(not (0 <= j < n) for j in s):
                raise PreconditionError("successor index out of range")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "succ", succ)

    @classmethod
    def from_edges(cls, labels, edges):
        """Build from labels and ``(source, target)`` pairs of labels or indices."""
        labels = tuple(labels)
        index = {lab: i for i, lab in enumerate(labels)}
        succ = [set() for _ in labels]
        for a, b in edges:
            i = a if isinstance(a, int) else index[a]
            j = b if isinstance(b, int) else index[b]
            succ[i].add(j)
        return cls(labels, tuple(succ))

    @classmethod
    def from_masks(cls, labels, succ_masks):
        return cls(tuple(labels), tuple(frozenset(bits(m)) for m in succ_masks))

    @property
    def point_count(self):
        return len(self.labels)

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        return self._index[label]

    @cached_property
    def _index(self):
        return {lab: i for i, lab in enumerate(self.labels)}

    @cached_property
    def succ_mask(self):
        return tuple(mask_of(s) for s in self.succ)

    @cached_property
    def pred_mask(self):
        pred = [0] * len(self)
        for i, s in enumerate(self.succ):
            for j in s:
                pred[j] |= 1 << i
        return tuple(pred)

    @property
    def full(self):
        return (1 << len(self)) - 1

    def edges(self):
        return [(i, j) for i, s in enumerate(self.succ) for j in sorted(s)]

    def has_edge(self, i, j):
        return j in self.succ[i]

    @cached_property
    def reach_mask(self):
        """Reflexive-transitive successor closure of each point."""
        out = []
        for i in range(len(self)):
            seen = 1 << i
            frontier = seen
            while frontier:
                nxt = 0
                for j in bits(frontier):
                    nxt |= self.succ_mask[j]
                frontier = nxt & ~seen
                seen |= nxt
            out.append(seen)
        return tuple(out)

    def dia(self, subset):
        """``R^{-1}[subset]`` as a bit set."""
        out = 0
        for j in bits(subset):
            out |= self.pred_mask[j]
        return out

    def box(self, subset):
        return self.full ^ self.dia(self.full ^ subset)

    def subset_labels(self, subset):
        return [self.labels[i] for i in bits(subset)]

    def subset_from_labels(self, labels):
        return mask_of(self.index(lab) for lab in labels)

    def relabel(self, labels):
        return Frame(tuple(labels), self.succ)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.labels == other.labels and self.succ == other.succ

    def __hash__(self):
        return hash((self.labels, self.succ))

    def __repr__(self):
        edges = ", ".join(f"{self.labels[i]}->{self.labels[j]}" for i, j in self.edges())
        return f"Frame([{', '.join(self.labels)}]; {edges})"


@dataclass(frozen=True)
class Model:
    frame: Frame
    valuation: dict = field(default_factory=dict)

    def __post_init__(self):
        full = self.frame.full
        val = {}
        for name, subset in self.valuation.items():
            if not isinstance(subset, int):
                subset = self.frame.subset_from_labels(subset)
            if subset & ~full:
                raise PreconditionError(f"valuation of {name} leaves the frame")
            val[name] = subset
        object.__setattr__(self, "valuation", val)

    def truth_set(self, f):
        return truth_set(self, f)


# ---------------------------------------------------------------------------
# rank and cycles


def rank(fr):
    """Length of the longest path from each point; ``OMEGA`` if unbounded."""
    n = len(fr)
    on_cycle = 0
    for i in range(n):
        # i lies on a cycle iff it is reachable from one of its successors
        for j in fr.succ[i]:
            if fr.reach_mask[j] >> i & 1:
                on_cycle |= 1 << i
                break
    ranks = [None] * n
    for i in range(n):
        if fr.reach_mask[i] & on_cycle:
            ranks[i] = OMEGA

    def finite_rank(i):
        if ranks[i] is None:
            ranks[i] = 1 + max((finite_rank(j) for j in fr.succ[i]), default=0)
        return ranks[i]

    for i in range(n):
        finite_rank(i)
    return tuple(ranks)


def max_finite_rank(fr):
    return max((r for r in rank(fr) if r is not OMEGA), default=0)


def is_cycle_free(fr):
    return all(r is not OMEGA for r in rank(fr))


def is_pretransitive(fr, m, n):
    """``R^m ⊆ R^n`` via boolean matrix powers."""
    if m < 0 or n < 0:
        raise PreconditionError("relation powers need m, n >= 0")
    rel = _adjacency(fr)
    rm = _power(rel, m)
    rn = _power(rel, n)
    return bool(np.all(~rm | rn))


def _adjacency(fr):
    n = len(fr)
    a = np.zeros((n, n), dtype=bool)
    for i, j in fr.edges():
        a[i, j] = True
    return a


def _power(rel, k):
    out = np.eye(rel.shape[0], dtype=bool)
    for _ in range(k):
        out = (out.astype(np.int64) @ rel.astype(np.int64)) > 0
    return out


# ---------------------------------------------------------------------------
# subsets, roots, generated subframes


def upsets(fr):
    """Yield every upset (as a bit set) exactly once.

    Branches point by point: keeping a point forces everything it reaches,
    dropping it forbids everything that reaches it.
    """
    n = len(fr)
    coreach = [0] * n
    for i in range(n):
        for j in bits(fr.reach_mask[i]):
            coreach[j] |= 1 << i

    def walk(i, keep, drop):
        if i == n:
            yield keep
            return
        bit = 1 << i
        if (keep | drop) & bit:
            yield from walk(i + 1, keep, drop)
            return
        if not fr.reach_mask[i] & drop:
            yield from walk(i + 1, keep | fr.reach_mask[i], drop)
        if not coreach[i] & keep:
            yield from walk(i + 1, keep, drop | coreach[i])

    yield from walk(0, 0, 0)


def is_upset(fr, subset):
    return all(fr.succ_mask[i] & ~subset == 0 for i in bits(subset))


def roots(fr):
    return mask_of(i for i in range(len(fr)) if fr.reach_mask[i] == fr.full)


def is_rooted(fr):
    return roots(fr) != 0


def induced_subframe(fr, subset):
    """Subframe on ``subset`` (kept in index order) plus the index embedding."""
    keep = bits(subset)
    pos = {old: new for new, old in enumerate(keep)}
    succ = [frozenset(pos[j] for j in fr.succ[i] if j in pos) for i in keep]
    return Frame(tuple(fr.labels[i] for i in keep), tuple(succ)), tuple(keep)


def generated_subframe(fr, x):
    """Subframe on everything reachable from ``x``; ``x`` is a root of it."""
    return induced_subframe(fr, fr.reach_mask[x])


# ---------------------------------------------------------------------------
# semantics


def truth_set(model, f):
    fr = model.frame
    return _evaluate(f, model.valuation, fr.full, fr.dia, {})


def _evaluate(f, env, full, dia, cache):
    """Evaluate ``f`` to a truth set; works on ints or int64 arrays of masks."""
    try:
        return cache[f]
    except KeyError:
        pass
    if isinstance(f, fm.Var):
        val = env.get(f.name, 0)
    elif isinstance(f, fm.Bot):
        val = 0
    elif isinstance(f, fm.Top):
        val = full
    elif isinstance(f, fm.Not):
        val = full ^ _evaluate(f.arg, env, full, dia, cache)
    elif isinstance(f, fm.And):
        val = _evaluate(f.left, env, full, dia, cache) & _evaluate(f.right, env, full, dia, cache)
    elif isinstance(f, fm.Or):
        val = _evaluate(f.left, env, full, dia, cache) | _evaluate(f.right, env, full, dia, cache)
    elif isinstance(f, fm.Implies):
        val = (full ^ _evaluate(f.left, env, full, dia, cache)) | _evaluate(f.right, env, full, dia, cache)
    elif isinstance(f, fm.Iff):
        val = full ^ (_evaluate(f.left, env, full, dia, cache) ^ _evaluate(f.right, env, full, dia, cache))
    elif isinstance(f, fm.Dia):
        val = dia(_evaluate(f.arg, env, full, dia, cache))
    elif isinstance(f, fm.Box):
        val = full ^ dia(full ^ _evaluate(f.arg, env, full, dia, cache))
    else:
        raise TypeError(f"not a formula: {f!r}")
    cache[f] = val
    return val


class _BatchEvaluator:
    """Evaluates formulas under many valuations at once.

    Valuation number ``v`` gives variable ``k`` the truth set
    ``(v >> (k * n)) & full`` where ``n`` is the point count.
    """

    def __init__(self, fr, names):
        self.fr = fr
        self.names = list(names)
        self.n = len(fr)
        self.full = fr.full
        if self.n <= 12:
            table = np.array([fr.dia(s) for s in range(1 << self.n)], dtype=np.int64)
            self.dia = lambda arr: table[arr] if isinstance(arr, np.ndarray) else int(table[arr])
        else:
            pred = fr.pred_mask

            def dia(arr):
                if not isinstance(arr, np.ndarray):
                    return fr.dia(arr)
                out = np.zeros_like(arr)
                for y in range(self.n):
                    out |= np.where((arr >> y) & 1, pred[y], 0)
                return out

            self.dia = dia

    @property
    def total(self):
        return 1 << (self.n * len(self.names))

    def env(self, idx):
        return {name: (idx >> (k * self.n)) & self.full for k, name in enumerate(self.names)}

    def globally_true(self, f, idx, env, cache):
        val = _evaluate(f, env, self.full, self.dia, cache)
        return np.broadcast_to(np.asarray(val) == self.full, idx.shape)

    def first_refuting(self, premises, conclusions):
        """Smallest valuation number refuting ``premises / conclusions`` or None."""
        for start in range(0, self.total, _BLOCK):
            idx = np.arange(start, min(start + _BLOCK, self.total), dtype=np.int64)
            for f in premises:
                if idx.size == 0:
                    break
                keep = self.globally_true(f, idx, self.env(idx), {})
                idx = idx[keep]
            if idx.size == 0:
                continue
            for f in conclusions:
                keep = ~self.globally_true(f, idx, self.env(idx), {})
                idx = idx[keep]
                if idx.size == 0:
                    break
            if idx.size:
                return int(idx[0])
        return None

    def valuation(self, number):
        return {name: (number >> (k * self.n)) & self.full for k, name in enumerate(self.names)}


def _checked_evaluator(fr, names, budget):
    names = sorted(names)
    need = 1 << (len(fr) * len(names))
    if need > budget:
        raise BudgetExceeded("valuation enumeration", need, budget)
    return _BatchEvaluator(fr, names)


def refuting_valuation(fr, rule, budget=DEFAULT_VALUATION_BUDGET):
    """A valuation (name -> bit set) refuting ``rule`` on ``fr``, or None.

    A formula is treated as the rule ``/ formula``.
    """
    if isinstance(rule, fm.Formula):
        rule = fm.Rule((), (rule,))
    ev = _checked_evaluator(fr, rule.variables, budget)
    number = ev.first_refuting(rule.premises, rule.conclusions)
    return None if number is None else ev.valuation(number)


def validates(fr, f, budget=DEFAULT_VALUATION_BUDGET):
    return refuting_valuation(fr, f, budget) is None


def validates_rule(fr, rule, budget=DEFAULT_VALUATION_BUDGET):
    return refuting_valuation(fr, rule, budget) is None


# ---------------------------------------------------------------------------
# isomorphism and enumeration


def _code(fr):
    n = len(fr)
    code = 0
    for i, j in fr.edges():
        code |= 1 << (i * n + j)
    return code


def _frame_from_code(n, code, labels=None):
    labels = labels or default_labels(n)
    succ = []
    for i in range(n):
        row = (code >> (i * n)) & ((1 << n) - 1)
        succ.append(frozenset(bits(row)))
    return Frame(tuple(labels), tuple(succ))


def default_labels(n):
    if n <= 26:
        return tuple("abcdefghijklmnopqrstuvwxyz"[:n])
    return tuple(f"x{i}" for i in range(n))


class _Permuter:
    """Applies all point permutations to relation codes via per-row tables."""

    def __init__(self, n):
        self.n = n
        self.perms = list(itertools.permutations(range(n)))
        rows = 1 << n
        self.tables = []
        for perm in self.perms:
            per_row = []
            for i in range(n):
                t = []
                for r in range(rows):
                    out = 0
                    for j in bits(r):
                        out |= 1 << perm[j]
                    t.append(out << (perm[i] * n))
                per_row.append(t)
            self.tables.append(per_row)

    def images(self, code):
        n = self.n
        rmask = (1 << n) - 1
        rows = [(code >> (i * n)) & rmask for i in range(n)]
        for per_row in self.tables:
            out = 0
            for i in range(n):
                out |= per_row[i][rows[i]]
            yield out

    def canonical(self, code):
        return min(self.images(code))


_PERMUTERS = {}


def _permuter(n):
    if n not in _PERMUTERS:
        _PERMUTERS[n] = _Permuter(n)
    return _PERMUTERS[n]


def canonical_code(fr):
    """Isomorphism-invariant code: the least relation code over all relabellings."""
    return len(fr), _permuter(len(fr)).canonical(_code(fr))


def find_isomorphism(a, b):
    """Index map ``a -> b`` that is an isomorphism, or None."""
    n = len(a)
    if n != len(b) or len(a.edges()) != len(b.edges()):
        return None
    sig_a = [(len(a.succ[i]), bin(a.pred_mask[i]).count("1"), i in a.succ[i]) for i in range(n)]
    sig_b = [(len(b.succ[i]), bin(b.pred_mask[i]).count("1"), i in b.succ[i]) for i in range(n)]
    if sorted(sig_a) != sorted(sig_b):
        return None
    assign = [None] * n
    used = [False] * n

    def extend(i):
        if i == n:
            return True
        for j in range(n):
            if used[j] or sig_a[i] != sig_b[j]:
                continue
            ok = True
            for k in range(i):
                if (k in a.succ[i]) != (assign[k] in b.succ[j]) or (i in a.succ[k]) != (j in b.succ[assign[k]]):
                    ok = False
                    break
            if ok and ((i in a.succ[i]) == (j in b.succ[j])):
                assign[i] = j
                used[j] = True
                if extend(i + 1):
                    return True
                used[j] = False
        assign[i] = None
        return False

    return tuple(assign) if extend(0) else None


def are_isomorphic(a, b):
    return find_isomorphism(a, b) is not None


def _classes_all(n):
    """Least relation code of every isomorphism class on ``n`` points."""
    total = 1 << (n * n)
    seen = bytearray(total)
    perm = _permuter(n)
    code = 0
    while True:
        code = seen.find(0, code)
        if code < 0:
            return
        yield code
        for img in perm.images(code):
            seen[img] = 1


def _classes_acyclic(n):
    """Least codes of the cycle-free classes, from strictly upper triangular relations."""
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    perm = _permuter(n)
    found = set()
    for choice in range(1 << len(pairs)):
        code = 0
        for k, (i, j) in enumerate(pairs):
            if choice >> k & 1:
                code |= 1 << (i * n + j)
        found.add(perm.canonical(code))
    yield from sorted(found)


def enumerate_frames(max_points, cycle_free=False, rooted=False, pretransitive=None,
                     cap=DEFAULT_ENUM_CAP, min_points=1):
    """Yield one frame per isomorphism class with ``min_points..max_points`` points.

    ``pretransitive`` is an optional ``(m, n)`` pair requiring ``R^m ⊆ R^n``.
    Frames come out by size, then by least relation code.
    """
    if max_points > cap:
        raise BudgetExceeded("frame enumeration", max_points, cap)
    for n in range(max(min_points, 1), max_points + 1):
        codes = _classes_acyclic(n) if cycle_free else _classes_all(n)
        for code in codes:
            fr = _frame_from_code(n, code)
            if cycle_free and not is_cycle_free(fr):
                continue
            if rooted and not is_rooted(fr):
                continue
            if pretransitive is not None and not is_pretransitive(fr, *pretransitive):
                continue
            yield fr


# ---------------------------------------------------------------------------
# JSON


def frame_to_dict(fr):
    order = sorted(range(len(fr)), key=lambda i: fr.labels[i])
    edges = sorted((fr.labels[i], fr.labels[j]) for i, j in fr.edges())
    return {"points": [fr.labels[i] for i in order], "edges": [list(e) for e in edges]}


def frame_from_dict(data):
    try:
        return Frame.from_edges(data["points"], [tuple(e) for e in data.get("edges", [])])
    except KeyError as err:
        raise PreconditionError(f"unknown point or missing key {err}") from None


def model_to_dict(model):
    out = frame_to_dict(model.frame)
    out["valuation"] = {name: sorted(model.frame.subset_labels(s))
                        for name, s in sorted(model.valuation.items())}
    return out


def model_from_dict(data):
    fr = frame_from_dict(data)
    return Model(fr, {name: list(pts) for name, pts in data.get("valuation", {}).items()})


def dumps(data):
    return json.dumps(data, sort_keys=True, ensure_ascii=False)


def ranks_to_dict(fr, ranks=None):
    ranks = ranks if ranks is not None else rank(fr)
    return {fr.labels[i]: (r.value if r is OMEGA else r) for i, r in enumerate(ranks)}
