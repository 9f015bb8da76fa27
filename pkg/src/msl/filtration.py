"""Least and greatest standard filtrations, and a checker for definable filtrations."""

from __future__ import annotations

from dataclasses import dataclass

from . import formula as fm
from .algebra import dual_algebra
from .errors import PreconditionError
from .frame import Frame, Model, bits, frame_from_dict, frame_to_dict, mask_of, truth_set


@dataclass(frozen=True)
class FiltrationResult:
    filtered: Model
    projection: tuple
    theta: frozenset
    theta_prime: frozenset

    def to_dict(self, original):
        from .frame import model_to_dict

        fr = self.filtered.frame
        return {
            "filtered": model_to_dict(self.filtered),
            "projection": {original.frame.labels[x]: fr.labels[c]
                           for x, c in enumerate(self.projection)},
            "theta": sorted(fm.to_text(f) for f in self.theta),
            "theta_prime": sorted(fm.to_text(f) for f in self.theta_prime),
        }


def filtration_from_dict(data, original):
    from .frame import model_from_dict

    filtered = model_from_dict(data["filtered"])
    fr = filtered.frame
    projection = tuple(fr.index(data["projection"][lab]) for lab in original.frame.labels)
    theta = frozenset(fm.parse(t) for t in data["theta"])
    theta_prime = frozenset(fm.parse(t) for t in data.get("theta_prime", data["theta"]))
    return FiltrationResult(filtered, projection, theta, theta_prime)


def is_subformula_closed(theta):
    theta = set(theta)
    return all(c in theta for f in theta for c in f.children())


def _classes(model, theta):
    """Partition points by their theory restricted to ``theta``."""
    ordered = sorted(theta, key=fm.to_text)
    sets = [truth_set(model, f) for f in ordered]
    by_theory = {}
    for x in range(len(model.frame)):
        key = tuple(s >> x & 1 for s in sets)
        by_theory.setdefault(key, []).append(x)
    classes = sorted(by_theory.values(), key=lambda c: c[0])
    projection = [0] * len(model.frame)
    for k, members in enumerate(classes):
        for x in members:
            projection[x] = k
    return classes, tuple(projection)


def _build(model, theta, relation):
    theta = frozenset(theta)
    if not is_subformula_closed(theta):
        raise PreconditionError("theta must be subformula-closed")
    classes, projection = _classes(model, theta)
    fr = model.frame
    labels = [f"[{fr.labels[c[0]]}]" for c in classes]
    succ = [set() for _ in classes]
    for i, ci in enumerate(classes):
        for j, cj in enumerate(classes):
            if relation(ci, cj):
                succ[i].add(j)
    filtered_frame = Frame(tuple(labels), tuple(succ))
    names = {f.name for f in theta if isinstance(f, fm.Var)}
    valuation = {}
    for name in sorted(names):
        v = model.valuation.get(name, 0)
        valuation[name] = mask_of(projection[x] for x in bits(v))
    return FiltrationResult(Model(filtered_frame, valuation), projection, theta, theta)


def least_filtration(model, theta):
    """Classes are related iff some members are related in the original frame."""
    fr = model.frame

    def related(ci, cj):
        target = mask_of(cj)
        return any(fr.succ_mask[x] & target for x in ci)

    return _build(model, theta, related)


def _diamond_pairs(model, theta):
    """``(V(phi), V(dia phi))`` for each ``dia phi`` in theta, and for ``box phi``
    the same pair read through ``box phi = ~dia ~phi``."""
    pairs = []
    full = model.frame.full
    for f in sorted(theta, key=fm.to_text):
        if isinstance(f, fm.Dia):
            pairs.append((truth_set(model, f.arg), truth_set(model, f)))
        elif isinstance(f, fm.Box):
            pairs.append((full ^ truth_set(model, f.arg), full ^ truth_set(model, f)))
    return pairs


def greatest_filtration(model, theta):
    """``[x] R [y]`` iff ``y |= phi`` implies ``x |= dia phi`` for every ``dia phi`` in theta
    (and ``x |= box phi`` implies ``y |= phi`` for every ``box phi``)."""
    tables = _diamond_pairs(model, theta)

    def related(ci, cj):
        x, y = ci[0], cj[0]
        return all(not (inner >> y & 1) or (outer >> x & 1) for inner, outer in tables)

    return _build(model, theta, related)


@dataclass(frozen=True)
class FiltrationCheck:
    """Outcome of a verification; falsy when some condition failed.

    ``failures`` lists every failed condition in checking order and
    ``failed`` is the first of them.
    """

    failures: tuple = ()
    details: tuple = ()

    @property
    def ok(self):
        return not self.failures

    @property
    def failed(self):
        return self.failures[0] if self.failures else None

    def __bool__(self):
        return self.ok


def verify_definable_filtration(original, candidate):
    """Check the algebraic conditions of a definable filtration.

    The subalgebra ``A'`` of the original complex algebra generated by the
    truth sets of ``theta_prime`` is compared with the candidate through the
    projection: the candidate's subsets ``b`` correspond to ``pi^{-1}[b]``.
    """
    fr = original.frame
    proj = candidate.projection
    filt = candidate.filtered.frame
    if len(proj) != len(fr) or any(not 0 <= c < len(filt) for c in proj):
        return FiltrationCheck(("projection",), ("projection is not a total map",))
    if set(proj) != set(range(len(filt))):
        return FiltrationCheck(("projection",), ("projection is not surjective",))
    if not is_subformula_closed(candidate.theta) or not is_subformula_closed(candidate.theta_prime):
        return FiltrationCheck(("theta",), ("theta sets must be subformula-closed",))
    if not candidate.theta <= candidate.theta_prime:
        return FiltrationCheck(("theta",), ("theta must be contained in theta_prime",))

    failures, details = [], []

    def fail(name, why):
        if name not in failures:
            failures.append(name)
            details.append(why)

    def pre(b):
        return mask_of(x for x, c in enumerate(proj) if b >> c & 1)

    # generation: the atoms of A' are exactly the fibres of the projection
    _, by_theory = _classes(original, candidate.theta_prime)
    if any((proj[x] == proj[y]) != (by_theory[x] == by_theory[y])
           for x in range(len(fr)) for y in range(len(fr))):
        fail("generation", "fibres differ from the theta_prime classes")

    names = {f.name for f in candidate.theta_prime if isinstance(f, fm.Var)}
    for name in sorted(set(candidate.filtered.valuation) | names):
        vp = candidate.filtered.valuation.get(name, 0)
        if name in names:
            if pre(vp) != original.valuation.get(name, 0):
                fail("valuation", f"valuation of {name} is not transported")
        elif vp:
            fail("valuation", f"{name} outside theta_prime must be empty")

    orig_alg = dual_algebra(fr)
    filt_alg = dual_algebra(filt)
    for b in range(1 << len(filt)):
        if orig_alg.dia(pre(b)) & ~pre(filt_alg.dia(b)):
            fail("stability", "dia i(b) is not below i(dia' b)")
            break

    for a, _ in _diamond_pairs(original, candidate.theta):
        b = mask_of(proj[x] for x in bits(a))
        if pre(b) != a:
            fail("generation", "truth set not in the subalgebra")
        elif pre(filt_alg.dia(b)) != orig_alg.dia(a):
            fail("CDC", f"CDC fails for the set {sorted(fr.subset_labels(a))}")
    return FiltrationCheck(tuple(failures), tuple(details))


def filtration_truth_lemma_holds(original, result):
    for f in result.theta:
        orig = truth_set(original, f)
        filt = truth_set(result.filtered, f)
        for x, c in enumerate(result.projection):
            if (orig >> x & 1) != (filt >> c & 1):
                return False
    return True


__all__ = [
    "FiltrationResult", "FiltrationCheck", "least_filtration", "greatest_filtration",
    "verify_definable_filtration", "filtration_truth_lemma_holds", "is_subformula_closed",
    "filtration_from_dict", "frame_from_dict", "frame_to_dict",
]
