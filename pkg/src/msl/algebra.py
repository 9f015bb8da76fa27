"""Finite modal algebras in atom representation and their duality with frames.

An element is an int bit set of atoms. ``diamond[i]`` is the diamond of the
atom ``i``; the diamond of any element is the union over its atoms, so the
operator is normal and additive by construction.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

from .errors import PreconditionError
from .frame import OMEGA, Frame, bits, mask_of, roots

MAX_ATOMS = 16


@dataclass(frozen=True, eq=False)
class Algebra:
    atoms: tuple
    diamond: tuple

    def __post_init__(self):
        atoms = tuple(str(a) for a in self.atoms)
        diamond = tuple(int(d) for d in self.diamond)
        if len(set(atoms)) != len(atoms) or len(diamond) != len(atoms):
            raise PreconditionError("atoms must be distinct, one diamond entry each")
        full = (1 << len(atoms)) - 1
        if any(d & ~full for d in diamond):
            raise PreconditionError("diamond of an atom must be a set of atoms")
        object.__setattr__(self, "atoms", atoms)
        object.__setattr__(self, "diamond", diamond)

    @property
    def atom_count(self):
        return len(self.atoms)

    @property
    def top(self):
        return (1 << len(self.atoms)) - 1

    @property
    def size(self):
        return 1 << len(self.atoms)

    def elements(self):
        if len(self.atoms) > MAX_ATOMS:
            raise PreconditionError(f"carrier enumeration capped at {MAX_ATOMS} atoms")
        return range(self.size)

    def dia(self, a):
        out = 0
        for i in bits(a):
            out |= self.diamond[i]
        return out

    def neg(self, a):
        return self.top ^ a

    def box(self, a):
        return self.top ^ self.dia(self.top ^ a)

    @cached_property
    def dia_table(self):
        return tuple(self.dia(a) for a in self.elements())

    def element_label(self, a):
        return "{" + ",".join(self.atoms[i] for i in bits(a)) + "}"

    def __eq__(self, other):
        if not isinstance(other, Algebra):
            return NotImplemented
        return self.atoms == other.atoms and self.diamond == other.diamond

    def __hash__(self):
        return hash((self.atoms, self.diamond))


def dual_algebra(fr):
    """Complex algebra of a frame: atoms are points, diamond is the preimage."""
    return Algebra(fr.labels, fr.pred_mask)


def dual_frame(alg):
    """Atom structure: ``x R y`` iff atom ``x`` lies below the diamond of atom ``y``."""
    succ = [set() for _ in alg.atoms]
    for y, d in enumerate(alg.diamond):
        for x in bits(d):
            succ[x].add(y)
    return Frame(alg.atoms, tuple(succ))


def height(alg):
    """Least ``n`` with ``box^(n+1) 0 = 1``, or ``OMEGA``."""
    # box^k 0 increases with k and stabilises after at most atom_count + 1 steps
    current = alg.box(0)
    for n in range(len(alg.atoms) + 1):
        if current == alg.top:
            return n
        nxt = alg.box(current)
        if nxt == current:
            return OMEGA
        current = nxt
    return OMEGA


def is_si(alg):
    """Finite algebras are s.i. exactly when the dual frame is rooted."""
    return roots(dual_frame(alg)) != 0


def _as_table(h, src):
    if isinstance(h, dict):
        return tuple(h[a] for a in src.elements())
    return tuple(h)


def is_boolean_hom(h, src, dst):
    table = _as_table(h, src)
    if len(table) != src.size:
        return False
    if table[0] != 0 or table[src.top] != dst.top:
        return False
    images = [table[1 << i] for i in range(len(src.atoms))]
    seen = 0
    for img in images:
        if img & seen:
            return False
        seen |= img
    if seen != dst.top:
        return False
    for a in src.elements():
        if table[a] != mask_of_union(images, a):
            return False
    return True


def mask_of_union(images, a):
    out = 0
    for i in bits(a):
        out |= images[i]
    return out


def is_stable_hom(h, src, dst):
    """Boolean homomorphism with ``dia h(a) <= h(dia a)`` for every ``a``."""
    if not is_boolean_hom(h, src, dst):
        return False
    table = _as_table(h, src)
    return all(dst.dia(table[a]) & ~table[src.dia(a)] == 0 for a in src.elements())


def satisfies_cdc_alg(h, src, dst, domain):
    table = _as_table(h, src)
    return all(table[src.dia(a)] == dst.dia(table[a]) for a in domain)


def is_modal_hom(h, src, dst):
    return is_stable_hom(h, src, dst) and satisfies_cdc_alg(h, src, dst, src.elements())


def preimage_hom(point_map):
    """Dual of a point map ``X -> Y``: the map ``a -> f^{-1}[a]`` on subsets of Y."""
    n = len(point_map.codomain)
    table = []
    for a in range(1 << n):
        table.append(mask_of(x for x, y in enumerate(point_map.assign) if a >> y & 1))
    return tuple(table)


def find_stable_embedding(src, dst, domain, budget=None):
    """Stable embedding ``src -> dst`` with CDC on ``domain`` as an element table.

    Runs dually: searches a stable surjection from the atom frame of ``dst``
    onto that of ``src`` with CDC for ``domain`` (elements read as point sets)
    and returns its preimage map.
    """
    from .maps import DomainSet, find_stable_surjection, DEFAULT_SEARCH_BUDGET

    x, f = dual_frame(dst), dual_frame(src)
    dset = DomainSet(f, tuple(domain))
    witness = find_stable_surjection(x, f, dset, budget=budget or DEFAULT_SEARCH_BUDGET)
    if witness is None:
        return None
    return preimage_hom(witness)


def algebra_to_dict(alg):
    return {"atoms": sorted(alg.atoms),
            "diamond": {alg.atoms[i]: sorted(alg.atoms[j] for j in bits(d))
                        for i, d in enumerate(alg.diamond)}}


def algebra_from_dict(data):
    atoms = list(data["atoms"])
    index = {a: i for i, a in enumerate(atoms)}
    try:
        diamond = [mask_of(index[b] for b in data["diamond"].get(a, [])) for a in atoms]
    except KeyError as err:
        raise PreconditionError(f"unknown atom {err}") from None
    return Algebra(tuple(atoms), tuple(diamond))


def dumps(alg):
    return json.dumps(algebra_to_dict(alg), sort_keys=True)
