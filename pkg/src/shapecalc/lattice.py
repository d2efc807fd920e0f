"""Joins, the lattice of nonempty down-sets, and its universal property."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Optional

from .errors import MissingJoins, NoInitialObject, check
from .poset import MonotoneMap, Poset, bits, compose, down_closure_mask


def join_of(P: Poset, labels: Iterable[str]) -> Optional[str]:
    """Least upper bound of ``labels`` in P, or None.  The empty join is the bottom."""
    z = P.join_mask(P.mask(labels))
    return None if z < 0 else P.elements[z]


def has_all_joins(P: Poset) -> bool:
    return P.has_all_joins


def set_label(labels: Iterable[str]) -> str:
    return "{" + ",".join(labels) + "}"


@dataclass(frozen=True, eq=False)
class DownSetLattice:
    """Nonempty down-sets of ``base`` ordered by inclusion, with the unit x -> down(x)."""

    base: Poset
    carrier: Poset
    unit: MonotoneMap
    members: tuple  # base mask of each carrier element, in carrier order

    def __post_init__(self):
        object.__setattr__(self, "_by_mask", {m: i for i, m in enumerate(self.members)})

    def index_of_mask(self, mask: int) -> int:
        return self._by_mask[mask]

    def label_of(self, labels: Iterable[str]) -> str:
        return self.carrier.elements[self._by_mask[self.base.mask(labels)]]

    def members_of(self, label: str) -> frozenset:
        return frozenset(self.base.labels(self.members[self.carrier.index(label)]))


def _down_sets_containing_bottom(P: Poset) -> list[int]:
    start = 1 << P.bottom_index
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for m in frontier:
            for x in bits(P.full_mask & ~m):
                # x can be added iff everything strictly below it is present
                if P.down[x] & ~(1 << x) & ~m == 0:
                    m2 = m | 1 << x
                    if m2 not in seen:
                        seen.add(m2)
                        nxt.append(m2)
        frontier = nxt
    return sorted(seen, key=lambda m: (m.bit_count(), tuple(bits(m))))


def reduced_downset_lattice(P: Poset) -> DownSetLattice:
    # cached on the poset itself: posets are immutable by convention
    cached = P.__dict__.get("_downset_lattice")
    if cached is None:
        cached = _build_lattice(P)
        P.__dict__["_downset_lattice"] = cached
    return cached


def _build_lattice(P: Poset) -> DownSetLattice:
    if P.bottom_index is None:
        raise NoInitialObject("the down-set lattice needs an initial object")
    members = _down_sets_containing_bottom(P)
    labels = [set_label(P.labels(m)) for m in members]
    up = []
    for m in members:
        row = 0
        for j, m2 in enumerate(members):
            if m & ~m2 == 0:
                row |= 1 << j
        up.append(row)
    carrier = Poset(labels, up)
    pos = {m: i for i, m in enumerate(members)}
    unit = MonotoneMap(P, carrier, [pos[P.down[x]] for x in range(len(P))], validate=False)
    return DownSetLattice(P, carrier, unit, tuple(members))


def downset_map(f: MonotoneMap, src: Optional[DownSetLattice] = None, dst: Optional[DownSetLattice] = None) -> MonotoneMap:
    """The induced map of down-set lattices, M -> down-closure of f(M)."""
    src = src or reduced_downset_lattice(f.dom)
    dst = dst or reduced_downset_lattice(f.cod)
    images = [dst.index_of_mask(down_closure_mask(f.cod, f.image_of_mask(m))) for m in src.members]
    return MonotoneMap(src.carrier, dst.carrier, images, validate=False)


def fold_join(Q: Poset, indices: Iterable[int]) -> int:
    acc = Q.bottom_index
    table = Q.join_table
    for c in indices:
        acc = table[acc][c]
    return acc


def universal_extension(f: MonotoneMap, lattice: Optional[DownSetLattice] = None) -> MonotoneMap:
    """The join-preserving extension of ``f`` along the unit: M -> join of f(M)."""
    P, Q = f.dom, f.cod
    if P.bottom_index is None:
        raise NoInitialObject("domain has no initial object")
    if not Q.has_all_joins:
        raise MissingJoins("codomain lacks joins")
    if not f.preserves_initial:
        raise NoInitialObject("map does not preserve the initial object")
    L = lattice or reduced_downset_lattice(P)
    images = [fold_join(Q, (f.images[i] for i in bits(m))) for m in L.members]
    u = MonotoneMap(L.carrier, Q, images, validate=False)
    check(compose(u, L.unit).images == f.images, "universal extension does not restrict to f")
    check(u.preserves_joins(), "universal extension does not preserve joins")
    return u
