"""Finite posets and monotone maps.

A poset keeps its elements in a fixed order and stores the order as one
bitmask per element: bit ``j`` of ``up[i]`` is set iff
``elements[i] <= elements[j]``.  Every other structure in the package is
built from these rows, so subposets and commas are cheap mask operations.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Optional, Sequence

from .errors import (
    CodomainMismatch,
    CycleDetected,
    DuplicateLabel,
    JoinsUndefined,
    NotMonotone,
    UnknownLabel,
    check,
)


def bits(mask: int) -> Iterator[int]:
    """Indices of the set bits of ``mask``, lowest first."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def _least(up: Sequence[int], candidates: int) -> int:
    # index of the least element of the candidate set, or -1
    for z in bits(candidates):
        if candidates & ~up[z] == 0:
            return z
    return -1


def _greatest(down: Sequence[int], candidates: int) -> int:
    for z in bits(candidates):
        if candidates & ~down[z] == 0:
            return z
    return -1


class Poset:
    """A finite poset.  Treat instances as immutable.

    Use :func:`build_poset` to construct one from labels and relations; the
    constructor itself trusts its input.
    """

    def __init__(self, elements: Sequence[str], up: Sequence[int]):
        self.elements = tuple(elements)
        self.up = tuple(up)
        self._index = {x: i for i, x in enumerate(self.elements)}

    def __len__(self):
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)

    def __contains__(self, label):
        return label in self._index

    def __repr__(self):
        return f"Poset({list(self.elements)!r}, {self.relations()!r})"

    def __eq__(self, other):
        if not isinstance(other, Poset):
            return NotImplemented
        return self._signature == other._signature

    def __hash__(self):
        return hash(self._signature)

    @cached_property
    def _signature(self):
        return frozenset(self.elements), frozenset(self.relations())

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def full_mask(self) -> int:
        return (1 << len(self.elements)) - 1

    @cached_property
    def down(self) -> tuple[int, ...]:
        down = [0] * len(self.elements)
        for i, row in enumerate(self.up):
            for j in bits(row):
                down[j] |= 1 << i
        return tuple(down)

    @cached_property
    def label_order(self) -> tuple[int, ...]:
        """Element indices sorted lexicographically by label."""
        return tuple(sorted(range(len(self.elements)), key=lambda i: self.elements[i]))

    def index(self, label) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise UnknownLabel(f"unknown element {label!r}") from None

    def mask(self, labels: Iterable[str]) -> int:
        m = 0
        for x in labels:
            m |= 1 << self.index(x)
        return m

    def labels(self, mask: int) -> tuple[str, ...]:
        return tuple(self.elements[i] for i in bits(mask))

    def leq(self, a, b) -> bool:
        return bool(self.up[self.index(a)] >> self.index(b) & 1)

    def relations(self) -> list[tuple[str, str]]:
        """All strict pairs a < b."""
        out = []
        for i, row in enumerate(self.up):
            for j in bits(row & ~(1 << i)):
                out.append((self.elements[i], self.elements[j]))
        return out

    def cover_relations(self) -> list[tuple[str, str]]:
        out = []
        for i, row in enumerate(self.up):
            strict = row & ~(1 << i)
            for j in bits(strict):
                between = strict & self.down[j] & ~(1 << j)
                if not between:
                    out.append((self.elements[i], self.elements[j]))
        return out

    @cached_property
    def bottom_index(self) -> Optional[int]:
        full = self.full_mask
        for i, row in enumerate(self.up):
            if row == full:
                return i
        return None

    @cached_property
    def top_index(self) -> Optional[int]:
        full = self.full_mask
        for i, row in enumerate(self.down):
            if row == full:
                return i
        return None

    @property
    def bottom(self) -> Optional[str]:
        i = self.bottom_index
        return None if i is None else self.elements[i]

    @property
    def top(self) -> Optional[str]:
        i = self.top_index
        return None if i is None else self.elements[i]

    def minimal_mask(self, mask: Optional[int] = None) -> int:
        mask = self.full_mask if mask is None else mask
        out = 0
        for i in bits(mask):
            if self.down[i] & mask == 1 << i:
                out |= 1 << i
        return out

    def maximal_mask(self, mask: Optional[int] = None) -> int:
        mask = self.full_mask if mask is None else mask
        out = 0
        for i in bits(mask):
            if self.up[i] & mask == 1 << i:
                out |= 1 << i
        return out

    def join_mask(self, mask: int) -> int:
        """Index of the join of the elements in ``mask``, or -1."""
        upper = self.full_mask
        for i in bits(mask):
            upper &= self.up[i]
        return _least(self.up, upper)

    def meet_mask(self, mask: int) -> int:
        lower = self.full_mask
        for i in bits(mask):
            lower &= self.down[i]
        return _greatest(self.down, lower)

    @cached_property
    def join_table(self) -> tuple[tuple[int, ...], ...]:
        """Pairwise joins as indices, -1 where no join exists."""
        n = len(self.elements)
        table = []
        for i in range(n):
            row = []
            for j in range(n):
                row.append(_least(self.up, self.up[i] & self.up[j]))
            table.append(tuple(row))
        return tuple(table)

    @cached_property
    def has_all_joins(self) -> bool:
        # a bottom plus binary joins gives every finite join
        if self.bottom_index is None:
            return False
        return all(z >= 0 for row in self.join_table for z in row)


def build_poset(labels: Iterable[str], relations: Iterable[Sequence[str]] = ()) -> Poset:
    """The poset on ``labels`` whose order is generated by ``relations``."""
    labels = list(labels)
    index = {}
    for i, x in enumerate(labels):
        if x in index:
            raise DuplicateLabel(f"duplicate element {x!r}")
        index[x] = i
    up = [1 << i for i in range(len(labels))]
    for pair in relations:
        a, b = pair
        if a not in index:
            raise UnknownLabel(f"relation mentions unknown element {a!r}")
        if b not in index:
            raise UnknownLabel(f"relation mentions unknown element {b!r}")
        up[index[a]] |= 1 << index[b]
    up = transitive_closure(up)
    for i, row in enumerate(up):
        for j in bits(row & ~(1 << i)):
            if up[j] >> i & 1:
                raise CycleDetected(f"{labels[i]!r} and {labels[j]!r} lie below each other")
    return Poset(labels, up)


def transitive_closure(up: Sequence[int]) -> list[int]:
    up = list(up)
    for k in range(len(up)):
        bk, row_k = 1 << k, up[k]
        for i in range(len(up)):
            if up[i] & bk:
                up[i] |= row_k
    return up


def _sub_by_indices(P: Poset, idx: Sequence[int]) -> Poset:
    pos = {old: new for new, old in enumerate(idx)}
    keep = 0
    for i in idx:
        keep |= 1 << i
    up = []
    for i in idx:
        row = 0
        for j in bits(P.up[i] & keep):
            row |= 1 << pos[j]
        up.append(row)
    return Poset([P.elements[i] for i in idx], up)


def submask_poset(P: Poset, mask: int) -> Poset:
    """Full subposet on the elements in ``mask``."""
    return _sub_by_indices(P, list(bits(mask)))


def induced_subposet(P: Poset, keep: Iterable[str]) -> Poset:
    return submask_poset(P, P.mask(keep))


def without_initial(P: Poset) -> Poset:
    """P with its initial object removed (P unchanged if it has none)."""
    b = P.bottom_index
    if b is None:
        return P
    return submask_poset(P, P.full_mask & ~(1 << b))


def pair_label(a, b) -> str:
    return f"({a},{b})"


def product(P: Poset, Q: Poset) -> Poset:
    m = len(Q)
    labels, up = [], []
    for i, a in enumerate(P.elements):
        for j, b in enumerate(Q.elements):
            labels.append(pair_label(a, b))
            row = 0
            for i2 in bits(P.up[i]):
                row |= Q.up[j] << (i2 * m)
            up.append(row)
    if len(set(labels)) != len(labels):
        raise DuplicateLabel("product labels collide; rename the factors")
    return Poset(labels, up)


def chain(n: int) -> Poset:
    return build_poset([str(i) for i in range(n)], [(str(i), str(i + 1)) for i in range(n - 1)])


def antichain(n: int) -> Poset:
    return build_poset([str(i) for i in range(n)])


class MonotoneMap:
    """An order preserving map, stored as the list of image indices."""

    def __init__(self, dom: Poset, cod: Poset, assign, *, validate: bool = True):
        if isinstance(assign, Mapping):
            images = []
            for x in dom.elements:
                if x not in assign:
                    raise UnknownLabel(f"no image given for {x!r}")
                images.append(cod.index(assign[x]))
            extra = set(assign) - set(dom.elements)
            if extra:
                raise UnknownLabel(f"assignment mentions unknown element {sorted(extra)[0]!r}")
        else:
            images = list(assign)
        self.dom = dom
        self.cod = cod
        self.images = tuple(images)
        if validate:
            for i, row in enumerate(dom.up):
                target_up = cod.up[self.images[i]]
                for j in bits(row):
                    if not target_up >> self.images[j] & 1:
                        raise NotMonotone(
                            f"{dom.elements[i]!r} <= {dom.elements[j]!r} but their images are not ordered"
                        )

    def __call__(self, label):
        return self.cod.elements[self.images[self.dom.index(label)]]

    def __repr__(self):
        return f"MonotoneMap({self.assignment!r})"

    def __eq__(self, other):
        if not isinstance(other, MonotoneMap):
            return NotImplemented
        return self.dom == other.dom and self.cod == other.cod and self.assignment == other.assignment

    def __hash__(self):
        return hash((self.dom, self.cod, frozenset(self.assignment.items())))

    @cached_property
    def assignment(self) -> dict:
        return {x: self.cod.elements[c] for x, c in zip(self.dom.elements, self.images)}

    @cached_property
    def fibers(self) -> tuple[int, ...]:
        fib = [0] * len(self.cod)
        for i, c in enumerate(self.images):
            fib[c] |= 1 << i
        return tuple(fib)

    def preimage_mask(self, cod_mask: int) -> int:
        out = 0
        for c in bits(cod_mask):
            out |= self.fibers[c]
        return out

    def image_of_mask(self, dom_mask: int) -> int:
        out = 0
        for i in bits(dom_mask):
            out |= 1 << self.images[i]
        return out

    @cached_property
    def image_mask(self) -> int:
        return self.image_of_mask(self.dom.full_mask)

    @cached_property
    def is_full(self) -> bool:
        for i, c in enumerate(self.images):
            if self.preimage_mask(self.cod.up[c]) & ~self.dom.up[i]:
                return False
        return True

    @cached_property
    def is_injective(self) -> bool:
        return len(set(self.images)) == len(self.images)

    @cached_property
    def is_surjective(self) -> bool:
        return self.image_mask == self.cod.full_mask

    @property
    def is_isomorphism(self) -> bool:
        return self.is_injective and self.is_surjective and self.is_full

    @cached_property
    def preserves_initial(self) -> bool:
        b, c = self.dom.bottom_index, self.cod.bottom_index
        return b is not None and c is not None and self.images[b] == c

    def preserves_joins(self) -> bool:
        if not (self.dom.has_all_joins and self.cod.has_all_joins):
            raise JoinsUndefined("join preservation needs joins in domain and codomain")
        if not self.preserves_initial:
            return False
        dj, cj, im = self.dom.join_table, self.cod.join_table, self.images
        n = len(im)
        for i in range(n):
            for j in range(i + 1, n):
                if im[dj[i][j]] != cj[im[i]][im[j]]:
                    return False
        return True

    def restrict(self, dom_mask: int, cod_mask: int) -> "MonotoneMap":
        """Restriction to full subposets; images must land in ``cod_mask``."""
        sub_dom = submask_poset(self.dom, dom_mask)
        sub_cod = submask_poset(self.cod, cod_mask)
        pos = {old: new for new, old in enumerate(bits(cod_mask))}
        images = [pos[self.images[i]] for i in bits(dom_mask)]
        return MonotoneMap(sub_dom, sub_cod, images, validate=False)


def identity(P: Poset) -> MonotoneMap:
    return MonotoneMap(P, P, range(len(P)), validate=False)


def inclusion(sub: Poset, P: Poset) -> MonotoneMap:
    """The inclusion of a subposet sharing labels with ``P``."""
    return MonotoneMap(sub, P, {x: x for x in sub.elements})


def constant_map(P: Poset, Q: Poset, value) -> MonotoneMap:
    return MonotoneMap(P, Q, [Q.index(value)] * len(P), validate=False)


def compose(g: MonotoneMap, f: MonotoneMap) -> MonotoneMap:
    """g after f."""
    if f.cod != g.dom:
        raise CodomainMismatch("cannot compose: codomain of the first map is not the domain of the second")
    if f.cod is g.dom:
        images = [g.images[c] for c in f.images]
    else:
        images = [g.images[g.dom.index(f.cod.elements[c])] for c in f.images]
    return MonotoneMap(f.dom, g.cod, images, validate=False)


@dataclass(frozen=True)
class MapPredicates:
    monotone: bool
    full: bool
    injective: bool
    preserves_initial: bool
    preserves_joins: Optional[bool]


def map_predicates(f: MonotoneMap, joins: Optional[bool] = None) -> MapPredicates:
    """Flags of ``f``.  With ``joins=True`` a missing join raises
    JoinsUndefined; with the default it is reported as None."""
    if joins is False:
        pj = None
    elif joins is None and not (f.dom.has_all_joins and f.cod.has_all_joins):
        pj = None
    else:
        pj = f.preserves_joins()
    out = MapPredicates(True, f.is_full, f.is_injective, f.preserves_initial, pj)
    check(not out.full or out.injective, "full map that is not injective")
    return out


@dataclass(frozen=True)
class Comma:
    poset: Poset
    left: Optional[MonotoneMap]
    right: Optional[MonotoneMap]


def comma(f, g) -> Comma:
    """The comma poset of ``f`` and ``g``: pairs (i, j) with f(i) <= g(j).

    Either argument may be an element label of the common codomain, standing
    for the constant map out of a point.  The point is then dropped from
    labels and no projection is returned for it.
    """
    if isinstance(f, MonotoneMap) and isinstance(g, MonotoneMap):
        if f.cod != g.cod:
            raise CodomainMismatch("comma needs maps into the same poset")
        R = f.cod
        left = [(x, f.images[i]) for i, x in enumerate(f.dom.elements)]
        right = [(x, g.images[i]) for i, x in enumerate(g.dom.elements)]
        pairs = [(i, j) for i in range(len(left)) for j in range(len(right)) if R.up[left[i][1]] >> right[j][1] & 1]
        labels = [pair_label(left[i][0], right[j][0]) for i, j in pairs]
        up = []
        for i, j in pairs:
            row = 0
            for n, (i2, j2) in enumerate(pairs):
                if f.dom.up[i] >> i2 & 1 and g.dom.up[j] >> j2 & 1:
                    row |= 1 << n
            up.append(row)
        P = Poset(labels, up)
        proj_l = MonotoneMap(P, f.dom, [i for i, _ in pairs], validate=False)
        proj_r = MonotoneMap(P, g.dom, [j for _, j in pairs], validate=False)
        return Comma(P, proj_l, proj_r)
    if isinstance(f, MonotoneMap):
        mask = f.preimage_mask(f.cod.down[f.cod.index(g)])
        P = submask_poset(f.dom, mask)
        return Comma(P, MonotoneMap(P, f.dom, list(bits(mask)), validate=False), None)
    if isinstance(g, MonotoneMap):
        mask = g.preimage_mask(g.cod.up[g.cod.index(f)])
        P = submask_poset(g.dom, mask)
        return Comma(P, None, MonotoneMap(P, g.dom, list(bits(mask)), validate=False))
    raise CodomainMismatch("comma needs at least one map")


def down_closure_mask(P: Poset, mask: int) -> int:
    out = 0
    for i in bits(mask):
        out |= P.down[i]
    return out


def down_closure(P: Poset, labels: Iterable[str]) -> frozenset:
    return frozenset(P.labels(down_closure_mask(P, P.mask(labels))))


def image_factorization(f: MonotoneMap) -> tuple[MonotoneMap, MonotoneMap]:
    """Factor ``f`` as w . v through its image.

    The image carries the order generated by f(p) <= f(p') for p <= p'.
    That relation sits inside the codomain order, so its closure is always
    antisymmetric; the cycle check in build_poset is kept as a guard.
    """
    cod = f.cod
    idx = list(bits(f.image_mask))
    labels = [cod.elements[c] for c in idx]
    rel = [(f(a), f(b)) for a, b in f.dom.cover_relations()]
    im = build_poset(labels, rel)
    v = MonotoneMap(f.dom, im, [im.index(cod.elements[c]) for c in f.images], validate=False)
    w = MonotoneMap(im, cod, idx)
    check(compose(w, v).images == f.images, "image factorization does not recompose")
    return v, w
