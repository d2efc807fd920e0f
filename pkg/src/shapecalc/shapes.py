"""Preshapes, the shape condition, and the constructions built on them.

A preshape is a monotone map sigma: G -> S into a poset with an initial
object, whose fibre over that object is nonempty.  It is a shape when S has
all joins and, for all s, t in S and k in G with sigma(k) <= t v s, the
subposet

    G(s, t, k) = {g in G : sigma(g) <= s and sigma(k) <= t v sigma(g)}

is contractible.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional

from .errors import (
    EmptyFiberOverInitial,
    HypothesisViolated,
    InaneShape,
    MissingJoins,
    NoInitialObject,
    NotCubical,
    NotFull,
    NotReduced,
    NotShape,
    NotSurjective,
    SizeLimit,
    check,
)
from .homotopy import ContractibilityVerdict, Status, contractibility_mask
from .lattice import reduced_downset_lattice, universal_extension
from .poset import (
    MonotoneMap,
    Poset,
    bits,
    compose,
    down_closure_mask,
    identity,
    image_factorization,
)

CUBE_LIMIT = 6


class Preshape:
    def __init__(self, sigma: MonotoneMap):
        S = sigma.cod
        if S.bottom_index is None:
            raise NoInitialObject("target has no initial object")
        if not sigma.fibers[S.bottom_index]:
            raise EmptyFiberOverInitial("nothing maps to the initial object of the target")
        self.sigma = sigma

    def __repr__(self):
        return f"Preshape({self.sigma.assignment!r})"

    def __call__(self, label):
        return self.sigma(label)

    @property
    def source(self) -> Poset:
        return self.sigma.dom

    @property
    def target(self) -> Poset:
        return self.sigma.cod

    @property
    def ini(self) -> str:
        return self.target.bottom

    @property
    def is_full(self) -> bool:
        return self.sigma.is_full

    @property
    def is_reduced(self) -> bool:
        # sigma of an initial object is automatically the initial object
        return self.source.bottom_index is not None

    @property
    def is_finite(self) -> bool:
        return True

    def flags(self) -> dict:
        return {"finite": True, "full": self.is_full, "reduced": self.is_reduced}

    @cached_property
    def shape(self) -> "ShapeVerdict":
        return is_shape(self)


def validate_preshape(f: MonotoneMap) -> Preshape:
    p = Preshape(f)
    check(not p.is_full or p.is_reduced, "full preshape that is not reduced")
    return p


# -- cubes -------------------------------------------------------------------

def subset_label(s: Iterable[int]) -> str:
    s = sorted(s)
    return "{" + ",".join(str(x) for x in s) + "}" if s else "∅"


def parse_subset_label(label) -> Optional[frozenset]:
    if label == "∅":
        return frozenset()
    if not (isinstance(label, str) and label.startswith("{") and label.endswith("}")):
        return None
    body = label[1:-1]
    try:
        items = [int(x) for x in body.split(",")] if body else []
    except ValueError:
        return None
    if not items or sorted(set(items)) != items or subset_label(items) != label:
        return None
    return frozenset(items)


def _cube_on(ground: tuple, max_size: Optional[int] = None) -> Poset:
    k = len(ground)
    if k > CUBE_LIMIT:
        raise SizeLimit(f"cubes are limited to {CUBE_LIMIT} directions")
    masks = [m for m in range(1 << k) if max_size is None or m.bit_count() <= max_size]
    masks.sort(key=lambda m: (m.bit_count(), [i for i in range(k) if m >> i & 1]))
    labels = [subset_label(ground[i] for i in range(k) if m >> i & 1) for m in masks]
    up = []
    for m in masks:
        row = 0
        for j, m2 in enumerate(masks):
            if m & ~m2 == 0:
                row |= 1 << j
        up.append(row)
    return Poset(labels, up)


def cube(ground) -> Poset:
    """All subsets of ``ground`` (an int, meaning range(n), or ints) under inclusion."""
    ground = tuple(range(ground)) if isinstance(ground, int) else tuple(sorted(ground))
    return _cube_on(ground)


def cube_at_most_one(ground) -> Poset:
    ground = tuple(range(ground)) if isinstance(ground, int) else tuple(sorted(ground))
    return _cube_on(ground, 1)


def cube_family(n: int) -> tuple[Poset, Poset, Preshape]:
    if n < 0 or n > CUBE_LIMIT:
        raise SizeLimit(f"cube dimension must lie in 0..{CUBE_LIMIT}")
    small, big = cube_at_most_one(n), cube(n)
    return small, big, Preshape(MonotoneMap(small, big, {x: x for x in small.elements}))


def cube_inclusion_preshape(n: int) -> Preshape:
    return cube_family(n)[2]


def cube_subsets(P: Poset) -> Optional[tuple[tuple, dict]]:
    """Recognise P as the subset lattice of a finite set.

    Returns ``(ground, label -> frozenset)`` or None.  Subset-style labels
    are used when present; otherwise atoms are numbered 0.. in element order.
    """
    parsed = {x: parse_subset_label(x) for x in P.elements}
    if all(v is not None for v in parsed.values()):
        ground = tuple(sorted(set().union(*parsed.values())))
        if len(ground) <= CUBE_LIMIT and len(P) == 1 << len(ground) and len(set(parsed.values())) == len(P):
            if all(P.leq(a, b) == (parsed[a] <= parsed[b]) for a in P.elements for b in P.elements):
                return ground, parsed
    b = P.bottom_index
    if b is None:
        return None
    atoms = list(bits(P.minimal_mask(P.full_mask & ~(1 << b))))
    if len(atoms) > CUBE_LIMIT or len(P) != 1 << len(atoms):
        return None
    sets = {}
    for i, x in enumerate(P.elements):
        sets[x] = frozenset(k for k, a in enumerate(atoms) if P.up[a] >> i & 1)
    if len(set(sets.values())) != len(P):
        return None
    if not all(P.leq(a, c) == (sets[a] <= sets[c]) for a in P.elements for c in P.elements):
        return None
    return tuple(range(len(atoms))), sets


# -- the shape condition -----------------------------------------------------

@dataclass(frozen=True)
class ShapeWitness:
    s: str
    t: str
    k: str
    members: tuple
    verdict: ContractibilityVerdict

    def to_json(self) -> dict:
        return {"s": self.s, "t": self.t, "k": self.k, "subposet": list(self.members), "verdict": self.verdict.to_json()}


@dataclass(frozen=True)
class ShapeVerdict:
    status: Status
    reason: Optional[str] = None
    witness: Optional[ShapeWitness] = None
    unknown: tuple = ()
    checked: int = 0

    @property
    def is_shape(self) -> Optional[bool]:
        if self.status is Status.CONTRACTIBLE:
            return True
        if self.status is Status.NOT_CONTRACTIBLE:
            return False
        return None

    @property
    def answer(self) -> str:
        return {True: "yes", False: "no", None: "unknown"}[self.is_shape]

    def to_json(self) -> dict:
        out = {"shape": self.answer, "triples_checked": self.checked}
        if self.reason:
            out["reason"] = self.reason
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        if self.unknown:
            out["unknown"] = [w.to_json() for w in self.unknown]
        return out


def _triple_condition(S: Poset, t: int, ck: int) -> int:
    # elements c of S with sigma(k) <= t v c, as a mask on S
    row = S.join_table[t]
    out = 0
    for c in range(len(S)):
        if S.up[ck] >> row[c] & 1:
            out |= 1 << c
    return out


def _witness_mask(p: Preshape, s: int, t: int, k: int) -> int:
    S, sig = p.target, p.sigma
    return sig.preimage_mask(S.down[s]) & sig.preimage_mask(_triple_condition(S, t, sig.images[k]))


def shape_witness(p: Preshape, s, t, k) -> ShapeWitness:
    S, G = p.target, p.source
    if not S.has_all_joins:
        raise MissingJoins("target lacks joins")
    si, ti, ki = S.index(s), S.index(t), G.index(k)
    if not S.up[p.sigma.images[ki]] >> S.join_table[ti][si] & 1:
        raise HypothesisViolated(f"sigma({k}) is not below {t} v {s}")
    mask = _witness_mask(p, si, ti, ki)
    return ShapeWitness(s, t, k, G.labels(mask), contractibility_mask(G, mask))


def is_shape(p: Preshape) -> ShapeVerdict:
    """Check every admissible triple, in lexicographic label order."""
    S, G, sig = p.target, p.source, p.sigma
    if not S.has_all_joins:
        return ShapeVerdict(Status.NOT_CONTRACTIBLE, reason="missing_joins")
    join = S.join_table
    cache: dict[int, ContractibilityVerdict] = {}
    conditions: dict[tuple, int] = {}
    unknown = []
    checked = 0
    for s in S.label_order:
        below = sig.preimage_mask(S.down[s])
        for t in S.label_order:
            ts = join[t][s]
            for k in G.label_order:
                ck = sig.images[k]
                if not S.up[ck] >> ts & 1:
                    continue
                checked += 1
                key = (t, ck)
                if key not in conditions:
                    conditions[key] = sig.preimage_mask(_triple_condition(S, t, ck))
                mask = below & conditions[key]
                v = cache.get(mask)
                if v is None:
                    v = cache[mask] = contractibility_mask(G, mask)
                if v.status is Status.CONTRACTIBLE:
                    continue
                w = ShapeWitness(S.elements[s], S.elements[t], G.elements[k], G.labels(mask), v)
                if v.status is Status.NOT_CONTRACTIBLE:
                    return ShapeVerdict(Status.NOT_CONTRACTIBLE, witness=w, checked=checked)
                unknown.append(w)
    status = Status.UNKNOWN if unknown else Status.CONTRACTIBLE
    return ShapeVerdict(status, unknown=tuple(unknown), checked=checked)


def _require_full(p: Preshape):
    if not p.is_full:
        raise NotFull("preshape is not full")


def _require_joins(p: Preshape):
    if not p.target.has_all_joins:
        raise MissingJoins("target lacks joins")


def easy_shape_check(p: Preshape) -> bool:
    """The sufficient criterion for full preshapes: sigma(k) <= a v b forces
    sigma(k) <= a or sigma(k) <= b."""
    _require_full(p)
    _require_joins(p)
    S = p.target
    join = S.join_table
    imgs = set(p.sigma.images)
    ok = True
    for a in range(len(S)):
        for b in range(len(S)):
            ab = join[a][b]
            for c in imgs:
                if S.up[c] >> ab & 1 and not (S.up[c] >> a & 1 or S.up[c] >> b & 1):
                    ok = False
                    break
            if not ok:
                break
        if not ok:
            break
    if ok:
        check(p.shape.is_shape is True, "easy criterion holds but the shape check disagrees")
    return ok


def image_is_down_closed(p: Preshape) -> bool:
    img = p.sigma.image_mask
    return down_closure_mask(p.target, img) == img


def cubical_shape_check(p: Preshape) -> bool:
    if cube_subsets(p.target) is None:
        raise NotCubical("target is not a cube")
    _require_full(p)
    ok = image_is_down_closed(p)
    decided = p.shape.is_shape
    if decided is not None:
        check(decided == ok, "cube criterion disagrees with the shape check")
    return ok


# -- constructions -----------------------------------------------------------

def image_preshape(p: Preshape):
    """The image preshape and the canonical map (id, v) from p to it."""
    from .shape_maps import PreshapeMap

    v, w = image_factorization(p.sigma)
    ip = Preshape(w)
    m = PreshapeMap(p, ip, identity(p.target), v)
    if p.shape.is_shape:
        check(ip.is_full, "image of a finite shape is not full")
        check(ip.shape.is_shape is True, "image of a finite shape is not a shape")
    return ip, m


def free_shape(P: Poset) -> Preshape:
    """The unit P -> D*(P)."""
    L = reduced_downset_lattice(P)
    p = Preshape(L.unit)
    check(p.is_full, "free shape is not full")
    check(easy_shape_check(p), "free shape fails the easy criterion")
    return p


@dataclass(frozen=True)
class GeneratorImage:
    u: MonotoneMap  # D*(G) -> S
    v: MonotoneMap  # G -> im u
    w: MonotoneMap  # im u -> S
    slices: tuple  # (s, members of I_s, terminal element), labels

    @property
    def image(self) -> Poset:
        return self.w.dom

    def slice(self, s) -> tuple:
        for row in self.slices:
            if row[0] == s:
                return row[1]
        raise KeyError(s)


def _require_reduced(p: Preshape):
    if not p.is_reduced:
        raise NotReduced("source has no initial object")


def generator_image(p: Preshape) -> GeneratorImage:
    _require_reduced(p)
    _require_joins(p)
    G, S = p.source, p.target
    L = reduced_downset_lattice(G)
    u = universal_extension(p.sigma, L)
    v0, w = image_factorization(u)
    v = compose(v0, L.unit)
    im = w.dom
    check(compose(w, v).images == p.sigma.images, "w . v differs from sigma")
    check(w.is_full, "w is not full")
    check(im.has_all_joins and w.preserves_joins(), "w does not preserve joins")
    slices = []
    for s in range(len(S)):
        members = w.preimage_mask(S.down[s])
        top = im.join_mask(members)
        check(top >= 0 and members >> top & 1 and members & ~im.down[top] == 0,
              f"slice over {S.elements[s]} has no terminal object")
        slices.append((S.elements[s], im.labels(members), im.elements[top]))
    return GeneratorImage(u, v, w, tuple(slices))


def v_preshape(p: Preshape) -> Preshape:
    return Preshape(generator_image(p).v)


@dataclass(frozen=True)
class InaneVerdict:
    inane: bool
    witness: Optional[str] = None


def is_inane(p: Preshape) -> InaneVerdict:
    """Inane iff some non-initial s has only the initial object in its slice."""
    _require_reduced(p)
    _require_joins(p)
    S, sig = p.target, p.sigma
    ini = S.bottom_index
    fiber = sig.fibers[ini]
    # the slice over s is {ini} iff every generator below s lies over ini
    for s in S.label_order:
        if s != ini and sig.preimage_mask(S.down[s]) == fiber:
            return InaneVerdict(True, S.elements[s])
    return InaneVerdict(False)


def e_assignment(p: Preshape) -> MonotoneMap:
    """e: S -> D*(G), s -> {g : sigma(g) <= s}."""
    _require_full(p)
    G, S = p.source, p.target
    L = reduced_downset_lattice(G)
    images = [L.index_of_mask(p.sigma.preimage_mask(S.down[s])) for s in range(len(S))]
    return MonotoneMap(S, L.carrier, images)


def e_map_valid(p: Preshape) -> bool:
    """Does e send only the initial object to the bottom down-set?"""
    e = e_assignment(p)
    return e.fibers[e.cod.bottom_index] == 1 << p.target.bottom_index


def e_map(p: Preshape):
    from .shape_maps import PreshapeMap

    e = e_assignment(p)
    if e.fibers[e.cod.bottom_index] != 1 << p.target.bottom_index:
        raise InaneShape("e sends a non-initial element to the bottom; the shape is inane")
    return PreshapeMap(p, free_shape(p.source), e, identity(p.source))


def retract_check(p: Preshape) -> bool:
    """u . e = id on the target."""
    _require_full(p)
    _require_joins(p)
    u = universal_extension(p.sigma)
    if not u.is_surjective:
        raise NotSurjective("the universal extension is not surjective")
    e = e_assignment(p)
    return compose(u, e).images == tuple(range(len(p.target)))


# -- covers ------------------------------------------------------------------

def _min_cover(universe, family):
    elems = sorted(set(universe), key=lambda x: (str(type(x)), x))
    if not elems:
        return 0, []
    pos = {x: i for i, x in enumerate(elems)}
    full = (1 << len(elems)) - 1
    masks = {}
    for m in family:
        mask = 0
        for x in m:
            if x in pos:
                mask |= 1 << pos[x]
        if mask:
            masks.setdefault(mask, m)
    union = 0
    for m in masks:
        union |= m
    if union != full:
        return math.inf, None
    # sets contained in another set never help a minimum cover
    kept = [m for m in masks if not any(m != m2 and m & ~m2 == 0 for m2 in masks)]
    containing = [sorted((m for m in kept if m >> i & 1), key=lambda m: (-m.bit_count(), m))
                  for i in range(len(elems))]
    best = [len(elems) + 1, None]

    def go(covered, chosen):
        if covered == full:
            if len(chosen) < best[0]:
                best[0], best[1] = len(chosen), list(chosen)
            return
        if len(chosen) + 1 >= best[0]:
            return
        rest = ~covered & full
        low = (rest & -rest).bit_length() - 1
        for m in containing[low]:
            chosen.append(m)
            go(covered | m, chosen)
            chosen.pop()

    go(0, [])
    return best[0], [masks[m] for m in best[1]]


def min_cover(universe: Iterable, family: Iterable[Iterable]):
    """Fewest members of ``family`` covering ``universe``; math.inf if none.

    Branch and bound on the lowest uncovered element.
    """
    return _min_cover(universe, family)[0]


def cover_sets(universe: Iterable, family: Iterable[Iterable]) -> Optional[list]:
    """A minimum cover itself, as members of ``family``; None if there is none."""
    return _min_cover(universe, family)[1]


def n_sigma(p: Preshape):
    """mc(S, image of sigma) for a shape into a cube."""
    cubed = cube_subsets(p.target)
    if cubed is None:
        raise NotCubical("target is not a cube")
    verdict = p.shape.is_shape
    if verdict is not True:
        raise NotShape("n_sigma is only defined for shapes" if verdict is False else "shape verdict is unknown")
    ground, sets = cubed
    family = [sets[p.target.elements[c]] for c in bits(p.sigma.image_mask)]
    return min_cover(ground, family)


def format_count(x) -> object:
    return "infinity" if x == math.inf else x
