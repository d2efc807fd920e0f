"""Maps of preshapes and their direct / indirect certificates.

A map (f, fhat): sigma -> tau is a commuting square f . sigma = tau . fhat
with f^-1(ini) = {ini}.  It is indirect when every induced map of commas
sigma/s -> tau/f(s) is homotopy terminal, and direct when f is full and its
restriction to non-initial elements is homotopy initial.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Optional

from .errors import (
    CodomainMismatch,
    HypothesisViolated,
    InitialFiberViolation,
    NotCubical,
    NotFull,
    SizeLimit,
    SquareNotCommuting,
)
from .homotopy import ContractibilityVerdict, Status, aggregate_status, contractibility_mask, homotopy_extremal
from .lattice import downset_map, reduced_downset_lattice
from .poset import MonotoneMap, Poset, bits, compose, identity, inclusion, induced_subposet
from .shapes import (
    Preshape,
    cube_family,
    cube_subsets,
    e_map,
    free_shape,
    generator_image,
    image_preshape,
    is_inane,
    subset_label,
)


def _same(a: Poset, b: Poset) -> bool:
    return a is b or a == b


class PreshapeMap:
    def __init__(self, src: Preshape, dst: Preshape, f: MonotoneMap, fhat: MonotoneMap):
        if not (_same(f.dom, src.target) and _same(f.cod, dst.target)):
            raise CodomainMismatch("f must go from the source target to the destination target")
        if not (_same(fhat.dom, src.source) and _same(fhat.cod, dst.source)):
            raise CodomainMismatch("fhat must go from the source generators to the destination generators")
        left = compose(f, src.sigma)
        right = compose(dst.sigma, fhat)
        if left.assignment != right.assignment:
            bad = next(x for x in src.source.elements if left(x) != right(x))
            raise SquareNotCommuting(f"square does not commute at {bad!r}")
        T = dst.target
        if f.fibers[f.cod.index(T.bottom)] != 1 << f.dom.index(src.target.bottom):
            raise InitialFiberViolation("f sends a non-initial element to the initial object")
        self.src, self.dst, self.f, self.fhat = src, dst, f, fhat

    def __repr__(self):
        return f"PreshapeMap(f={self.f.assignment!r}, fhat={self.fhat.assignment!r})"

    def to_json(self) -> dict:
        return {"f": self.f.assignment, "fhat": self.fhat.assignment}


def validate_map(src: Preshape, dst: Preshape, f, fhat) -> PreshapeMap:
    if isinstance(f, Mapping):
        f = MonotoneMap(src.target, dst.target, f)
    if isinstance(fhat, Mapping):
        fhat = MonotoneMap(src.source, dst.source, fhat)
    return PreshapeMap(src, dst, f, fhat)


def compose_maps(second: PreshapeMap, first: PreshapeMap) -> PreshapeMap:
    return PreshapeMap(first.src, second.dst, compose(second.f, first.f), compose(second.fhat, first.fhat))


@dataclass(frozen=True)
class DirectionCertificate:
    kind: str  # "direct" or "indirect"
    status: Status
    via: str
    witness: Optional[str] = None
    evidence: tuple = ()  # (object label, ExtremalVerdict or ContractibilityVerdict)

    @property
    def holds(self) -> bool:
        return self.status is Status.CONTRACTIBLE

    def to_json(self) -> dict:
        out = {"kind": self.kind, "status": self.status.value, "via": self.via}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.evidence:
            out["evidence"] = [{"object": x, **v.to_json()} for x, v in self.evidence]
        return out


def is_indirect(m: PreshapeMap, fast: bool = True) -> DirectionCertificate:
    src, dst = m.src, m.dst
    S, T = src.target, dst.target
    evidence = []
    cache = {}
    for s in S.label_order:
        dom_mask = src.sigma.preimage_mask(S.down[s])
        cod_mask = dst.sigma.preimage_mask(T.down[m.f.images[s]])
        key = (dom_mask, cod_mask)
        if key not in cache:
            induced = m.fhat.restrict(dom_mask, cod_mask)
            cache[key] = homotopy_extremal(induced, "terminal", fast)
        v = cache[key]
        evidence.append((S.elements[s], v))
        if v.status is Status.NOT_CONTRACTIBLE:
            return DirectionCertificate("indirect", v.status, "commas", S.elements[s], tuple(evidence))
    status = aggregate_status(v.status for _, v in evidence)
    via = "adjoint" if all(v.via == "adjoint" for _, v in evidence) else "commas"
    return DirectionCertificate("indirect", status, via, None, tuple(evidence))


def is_direct(m: PreshapeMap, fast: bool = True) -> DirectionCertificate:
    f = m.f
    if not f.is_full:
        return DirectionCertificate("direct", Status.NOT_CONTRACTIBLE, "not_full")
    if fast and f.is_isomorphism:
        return DirectionCertificate("direct", Status.CONTRACTIBLE, "isomorphism")
    S, T = f.dom, f.cod
    restricted = f.restrict(S.full_mask & ~(1 << S.bottom_index), T.full_mask & ~(1 << T.bottom_index))
    v = homotopy_extremal(restricted, "initial", fast)
    return DirectionCertificate("direct", v.status, v.via, v.witness, v.evidence)


def certify(m: PreshapeMap, fast: bool = True) -> dict:
    return {"direct": is_direct(m, fast), "indirect": is_indirect(m, fast)}


def replay_certificate(m: PreshapeMap, cert: DirectionCertificate) -> bool:
    """Recompute the certificate through the commas and compare."""
    fresh = (is_direct if cert.kind == "direct" else is_indirect)(m, fast=False)
    return fresh.status is cert.status


@dataclass(frozen=True)
class GcVerdict:
    status: Status
    witness: Optional[tuple] = None  # (k, i)
    checked: int = 0
    unknown: tuple = ()


def gc_condition(f: MonotoneMap, g: MonotoneMap, h: MonotoneMap) -> GcVerdict:
    """For f: I -> L, g: J -> K, h: K -> L: every subposet
    {j : f(i) <= h(g(j)), g(j) <= k} with f(i) <= h(k) is contractible."""
    if not _same(g.cod, h.dom) or not _same(f.cod, h.cod):
        raise CodomainMismatch("expected f: I -> L, g: J -> K, h: K -> L")
    I, J, K, L = f.dom, g.dom, g.cod, f.cod
    hg = compose(h, g)
    cache: dict[int, ContractibilityVerdict] = {}
    unknown, checked = [], 0
    for k in K.label_order:
        below_k = g.preimage_mask(K.down[k])
        hk = h.images[k]
        for i in I.label_order:
            fi = f.images[i]
            if not L.up[fi] >> hk & 1:
                continue
            checked += 1
            mask = below_k & hg.preimage_mask(L.up[fi])
            v = cache.get(mask)
            if v is None:
                v = cache[mask] = contractibility_mask(J, mask)
            if v.status is Status.NOT_CONTRACTIBLE:
                return GcVerdict(v.status, (K.elements[k], I.elements[i]), checked)
            if v.status is Status.UNKNOWN:
                unknown.append((K.elements[k], I.elements[i]))
    return GcVerdict(Status.UNKNOWN if unknown else Status.CONTRACTIBLE, None, checked, tuple(unknown))


def join_with(S: Poset, t) -> MonotoneMap:
    """The map S -> S, x -> t v x."""
    row = S.join_table[S.index(t)]
    return MonotoneMap(S, S, list(row), validate=False)


# -- canonical constructions -------------------------------------------------

@dataclass(frozen=True)
class CanonicalMap:
    kind: str
    map: PreshapeMap
    guarantees: frozenset  # subset of {"direct", "indirect"}

    def certify(self) -> dict:
        return certify(self.map)


def _label_map(P: Poset, Q: Poset, fn) -> MonotoneMap:
    return MonotoneMap(P, Q, {x: fn(x) for x in P.elements})


def _cube_inclusion(n: int, m: int) -> tuple:
    if n > m:
        raise HypothesisViolated("cube inclusion needs n <= m")
    src, dst = cube_family(n)[2], cube_family(m)[2]
    pm = PreshapeMap(src, dst, _label_map(src.target, dst.target, lambda x: x),
                     _label_map(src.source, dst.source, lambda x: x))
    return (CanonicalMap("cube_inclusion", pm, frozenset({"indirect"})),)


def _image(p: Preshape) -> tuple:
    _, pm = image_preshape(p)
    guaranteed = frozenset({"direct", "indirect"}) if p.shape.is_shape else frozenset()
    return (CanonicalMap("image", pm, guaranteed),)


def default_restriction(P: Poset) -> tuple:
    """Minimal non-initial elements together with the initial one."""
    b = P.bottom_index
    gini = P.full_mask & ~(1 << b)
    return P.labels(P.minimal_mask(gini) | 1 << b)


def _free_restriction(P: Poset, keep=None) -> tuple:
    if P.bottom_index is None:
        raise HypothesisViolated("free restriction needs an initial object")
    keep = default_restriction(P) if keep is None else tuple(keep)
    mask = P.mask(keep)
    if any(P.down[i] & ~mask for i in bits(mask)):
        raise HypothesisViolated("restriction set is not downward closed")
    gini = P.full_mask & ~(1 << P.bottom_index)
    if P.minimal_mask(gini) & ~mask:
        raise HypothesisViolated("restriction set misses a minimal non-initial element")
    sub = induced_subposet(P, P.labels(mask))
    i = inclusion(sub, P)
    small, big = free_shape(sub), free_shape(P)
    f = downset_map(i, reduced_downset_lattice(sub), reduced_downset_lattice(P))
    pm = PreshapeMap(small, big, f, i)
    return (CanonicalMap("free_restriction", pm, frozenset({"direct", "indirect"})),)


def _e_to_free(p: Preshape) -> tuple:
    return (CanonicalMap("e_to_free", e_map(p), frozenset({"indirect"})),)


def _generator_image_map(p: Preshape) -> tuple:
    gi = generator_image(p)
    vp = Preshape(gi.v)
    pm = PreshapeMap(vp, p, gi.w, identity(p.source))
    guaranteed = {"indirect"}
    if p.is_full and not is_inane(p).inane:
        guaranteed.add("direct")
    return (CanonicalMap("generator_image_map", pm, frozenset(guaranteed)),)


def _cube_cover(p: Preshape, partition: Mapping) -> tuple:
    """Maps through the intermediate preshape Q' -> Q^S, where Q' is the set
    of subsets meeting at most one part of ``partition``."""
    cubed = cube_subsets(p.target)
    if cubed is None:
        raise NotCubical("target is not a cube")
    if not p.is_full:
        raise NotFull("cube cover needs a full preshape")
    ground, sets = cubed
    if set(partition) != set(ground):
        raise HypothesisViolated("partition must assign every direction")
    parts = sorted(set(partition.values()))
    n = len(parts)
    part_index = {v: i for i, v in enumerate(parts)}
    S = p.target

    def push(label):
        return subset_label({part_index[partition[x]] for x in sets[label]})

    small_labels = [x for x in S.elements if len({partition[d] for d in sets[x]}) <= 1]
    image = set(S.labels(p.sigma.image_mask))
    if not set(small_labels) <= image:
        raise HypothesisViolated("preimage of the small cube is not inside the image")
    small = induced_subposet(S, small_labels)
    mid = Preshape(inclusion(small, S))
    target = cube_family(n)[2]
    to_cube = PreshapeMap(mid, target, _label_map(S, target.target, push), _label_map(small, target.source, push))
    # sigma is full, hence injective: read the generators back off the image
    back = {p.sigma(x): x for x in p.source.elements}
    to_p = PreshapeMap(mid, p, identity(S), _label_map(small, p.source, lambda x: back[x]))
    return (
        CanonicalMap("cube_cover", to_cube, frozenset({"indirect"})),
        CanonicalMap("cube_cover", to_p, frozenset({"direct"})),
    )


_KINDS = {
    "cube_inclusion": _cube_inclusion,
    "image": _image,
    "free_restriction": _free_restriction,
    "e_to_free": _e_to_free,
    "generator_image_map": _generator_image_map,
    "cube_cover": _cube_cover,
}


def canonical_map(kind: str, *args, **kwargs) -> tuple:
    """Build one of the named constructions.  Returns a tuple of CanonicalMap
    (cube_cover yields two maps, the others one)."""
    try:
        build = _KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown construction {kind!r}; expected one of {sorted(_KINDS)}") from None
    return build(*args, **kwargs)


# -- exhaustive search -------------------------------------------------------

def _linear_extension(P: Poset) -> list[int]:
    return sorted(range(len(P)), key=lambda i: (P.down[i].bit_count(), i))


def _monotone_extensions(P: Poset, Q: Poset, fixed: dict, allowed: list) -> Iterator[list]:
    """All monotone maps P -> Q agreeing with ``fixed``; ``allowed[x]`` is a
    mask of permitted images."""
    order = _linear_extension(P)
    preds = [list(bits(P.down[x] & ~(1 << x))) for x in range(len(P))]
    images = [None] * len(P)

    def go(k):
        if k == len(order):
            yield list(images)
            return
        x = order[k]
        cand = allowed[x]
        for y in preds[x]:
            cand &= Q.up[images[y]]
        if x in fixed:
            cand &= 1 << fixed[x]
        for c in bits(cand):
            images[x] = c
            yield from go(k + 1)
        images[x] = None

    yield from go(0)


def search_maps(src: Preshape, dst: Preshape, limit: int = 10**6) -> Iterator[PreshapeMap]:
    """Every map of preshapes src -> dst.  Raises SizeLimit after ``limit``
    candidate squares."""
    G, S, H, T = src.source, src.target, dst.source, dst.target
    s_ini, t_ini = S.bottom_index, T.bottom_index
    allowed_f = [(1 << t_ini) if x == s_ini else T.full_mask & ~(1 << t_ini) for x in range(len(S))]
    seen = 0
    for fhat in _monotone_extensions(G, H, {}, [H.full_mask] * len(G)):
        seen += 1
        if seen > limit:
            raise SizeLimit(f"more than {limit} candidate squares")
        fixed, ok = {}, True
        for g, h in enumerate(fhat):
            s, t = src.sigma.images[g], dst.sigma.images[h]
            if fixed.setdefault(s, t) != t or not allowed_f[s] >> t & 1:
                ok = False
                break
        if not ok:
            continue
        for f in _monotone_extensions(S, T, fixed, allowed_f):
            seen += 1
            if seen > limit:
                raise SizeLimit(f"more than {limit} candidate squares")
            yield PreshapeMap(src, dst, MonotoneMap(S, T, f, validate=False), MonotoneMap(G, H, fhat, validate=False))
