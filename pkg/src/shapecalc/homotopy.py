"""Contractibility of finite posets.

The verdict is three-valued.  A poset that dismantles to a point by beat
point removals is contractible.  Otherwise the integral reduced homology of
the order complex of the remaining core is computed; a nonzero group proves
non-contractibility, and vanishing homology leaves the question open.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .errors import check
from .poset import MonotoneMap, Poset, bits, submask_poset


class Status(str, enum.Enum):
    CONTRACTIBLE = "contractible"
    NOT_CONTRACTIBLE = "not_contractible"
    UNKNOWN = "unknown"


def aggregate_status(statuses) -> Status:
    """NotContractible dominates, then Unknown."""
    statuses = list(statuses)
    if Status.NOT_CONTRACTIBLE in statuses:
        return Status.NOT_CONTRACTIBLE
    if Status.UNKNOWN in statuses:
        return Status.UNKNOWN
    return Status.CONTRACTIBLE


# -- simplicial side ---------------------------------------------------------

@dataclass(frozen=True)
class SimplicialComplex:
    vertices: tuple
    simplices: tuple  # tuples of vertex indices, grouped by dimension, each ascending

    @property
    def dimension(self) -> int:
        return max((len(s) - 1 for s in self.simplices), default=-1)

    def face_counts(self) -> list[int]:
        counts = [0] * (self.dimension + 1)
        for s in self.simplices:
            counts[len(s) - 1] += 1
        return counts

    @property
    def facets(self) -> list[tuple]:
        simplex_set = set(self.simplices)
        out = []
        for s in self.simplices:
            if not any(set(s) < set(t) for t in simplex_set if len(t) == len(s) + 1):
                out.append(s)
        return out


def _chains(P: Poset, mask: int) -> list[tuple[int, ...]]:
    out = []

    def extend(chain, last):
        out.append(chain)
        for y in bits(P.up[last] & mask & ~(1 << last)):
            extend(chain + (y,), y)

    for x in bits(mask):
        extend((x,), x)
    return out


def order_complex(P: Poset, mask: Optional[int] = None) -> SimplicialComplex:
    """Nonempty chains of P as simplices.  Vertices are P's labels."""
    mask = P.full_mask if mask is None else mask
    chains = _chains(P, mask)
    chains.sort(key=lambda c: (len(c), c))
    pos = {v: i for i, v in enumerate(bits(mask))}
    simplices = tuple(tuple(sorted(pos[v] for v in c)) for c in chains)
    return SimplicialComplex(P.labels(mask), simplices)


def smith_invariants(matrix: Sequence[Sequence[int]]) -> list[int]:
    """Nonzero invariant factors of an integer matrix, in order."""
    A = [list(r) for r in matrix]
    rows = len(A)
    cols = len(A[0]) if rows else 0
    out = []
    t = 0
    while t < min(rows, cols):
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] and (pivot is None or abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        while True:
            i, j = pivot
            A[t], A[i] = A[i], A[t]
            for r in A:
                r[t], r[j] = r[j], r[t]
            p = A[t][t]
            dirty = False
            for i in range(t + 1, rows):
                if A[i][t]:
                    q = A[i][t] // p
                    if q:
                        ri, rt = A[i], A[t]
                        for j in range(t, cols):
                            ri[j] -= q * rt[j]
                    dirty = dirty or A[i][t] != 0
            for j in range(t + 1, cols):
                if A[t][j]:
                    q = A[t][j] // p
                    if q:
                        for r in A:
                            r[j] -= q * r[t]
                    dirty = dirty or A[t][j] != 0
            if dirty:
                # a remainder smaller than the pivot is left in row or column t
                pivot = min(
                    [(i, t) for i in range(t, rows) if A[i][t]] + [(t, j) for j in range(t, cols) if A[t][j]],
                    key=lambda ij: abs(A[ij[0]][ij[1]]),
                )
                continue
            bad = next(
                ((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols) if A[i][j] % p),
                None,
            )
            if bad is None:
                break
            rt, ri = A[t], A[bad[0]]
            for j in range(t, cols):
                rt[j] += ri[j]
            pivot = (t, t)
        out.append(abs(A[t][t]))
        t += 1
    return out


@dataclass(frozen=True)
class HomologyProfile:
    """Reduced integral homology, degrees -1 .. dim."""

    ranks: dict  # degree -> free rank
    torsion: dict  # degree -> tuple of invariant factors > 1
    face_counts: tuple  # simplices per dimension 0..dim
    empty: bool

    def is_zero(self) -> bool:
        return not any(self.ranks.values()) and not any(self.torsion.values())

    def nonzero_degrees(self) -> list[int]:
        return sorted(d for d in self.ranks if self.ranks[d] or self.torsion.get(d))

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * r for d, r in self.ranks.items())

    def euler_from_faces(self) -> int:
        # reduced: the empty simplex counts in degree -1
        return -1 + sum((-1) ** d * c for d, c in enumerate(self.face_counts))


def reduced_homology(K: SimplicialComplex) -> HomologyProfile:
    by_dim: dict[int, list] = {}
    for s in K.simplices:
        by_dim.setdefault(len(s) - 1, []).append(s)
    dim = K.dimension
    counts = tuple(len(by_dim.get(d, ())) for d in range(dim + 1))
    if not K.simplices:
        return HomologyProfile({-1: 1}, {-1: ()}, (), True)
    index = {d: {s: i for i, s in enumerate(by_dim.get(d, ()))} for d in range(dim + 1)}

    def boundary(d):
        # matrix of C_d -> C_{d-1}, rows indexed by (d-1)-faces
        if d == 0:
            return [[1] * counts[0]]
        rows = [[0] * counts[d] for _ in range(counts[d - 1])]
        for j, s in enumerate(by_dim[d]):
            for k in range(len(s)):
                face = s[:k] + s[k + 1:]
                rows[index[d - 1][face]][j] += -1 if k % 2 else 1
        return rows

    invariants = {d: smith_invariants(boundary(d)) for d in range(dim + 1)}
    rank = {d: len(v) for d, v in invariants.items()}
    rank[dim + 1] = 0
    sizes = {-1: 1, **{d: counts[d] for d in range(dim + 1)}}
    ranks, torsion = {}, {}
    for d in range(-1, dim + 1):
        incoming = rank.get(d + 1, 0)
        outgoing = rank[d] if d >= 0 else 0
        ranks[d] = sizes[d] - outgoing - incoming
        torsion[d] = tuple(x for x in invariants.get(d + 1, ()) if x > 1)
    return HomologyProfile(ranks, torsion, counts, False)


# -- dismantling -------------------------------------------------------------

def _beat_point(P: Poset, x: int, mask: int) -> bool:
    above = P.up[x] & mask & ~(1 << x)
    if above:
        for y in bits(above):
            if above & ~P.up[y] == 0:
                return True
    below = P.down[x] & mask & ~(1 << x)
    if below:
        for y in bits(below):
            if below & ~P.down[y] == 0:
                return True
    return False


def dismantle_mask(P: Poset, mask: int) -> tuple[int, list[int]]:
    """Remove beat points, lowest label first, until none remain."""
    removed = []
    order = P.label_order
    while True:
        if mask & (mask - 1) == 0:
            return mask, removed
        for x in order:
            if mask >> x & 1 and _beat_point(P, x, mask):
                mask &= ~(1 << x)
                removed.append(x)
                break
        else:
            return mask, removed


def dismantle_core(P: Poset) -> tuple[Poset, list[str]]:
    core, removed = dismantle_mask(P, P.full_mask)
    return submask_poset(P, core), [P.elements[i] for i in removed]


def _components(P: Poset, mask: int) -> list[int]:
    comps = []
    left = mask
    while left:
        seed = left & -left
        comp = seed
        frontier = seed
        while frontier:
            nxt = 0
            for v in bits(frontier):
                nxt |= (P.up[v] | P.down[v]) & mask
            frontier = nxt & ~comp
            comp |= nxt
        comps.append(comp)
        left &= ~comp
    return comps


@dataclass(frozen=True)
class ContractibilityVerdict:
    status: Status
    certificate: Optional[tuple] = None  # labels removed while dismantling
    witness: Optional[dict] = None
    core: Optional[Poset] = None

    @property
    def contractible(self) -> bool:
        return self.status is Status.CONTRACTIBLE

    def to_json(self) -> dict:
        out = {"status": self.status.value}
        if self.certificate is not None:
            out["certificate"] = list(self.certificate)
        if self.witness is not None:
            out["witness"] = self.witness
        if self.core is not None:
            out["core"] = {"elements": list(self.core.elements), "relations": [list(p) for p in self.core.cover_relations()]}
        return out


def contractibility_mask(P: Poset, mask: int) -> ContractibilityVerdict:
    """Verdict for the full subposet of P on ``mask``."""
    if mask == 0:
        return ContractibilityVerdict(Status.NOT_CONTRACTIBLE, witness={"kind": "empty"})
    core, removed = dismantle_mask(P, mask)
    if core & (core - 1) == 0:
        return ContractibilityVerdict(Status.CONTRACTIBLE, certificate=tuple(P.elements[i] for i in removed))
    comps = _components(P, core)
    if len(comps) > 1:
        witness = {"kind": "disconnected", "components": [list(P.labels(c)) for c in comps]}
        return ContractibilityVerdict(Status.NOT_CONTRACTIBLE, witness=witness)
    profile = reduced_homology(order_complex(P, core))
    degrees = profile.nonzero_degrees()
    if degrees:
        d = degrees[0]
        witness = {"kind": "homology", "degree": d, "rank": profile.ranks[d], "torsion": list(profile.torsion[d])}
        return ContractibilityVerdict(Status.NOT_CONTRACTIBLE, witness=witness)
    return ContractibilityVerdict(Status.UNKNOWN, core=submask_poset(P, core))


def contractibility(P: Poset) -> ContractibilityVerdict:
    return contractibility_mask(P, P.full_mask)


def replay_certificate(P: Poset, removed: Sequence[str]) -> bool:
    """Check that removing ``removed`` in order only ever deletes beat points
    and leaves a single element."""
    mask = P.full_mask
    for x in removed:
        i = P.index(x)
        if not (mask >> i & 1) or not _beat_point(P, i, mask):
            return False
        mask &= ~(1 << i)
    return mask != 0 and mask & (mask - 1) == 0


# -- homotopy initial / terminal maps ----------------------------------------

def adjoint_partner(f: MonotoneMap, side: str) -> Optional[MonotoneMap]:
    """The left or right adjoint of ``f`` if it exists.

    Left adjoint g: g(q) <= p iff q <= f(p).  Right adjoint g: f(p) <= q iff
    p <= g(q).
    """
    P, Q = f.dom, f.cod
    images = []
    for q in range(len(Q)):
        if side == "left":
            z = _least_in(P, f.preimage_mask(Q.up[q]))
        elif side == "right":
            z = _greatest_in(P, f.preimage_mask(Q.down[q]))
        else:
            raise ValueError(f"side must be 'left' or 'right', not {side!r}")
        if z < 0:
            return None
        images.append(z)
    g = MonotoneMap(Q, P, images, validate=False)
    for p in range(len(P)):
        for q in range(len(Q)):
            if side == "left":
                lhs, rhs = P.up[images[q]] >> p & 1, Q.up[q] >> f.images[p] & 1
            else:
                lhs, rhs = Q.up[f.images[p]] >> q & 1, P.up[p] >> images[q] & 1
            check(bool(lhs) == bool(rhs), "adjoint candidate fails the Galois condition")
    return g


def _least_in(P, mask):
    for z in bits(mask):
        if mask & ~P.up[z] == 0:
            return z
    return -1


def _greatest_in(P, mask):
    for z in bits(mask):
        if mask & ~P.down[z] == 0:
            return z
    return -1


@dataclass(frozen=True)
class ExtremalVerdict:
    """Aggregate over the comma posets of a map."""

    status: Status
    side: str
    via: str  # "adjoint" or "commas"
    witness: Optional[str] = None  # first failing codomain element
    evidence: tuple = field(default=())  # (codomain label, ContractibilityVerdict)

    @property
    def holds(self) -> bool:
        return self.status is Status.CONTRACTIBLE

    def to_json(self) -> dict:
        out = {"status": self.status.value, "side": self.side, "via": self.via}
        if self.witness is not None:
            out["witness"] = self.witness
        if self.evidence:
            out["evidence"] = [{"object": j, **v.to_json()} for j, v in self.evidence]
        return out


def comma_mask(f: MonotoneMap, j: int, side: str) -> int:
    """Domain mask of j/f (side terminal) or f/j (side initial)."""
    if side == "terminal":
        return f.preimage_mask(f.cod.up[j])
    return f.preimage_mask(f.cod.down[j])


def homotopy_extremal(f: MonotoneMap, side: str, fast: bool = True) -> ExtremalVerdict:
    """Is ``f`` homotopy terminal (every j/f contractible) or homotopy initial
    (every f/j contractible)?"""
    if side not in ("initial", "terminal"):
        raise ValueError(f"side must be 'initial' or 'terminal', not {side!r}")
    if fast:
        # right adjoints are homotopy terminal, left adjoints homotopy initial
        partner = adjoint_partner(f, "left" if side == "terminal" else "right")
        if partner is not None:
            return ExtremalVerdict(Status.CONTRACTIBLE, side, "adjoint")
    evidence = []
    cache = {}
    for j in f.cod.label_order:
        m = comma_mask(f, j, side)
        if m not in cache:
            cache[m] = contractibility_mask(f.dom, m)
        v = cache[m]
        evidence.append((f.cod.elements[j], v))
        if v.status is Status.NOT_CONTRACTIBLE:
            return ExtremalVerdict(v.status, side, "commas", f.cod.elements[j], tuple(evidence))
    status = aggregate_status(v.status for _, v in evidence)
    return ExtremalVerdict(status, side, "commas", None, tuple(evidence))
