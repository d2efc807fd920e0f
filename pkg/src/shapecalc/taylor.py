"""Enumeration of small posets and shapes, and the certified Taylor graph.

An edge A -> B of the graph records a proof that A-excisive functors are
B-excisive: an indirect map A -> B into a shape, or a direct map B -> A into
a shape or full preshape.  Cubical shapes are additionally linked to the
cube of their excision degree; those links are marked semantic because no
map certificate stands behind the reverse direction.
"""
from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import networkx as nx

from .errors import ConsistencyError, InconsistentClass, ShapecalcError, SizeLimit
from .iso import canonical_form, canonical_key, canonical_poset
from .lattice import _down_sets_containing_bottom, reduced_downset_lattice
from .poset import MonotoneMap, Poset, bits, compose, inclusion, submask_poset
from .shape_maps import (
    CanonicalMap,
    PreshapeMap,
    canonical_map,
    is_direct,
    is_indirect,
    replay_certificate,
    search_maps,
)
from .shapes import (
    Preshape,
    cover_sets,
    cube,
    cube_family,
    cube_subsets,
    format_count,
    free_shape,
    image_is_down_closed,
    image_preshape,
    is_inane,
    n_sigma,
)

log = logging.getLogger(__name__)

POSET_LIMIT = 6
GEN_LIMIT = 4
CUBE_BOUND_LIMIT = 4


# -- posets ------------------------------------------------------------------

def _with_new_maximum(P: Poset, below: int) -> Poset:
    n = len(P)
    up = [row | (1 << n) if below >> i & 1 else row for i, row in enumerate(P.up)]
    up.append(1 << n)
    return Poset([str(i) for i in range(n + 1)], up)


def _all_down_sets(P: Poset) -> list[int]:
    out = {0}
    frontier = [0]
    while frontier:
        nxt = []
        for m in frontier:
            for x in bits(P.full_mask & ~m):
                if P.down[x] & ~(1 << x) & ~m == 0 and m | 1 << x not in out:
                    out.add(m | 1 << x)
                    nxt.append(m | 1 << x)
        frontier = nxt
    return sorted(out)


_POSET_CACHE: dict[int, list] = {0: [Poset([], [])]}


def enumerate_posets(n: int) -> list[Poset]:
    """One poset per isomorphism class on exactly ``n`` points, canonically
    labelled "0".."n-1".

    Every poset arises from a smaller one by adding a maximal element above
    some down-set, so classes are grown one point at a time.
    """
    if n < 0 or n > POSET_LIMIT:
        raise SizeLimit(f"poset enumeration is limited to {POSET_LIMIT} points")
    if n not in _POSET_CACHE:
        seen = {}
        for P in enumerate_posets(n - 1):
            for D in _all_down_sets(P):
                Q = _with_new_maximum(P, D)
                key = canonical_key(Q)
                if key not in seen:
                    seen[key] = canonical_poset(Q)
        _POSET_CACHE[n] = [seen[k] for k in sorted(seen)]
    return list(_POSET_CACHE[n])


def posets_up_to(max_n: int) -> list[Poset]:
    return [P for n in range(max_n + 1) for P in enumerate_posets(n)]


def add_bottom(P: Poset, label: str = "⊥") -> Poset:
    n = len(P)
    up = list(P.up) + [(1 << (n + 1)) - 1]
    # keep the new bottom first
    return _reorder(Poset(list(P.elements) + [label], up), [n] + list(range(n)))


def _reorder(P: Poset, order: list[int]) -> Poset:
    pos = {old: new for new, old in enumerate(order)}
    up = []
    for old in order:
        row = 0
        for j in bits(P.up[old]):
            row |= 1 << pos[j]
        up.append(row)
    return Poset([P.elements[i] for i in order], up)


def generator_posets(gen_bound: int) -> list[Poset]:
    """Posets with an initial object and at most ``gen_bound`` other elements."""
    if gen_bound > GEN_LIMIT:
        raise SizeLimit(f"gen_bound is limited to {GEN_LIMIT}")
    return [add_bottom(P) for k in range(gen_bound + 1) for P in enumerate_posets(k)]


def lattices_up_to(size: int) -> list[Poset]:
    """Posets with all joins on at most ``size`` points, up to isomorphism."""
    return [P for n in range(1, size + 1) for P in enumerate_posets(n) if P.has_all_joins]


# -- preshape keys -----------------------------------------------------------

def collage(p: Preshape) -> tuple[Poset, list[str]]:
    """Generators and targets in one poset, g <= s iff sigma(g) <= s.

    Two preshapes are isomorphic exactly when their coloured collages are.
    """
    G, S = p.source, p.target
    g = len(G)
    up = [G.up[i] | S.up[p.sigma.images[i]] << g for i in range(g)]
    up += [S.up[j] << g for j in range(len(S))]
    labels = [f"g:{x}" for x in G.elements] + [f"s:{x}" for x in S.elements]
    return Poset(labels, up), ["g"] * g + ["s"] * len(S)


def preshape_key(p: Preshape):
    P, colors = collage(p)
    return canonical_form(P, colors)[0]


# -- shape inventory ---------------------------------------------------------

@dataclass
class InventoryEntry:
    preshape: Preshape
    provenance: list
    key: tuple


@dataclass
class ShapeInventory:
    gen_bound: int
    target_bound: int
    cube_bound: int
    generators: list = field(default_factory=list)
    shapes: list = field(default_factory=list)
    unknown: list = field(default_factory=list)  # (provenance, preshape) with Unknown verdicts
    _index: dict = field(default_factory=dict, repr=False)

    def add(self, p: Preshape, provenance: str) -> bool:
        key = preshape_key(p)
        if key in self._index:
            entry = self._index[key]
            if provenance not in entry.provenance:
                entry.provenance.append(provenance)
            return False
        verdict = p.shape.is_shape
        if verdict is None:
            self.unknown.append((provenance, p))
            return False
        if not verdict:
            return False
        entry = InventoryEntry(p, [provenance], key)
        self._index[key] = entry
        self.shapes.append(entry)
        return True

    def __len__(self):
        return len(self.shapes)

    def __iter__(self):
        return iter(self.shapes)

    def by_provenance(self, provenance: str) -> list:
        return [e for e in self.shapes if provenance in e.provenance]


def _corestrict(p: Preshape, keep_mask: int) -> Preshape:
    S = submask_poset(p.target, keep_mask)
    return Preshape(MonotoneMap(p.source, S, {x: p(x) for x in p.source.elements}))


def retract_targets(G: Poset, target_bound: int) -> list[Preshape]:
    """Full shapes G -> S whose universal extension is onto.

    Such S sit inside D*(G) as intersection-closed families that contain
    every principal down-set (and so the top); sigma is the unit.
    """
    L = reduced_downset_lattice(G)
    required = 0
    for x in range(len(G)):
        required |= 1 << L.index_of_mask(G.down[x])
    required |= 1 << L.index_of_mask(G.full_mask)
    free = [i for i in range(len(L.carrier)) if not required >> i & 1]
    out = []
    for choice in range(1 << len(free)):
        keep = required
        for k, i in enumerate(free):
            if choice >> k & 1:
                keep |= 1 << i
        if keep.bit_count() > target_bound:
            continue
        members = [L.members[i] for i in bits(keep)]
        member_set = set(members)
        if any(a & b not in member_set for a in members for b in members):
            continue
        out.append(_corestrict(Preshape(L.unit), keep))
    return out


def cubical_shapes(n: int) -> list[Preshape]:
    """Inclusions of every down-closed family containing the empty set into Q^n."""
    Q = cube(n)
    out = []
    for m in _down_sets_containing_bottom(Q):
        sub = submask_poset(Q, m)
        out.append(Preshape(inclusion(sub, Q)))
    return out


def _surjections(P: Poset, Q: Poset):
    from .shape_maps import _monotone_extensions

    for images in _monotone_extensions(P, Q, {}, [Q.full_mask] * len(P)):
        if len(set(images)) == len(Q):
            yield images


def enumerate_shapes(gen_bound: int, target_bound: int, cube_bound: int = 3,
                     image_bound: Optional[int] = None) -> ShapeInventory:
    """Small shapes up to isomorphism.

    Sources: free shapes on every generator poset, full shapes onto retracts
    of the down-set lattice, down-closed families in cubes, and non-full
    shapes obtained by precomposing a full one with a surjection that
    collapses one pair of generators (generator posets up to ``image_bound``
    points, default gen_bound + 1).
    """
    if cube_bound > CUBE_BOUND_LIMIT:
        raise SizeLimit(f"cube_bound is limited to {CUBE_BOUND_LIMIT}")
    inv = ShapeInventory(gen_bound, target_bound, cube_bound)
    inv.generators = generator_posets(gen_bound)
    for G in inv.generators:
        inv.add(free_shape(G), "free")
        for p in retract_targets(G, target_bound):
            inv.add(p, "retract")
    for n in range(cube_bound + 1):
        for p in cubical_shapes(n):
            inv.add(p, "cubical")
    image_bound = gen_bound + 1 if image_bound is None else image_bound
    full = [e.preshape for e in inv.shapes if len(e.preshape.source) < image_bound]
    for tau in full:
        k = len(tau.source) + 1
        for P in enumerate_posets(k):
            for images in _surjections(P, tau.source):
                q = MonotoneMap(P, tau.source, images, validate=False)
                inv.add(Preshape(compose(tau.sigma, q)), "image-of")
    return inv


def enumerate_reduced_preshapes(gen_bound: int, lattice_bound: int) -> list[Preshape]:
    """Every reduced preshape from a generator poset into a small lattice."""
    from .shape_maps import _monotone_extensions

    out = []
    for G in generator_posets(gen_bound):
        for S in lattices_up_to(lattice_bound):
            fixed = {G.bottom_index: S.bottom_index}
            for images in _monotone_extensions(G, S, fixed, [S.full_mask] * len(G)):
                out.append(Preshape(MonotoneMap(G, S, images, validate=False)))
    return out


# -- the graph ---------------------------------------------------------------

@dataclass
class Node:
    key: tuple
    preshape: Preshape
    provenance: list
    name: str = ""
    full: bool = False
    inane: bool = False
    n_sigma: object = None  # int, math.inf, or None when the target is no cube
    cube_dim: Optional[int] = None  # n when the node is the cube shape of dimension n

    @property
    def label(self) -> str:
        n = "-" if self.n_sigma is None else format_count(self.n_sigma)
        return f"{self.name}: {len(self.preshape.source)}→{len(self.preshape.target)} [n={n}]"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "generators": len(self.preshape.source),
            "targets": len(self.preshape.target),
            "provenance": list(self.provenance),
            "full": self.full,
            "inane": self.inane,
            "n_sigma": None if self.n_sigma is None else format_count(self.n_sigma),
            "cube": self.cube_dim,
        }


@dataclass
class Edge:
    source: tuple  # node keys; source-excisive implies target-excisive
    target: tuple
    certified: bool
    via: str  # "indirect", "direct", or "semantic"
    construction: str
    gating: str
    map: Optional[PreshapeMap] = None
    certificate: object = None

    def replay(self) -> bool:
        if not self.certified:
            return True
        return replay_certificate(self.map, self.certificate)


class TaylorGraph:
    def __init__(self):
        self.nodes: dict = {}
        self.edges: list = []
        self._edge_index: dict = {}
        self.search_log: dict = {"pairs_searched": 0, "pairs_skipped": 0, "maps_checked": 0}

    def node_for(self, p: Preshape, provenance: str, key=None) -> Node:
        key = preshape_key(p) if key is None else key
        node = self.nodes.get(key)
        if node is None:
            node = Node(key, p, [provenance])
            self.nodes[key] = node
            _fill_flags(node)
        elif provenance not in node.provenance:
            node.provenance.append(provenance)
        return node

    def add_edge(self, edge: Edge) -> bool:
        if edge.source == edge.target:
            return False
        k = (edge.source, edge.target)
        old = self._edge_index.get(k)
        if old is not None and (old.certified or not edge.certified):
            return False
        if old is not None:
            self.edges.remove(old)
        self._edge_index[k] = edge
        self.edges.append(edge)
        return True

    @property
    def active(self) -> list:
        return [k for k in sorted(self.nodes) if not self.nodes[k].inane]

    def digraph(self, semantic: bool = True) -> nx.DiGraph:
        D = nx.DiGraph()
        D.add_nodes_from(self.active)
        for e in self.edges:
            if e.certified or semantic:
                D.add_edge(e.source, e.target)
        return D

    def components(self, semantic: bool = True) -> list:
        comps = [sorted(c) for c in nx.strongly_connected_components(self.digraph(semantic))]
        return sorted(comps, key=lambda c: c[0])

    def cube_node(self, n: int) -> Optional[Node]:
        for node in self.nodes.values():
            if node.cube_dim == n:
                return node
        return None

    def has_certified_path(self, a, b) -> bool:
        return nx.has_path(self.digraph(semantic=False), a, b)


def _fill_flags(node: Node):
    p = node.preshape
    node.full = p.is_full
    full_version = p if p.is_full else image_preshape(p)[0]
    node.inane = is_inane(full_version).inane
    cubed = cube_subsets(p.target)
    if cubed is not None:
        node.n_sigma = n_sigma(p)
        ground, sets = cubed
        image = {sets[x] for x in p.target.labels(p.sigma.image_mask)}
        if p.is_full and len(image) == len(ground) + 1 and all(len(a) <= 1 for a in image):
            node.cube_dim = len(ground)


def cover_partition(p: Preshape) -> Optional[dict]:
    """A partition of the cube directions from a minimum cover by members of
    the image (later members lose the directions already covered)."""
    ground, sets = cube_subsets(p.target)
    family = [sets[x] for x in p.target.labels(p.sigma.image_mask)]
    cover = cover_sets(ground, family)
    if cover is None:
        return None
    partition = {}
    for i, part in enumerate(sorted(cover, key=lambda s: sorted(s))):
        for d in part:
            partition.setdefault(d, i)
    return partition


def _constructions(node: Node) -> list:
    p = node.preshape
    out = []

    def attempt(kind, *args):
        try:
            out.extend(canonical_map(kind, *args))
        except ShapecalcError as exc:
            log.debug("construction %s skipped for %s: %s", kind, node.name, exc)

    if not p.is_full:
        attempt("image", p)
    if p.is_reduced:
        attempt("generator_image_map", p)
    if p.is_full and not node.inane:
        attempt("e_to_free", p)
        attempt("free_restriction", p.source)
        if node.n_sigma is not None and node.n_sigma != math.inf and image_is_down_closed(p):
            partition = cover_partition(p)
            if partition is not None:
                attempt("cube_cover", p, partition)
    return out


def _record(graph: TaylorGraph, cm: CanonicalMap, work: list):
    for end in (cm.map.src, cm.map.dst):
        if end.shape.is_shape is not True:
            log.info("%s: endpoint is not a certified shape, map not recorded", cm.kind)
            return
    src = graph.node_for(cm.map.src, f"via:{cm.kind}")
    dst = graph.node_for(cm.map.dst, f"via:{cm.kind}")
    for node in (src, dst):
        if not node.inane and node.key not in graph._expanded:
            graph._expanded.add(node.key)
            work.append(node.key)
    dst_shape = cm.map.dst.shape.is_shape is True
    ind = is_indirect(cm.map)
    if "indirect" in cm.guarantees and not ind.holds:
        raise ConsistencyError(f"{cm.kind}: guaranteed indirect map failed certification")
    if ind.holds and dst_shape and not (src.inane or dst.inane):
        graph.add_edge(Edge(src.key, dst.key, True, "indirect", cm.kind, "target is a shape", cm.map, ind))
    dirc = is_direct(cm.map)
    if "direct" in cm.guarantees and not dirc.holds:
        raise ConsistencyError(f"{cm.kind}: guaranteed direct map failed certification")
    if dirc.holds and (dst_shape or cm.map.dst.is_full) and not (src.inane or dst.inane):
        graph.add_edge(Edge(dst.key, src.key, True, "direct", cm.kind, "target is a shape or full", cm.map, dirc))


def _search_pair(a: Node, b: Node, limit: int):
    """First indirect map a -> b and first direct map a -> b, if any."""
    found = {"indirect": None, "direct": None}
    checked = 0
    try:
        for m in search_maps(a.preshape, b.preshape, limit):
            checked += 1
            for kind, fn in (("indirect", is_indirect), ("direct", is_direct)):
                if found[kind] is None:
                    cert = fn(m)
                    if cert.holds:
                        found[kind] = (m, cert)
            if all(found.values()):
                break
    except SizeLimit:
        return found, checked, True
    return found, checked, False


def thread_count() -> int:
    try:
        return max(1, int(os.environ.get("SHAPECALC_THREADS", "1")))
    except ValueError:
        return 1


def build_taylor_graph(inv: ShapeInventory, cube_bound: Optional[int] = None, search_bound: int = 5,
                       search_limit: int = 10**6, threads: Optional[int] = None) -> TaylorGraph:
    """Nodes are the inventory shapes and the cube shapes up to ``cube_bound``.

    Canonical constructions are tried first.  Afterwards every ordered pair
    of nodes whose posets have at most ``search_bound`` elements, and whose
    implication is not yet certified, is searched exhaustively for maps.
    """
    cube_bound = inv.cube_bound if cube_bound is None else cube_bound
    graph = TaylorGraph()
    graph._expanded = set()
    for entry in inv:
        graph.node_for(entry.preshape, entry.provenance[0], entry.key).provenance[:] = list(entry.provenance)
    for n in range(cube_bound + 1):
        graph.node_for(cube_family(n)[2], "cube")
    work = []
    for key in graph.active:
        graph._expanded.add(key)
        work.append(key)
    while work:
        key = work.pop(0)
        node = graph.nodes[key]
        for cm in _constructions(node):
            _record(graph, cm, work)
        if node.cube_dim is not None and node.cube_dim < cube_bound:
            for cm in canonical_map("cube_inclusion", node.cube_dim, node.cube_dim + 1):
                _record(graph, cm, work)
    _name_nodes(graph)

    # cubical shapes and the cube of their degree imply each other; only the
    # direction through cube_cover carries a map certificate
    for key in graph.active:
        node = graph.nodes[key]
        n = node.n_sigma
        if n is None or n == math.inf or node.cube_dim is not None:
            continue
        cube_node = graph.cube_node(n)
        if cube_node is None:
            cube_node = graph.node_for(cube_family(n)[2], "cube")
            _name_nodes(graph)
        for a, b in ((key, cube_node.key), (cube_node.key, key)):
            graph.add_edge(Edge(a, b, False, "semantic", "cube_degree", "cubical target"))

    _bounded_search(graph, search_bound, search_limit, thread_count() if threads is None else threads)
    return graph


def _bounded_search(graph: TaylorGraph, bound: int, limit: int, threads: int):
    small = [k for k in graph.active
             if len(graph.nodes[k].preshape.target) <= bound and len(graph.nodes[k].preshape.source) <= bound]
    reach = graph.digraph(semantic=False)
    closure = {k: nx.descendants(reach, k) | {k} for k in small}
    pairs = [(a, b) for a in small for b in small
             if a != b and (b not in closure[a] or a not in closure[b])]
    graph.search_log["pairs_searched"] = len(pairs)

    def run(pair):
        a, b = pair
        return _search_pair(graph.nodes[a], graph.nodes[b], limit)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, pairs))
    else:
        results = [run(p) for p in pairs]
    for (a, b), (found, checked, truncated) in zip(pairs, results):
        graph.search_log["maps_checked"] += checked
        if truncated:
            graph.search_log["pairs_skipped"] += 1
            log.info("map search between %s and %s hit the candidate cap", graph.nodes[a].name, graph.nodes[b].name)
        if found["indirect"]:
            m, cert = found["indirect"]
            graph.add_edge(Edge(a, b, True, "indirect", "search", "target is a shape", m, cert))
        if found["direct"]:
            m, cert = found["direct"]
            graph.add_edge(Edge(b, a, True, "direct", "search", "target is a shape or full", m, cert))


def _name_nodes(graph: TaylorGraph):
    counter = 0
    for key in sorted(graph.nodes):
        node = graph.nodes[key]
        if node.cube_dim is not None:
            node.name = f"cube{node.cube_dim}"
        else:
            node.name = f"shape{counter:03d}"
            counter += 1


# -- classification ----------------------------------------------------------

def classify(graph: TaylorGraph) -> dict:
    """Classes of mutually implying shapes and their relation to the cubes."""
    certified = {k: i for i, comp in enumerate(graph.components(semantic=False)) for k in comp}
    classes = []
    for comp in graph.components(semantic=True):
        nodes = [graph.nodes[k] for k in comp]
        cubes = sorted(n.cube_dim for n in nodes if n.cube_dim is not None)
        degrees = sorted({n.n_sigma for n in nodes if n.n_sigma is not None}, key=str)
        if len(cubes) > 1 or len(degrees) > 1 or (cubes and degrees and degrees != cubes):
            raise InconsistentClass(
                f"class {[n.name for n in nodes]} mixes cube degrees {cubes} / {[format_count(d) for d in degrees]}"
            )
        n_value = cubes[0] if cubes else (degrees[0] if degrees else None)
        cube_key = next((n.key for n in nodes if n.cube_dim is not None), None)
        members = []
        for n in nodes:
            members.append({
                "name": n.name,
                "certified_with_cube": cube_key is not None and certified[n.key] == certified[cube_key],
            })
        classes.append({
            "members": members,
            "size": len(nodes),
            "contains_cube": bool(cubes),
            "n_value": None if n_value is None else format_count(n_value),
            "inane": False,
            "status": "cube-linked" if cubes else "open",
            "smallest_member": min(nodes, key=lambda n: (len(n.preshape.target), len(n.preshape.source), n.key)).name,
        })
    return {
        "classes": classes,
        "excluded_inane": [graph.nodes[k].name for k in sorted(graph.nodes) if graph.nodes[k].inane],
        "summary": {
            "nodes": len(graph.nodes),
            "active_nodes": len(graph.active),
            "certified_edges": sum(e.certified for e in graph.edges),
            "semantic_edges": sum(not e.certified for e in graph.edges),
            "classes": len(classes),
            "open_classes": sum(c["status"] == "open" for c in classes),
            **graph.search_log,
        },
    }


def report(graph: TaylorGraph) -> dict:
    out = classify(graph)
    names = {k: graph.nodes[k].name for k in graph.nodes}
    out["nodes"] = [graph.nodes[k].to_json() for k in sorted(graph.nodes)]
    out["edges"] = [
        {
            "from": names[e.source],
            "to": names[e.target],
            "certified": e.certified,
            "via": e.via,
            "construction": e.construction,
            "gating": e.gating,
        }
        for e in sorted(graph.edges, key=lambda e: (names[e.source], names[e.target]))
    ]
    return out


def to_dot(graph: TaylorGraph) -> str:
    names = {k: graph.nodes[k].name for k in graph.nodes}
    lines = ["digraph taylor {", "  rankdir=LR;"]
    for k in sorted(graph.nodes):
        node = graph.nodes[k]
        style = ', style=dotted, color=gray' if node.inane else ""
        shape = ", shape=box" if node.cube_dim is not None else ""
        lines.append(f'  "{node.name}" [label="{node.label}"{shape}{style}];')
    for e in sorted(graph.edges, key=lambda e: (names[e.source], names[e.target])):
        style = "solid" if e.certified else "dashed"
        lines.append(f'  "{names[e.source]}" -> "{names[e.target]}" [style={style}, label="{e.via}:{e.construction}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
