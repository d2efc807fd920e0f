"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest -s tests/test_acceptance.py`` (or ``-rA``) to see the lines.
"""
import functools
import itertools
import random
import time
from contextlib import contextmanager

from helpers import random_monotone, random_poset
from shapecalc.homotopy import Status, contractibility, homotopy_extremal, order_complex, reduced_homology
from shapecalc.iso import find_isomorphism
from shapecalc.lattice import reduced_downset_lattice, universal_extension
from shapecalc.poset import (
    MonotoneMap,
    antichain,
    build_poset,
    compose,
    identity,
    inclusion,
    product,
    submask_poset,
    without_initial,
)
from shapecalc.shape_maps import canonical_map, is_direct, is_indirect
from shapecalc.shapes import (
    Preshape,
    cube,
    cube_at_most_one,
    cube_family,
    e_map_valid,
    format_count,
    generator_image,
    image_preshape,
    is_inane,
    n_sigma,
)
from shapecalc.taylor import (
    ShapeInventory,
    add_bottom,
    build_taylor_graph,
    classify,
    cover_partition,
    cubical_shapes,
    enumerate_posets,
    enumerate_reduced_preshapes,
    enumerate_shapes,
    lattices_up_to,
    preshape_key,
)


@contextmanager
def criterion(number, title, bound):
    start = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        print(f"\n[ACCEPT {number}] FAIL {title}: {type(exc).__name__}: {exc} ({elapsed:.2f}s)")
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < bound
    print(f"\n[ACCEPT {number}] {'PASS' if ok else 'FAIL'} {title} ({elapsed:.2f}s < {bound}s)")
    assert ok, f"took {elapsed:.2f}s, bound {bound}s"


@functools.lru_cache(maxsize=None)
def inventory():
    return enumerate_shapes(3, 8)


@functools.lru_cache(maxsize=None)
def graph():
    return build_taylor_graph(inventory())


def test_1_cubical_shape_law():
    with criterion(1, "cubical shape law over Q^3", 10):
        Q = cube(3)
        empty = Q.index("∅")
        checked = unknown = 0
        for mask in range(1 << len(Q)):
            if not mask >> empty & 1:
                continue
            p = Preshape(inclusion_of(Q, mask))
            v = p.shape
            unknown += v.status is Status.UNKNOWN
            down_closed = all(Q.down[i] & ~mask == 0 for i in range(len(Q)) if mask >> i & 1)
            assert v.is_shape is down_closed, Q.labels(mask)
            checked += 1
        assert checked == 128 and unknown == 0


def inclusion_of(P, mask):
    return inclusion(submask_poset(P, mask), P)


def test_2_free_shape_isomorphism():
    with criterion(2, "D*(Q^n_<=1) is isomorphic to Q^n over the units", 5):
        for n in range(1, 5):
            P = cube_at_most_one(n)
            L = reduced_downset_lattice(P)
            Q = cube(n)
            pinned = {L.unit(x): x for x in P.elements}
            colors_l = [pinned.get(y, "") for y in L.carrier.elements]
            colors_q = [y if y in P else "" for y in Q.elements]
            iso = find_isomorphism(L.carrier, Q, colors_l, colors_q)
            assert iso is not None, n
            for a in L.carrier.elements:
                for b in L.carrier.elements:
                    assert L.carrier.leq(a, b) == Q.leq(iso[a], iso[b])
            # iso . unit is the inclusion Q^n_<=1 -> Q^n
            assert all(iso[L.unit(x)] == x for x in P.elements)


def test_3_image_shape():
    with criterion(3, "image preshape is a full shape, (id, v) direct and indirect", 120):
        inv = inventory()
        assert len(inv.shapes) > 0
        for entry in inv:
            ip, pm = image_preshape(entry.preshape)
            assert ip.is_full and ip.shape.is_shape is True
            assert is_indirect(pm).holds and is_direct(pm).holds


def test_4_slice_terminality():
    with criterion(4, "every slice of the generator image has its join as terminal", 60):
        slices = 0
        for p in enumerate_reduced_preshapes(3, 5):
            if not p.target.has_all_joins:
                continue
            gi = generator_image(p)
            im, w, S = gi.image, gi.w, p.target
            for s, members, top in gi.slices:
                expected = [i for i in im.elements if S.leq(w(i), s)]
                assert sorted(members) == sorted(expected)
                uppers = [c for c in im.elements if all(im.leq(m, c) for m in expected)]
                join = [c for c in uppers if all(im.leq(c, d) for d in uppers)]
                assert join == [top] and top in expected
                slices += 1
        assert slices > 1000


def test_5_retract_identity():
    with criterion(5, "u_v . e = id on the image", 60):
        shapes = [e.preshape for e in inventory() if e.preshape.is_reduced]
        shapes += [p for p in enumerate_reduced_preshapes(2, 5) if p.shape.is_shape]
        for p in shapes:
            v = generator_image(p).v
            G, im = p.source, v.cod
            L = reduced_downset_lattice(G)
            u = universal_extension(v, L)
            # e(i) = {g : v(g) <= i}
            e = [L.index_of_mask(v.preimage_mask(im.down[i])) for i in range(len(im))]
            assert all(u.images[e[i]] == i for i in range(len(im)))
        assert len(shapes) > 100


def test_6_inane_dichotomy():
    with criterion(6, "e is valid exactly for non-inane full shapes", 30):
        full = [e.preshape for e in inventory() if e.preshape.is_full]
        assert any(is_inane(p).inane for p in full) and any(not is_inane(p).inane for p in full)
        for p in full:
            assert e_map_valid(p) == (not is_inane(p).inane)
        point = Preshape(MonotoneMap(build_poset(["0"]), build_poset(["0", "1"], [("0", "1")]), {"0": "0"}))
        assert is_inane(point).inane
        for n in range(5):
            assert not is_inane(cube_family(n)[2]).inane


def test_7_cubical_classifier():
    with criterion(7, "cube covers certify sigma-excisive => (n-1)-excisive; classes keyed by n", 120):
        shapes = [p for p in cubical_shapes(3) if not is_inane(p).inane]
        assert len(shapes) > 5
        inv = ShapeInventory(0, 0, 3)
        for p in shapes:
            n = n_sigma(p)
            assert n != float("inf")
            to_cube, to_p = canonical_map("cube_cover", p, cover_partition(p))
            assert len(to_cube.map.dst.target) == 2**n
            assert is_indirect(to_cube.map).holds
            assert is_direct(to_p.map).holds
            inv.add(p, "cubical")
        for g in (build_taylor_graph(inv), graph()):
            report = classify(g)
            keyed = 0
            for cls in report["classes"]:
                names = {m["name"] for m in cls["members"]}
                degrees = {format_count(node.n_sigma) for node in g.nodes.values()
                           if node.name in names and node.n_sigma is not None}
                assert len(degrees) <= 1
                if degrees:
                    assert degrees == {cls["n_value"]}
                    keyed += 1
            assert keyed > 0
            for p in shapes:
                cube_node = g.cube_node(n_sigma(p))
                assert g.has_certified_path(preshape_key(p), cube_node.key)


def test_8_tower_shadow():
    with criterion(8, "every non-inane full shape has a certified path to its cube", 120):
        g = graph()
        count = 0
        for entry in inventory():
            p = entry.preshape
            if not p.is_full or is_inane(p).inane:
                continue
            G = p.source
            n = bin(G.minimal_mask(G.full_mask & ~(1 << G.bottom_index))).count("1")
            (to_free,) = canonical_map("e_to_free", p)
            (restrict,) = canonical_map("free_restriction", G)
            assert is_indirect(to_free.map).holds
            assert is_direct(restrict.map).holds
            assert preshape_key(restrict.map.src) == preshape_key(cube_family(n)[2])
            assert g.has_certified_path(preshape_key(p), g.cube_node(n).key)
            count += 1
        assert count > 10


def random_pair(rng, small=4, large=5):
    P = random_poset(rng, rng.randint(1, small), rng.uniform(0.1, 0.7))
    Q = random_poset(rng, rng.randint(1, large), rng.uniform(0.1, 0.7))
    return P, Q


def test_9_order_lemmas():
    with criterion(9, "full => injective, full-composition, contractible products, join map initial", 60):
        rng = random.Random(20261015)
        full_seen = 0
        for _ in range(500):
            P, Q = random_pair(rng)
            f = random_monotone(rng, P, Q)
            if f.is_full:
                full_seen += 1
                assert f.is_injective
        assert full_seen >= 50

        composite_full = 0
        for _ in range(500):
            P, Q = random_pair(rng)
            R = random_poset(rng, rng.randint(1, 5), rng.uniform(0.1, 0.7))
            f, g = random_monotone(rng, P, Q), random_monotone(rng, Q, R)
            if compose(g, f).is_full:
                composite_full += 1
                assert f.is_full
        assert composite_full >= 50

        for _ in range(500):
            I = random_poset(rng, rng.randint(0, 3), rng.uniform(0.1, 0.7), bottom=True, top=True)
            J = random_poset(rng, rng.randint(0, 3), rng.uniform(0.1, 0.7), bottom=True)
            v = contractibility(without_initial(product(I, J)))
            assert v.status is Status.CONTRACTIBLE

        instances = 0
        lattices = [L for L in lattices_up_to(5) if len(L) > 1]
        while instances < 500:
            T = rng.choice(lattices)
            S2 = add_bottom(random_poset(rng, rng.randint(1, 3), rng.uniform(0.1, 0.7)), "b")
            if rng.random() < 0.5:
                S1, f1 = T, identity(T)
            else:
                S1 = add_bottom(random_poset(rng, rng.randint(1, 3), rng.uniform(0.1, 0.7)), "b")
                f1 = nonzero_map(rng, S1, T)
            f2 = nonzero_map(rng, S2, T)
            if f1 is None or f2 is None or not slices_condition(f1, f2):
                continue
            p = join_map(f1, f2)
            verdict = homotopy_extremal(p, "initial")
            assert verdict.status is Status.CONTRACTIBLE
            instances += 1


def nonzero_map(rng, S, T):
    """A monotone map sending exactly the initial object of S to that of T."""
    for _ in range(20):
        f = random_monotone(rng, S, T, fixed={S.bottom_index: T.bottom_index})
        if f is not None and f.fibers[T.bottom_index] == 1 << S.bottom_index:
            return f
    return None


def slices_condition(f1, f2):
    """For each non-initial t, f1/t or f2/t has a terminal object other than its initial one."""
    T = f1.cod
    for t in range(len(T)):
        if t == T.bottom_index:
            continue
        ok = False
        for f in (f1, f2):
            S = f.dom
            members = [x for x in range(len(S)) if T.up[f.images[x]] >> t & 1]
            tops = [x for x in members if all(S.up[m] >> x & 1 for m in members)]
            if tops and tops[0] != S.bottom_index:
                ok = True
        if not ok:
            return False
    return True


def join_map(f1, f2):
    T = f1.cod
    D = without_initial(product(f1.dom, f2.dom))
    images = {}
    for a in f1.dom.elements:
        for b in f2.dom.elements:
            label = f"({a},{b})"
            if label in D:
                images[label] = T.elements[T.join_table[T.index(f1(a))][T.index(f2(b))]]
    return MonotoneMap(D, without_initial(T), images)


def crown(k):
    lows = [f"a{i}" for i in range(k)]
    highs = [f"b{i}" for i in range(k)]
    rel = [(lows[i], highs[i]) for i in range(k)] + [(lows[(i + 1) % k], highs[i]) for i in range(k)]
    return build_poset(lows + highs, rel)


def test_10_homology_oracle():
    with criterion(10, "dismantlable => acyclic on 1000 posets; hexagon and two points", 60):
        rng = random.Random(1000)
        dismantled = 0
        for _ in range(1000):
            P = random_poset(rng, rng.randint(1, 7), rng.uniform(0.1, 0.8))
            v = contractibility(P)
            if v.contractible and v.certificate is not None:
                dismantled += 1
                assert reduced_homology(order_complex(P)).is_zero()
        assert dismantled >= 200
        hexagon = reduced_homology(order_complex(crown(3)))
        assert hexagon.nonzero_degrees() == [1] and hexagon.ranks[1] == 1
        two = reduced_homology(order_complex(antichain(2)))
        assert two.nonzero_degrees() == [0] and two.ranks[0] == 1


def brute_force_poset_count(n):
    """Reflexive antisymmetric transitive relations on range(n), modulo relabelling."""
    pairs = [(a, b) for a in range(n) for b in range(n) if a != b]
    perms = list(itertools.permutations(range(n)))
    seen = set()
    count = 0
    for bits in itertools.product((0, 1), repeat=len(pairs)):
        rel = {pr for pr, bit in zip(pairs, bits) if bit}
        if any((b, a) in rel for a, b in rel):
            continue
        if any((a, c) not in rel for a, b in rel for b2, c in rel if b == b2 and a != c):
            continue
        if frozenset(rel) in seen:
            continue
        count += 1
        for perm in perms:
            seen.add(frozenset((perm[a], perm[b]) for a, b in rel))
    return count


def test_11_enumeration_cross_check():
    with criterion(11, "poset counts for n = 3, 4, 5 match an independent oracle", 120):
        for n in (3, 4, 5):
            assert len(enumerate_posets(n)) == brute_force_poset_count(n)
