import itertools
import math
import random
from fractions import Fraction

from hypothesis import given, settings, strategies as st

from helpers import monotone_maps, poset_from_pairs, posets
from shapecalc.homotopy import (
    Status,
    adjoint_partner,
    contractibility,
    dismantle_core,
    homotopy_extremal,
    order_complex,
    reduced_homology,
    replay_certificate,
    smith_invariants,
)
from shapecalc.poset import MonotoneMap, antichain, build_poset, chain, identity, inclusion, induced_subposet


def crown(k):
    """k minima and k maxima joined in a cycle: a circle for k >= 2."""
    lows = [f"a{i}" for i in range(k)]
    highs = [f"b{i}" for i in range(k)]
    rel = [(lows[i], highs[i]) for i in range(k)] + [(lows[(i + 1) % k], highs[i]) for i in range(k)]
    return build_poset(lows + highs, rel)


def suspension_sphere(levels):
    """Two incomparable points per level, each above both points of the level below."""
    labels, rel = [], []
    for lv in range(levels):
        for side in "xy":
            labels.append(f"{side}{lv}")
            if lv:
                rel += [(f"x{lv - 1}", f"{side}{lv}"), (f"y{lv - 1}", f"{side}{lv}")]
    return build_poset(labels, rel)


def homology(P):
    return reduced_homology(order_complex(P))


def test_hexagon_has_a_circle():
    h = homology(crown(3))
    assert h.nonzero_degrees() == [1] and h.ranks[1] == 1
    assert contractibility(crown(3)).status is Status.NOT_CONTRACTIBLE


def test_two_points_are_disconnected():
    h = homology(antichain(2))
    assert h.nonzero_degrees() == [0] and h.ranks[0] == 1
    v = contractibility(antichain(2))
    assert v.witness["kind"] == "disconnected"


def test_spheres():
    for levels in (1, 2, 3):
        h = homology(suspension_sphere(levels))
        assert h.nonzero_degrees() == [levels - 1]


def test_empty_poset():
    P = build_poset([])
    h = homology(P)
    assert h.empty and h.ranks[-1] == 1
    assert contractibility(P).witness == {"kind": "empty"}


def test_cone_dismantles_with_certificate():
    P = build_poset("abcd", [("a", "d"), ("b", "d"), ("c", "d")])
    v = contractibility(P)
    assert v.contractible and replay_certificate(P, v.certificate)
    core, removed = dismantle_core(P)
    assert len(core) == 1 and len(removed) == 3


def test_certificate_replay_rejects_non_beat_points():
    P = crown(2)  # a 4-crown is a circle with no beat points
    assert not replay_certificate(P, ["a0"])


def rank_over_q(matrix):
    A = [[Fraction(x) for x in row] for row in matrix]
    rank = 0
    cols = len(A[0]) if A else 0
    for c in range(cols):
        piv = next((r for r in range(rank, len(A)) if A[r][c] != 0), None)
        if piv is None:
            continue
        A[rank], A[piv] = A[piv], A[rank]
        for r in range(len(A)):
            if r != rank and A[r][c] != 0:
                factor = A[r][c] / A[rank][c]
                A[r] = [a - factor * b for a, b in zip(A[r], A[rank])]
        rank += 1
    return rank


def determinant(M):
    if not M:
        return 1
    return sum((-1) ** j * M[0][j] * determinant([row[:j] + row[j + 1:] for row in M[1:]]) for j in range(len(M)))


def minors_gcd(matrix, k):
    g = 0
    rows, cols = len(matrix), len(matrix[0])
    for rs in itertools.combinations(range(rows), k):
        for cs in itertools.combinations(range(cols), k):
            g = math.gcd(g, determinant([[matrix[r][c] for c in cs] for r in rs]))
    return g


@settings(max_examples=150, deadline=None)
@given(st.integers(1, 4), st.integers(1, 4), st.data())
def test_smith_invariants_against_determinantal_divisors(rows, cols, data):
    M = [[data.draw(st.integers(-3, 3)) for _ in range(cols)] for _ in range(rows)]
    inv = smith_invariants(M)
    assert len(inv) == rank_over_q(M)
    for a, b in zip(inv, inv[1:]):
        assert b % a == 0
    # d_1 * ... * d_k equals the gcd of the k x k minors
    prod = 1
    for k, d in enumerate(inv, start=1):
        prod *= d
        assert prod == minors_gcd(M, k)


@settings(max_examples=120, deadline=None)
@given(posets(0, 7))
def test_euler_characteristic_two_ways(P):
    h = homology(P)
    assert h.euler_characteristic() == h.euler_from_faces()


@settings(max_examples=150, deadline=None)
@given(posets(1, 7))
def test_contractible_means_acyclic(P):
    v = contractibility(P)
    if v.contractible:
        assert homology(P).is_zero()
        if v.certificate is not None:
            assert replay_certificate(P, v.certificate)
    elif v.status is Status.NOT_CONTRACTIBLE and v.witness["kind"] == "homology":
        assert not homology(P).is_zero()


def test_bottom_inclusion_is_initial_not_terminal():
    P = build_poset("abc", [("a", "b"), ("a", "c")])
    f = inclusion(induced_subposet(P, ["a"]), P)
    assert homotopy_extremal(f, "initial").holds
    assert homotopy_extremal(f, "terminal").status is Status.NOT_CONTRACTIBLE


def test_adjoints():
    C3 = chain(3)
    C2 = chain(2)
    f = MonotoneMap(C3, C2, {"0": "0", "1": "1", "2": "1"})
    left = adjoint_partner(f, "left")
    assert left is not None and left.assignment == {"0": "0", "1": "1"}
    assert adjoint_partner(f, "right").assignment == {"0": "0", "1": "2"}
    g = MonotoneMap(antichain(2), C2, {"0": "1", "1": "1"})
    assert adjoint_partner(g, "left") is None
    assert homotopy_extremal(f, "terminal").via == "adjoint"


@settings(max_examples=120, deadline=None)
@given(st.data())
def test_fast_and_slow_extremal_agree(data):
    P = data.draw(posets(1, 5))
    Q = data.draw(posets(1, 4))
    f = data.draw(monotone_maps(P, Q))
    for side in ("initial", "terminal"):
        fast, slow = homotopy_extremal(f, side), homotopy_extremal(f, side, fast=False)
        if Status.UNKNOWN not in (fast.status, slow.status):
            assert fast.status is slow.status


def test_identity_is_both():
    P = crown(3)
    for side in ("initial", "terminal"):
        assert homotopy_extremal(identity(P), side).holds


def test_random_posets_have_decisive_verdicts():
    rng = random.Random(7)
    unknown = 0
    for _ in range(200):
        n = rng.randint(1, 6)
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.4]
        unknown += contractibility(poset_from_pairs(n, pairs)).status is Status.UNKNOWN
    assert unknown == 0
