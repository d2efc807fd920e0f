"""Random small posets and maps for property tests."""
import random

from hypothesis import strategies as st

from shapecalc.poset import MonotoneMap, Poset, build_poset


def poset_from_pairs(n, pairs, labels=None):
    labels = labels or [f"p{i}" for i in range(n)]
    return build_poset(labels, [(labels[a], labels[b]) for a, b in pairs])


def random_poset(rng: random.Random, n: int, density: float = 0.4, bottom=False, top=False) -> Poset:
    # relations only go forward along a hidden random order, so no cycles
    hidden = list(range(n))
    rng.shuffle(hidden)
    pairs = [(hidden[i], hidden[j]) for i in range(n) for j in range(i + 1, n) if rng.random() < density]
    labels = [f"p{i}" for i in range(n)]
    if bottom:
        labels.append("bot")
        pairs += [(n, i) for i in range(n)]
    if top:
        labels.append("top")
        t = len(labels) - 1
        pairs += [(i, t) for i in range(t)]
    return poset_from_pairs(len(labels), pairs, labels)


def random_monotone(rng: random.Random, P: Poset, Q: Poset, fixed=None, tries=50):
    """A random monotone map P -> Q, or None when none was found."""
    order = sorted(range(len(P)), key=lambda i: (P.down[i].bit_count(), i))
    for _ in range(tries):
        images = [None] * len(P)
        ok = True
        for x in order:
            cand = Q.full_mask
            for y in range(len(P)):
                if y != x and P.down[x] >> y & 1:
                    cand &= Q.up[images[y]]
            if fixed and x in fixed:
                cand &= 1 << fixed[x]
            choices = [c for c in range(len(Q)) if cand >> c & 1]
            if not choices:
                ok = False
                break
            images[x] = rng.choice(choices)
        if ok:
            return MonotoneMap(P, Q, images)
    return None


@st.composite
def posets(draw, min_size=0, max_size=6):
    n = draw(st.integers(min_size, max_size))
    perm = draw(st.permutations(range(n)))
    pairs = [(perm[i], perm[j]) for i in range(n) for j in range(i + 1, n) if draw(st.booleans())]
    return poset_from_pairs(n, pairs)


@st.composite
def posets_with_bottom(draw, max_size=5):
    P = draw(posets(0, max_size))
    n = len(P)
    up = [row for row in P.up] + [(1 << (n + 1)) - 1]
    return Poset(list(P.elements) + ["bot"], up)


@st.composite
def monotone_maps(draw, dom, cod):
    seed = draw(st.integers(0, 2**32 - 1))
    f = random_monotone(random.Random(seed), dom, cod)
    if f is None:
        from hypothesis import assume

        assume(False)
    return f


def relabel(P: Poset, perm) -> Poset:
    """The same poset with elements listed in another order and renamed."""
    n = len(P)
    names = [f"q{perm[i]}" for i in range(n)]
    order = sorted(range(n), key=lambda i: perm[i])
    pos = {old: new for new, old in enumerate(order)}
    up = []
    for old in order:
        row = 0
        for j in range(n):
            if P.up[old] >> j & 1:
                row |= 1 << pos[j]
        up.append(row)
    return Poset([names[i] for i in order], up)

