"""Canonical forms and isomorphism tests for small posets.

Partition refinement by up/down neighbourhood profiles, then
individualisation of one element at a time, keeping the smallest leaf
encoding.  Interchangeable elements (same strict up- and down-set) are only
tried once per cell.
"""
from __future__ import annotations

from typing import Optional, Sequence

from .errors import check
from .poset import Poset, bits


def _refine(up_s, down_s, cells):
    while True:
        cell_of = {}
        for ci, cell in enumerate(cells):
            for v in cell:
                cell_of[v] = ci
        new, changed = [], False
        for cell in cells:
            if len(cell) == 1:
                new.append(cell)
                continue
            groups = {}
            for v in cell:
                sig = (
                    tuple(sorted(cell_of[u] for u in bits(up_s[v]))),
                    tuple(sorted(cell_of[u] for u in bits(down_s[v]))),
                )
                groups.setdefault(sig, []).append(v)
            if len(groups) > 1:
                changed = True
            new.extend(groups[k] for k in sorted(groups))
        cells = new
        if not changed:
            return cells


def canonical_form(P: Poset, colors: Optional[Sequence] = None):
    """Return ``(key, order)``: a hashable invariant that is equal exactly for
    isomorphic (colour-preserving) posets, and the element indices listed in
    canonical order."""
    n = len(P)
    colors = [""] * n if colors is None else [str(c) for c in colors]
    up_s = [P.up[i] & ~(1 << i) for i in range(n)]
    down_s = [P.down[i] & ~(1 << i) for i in range(n)]

    def twins(a, b):
        ab = (1 << a) | (1 << b)
        return (
            colors[a] == colors[b]
            and not P.up[a] >> b & 1
            and not P.up[b] >> a & 1
            and up_s[a] & ~ab == up_s[b] & ~ab
            and down_s[a] & ~ab == down_s[b] & ~ab
        )

    def encode(order):
        pos = {v: i for i, v in enumerate(order)}
        rows = []
        for v in order:
            row = 0
            for u in bits(P.up[v]):
                row |= 1 << pos[u]
            rows.append(row)
        return (n, tuple(colors[v] for v in order), tuple(rows))

    def search(cells):
        cells = _refine(up_s, down_s, cells)
        target = next((k for k, c in enumerate(cells) if len(c) > 1), None)
        if target is None:
            order = [c[0] for c in cells]
            return encode(order), order
        best = None
        tried = []
        for v in cells[target]:
            if any(twins(v, w) for w in tried):
                continue
            tried.append(v)
            rest = [w for w in cells[target] if w != v]
            result = search(cells[:target] + [[v], rest] + cells[target + 1:])
            if best is None or result[0] < best[0]:
                best = result
        return best

    groups = {}
    for v in range(n):
        groups.setdefault((colors[v], up_s[v].bit_count(), down_s[v].bit_count()), []).append(v)
    cells = [groups[k] for k in sorted(groups)]
    if n == 0:
        return (0, (), ()), []
    return search(cells)


def canonical_key(P: Poset, colors: Optional[Sequence] = None):
    return canonical_form(P, colors)[0]


def canonical_poset(P: Poset) -> Poset:
    """The canonical representative of P's class, labelled "0", "1", ..."""
    (_, _, rows), _ = canonical_form(P)
    return Poset([str(i) for i in range(len(rows))], rows)


def find_isomorphism(P: Poset, Q: Poset, colors_p: Optional[Sequence] = None,
                     colors_q: Optional[Sequence] = None) -> Optional[dict]:
    """An order isomorphism P -> Q as a label dict, or None.

    With colours, only colour-preserving isomorphisms count; this is how an
    isomorphism can be pinned on a subset of elements.
    """
    if len(P) != len(Q):
        return None
    kp, op = canonical_form(P, colors_p)
    kq, oq = canonical_form(Q, colors_q)
    if kp != kq:
        return None
    iso = {P.elements[a]: Q.elements[b] for a, b in zip(op, oq)}
    for a, b in zip(op, oq):
        check(all(Q.up[b] >> oq[op.index(c)] & 1 for c in bits(P.up[a])), "canonical forms matched a non-isomorphism")
    return iso


def is_isomorphic(P: Poset, Q: Poset) -> bool:
    return find_isomorphism(P, Q) is not None
