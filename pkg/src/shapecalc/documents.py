"""JSON documents for posets, preshapes and maps of preshapes.

Poset: {"elements": [...], "relations": [[a, b], ...]}, relations being any
generating set.  Preshape: {"domain": P, "codomain": P, "assign": {...}},
where either poset may instead be a path to a poset document, resolved
relative to the referring file.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Optional

from .errors import DocumentError
from .poset import MonotoneMap, Poset, build_poset
from .shape_maps import PreshapeMap
from .shapes import Preshape


def _label(x):
    if isinstance(x, bool) or not isinstance(x, (str, int)):
        raise DocumentError(f"element labels must be strings or integers, got {x!r}")
    return str(x)


def load_json(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DocumentError(f"cannot read {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise DocumentError(f"{path}: invalid JSON at line {exc.lineno}: {exc.msg}") from None


def dumps(doc) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def poset_from_json(doc, base: Optional[Path] = None) -> Poset:
    if isinstance(doc, str):
        ref = Path(doc) if base is None else Path(base) / doc
        return poset_from_json(load_json(ref), ref.parent)
    if not isinstance(doc, dict) or not isinstance(doc.get("elements"), list):
        raise DocumentError('a poset document needs an "elements" list')
    relations = doc.get("relations", [])
    if not isinstance(relations, list) or any(not isinstance(r, list) or len(r) != 2 for r in relations):
        raise DocumentError('"relations" must be a list of [lower, upper] pairs')
    return build_poset([_label(x) for x in doc["elements"]], [(_label(a), _label(b)) for a, b in relations])


def poset_to_json(P: Poset) -> dict:
    return {"elements": list(P.elements), "relations": [list(r) for r in P.cover_relations()]}


def _assignment(doc, key: str) -> dict:
    assign = doc.get(key)
    if not isinstance(assign, dict):
        raise DocumentError(f'"{key}" must map labels to labels')
    return {_label(k): _label(v) for k, v in assign.items()}


def monotone_from_json(doc, base: Optional[Path] = None) -> MonotoneMap:
    if not isinstance(doc, dict) or "domain" not in doc or "codomain" not in doc:
        raise DocumentError('a map document needs "domain", "codomain" and "assign"')
    P = poset_from_json(doc["domain"], base)
    Q = poset_from_json(doc["codomain"], base)
    return MonotoneMap(P, Q, _assignment(doc, "assign"))


def preshape_from_json(doc, base: Optional[Path] = None) -> Preshape:
    return Preshape(monotone_from_json(doc, base))


def preshape_to_json(p: Preshape) -> dict:
    return {
        "domain": poset_to_json(p.source),
        "codomain": poset_to_json(p.target),
        "assign": dict(p.sigma.assignment),
    }


def map_from_json(doc, src: Preshape, dst: Preshape) -> PreshapeMap:
    """{"f": {target label: target label}, "fhat": {generator: generator}}."""
    if not isinstance(doc, dict):
        raise DocumentError('a preshape map document needs "f" and "fhat"')
    f = MonotoneMap(src.target, dst.target, _assignment(doc, "f"))
    fhat = MonotoneMap(src.source, dst.source, _assignment(doc, "fhat"))
    return PreshapeMap(src, dst, f, fhat)


def map_to_json(m: PreshapeMap) -> dict:
    return {"f": dict(m.f.assignment), "fhat": dict(m.fhat.assignment)}


def load_poset(path) -> Poset:
    path = Path(path)
    return poset_from_json(load_json(path), path.parent)


def load_preshape(path) -> Preshape:
    path = Path(path)
    return preshape_from_json(load_json(path), path.parent)
