"""shapecalc command line.

Exit codes: 0 the predicate holds (or the task finished), 1 it definitively
fails, 2 the verdict is Unknown, 3 the input could not be read or validated.
"""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .documents import dumps, load_json, load_poset, load_preshape, map_from_json, map_to_json, preshape_to_json
from .errors import InconsistentClass, NotCubical, NotShape, ShapecalcError
from .homotopy import Status, contractibility
from .shape_maps import is_direct, is_indirect
from .shapes import e_map, format_count, free_shape, image_preshape, is_inane, n_sigma, v_preshape
from .taylor import build_taylor_graph, classify, enumerate_shapes, report, to_dot

HOLDS, FAILS, UNKNOWN, BAD_INPUT = 0, 1, 2, 3

_EXIT = {Status.CONTRACTIBLE: HOLDS, Status.NOT_CONTRACTIBLE: FAILS, Status.UNKNOWN: UNKNOWN}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(BAD_INPUT, f"{self.prog}: error: {message}\n")


def _emit(doc, out=None):
    text = dumps(doc)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    p = load_preshape(args.shape)
    verdict = p.shape
    doc = {"preshape": p.flags(), "full": p.is_full, **verdict.to_json()}
    if p.is_reduced and p.target.has_all_joins:
        inane = is_inane(p)
        doc["inane"] = inane.inane
        if inane.witness is not None:
            doc["inane_witness"] = inane.witness
    else:
        doc["inane"] = None
    try:
        doc["n_sigma"] = format_count(n_sigma(p))
    except (NotCubical, NotShape):
        pass
    if args.format == "text":
        sys.stdout.write(f"shape: {verdict.answer}\n")
    else:
        _emit(doc)
    return _EXIT[verdict.status]


def cmd_homotopy(args) -> int:
    verdict = contractibility(load_poset(args.poset))
    if args.format == "text":
        sys.stdout.write(f"{verdict.status.value}\n")
    else:
        _emit(verdict.to_json())
    return _EXIT[verdict.status]


def cmd_construct(args) -> int:
    p = load_preshape(args.shape)
    if args.kind == "image":
        doc = preshape_to_json(image_preshape(p)[0])
    elif args.kind == "free":
        doc = preshape_to_json(free_shape(p.source))
    elif args.kind == "vsigma":
        doc = preshape_to_json(v_preshape(p))
    else:
        m = e_map(p)
        doc = {"source": preshape_to_json(m.src), "target": preshape_to_json(m.dst), "map": map_to_json(m)}
    _emit(doc, args.output)
    return HOLDS


def cmd_compare(args) -> int:
    src, dst = load_preshape(args.src), load_preshape(args.dst)
    m = map_from_json(load_json(args.map), src, dst)
    certs = [is_indirect(m), is_direct(m)]
    _emit({c.kind: c.to_json() for c in certs})
    if any(c.holds for c in certs):
        return HOLDS
    if any(c.status is Status.UNKNOWN for c in certs):
        return UNKNOWN
    return FAILS


def cmd_nsigma(args) -> int:
    p = load_preshape(args.shape)
    try:
        value = n_sigma(p)
    except NotShape as exc:
        print(f"shapecalc: {exc}", file=sys.stderr)
        return UNKNOWN if p.shape.is_shape is None else FAILS
    sys.stdout.write(f"{format_count(value)}\n")
    return HOLDS


def cmd_classify(args) -> int:
    inv = enumerate_shapes(args.gen_bound, args.target_bound, cube_bound=args.cube_bound)
    graph = build_taylor_graph(inv, search_bound=args.search_bound)
    try:
        classify(graph)
    except InconsistentClass as exc:
        print(f"shapecalc: inconsistent class: {exc}", file=sys.stderr)
        return FAILS
    doc = report(graph)
    if args.dot:
        Path(args.dot).write_text(to_dot(graph), encoding="utf-8")
    if args.report:
        _emit(doc, args.report)
    _emit(doc["summary"])
    return HOLDS


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="shapecalc", description="Shapes, preshape maps and the Taylor graph.")
    parser.add_argument("--version", action="version", version=f"shapecalc {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("check", help="decide whether a preshape is a shape")
    p.add_argument("shape")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(run=cmd_check)

    p = sub.add_parser("homotopy", help="contractibility of a poset")
    p.add_argument("poset")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.set_defaults(run=cmd_homotopy)

    p = sub.add_parser("construct", help="build a derived preshape")
    p.add_argument("kind", choices=("image", "free", "vsigma", "emap"))
    p.add_argument("shape")
    p.add_argument("-o", "--output")
    p.set_defaults(run=cmd_construct)

    p = sub.add_parser("compare", help="certify a map of preshapes as direct / indirect")
    p.add_argument("src")
    p.add_argument("dst")
    p.add_argument("map")
    p.set_defaults(run=cmd_compare)

    p = sub.add_parser("nsigma", help="cover number of a shape into a cube")
    p.add_argument("shape")
    p.set_defaults(run=cmd_nsigma)

    p = sub.add_parser("classify", help="enumerate shapes and classify the Taylor graph")
    p.add_argument("--gen-bound", type=int, default=3)
    p.add_argument("--target-bound", type=int, default=8)
    p.add_argument("--cube-bound", type=int, default=3)
    p.add_argument("--search-bound", type=int, default=5)
    p.add_argument("--dot")
    p.add_argument("--report")
    p.set_defaults(run=cmd_classify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        return args.run(args)
    except NotCubical as exc:
        print(f"shapecalc: not cubical: {exc}", file=sys.stderr)
        return BAD_INPUT
    except ShapecalcError as exc:
        print(f"shapecalc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
