"""Command line entry point.

Exit codes: 0 success, 1 property false, 2 invalid input, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import hexgeom as hg
from .measure import (
    Falsification,
    InputError,
    InvalidMeasure,
    InvariantViolation,
    attachments,
    att,
    dumps,
    exit_events,
    read_measure,
    trace_check,
    validate,
    weight,
)

OK, FALSE, BAD_INPUT, INTERNAL = 0, 1, 2, 3


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def _pt(p):
    return [hg.fmt_rat(p[0]), hg.fmt_rat(p[1])]


def cmd_validate(args) -> int:
    validate(read_measure(args.file))
    print("ok")
    return OK


def cmd_info(args) -> int:
    m = read_measure(args.file)
    validate(m)
    lhs, rhs, holds = trace_check(m)
    _emit(
        {
            "variant": m.variant,
            "r": hg.fmt_rat(m.r),
            "omega": hg.fmt_rat(weight(m)),
            "exit_events": [
                {"at": _pt(e.location), "side": e.side, "x": hg.fmt_rat(e.x), "dir": e.direction,
                 "density": hg.fmt_rat(e.density)}
                for e in exit_events(m)
            ],
            "attachments": [
                {"at": _pt(a.location), "side": a.side, "x": hg.fmt_rat(a.x), "density": hg.fmt_rat(a.density)}
                for a in attachments(m)
            ],
            "att": att(m),
            "trace": [hg.fmt_rat(lhs), hg.fmt_rat(rhs), holds],
        }
    )
    return OK


def cmd_rigid(args) -> int:
    from .puzzle import is_rigid

    res = is_rigid(read_measure(args.file))
    if res is True:
        _emit({"rigid": True})
        return OK
    out = {"rigid": False}
    out.update(res.to_json())
    _emit(out)
    return FALSE


def cmd_decompose(args) -> int:
    from .descend import decompose
    from .puzzle import is_rigid

    m = read_measure(args.file)
    if is_rigid(m) is not True:
        print("measure is not rigid; its decomposition is not unique", file=sys.stderr)
        return FALSE
    dec = decompose(m)
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    manifest = {"ext": dec.k, "components": []}
    for i, c in enumerate(dec.components):
        name = f"component-{i}.json"
        (out / name).write_text(dumps(c.measure), encoding="utf-8")
        manifest["components"].append(
            {"file": name, "delta": hg.fmt_rat(c.delta), "root_edges": [list(dec.graph.nodes[n]) for n in c.root]}
        )
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    _emit(manifest)
    return OK


def cmd_dual(args) -> int:
    from .puzzle import dual

    _write(dumps(dual(read_measure(args.file))), args.output)
    return OK


def cmd_hive(args) -> int:
    from .arrangement import build_hive, lattice_restriction

    m = read_measure(args.file)
    h = build_hive(m)
    if args.at:
        p = hg.pt(*args.at)
        _emit({"at": _pt(p), "f": hg.fmt_rat(h.at(p))})
    elif args.lattice:
        _emit(lattice_restriction(h).to_json())
    else:
        _emit(
            {
                "faces": [
                    {"polygon": [_pt(p) for p in face.polygon],
                     "f": [hg.fmt_rat(c) for c in h.pieces[face.id]]}
                    for face in h.arrangement.faces
                ]
            }
        )
    return OK


def cmd_puzzle(args) -> int:
    from .puzzle import build_puzzle
    from .render import puzzle_svg

    pz = build_puzzle(read_measure(args.file))
    if args.svg:
        Path(args.svg).write_text(puzzle_svg(pz), encoding="utf-8")
    _emit({k: pz.count(k) for k in ("white", "parallelogram", "branch")} | {"size": hg.fmt_rat(pz.size)})
    return OK


def cmd_render(args) -> int:
    from .render import measure_svg

    m = read_measure(args.file)
    validate(m)
    _write(measure_svg(m), args.svg)
    return OK


def cmd_theorem(args) -> int:
    from .analysis import NotRigid, check_main_theorem

    m = read_measure(args.file)
    try:
        rep = check_main_theorem(m, with_phi=args.phi)
    except NotRigid as exc:
        print(str(exc), file=sys.stderr)
        return FALSE
    rep["report"] = f"{rep['ext']}+{rep['ext_dual']}={rep['att']}+1"
    _emit(rep)
    return OK


def cmd_phi(args) -> int:
    from .analysis import NotRigid, phi_build, phi_checks

    m = read_measure(args.file)
    try:
        P = phi_build(m)
    except NotRigid as exc:
        print(str(exc), file=sys.stderr)
        return FALSE
    chk = phi_checks(P)
    _emit(
        {
            "gamma0": [hg.fmt_rat(g) for g in P.gamma0],
            "value0": [hg.fmt_rat(v) for v in P.value0],
            "matrix": [[hg.fmt_rat(v) for v in row] for row in P.matrix],
            "checks": chk,
        }
    )
    return OK if chk["ok"] else FALSE


def cmd_perturb(args) -> int:
    from .analysis import perturb_measure

    m = read_measure(args.file)
    out = perturb_measure(m, hg.rat(args.r), [hg.rat(x) for x in args.x], enforce_delta=not args.no_delta_check)
    _write(dumps(out), args.output)
    return OK


def cmd_gen(args) -> int:
    from .treeimm import gen_tree, tree_measure, tree_to_json

    t, f, r = gen_tree(args.seed, args.branches)
    _write(dumps(tree_measure(t, f, r)), args.output)
    if args.tree:
        Path(args.tree).write_text(tree_to_json(t, f, r), encoding="utf-8")
    return OK


def cmd_corpus(args) -> int:
    from .analysis import run_corpus

    rep = run_corpus(
        args.seed, args.count, args.max_branches, sums=args.sums, phi=not args.no_phi,
        perturb=args.perturb, include_fixtures=args.fixtures,
    )
    text = json.dumps(rep, indent=2) + "\n"
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    summary = {k: v for k, v in rep.items() if k != "falsifications"}
    summary["falsification_count"] = len(rep["falsifications"])
    _emit(summary)
    return OK if not rep["falsifications"] else FALSE


def cmd_fixtures(args) -> int:
    from .fixtures import FIXTURE_DIR, all_fixtures, write_fixtures

    directory = Path(args.output) if args.output else FIXTURE_DIR
    if args.check:
        stale = [
            name for name, m in all_fixtures().items()
            if not (directory / name).exists() or (directory / name).read_text(encoding="utf-8") != dumps(m)
        ]
        _emit({"stale": stale})
        return OK if not stale else FALSE
    for p in write_fixtures(directory):
        print(p)
    return OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hexmeasure", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def with_file(name, fn, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("file")
        p.set_defaults(fn=fn)
        return p

    with_file("validate", cmd_validate, "check a measure file")
    with_file("info", cmd_info, "weight, exit events, attachments, trace identity")
    with_file("rigid", cmd_rigid, "gentle-cycle rigidity test")
    p = with_file("decompose", cmd_decompose, "extremal decomposition of a rigid measure")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p = with_file("dual", cmd_dual, "dual measure")
    p.add_argument("-o", "--output", default="-")
    p = with_file("hive", cmd_hive, "hive function of a measure")
    p.add_argument("--at", nargs=2, metavar=("A", "B"), help="evaluate f at the point (A, B)")
    p.add_argument("--lattice", action="store_true", help="print the integer-point restriction")
    p = with_file("puzzle", cmd_puzzle, "build the puzzle")
    p.add_argument("--svg")
    p = with_file("render", cmd_render, "draw the support")
    p.add_argument("--svg", "-o", default="-")
    p = with_file("theorem", cmd_theorem, "check ext + ext* = att + 1")
    p.add_argument("--phi", action="store_true", help="cross-check with the rank of Phi")
    with_file("phi", cmd_phi, "matrix of Phi and its checks")
    p = with_file("perturb", cmd_perturb, "move attachment data")
    p.add_argument("--r", required=True)
    p.add_argument("--x", nargs="+", required=True)
    p.add_argument("--no-delta-check", action="store_true")
    p.add_argument("-o", "--output", default="-")

    p = sub.add_parser("gen", help="random tree measure")
    p.add_argument("--branches", type=int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--tree", help="also write the tree file here")
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("corpus", help="run the identity checks on a generated corpus")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--count", type=int, default=200)
    p.add_argument("--max-branches", type=int, default=6)
    p.add_argument("--sums", type=int, default=50)
    p.add_argument("--perturb", type=int, default=0, help="number of instances to perturb")
    p.add_argument("--no-phi", action="store_true")
    p.add_argument("--fixtures", action="store_true", help="add the non-rigid fixtures to rigidity checks")
    p.add_argument("--report")
    p.set_defaults(fn=cmd_corpus)

    p = sub.add_parser("fixtures", help="regenerate the shipped fixtures")
    p.add_argument("-o", "--output")
    p.add_argument("--check", action="store_true")
    p.set_defaults(fn=cmd_fixtures)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (InputError, InvalidMeasure, OSError) as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return BAD_INPUT
    except Falsification as exc:
        print(f"falsified: {exc}", file=sys.stderr)
        return FALSE
    except InvariantViolation as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return INTERNAL
    except ValueError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return BAD_INPUT


if __name__ == "__main__":
    sys.exit(main())
