"""Command-line entry point: ``diskjam <command> ...``.

Exit codes: 0 success (``analyze``: jammed), 1 bad input, 2 jam failure,
3 not jammed, 4 tolerance-ambiguous verdict.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from . import catalog as catalog_mod
from .dynamics import DriverConfig, JamFailure, jam, seed_random
from .experiments import binary_sweep, isostatic_experiment, write_jsonl
from .geometry import LatticeBasis, TricuspContainer
from .inversive import TriangulationError, complete_to_triangulation, inversive_profile, profile_to_dict
from .packing import OverlapError, SchemaError, dumps, read_packing, write_packing
from .render import RenderSpec, render_svg
from .rigidity import analyze

EXIT_OK, EXIT_INPUT, EXIT_JAM_FAILED, EXIT_NOT_JAMMED, EXIT_AMBIGUOUS = 0, 1, 2, 3, 4


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _floats(text: str, count: Optional[int] = None, what: str = "list") -> List[float]:
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"malformed {what}: {text!r}") from None
    if count is not None and len(vals) != count:
        raise InputError(f"{what} needs {count} comma-separated numbers")
    return vals


def _load(path: str):
    try:
        return read_packing(path)
    except (OSError, SchemaError, ValueError) as exc:
        raise InputError(f"cannot read packing {path}: {exc}") from None


def cmd_jam(args) -> int:
    if args.n < 1:
        raise InputError("--n must be at least 1")
    if args.container == "tricusp":
        container = TricuspContainer(1.0)
        mode = "tricusp"
    else:
        try:
            container = LatticeBasis(*_floats(args.lattice, 3, "--lattice"))
        except ValueError as exc:
            raise InputError(str(exc)) from None
        mode = args.mode
    ratios = _floats(args.ratios, args.n, "--ratios") if args.ratios else None
    try:
        P = seed_random(args.n, ratios, container, args.seed)
        Q, traj, report = jam(P, DriverConfig(seed=args.seed, mode=mode, max_iter=args.max_iter))
        code = EXIT_OK
    except JamFailure as exc:
        Q, traj, report = exc.packing, exc.trajectory, exc.report
        print(f"jam failed: {exc}", file=sys.stderr)
        code = EXIT_JAM_FAILED
    except ValueError as exc:
        raise InputError(str(exc)) from None
    except RuntimeError as exc:
        print(f"jam failed: {exc}", file=sys.stderr)
        return EXIT_JAM_FAILED
    meta = {"seed": args.seed, "mode": mode, "jammed": code == EXIT_OK, "reason": traj.reason}
    write_packing(Q.replace(meta=meta), args.out)
    if args.traj:
        traj.write_csv(args.traj)
    return code


def cmd_analyze(args) -> int:
    P = _load(args.file)
    mode = args.mode
    if mode is None:
        mode = "collective" if P.is_torus else "tricusp"
    try:
        report = analyze(P, mode)
    except (ValueError, OverlapError) as exc:
        raise InputError(str(exc)) from None
    sys.stdout.write(dumps(report.to_dict()) + "\n")
    if report.ambiguous:
        return EXIT_AMBIGUOUS
    return EXIT_OK if report.jammed else EXIT_NOT_JAMMED


def cmd_catalog(args) -> int:
    if args.list:
        print("\n".join(catalog_mod.names()))
        return EXIT_OK
    if not args.name or not args.out:
        raise InputError("catalog needs NAME and --out (or --list)")
    try:
        P = catalog_mod.catalog(args.name)
    except KeyError as exc:
        raise InputError(exc.args[0]) from None
    write_packing(P, args.out)
    return EXIT_OK


def cmd_sweep(args) -> int:
    try:
        res = binary_sweep(args.r_from, args.r_to, args.steps)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(res.to_csv())
    return EXIT_OK


def cmd_experiment(args) -> int:
    try:
        records, summary = isostatic_experiment(args.n, args.trials, args.spread, args.lattice, args.seed,
                                                args.mode, args.workers)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    write_jsonl(records, args.out)
    print(json.dumps(summary.__dict__, sort_keys=True))
    return EXIT_OK


def cmd_render(args) -> int:
    P = _load(args.file)
    try:
        spec = RenderSpec(copies=args.copies, stress=args.stress, diagonals=args.triangulate, size=args.size)
        svg = render_svg(P, spec)
    except (ValueError, TriangulationError) as exc:
        raise InputError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(svg)
    return EXIT_OK


def cmd_inversive(args) -> int:
    P = _load(args.file)
    try:
        T = complete_to_triangulation(P)
        prof = inversive_profile(P, T)
    except (TriangulationError, OverlapError) as exc:
        raise InputError(str(exc)) from None
    with open(args.out, "w", encoding="utf-8") as fh:
        fh.write(dumps(profile_to_dict(prof, T)) + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="diskjam", description="Jam and analyze disk packings on flat tori and in the tricusp.")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    j = sub.add_parser("jam", help="grow a random seed packing until it jams")
    j.add_argument("--container", choices=("torus", "tricusp"), default="torus")
    j.add_argument("--lattice", default="1,0,1", help="a,b,c")
    j.add_argument("--n", type=int, required=True)
    j.add_argument("--ratios", help="comma-separated radius ratios (default all equal)")
    j.add_argument("--seed", type=int, required=True)
    j.add_argument("--mode", choices=("collective", "strict"), default="collective")
    j.add_argument("--max-iter", type=int, default=2000)
    j.add_argument("--out", required=True)
    j.add_argument("--traj")
    j.set_defaults(func=cmd_jam)

    a = sub.add_parser("analyze", help="print a jamming report")
    a.add_argument("file")
    a.add_argument("--mode", choices=("collective", "strict", "tricusp"))
    a.set_defaults(func=cmd_analyze)

    c = sub.add_parser("catalog", help="write a named packing")
    c.add_argument("name", nargs="?")
    c.add_argument("--out")
    c.add_argument("--list", action="store_true")
    c.set_defaults(func=cmd_catalog)

    s = sub.add_parser("sweep-binary", help="binary density curve as CSV")
    s.add_argument("--from", dest="r_from", type=float, required=True)
    s.add_argument("--to", dest="r_to", type=float, required=True)
    s.add_argument("--steps", type=int, required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_sweep)

    e = sub.add_parser("experiment", help="isostatic experiment, one JSON record per trial")
    e.add_argument("--n", type=int, required=True)
    e.add_argument("--trials", type=int, required=True)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--lattice", choices=("generic", "square", "rect"), default="generic")
    e.add_argument("--spread", type=float, default=0.1)
    e.add_argument("--mode", choices=("collective", "strict"), default="collective")
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_experiment)

    r = sub.add_parser("render", help="draw a packing as SVG")
    r.add_argument("file")
    r.add_argument("--copies", type=int, default=1)
    r.add_argument("--size", type=int, default=800)
    r.add_argument("--stress", action="store_true")
    r.add_argument("--triangulate", action="store_true")
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_render)

    v = sub.add_parser("inversive", help="triangulate and list inversive distances")
    v.add_argument("file")
    v.add_argument("--out", required=True)
    v.set_defaults(func=cmd_inversive)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except InputError as exc:
        print(f"diskjam: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"diskjam: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
