"""Command line entry point: ``semigrouplab <command> [flags]``.

Exit codes: 0 success, 1 a requested check failed, 2 usage or input error,
3 resource cap exceeded.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from typing import Optional, Sequence

import numpy as np

from . import io as sio
from .experiments import DEFAULT_INNER_C, DEFAULT_OUTER_C, MODELS, TrialConfig, auto_box, sweep
from .geometry import (
    HyperboloidRegion,
    asymptotic_count,
    box_net,
    count_region,
    enumerate_region,
    hyperboloid_level,
    hyperplane_net,
    lattice_count_sandwich,
    region_volume,
    verify_box_cover,
    verify_hyperplane_cover,
)
from .lattice import MAX_CELLS_ENV, Box, ResourceLimitError
from .partitions import DIVISOR, EULER, meinardus_exponent_fit, ptn_table
from .sampling import RandomSetSpec, parse_seed, sample
from .semigroup import closure_in_box, gap_report, minimal_generators, subset_sums_in_box, suggest_box

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_RESOURCE = 0, 1, 2, 3


class UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 as well; keep it explicit
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _parse_box(text: str, d: int, p: Optional[float], outer_C: float) -> Box:
    if text == "auto":
        if p is None:
            raise UsageError("--box auto needs --p")
        return auto_box(d, p, outer_C)
    try:
        ext = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad --box {text!r}; use comma-separated extents or 'auto'") from None
    if len(ext) == 1:
        ext = ext * d
    if len(ext) != d:
        raise UsageError(f"--box has {len(ext)} extents, expected {d}")
    return Box(ext)


def _parse_points(text: str, d: int) -> np.ndarray:
    text = text.strip()
    if not text:
        return np.empty((0, d), dtype=np.int64)
    if d == 1 and ";" not in text:
        groups = [[int(x)] for x in text.split(",")]
    else:
        groups = [[int(x) for x in g.split(",")] for g in text.split(";") if g.strip()]
    if any(len(g) != d for g in groups):
        raise UsageError(f"every point in --points needs {d} coordinates")
    return np.asarray(groups, dtype=np.int64).reshape(-1, d)


def _parse_range(text: str) -> tuple[int, int]:
    try:
        lo, hi = (int(x) for x in text.split(":"))
    except ValueError:
        raise UsageError(f"bad range {text!r}; use lo:hi") from None
    return lo, hi


def _emit(args, doc) -> None:
    sio.write_text(sio.dumps(doc), args.out, sys.stdout)


# commands -------------------------------------------------------------------


def cmd_sample(args) -> int:
    box = _parse_box(args.box, args.d, args.p, args.outer_C)
    spec = RandomSetSpec(args.d, args.p, box, parse_seed(args.seed), args.include_origin)
    _emit(args, sio.sample_doc(sample(spec)))
    return EXIT_OK


def _gap_inputs(args):
    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            d, box, pts = sio.read_sample(fh.read())
        if args.box:
            box = _parse_box(args.box, d, None, args.outer_C)
        return d, box, pts, {"input": args.input}
    if args.d is None:
        raise UsageError("gaps needs --input or --d")
    if args.points is not None:
        pts = _parse_points(args.points, args.d)
        box = _parse_box(args.box, args.d, args.p, args.outer_C) if args.box else suggest_box(pts, args.d)
        return args.d, box, pts, {"points": pts.tolist()}
    if args.p is None:
        raise UsageError("gaps needs --input, --points or --p")
    box = _parse_box(args.box or "auto", args.d, args.p, args.outer_C)
    spec = RandomSetSpec(args.d, args.p, box, parse_seed(args.seed))
    return args.d, box, sample(spec).points, sio.spec_config(spec)


def cmd_gaps(args) -> int:
    d, box, pts, source = _gap_inputs(args)
    config = {
        "d": d, "extents": list(box.extents), "model": args.model,
        "collect_gaps": args.collect_gaps, **source,
    }
    reports = {}
    failed = False
    if args.model in ("semigroup", "both"):
        S = closure_in_box(pts, box)
        rep = gap_report(S, args.collect_gaps, args.max_gap_points)
        mins = minimal_generators(S) if args.minimal else None
        reports["semigroup"] = sio.gap_report_body(rep, mins)
        failed |= args.require_certificate and not rep.certified
        if args.gap_csv and S.grid.box.d >= 1:
            sio.write_text(
                sio.points_csv("gap_points", config, np.argwhere(~S.grid.bits)), args.gap_csv, sys.stdout
            )
    if args.model in ("subset_sums", "both"):
        F = subset_sums_in_box(pts, box)
        reports["subset_sums"] = sio.gap_report_body(gap_report(F, args.collect_gaps, args.max_gap_points))
        failed |= args.require_certificate and args.model == "subset_sums"
    _emit(args, sio.document("gap_report", config, {"reports": reports}))
    if failed:
        print("certificate required but not obtained", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


def cmd_region(args) -> int:
    if args.L is not None and args.Z is not None:
        L, Z = args.L, args.Z
        config = {"d": args.d, "L": L, "Z": Z}
    elif args.p is not None:
        if not 0.0 < args.p < 1.0:
            raise UsageError("p out of range")
        L, Z = math.log(1.0 / args.p), hyperboloid_level(args.d, args.p, args.C)
        config = {"d": args.d, "p": args.p, "C": args.C, "L": L, "Z": Z}
    else:
        raise UsageError("region needs --L and --Z, or --p (with --C)")
    R = HyperboloidRegion(args.d, L, Z)
    body = {"count": count_region(R)}
    if args.volume:
        body["volume"] = region_volume(args.d, L, Z)
    if args.sandwich:
        if args.p is None:
            raise UsageError("--sandwich needs --p and --C")
        sw = lattice_count_sandwich(args.d, args.p, args.C)
        body["sandwich"] = {
            **sw._asdict(),
            "holds": sw.lower <= sw.exact <= sw.upper,
            "asymptotic": asymptotic_count(args.d, args.p, args.C),
        }
    if args.enumerate:
        sio.write_text(sio.points_csv("region_points", config, enumerate_region(R)), args.enumerate, sys.stdout)
    _emit(args, sio.document("region", config, body))
    return EXIT_OK


def cmd_partitions(args) -> int:
    table = ptn_table(args.d, args.nmax, args.method)
    config = {"d": args.d, "nmax": args.nmax, "method": args.method}
    extra = []
    if args.fit:
        lo, hi = _parse_range(args.fit)
        fit = meinardus_exponent_fit(table, lo, hi)
        config["fit"] = [lo, hi]
        extra.append("fit " + json.dumps({**fit._asdict(), "target": args.d / (args.d + 1)}, sort_keys=True))
    text = sio.csv_with_echo("partitions", config, sio.PARTITION_COLUMNS, sio.partition_rows(table), extra)
    sio.write_text(text, args.out, sys.stdout)
    return EXIT_OK


def cmd_cover(args) -> int:
    config = {"d": args.d, "p": args.p, "Z": args.Z, "net": args.net}
    if args.net == "hyperplane":
        res = verify_hyperplane_cover(args.d, args.p, args.Z)
        net = hyperplane_net(args.d, args.p, args.Z)
    else:
        config.update(kappa=args.kappa, probe=args.probe)
        res = verify_box_cover(args.d, args.p, args.Z, args.kappa, args.probe)
        net = box_net(args.d, args.p, args.Z, args.kappa)
    body = {"holds": res.holds, "witness": res.witness, "checked": res.checked, **sio.net_body(net)}
    _emit(args, sio.document("cover", config, body))
    return EXIT_OK if res.holds else EXIT_CHECK


def _check_assertions(table, requested: Sequence[str]) -> list[dict]:
    out = []
    for item in requested:
        name, _, arg = item.partition("=")
        if name == "certified":
            ok = all(r.certified for _, _, r in table.rows if r.certified is not None)
        elif name == "no-errors":
            ok = all(r.error is None for _, _, r in table.rows)
        elif name == "slope":
            try:
                d, lo, hi = arg.split(":")
                d, lo, hi = int(d), float(lo), float(hi)
            except ValueError:
                raise UsageError("use --assert slope=D:LO:HI") from None
            fits = [f for f in table.fits if f.d == d]
            ok = bool(fits) and lo <= fits[0].slope <= hi
        else:
            raise UsageError(f"unknown assertion {item!r}")
        out.append({"assertion": item, "passed": bool(ok)})
    return out


def cmd_sweep(args) -> int:
    with open(args.grid, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, list) or not raw:
        raise UsageError("grid file must be a nonempty JSON list of {\"d\":..,\"p\":..}")
    grid = [(int(c["d"]), float(c["p"])) for c in raw]
    box = None
    if args.box:
        box = tuple(int(x) for x in args.box.split(","))
    template = TrialConfig(
        grid[0][0], grid[0][1], model=args.model, inner_c=args.inner_c, outer_C=args.outer_C, box=box
        if box and len(box) == grid[0][0] else None,
    )
    table = sweep(grid, args.trials, args.seed_base, template, jobs=args.jobs)
    config = {
        "grid": [{"d": d, "p": p} for d, p in grid], "trials": args.trials,
        "seed_base": table.seed_base, "model": args.model, "inner_c": args.inner_c,
        "outer_C": args.outer_C, "box": list(box) if box else "auto",
        "seed_scheme": "SeedSequence(seed_base, spawn_key=(cell, trial)).generate_state(1, uint64)[0]",
    }
    checks = _check_assertions(table, args.assertions or [])
    if args.out_csv:
        sio.write_text(sio.sweep_csv(table, config), args.out_csv, sys.stdout)
    doc = sio.sweep_summary_doc(table, config, checks)
    sio.write_text(sio.dumps(doc), args.out_json, sys.stdout)
    return EXIT_OK if all(c["passed"] for c in checks) else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="semigrouplab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common_out(p):
        p.add_argument("--out", default=None, help="output path (default stdout)")

    p = sub.add_parser("sample", help="sample a p-random subset of a box")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--seed", default="0", help="64-bit seed, decimal or 0x-hex")
    p.add_argument("--box", default="auto", help="comma-separated extents or 'auto'")
    p.add_argument("--outer-C", dest="outer_C", type=float, default=DEFAULT_OUTER_C)
    p.add_argument("--include-origin", action="store_true")
    common_out(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("gaps", help="gap report of <A> and/or FS(A)")
    p.add_argument("--input", help="sample JSON written by 'sample'")
    p.add_argument("--d", type=int)
    p.add_argument("--points", help="inline generators, e.g. '3,5' (d=1) or '2,0;0,3'")
    p.add_argument("--p", type=float)
    p.add_argument("--seed", default="0")
    p.add_argument("--box", default=None)
    p.add_argument("--outer-C", dest="outer_C", type=float, default=DEFAULT_OUTER_C)
    p.add_argument("--model", choices=("semigroup", "subset_sums", "fs", "both"), default="semigroup")
    p.add_argument("--collect-gaps", action="store_true")
    p.add_argument("--max-gap-points", type=int, default=10**6)
    p.add_argument("--gap-csv", help="also write semigroup gap points as CSV")
    p.add_argument("--minimal", action="store_true", help="include minimal generators")
    p.add_argument("--require-certificate", action="store_true")
    common_out(p)
    p.set_defaults(func=cmd_gaps)

    p = sub.add_parser("region", help="hyperboloid region count, volume and sandwich")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--L", type=float)
    p.add_argument("--Z", type=float)
    p.add_argument("--volume", action="store_true")
    p.add_argument("--sandwich", action="store_true")
    p.add_argument("--enumerate", metavar="CSV", help="write the region's points to CSV")
    common_out(p)
    p.set_defaults(func=cmd_region)

    p = sub.add_parser("partitions", help="colored partition table as CSV")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--method", choices=(DIVISOR, EULER), default=DIVISOR)
    p.add_argument("--fit", metavar="LO:HI")
    common_out(p)
    p.set_defaults(func=cmd_partitions)

    p = sub.add_parser("cover", help="verify a dyadic covering net")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--Z", type=float, required=True)
    p.add_argument("--net", choices=("hyperplane", "box"), default="hyperplane")
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--probe", type=int, default=256)
    common_out(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("sweep", help="Monte Carlo sweep over a (d, p) grid")
    p.add_argument("--grid", required=True, help='JSON file: [{"d":1,"p":0.05}, ...]')
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--seed-base", dest="seed_base", default="0")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--model", choices=MODELS, default="both")
    p.add_argument("--inner-c", dest="inner_c", type=float, default=DEFAULT_INNER_C)
    p.add_argument("--outer-C", dest="outer_C", type=float, default=DEFAULT_OUTER_C)
    p.add_argument("--box", default=None, help="fixed extents instead of the auto box")
    p.add_argument("--out-csv", dest="out_csv")
    p.add_argument("--out-json", dest="out_json")
    p.add_argument(
        "--assert", dest="assertions", action="append",
        help="certified | no-errors | slope=D:LO:HI (repeatable)",
    )
    p.set_defaults(func=cmd_sweep)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "model", None) == "fs":
        args.model = "subset_sums"
    try:
        return args.func(args)
    except ResourceLimitError as exc:
        print(f"semigrouplab: {exc} (cap set by {MAX_CELLS_ENV})", file=sys.stderr)
        return EXIT_RESOURCE
    except (ValueError, OSError, KeyError, TypeError) as exc:
        print(f"semigrouplab: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
