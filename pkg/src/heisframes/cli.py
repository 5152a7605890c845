"""Command-line driver: ``heisframes <command> [options]``.

Exit status is 0 when every check passes, 1 for usage or parse errors and 2
when a mathematical check fails. Reports are JSON documents with sorted keys,
so identical arguments and seed give byte-identical output.

Commands
--------
group-check   random-triple checks of the group law against the matrix oracle
gabor         Parseval criteria for a Gabor window on Z x lambda Z
tile-check    translation and dilation congruence of a spectral set
build         write a Shannon-type field file for a spectral set
eval          evaluate a field at points from a CSV file with header ``x,y,z``;
              output columns ``x,y,z,Re(f),Im(f),abs_err_vs_closed_form``
              (error is nan off the example field and at y = 0, z != 0)
frame-check   truncated Parseval sum of the full wavelet system, with a
              convergence table (optional CSV columns
              ``k1,k2,k3,m2,m3,doubled,sum,defect``)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import warnings
from typing import Callable, Sequence

import numpy as np

from .frames import FrameConfig, convergence_table, parseval_sum
from .gabor import (
    CriterionInapplicable,
    GaborLattice,
    density_admissible,
    parseval_defect,
    shannon_window,
    tiling_parseval_check,
    window_norm_law_check,
)
from .group import (
    DilationAutomorphism,
    GroupElement,
    conjugate,
    from_matrix,
    inverse,
    multiply,
    to_matrix,
)
from .linefn import PiecewiseExpFunction, indicator, random_piecewise
from .plancherel import (
    eval_example_closed_form,
    field_to_dict,
    field_norm_sq,
    inverse_transform,
    load_field,
    save_field,
    shannon_field,
    write_eval_csv,
)
from .spectral import (
    is_dilation_congruent_shannon,
    is_translation_congruent_unit,
    measure,
    parse_set,
)

EXIT_OK, EXIT_USAGE, EXIT_FAILED = 0, 1, 2
GROUP_TOL = 1e-12


class UsageError(Exception):
    """Bad input detected before any computation."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# argument parsing helpers ----------------------------------------------------

def parse_trunc(text: str) -> tuple[int, int, int, int]:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 4:
        raise argparse.ArgumentTypeError("--trunc needs four integers k2,k3,m2,m3")
    try:
        vals = tuple(int(p) for p in parts)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--trunc {text!r}: not integers") from None
    if any(v < 0 for v in vals):
        raise argparse.ArgumentTypeError("--trunc bounds must be nonnegative")
    return vals


def parse_m_range(text: str) -> tuple[int, int]:
    if ".." not in text:
        raise argparse.ArgumentTypeError("--m-range must look like lo..hi")
    lo, hi = text.split("..", 1)
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--m-range {text!r}: not integers") from None
    if lo_i > hi_i:
        raise argparse.ArgumentTypeError("--m-range needs lo <= hi")
    return lo_i, hi_i


def parse_window(text: str, lam: float) -> PiecewiseExpFunction:
    """``shannon`` or ``indicator:lo,hi[,amplitude]``."""
    if text == "shannon":
        return shannon_window(lam)
    if text.startswith("indicator:"):
        vals = text.split(":", 1)[1].split(",")
        try:
            nums = [float(v) for v in vals]
        except ValueError:
            raise UsageError(f"window {text!r}: not numbers") from None
        if len(nums) not in (2, 3) or not nums[0] < nums[1]:
            raise UsageError(f"window {text!r}: need indicator:lo,hi[,amplitude] with lo < hi")
        return indicator(*nums)
    raise UsageError(f"unknown window {text!r}; use 'shannon' or 'indicator:lo,hi[,amp]'")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be >= 0")
    return v


# commands --------------------------------------------------------------------

def run_group_check(trials: int, seed: int,
                    multiply_fn: Callable[[GroupElement, GroupElement], GroupElement] = multiply,
                    tol: float = GROUP_TOL) -> dict:
    """Associativity, matrix oracle and automorphism law on random triples.

    ``multiply_fn`` is injectable so a corrupted law can be fed in to check
    that failures are caught.
    """
    rng = np.random.default_rng(seed)
    d = DilationAutomorphism(math.sqrt(2.0), math.sqrt(2.0))
    report = {"trials": trials, "seed": seed, "passed": True, "warnings": [], "failure": None}
    if trials == 0:
        report["warnings"].append("trials=0: nothing checked")
        return report
    worst = 0.0
    for i in range(trials):
        a, b, c = (GroupElement(*rng.uniform(-10, 10, 3)) for _ in range(3))
        ab = multiply_fn(a, b)
        checks = {
            "associativity": _dist(multiply_fn(ab, c), multiply_fn(a, multiply_fn(b, c))),
            "matrix_oracle": _dist(ab, from_matrix(to_matrix(a) @ to_matrix(b))),
            "inverse": _dist(multiply_fn(a, inverse(a)), GroupElement(0.0, 0.0, 0.0)),
            "conjugate_oracle": _dist(conjugate(d, a), from_matrix(d.matrix() @ to_matrix(a)
                                                                   @ np.linalg.inv(d.matrix()))),
            "automorphism": _dist(conjugate(d, ab), multiply_fn(conjugate(d, a), conjugate(d, b))),
        }
        for name, err in checks.items():
            # absolute tolerance scaled by the magnitude of the entries involved
            scale = 1.0 + max(abs(v) for g in (a, b, c, ab) for v in (g.x, g.y, g.z))
            worst = max(worst, err / scale ** 2)
            if err > tol * scale ** 2:
                report["passed"] = False
                report["failure"] = {"trial": i, "check": name, "error": err,
                                     "a": _elem(a), "b": _elem(b), "c": _elem(c)}
                report["max_rel_error"] = worst
                return report
    report["max_rel_error"] = worst
    return report


def _dist(g: GroupElement, h: GroupElement) -> float:
    return max(abs(g.x - h.x), abs(g.y - h.y), abs(g.z - h.z))


def _elem(g: GroupElement) -> list[float]:
    return [float(g.x), float(g.y), float(g.z)]


def run_gabor(lam: float, window: PiecewiseExpFunction, K: int, seed: int, tol: float) -> dict:
    lat = GaborLattice(1.0, lam)
    report: dict = {"lambda": lam, "alpha": 1.0, "beta": lam, "volume": lat.volume, "K": K}
    report["density_admissible"] = density_admissible(lat)
    report["window_norm_law"] = window_norm_law_check(window, lat)
    try:
        report["tiling_parseval"] = tiling_parseval_check(window, lat)
    except CriterionInapplicable as exc:
        report["tiling_parseval"] = None
        report["tiling_note"] = str(exc)
    rng = np.random.default_rng(seed)
    tests = [indicator(0.0, 1.0)] + [random_piecewise(rng) for _ in range(3)]
    ladder = sorted({max(1, K // 8), max(1, K // 4), max(1, K // 2), K})
    report["defects"] = [{"K": k, "defect": parseval_defect(window, lat, tests, k)} for k in ladder]
    final = report["defects"][-1]["defect"]
    report["passed"] = bool(report["density_admissible"] and report["tiling_parseval"] is not False
                            and final <= tol)
    return report


def run_tile_check(text: str) -> dict:
    s = parse_set(text)
    tr = is_translation_congruent_unit(s)
    dl = is_dilation_congruent_shannon(s)
    return {
        "set": s.to_text(),
        "measure": measure(s),
        "translation_congruent": tr.ok,
        "translation_witness": [[list(p), k] for p, k in tr.witness],
        "translation_reason": tr.reason,
        "dilation_congruent": dl.ok,
        "dilation_witness": [[list(p), k] for p, k in dl.witness],
        "dilation_reason": dl.reason,
        "passed": tr.ok and dl.ok,
    }


def _is_example_field(field) -> bool:
    """Does every node carry ``|lam|^{1/4} chi_[0,1)`` in both slots?"""
    for lam, u, v in zip(field.nodes, field.u, field.v):
        ref = indicator(0.0, 1.0, abs(lam) ** 0.25).normal_form().to_records()
        if u.normal_form().to_records() != ref or v.normal_form().to_records() != ref:
            return False
    return True


def run_eval(field, points: Sequence[tuple[float, float, float]]) -> list[list[float]]:
    example = _is_example_field(field)
    rule = field.grid.rule
    rows = []
    for x, y, z in points:
        val = inverse_transform(field, GroupElement(x, y, z))
        # the y = 0 closed form carries no z dependence; it is only comparable at z = 0
        if example and (y != 0 or z == 0):
            ref = eval_example_closed_form(x, y, z, field.spectral_set,
                                           max(10 * rule.get("nodes_per_interval", 64), 64),
                                           max(rule.get("panels", 1), 1))
            err = abs(val - ref)
        else:
            err = math.nan
        rows.append([x, y, z, val.real, val.imag, err])
    return rows


def read_points(path: str) -> list[tuple[float, float, float]]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames[:3]] != ["x", "y", "z"]:
            raise UsageError(f"{path}: points file needs the header x,y,z")
        pts = []
        for n, row in enumerate(reader, start=2):
            try:
                pts.append((float(row["x"]), float(row["y"]), float(row["z"])))
            except (TypeError, ValueError):
                raise UsageError(f"{path}:{n}: bad point {row}") from None
    return pts


def run_frame_check(h, f, cfg: FrameConfig, levels: int, workers: int) -> dict:
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        total, defect = parseval_sum(h, f, cfg, workers=workers)
        table = convergence_table(h, f, cfg, levels=levels, workers=workers)
    target = field_norm_sq(h)
    bessel = total <= target * (1 + 1e-9)
    sums = [row["sum"] for row in table if row["doubled"] in ("none", "all")]
    monotone = all(b >= a * (1 - 1e-12) for a, b in zip(sums, sums[1:]))
    return {
        "config": {"bounds": list(cfg.bounds), "m_values": list(cfg.m_values), "tol": cfg.tol},
        "h_norm_sq": target,
        "sum": total,
        "defect": defect,
        "bessel_bound": bessel,
        "monotone": monotone,
        "convergence": table,
        "warnings": sorted({str(w.message) for w in caught}),
        "passed": bool(bessel and monotone and defect < cfg.tol),
    }


# plumbing --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    common.add_argument("--out", help="write the report/output here instead of stdout")
    common.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                        help="worker threads (default: available cores)")

    parser = _Parser(prog="heisframes", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("group-check", parents=[common], help="group law vs matrix oracle")
    p.add_argument("--trials", type=_positive_int, default=10000)

    p = sub.add_parser("gabor", parents=[common], help="Gabor Parseval criteria on Z x lambda Z")
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--window", default="shannon", help="'shannon' or 'indicator:lo,hi[,amp]'")
    p.add_argument("--K", type=int, default=2000, help="modulation truncation")
    p.add_argument("--tol", type=float, default=1e-2)

    p = sub.add_parser("tile-check", parents=[common], help="congruence checks for a spectral set")
    p.add_argument("--set", dest="set_text", required=True, help='e.g. "[-1,-0.5)u(0.5,1]"')

    p = sub.add_parser("build", parents=[common], help="write a field file")
    p.add_argument("--set", dest="set_text", default="[-1,-0.5)u(0.5,1]")
    p.add_argument("--grid-nodes", type=int, default=64, help="Gauss nodes per panel")
    p.add_argument("--panels", type=int, default=1)
    p.add_argument("--rule", choices=("gauss", "midpoint"), default="gauss")

    p = sub.add_parser("eval", parents=[common], help="evaluate a field at CSV points")
    p.add_argument("field")
    p.add_argument("points", help="CSV with header x,y,z")

    p = sub.add_parser("frame-check", parents=[common], help="truncated Parseval sum of the frame")
    p.add_argument("fields", nargs="+", help="field file for h, optionally a second one for f")
    p.add_argument("--trunc", type=parse_trunc, default=(8, 8, 8, 8), help="k2,k3,m2,m3")
    p.add_argument("--k1", type=_positive_int, default=8)
    p.add_argument("--m-range", type=parse_m_range, default=(-1, 1), help="lo..hi")
    p.add_argument("--tol", type=float, default=0.05)
    p.add_argument("--levels", type=int, default=2, help="rows of the doubling table")
    p.add_argument("--csv", help="also write the convergence table as CSV")
    return parser


def _dump(doc, out: str | None) -> None:
    text = json.dumps(doc, sort_keys=True, indent=2, allow_nan=True) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _status(report: dict) -> int:
    return EXIT_OK if report["passed"] else EXIT_FAILED


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _dispatch(args)
    except (UsageError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"heisframes {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _dispatch(args) -> int:
    if args.command == "group-check":
        report = run_group_check(args.trials, args.seed)
        for w in report["warnings"]:
            print(f"warning: {w}", file=sys.stderr)
        if report["failure"]:
            print(f"group-check failed: {report['failure']}", file=sys.stderr)
        _dump(report, args.out)
        return _status(report)

    if args.command == "gabor":
        if args.lam == 0:
            raise UsageError("--lambda must be nonzero")
        if args.K < 1:
            raise UsageError("--K must be at least 1")
        window = parse_window(args.window, args.lam)
        report = run_gabor(args.lam, window, args.K, args.seed, args.tol)
        _dump(report, args.out)
        return _status(report)

    if args.command == "tile-check":
        report = run_tile_check(args.set_text)
        _dump(report, args.out)
        return _status(report)

    if args.command == "build":
        if args.grid_nodes < 1 or args.panels < 1:
            raise UsageError("--grid-nodes and --panels must be positive")
        field = shannon_field(parse_set(args.set_text), args.rule, args.grid_nodes, args.panels)
        if args.out:
            save_field(field, args.out)
        else:
            _dump(field_to_dict(field), None)
        return EXIT_OK

    if args.command == "eval":
        field = load_field(args.field)
        rows = run_eval(field, read_points(args.points))
        buf = io.StringIO()
        write_eval_csv(buf, rows)
        if args.out:
            with open(args.out, "w") as fh:
                fh.write(buf.getvalue())
        else:
            sys.stdout.write(buf.getvalue())
        return EXIT_OK

    if args.command == "frame-check":
        if len(args.fields) > 2:
            raise UsageError("frame-check takes one or two field files (h [f])")
        if args.levels < 1:
            raise UsageError("--levels must be at least 1")
        h = load_field(args.fields[0])
        f = load_field(args.fields[1]) if len(args.fields) == 2 else h
        k2, k3, m2, m3 = args.trunc
        cfg = FrameConfig.from_range((args.k1, k2, k3, m2, m3), *args.m_range, tol=args.tol)
        report = run_frame_check(h, f, cfg, args.levels, max(args.threads, 1))
        if args.csv:
            with open(args.csv, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["k1", "k2", "k3", "m2", "m3", "doubled", "sum", "defect"])
                for row in report["convergence"]:
                    w.writerow([*row["bounds"], row["doubled"], repr(row["sum"]), repr(row["defect"])])
        _dump(report, args.out)
        return _status(report)

    raise UsageError(f"unknown command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
