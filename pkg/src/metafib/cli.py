"""Command-line interface: ``metafib eval | sweep | stats | plot``."""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from pathlib import Path

import numpy as np

from . import dsl, engine, genstats, mortality, svgplot
from .engine import Status
from .families import make_spec

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_LIMIT = 2

_SUFFIXES = {
    "": 1, "k": 10**3, "M": 10**6, "G": 10**9, "T": 10**12,
    "Ki": 2**10, "Mi": 2**20, "Gi": 2**30, "Ti": 2**40,
}
_NUM_RE = re.compile(r"^\s*(\d+)\s*(Ki|Mi|Gi|Ti|k|M|G|T)?\s*$")


def parse_size(text: str) -> int:
    """Integer with an optional k/M/G (powers of 10) or Ki/Mi/Gi (powers of 2) suffix."""
    m = _NUM_RE.match(text)
    if m is None:
        raise argparse.ArgumentTypeError(f"not a count: {text!r}")
    return int(m.group(1)) * _SUFFIXES[m.group(2) or ""]


def parse_k_range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition(":")
    try:
        a = parse_size(lo)
        b = parse_size(hi) if sep else a
    except argparse.ArgumentTypeError:
        raise argparse.ArgumentTypeError(f"bad k range {text!r}, expected A:B") from None
    return a, b


def physical_memory() -> int:
    try:
        return os.sysconf("SC_PAGE_SIZE") * os.sysconf("SC_PHYS_PAGES")
    except (ValueError, OSError, AttributeError):
        return 16 * 2**30


# --- terms CSV -------------------------------------------------------------


def write_terms(values: np.ndarray, path: Path | str, start: int = 1, chunk: int = 1 << 20) -> None:
    with open(path, "w", newline="") as fh:
        fh.write("n,value\n")
        for i in range(0, len(values), chunk):
            part = np.asarray(values[i : i + chunk], dtype=np.int64)
            n = np.arange(start + i, start + i + len(part), dtype=np.int64)
            fh.write("".join(f"{a},{b}\n" for a, b in zip(n.tolist(), part.tolist())))


def read_terms(path: Path | str) -> tuple[np.ndarray, np.ndarray]:
    """(n, value) arrays from a terms CSV."""
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if header != "n,value":
            raise ValueError(f"{path}: expected header 'n,value', got {header!r}")
        data = np.loadtxt(fh, delimiter=",", dtype=np.int64, ndmin=2)
    if data.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return data[:, 0], data[:, 1]


# --- argument parsing ------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_source(p: argparse.ArgumentParser, required: bool = True) -> None:
    g = p.add_mutually_exclusive_group(required=required)
    g.add_argument("--preset", help="q, qdl:d,l, conway:i, aij:i,j, hk:k, vc, qrs:r,s")
    g.add_argument("--rule-file", type=Path, help="file containing a recurrence definition")


def _add_limits(p: argparse.ArgumentParser, cap_default: int = engine.DEFAULT_CAP) -> None:
    p.add_argument("--cap", type=parse_size, default=cap_default, help="maximum number of terms")
    p.add_argument("--budget", type=parse_size, default=engine.DEFAULT_BUDGET,
                   help="bytes of term storage per run")
    p.add_argument("--width", type=int, choices=(32, 64), default=32, help="bits per stored term")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="metafib", description="Nested recurrence laboratory.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval", help="evaluate one recurrence and dump its terms")
    _add_source(p)
    _add_limits(p)
    p.add_argument("--out", type=Path, help="terms CSV (n,value)")

    p = sub.add_parser("sweep", help="L(k) for a range of k")
    p.add_argument("--k", type=parse_k_range, required=True, help="inclusive range A:B")
    _add_limits(p)
    p.add_argument("--jobs", type=int, default=1, help="worker threads")
    p.add_argument("--mem-limit", type=parse_size, default=None,
                   help="refuse if jobs x budget exceeds this (default: physical memory)")
    p.add_argument("--no-timing", action="store_true", help="leave wall_ms empty for reproducible output")
    p.add_argument("--out", type=Path, help="mortality CSV; stdout if omitted")

    p = sub.add_parser("stats", help="generational deviation statistics")
    _add_source(p, required=False)
    p.add_argument("--terms", type=Path, help="terms CSV instead of a preset")
    _add_limits(p, cap_default=genstats.DEFAULT_NMAX)
    p.add_argument("--n0", type=parse_size, default=genstats.DEFAULT_N0)
    p.add_argument("--nmax", type=parse_size, default=genstats.DEFAULT_NMAX)
    p.add_argument("--boundaries", help="comma-separated explicit generation boundaries")
    p.add_argument("--out", type=Path, help="stats CSV; stdout if omitted")

    p = sub.add_parser("plot", help="SVG scatter plot of terms or deviations")
    p.add_argument("inputs", nargs="+", type=Path, help="terms CSV files")
    p.add_argument("--source", choices=("terms", "deviations"), default="terms")
    p.add_argument("--label", action="append", default=[], help="series label (repeatable)")
    p.add_argument("--stride", type=parse_size, default=None)
    p.add_argument("--xmin", type=float)
    p.add_argument("--xmax", type=float)
    p.add_argument("--ymin", type=float)
    p.add_argument("--ymax", type=float)
    p.add_argument("--point-size", type=float, default=1.0)
    p.add_argument("--title", default="")
    p.add_argument("--out", type=Path, required=True)
    return parser


class UsageError(Exception):
    pass


def _load_spec(args) -> dsl.ValidatedSpec:
    try:
        if args.preset:
            return make_spec(args.preset)
        return dsl.load(args.rule_file.read_text(), label=args.rule_file.stem)
    except OSError as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:  # SpecError is a ValueError
        raise UsageError(str(exc)) from None


# --- subcommands -----------------------------------------------------------


def cmd_eval(args) -> int:
    spec = _load_spec(args)
    plan = engine.compile_plan(spec)
    try:
        history, outcome = engine.run(plan, cap=args.cap, budget=args.budget, width=args.width)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.out:
        write_terms(history.values(), args.out)
    summary = {"spec": dsl.pretty(spec) if len(spec.init) <= 32 else spec.label, **outcome.as_dict()}
    print(json.dumps(summary))
    if outcome.status in (Status.BUDGET_EXCEEDED, Status.OVERFLOW):
        return EXIT_LIMIT
    return EXIT_OK


def cmd_sweep(args) -> int:
    k_min, k_max = args.k
    limit = args.mem_limit if args.mem_limit is not None else physical_memory()
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    if args.jobs * args.budget > limit:
        raise UsageError(
            f"{args.jobs} jobs x {args.budget} bytes exceeds the memory limit of {limit} bytes"
        )
    try:
        config = mortality.SweepConfig(
            k_min, k_max, cap=args.cap, budget=args.budget, workers=args.jobs, width=args.width
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    records = mortality.sweep(config)
    text = mortality.format_csv(records, timing=not args.no_timing)
    if args.out:
        args.out.write_text(text, newline="")
    else:
        sys.stdout.write(text)
    died = [r for r in records if r.status is Status.DIED]
    if died:
        best = max(died, key=lambda r: r.L)
        print(f"# max L: k={best.k} L={best.L} (cap {args.cap})", file=sys.stderr if not args.out else sys.stdout)
    errors = [r for r in records if r.L is None]
    return EXIT_LIMIT if errors else EXIT_OK


def cmd_stats(args) -> int:
    if args.boundaries:
        try:
            scheme = genstats.GenerationScheme.explicit(
                [parse_size(b) for b in args.boundaries.split(",")]
            )
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(str(exc)) from None
    else:
        scheme = genstats.GenerationScheme.geometric(args.n0, args.nmax)
    try:
        intervals = genstats.segment(scheme)
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.terms:
        n, values = read_terms(args.terms)
        if len(n) and not np.array_equal(n, np.arange(1, len(n) + 1)):
            raise UsageError(f"{args.terms}: terms must be listed for n = 1, 2, 3, ...")
        label = args.terms.stem
    elif args.preset or args.rule_file:
        spec = _load_spec(args)
        cap = max(args.cap, spec.start_after + 1)
        history, outcome = engine.run(engine.compile_plan(spec), cap=cap, budget=args.budget, width=args.width)
        values = history.values()
        label = spec.label
    else:
        raise UsageError("one of --preset, --rule-file or --terms is required")

    need = intervals[-1][1]
    if need > len(values):
        print(f"error: generations need {need} terms but only {len(values)} are available",
              file=sys.stderr)
        return EXIT_LIMIT
    stats = genstats.generation_stats(values, scheme)
    text = genstats.format_csv(stats)
    if args.out:
        args.out.write_text(text, newline="")
    else:
        sys.stdout.write(text)
    print(json.dumps({
        "sequence": label,
        "alpha": [[t, a] for t, a in stats.alpha],
        "notes": stats.notes,
    }), file=sys.stdout if args.out else sys.stderr)
    return EXIT_OK


def cmd_plot(args) -> int:
    series = []
    for idx, path in enumerate(args.inputs):
        try:
            n, values = read_terms(path)
        except (OSError, ValueError) as exc:
            raise UsageError(str(exc)) from None
        y = values.astype(float) if args.source == "terms" else values - n / 2.0
        keep = np.ones(len(n), dtype=bool)
        if args.xmin is not None:
            keep &= n >= args.xmin
        if args.xmax is not None:
            keep &= n <= args.xmax
        if not keep.any():
            print(f"error: series {path} is empty", file=sys.stderr)
            return EXIT_LIMIT
        label = args.label[idx] if idx < len(args.label) else path.stem
        series.append(svgplot.Series(label, n[keep].astype(float), y[keep], stride=args.stride))

    def rng(lo, hi):
        return None if lo is None or hi is None else (lo, hi)

    spec = svgplot.PlotSpec(
        series,
        x_range=rng(args.xmin, args.xmax),
        y_range=rng(args.ymin, args.ymax),
        point_size=args.point_size,
        title=args.title,
    )
    svgplot.write_svg(spec, args.out)
    return EXIT_OK


COMMANDS = {"eval": cmd_eval, "sweep": cmd_sweep, "stats": cmd_stats, "plot": cmd_plot}


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse usage errors and --help
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"metafib {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
