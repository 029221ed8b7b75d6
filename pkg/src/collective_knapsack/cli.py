"""Command-line front end.

    ck simulate CONFIG [--out results.csv] [--seed N] [--samples N] [--threads N] [--paper-scale]
    ck analytic CONFIG [--out results.csv]
    ck solve --values 6 5 10 9 7 --weights 2 3 3 4 7 --capacity 15
    ck plot results.csv --out figure.svg [--y-range 300 345]

Exit status is 0 on success, 2 for bad input and 3 when the knapsack memory
guard or the quadrature tolerance stops a run.
"""

from __future__ import annotations

import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path

from . import analytic, simulator
from .config import PAPER_SCALE_SAMPLES, ConfigError, RunManifest, RunSpec, parse_config
from .knapsack import KnapsackInstance, KnapsackTooLarge, solve
from .plotting import format_csv, plot_results
from .simulator import SweepRow

log = logging.getLogger("collective_knapsack")


def run_simulate(spec: RunSpec, threads: int | None = None) -> list[SweepRow]:
    return simulator.sweep(
        spec.base, spec.beta_grid, spec.methods, spec.n_groups,
        common_random_numbers=spec.common_random_numbers, threads=threads,
    )


def run_analytic(spec: RunSpec, threads: int | None = None) -> list[SweepRow]:
    """Quadrature rows; the median with N_s != 3 falls back to Monte Carlo.

    Quadrature rows report ``samples = 0`` and the achieved quadrature error
    in the ``std_error`` column.
    """
    b = spec.base
    a_val, b_val = (b.values or (1.0, 2.0))
    rows = []
    cells = simulator.sweep_cells(b, spec.beta_grid, spec.methods, spec.n_groups, spec.common_random_numbers)
    for cell in cells:
        name = cell.method.name
        if name == "median" and cell.n_groups != 3:
            est = simulator.estimate_performance(cell, threads)
            mean, err, n = est.mean, est.std_error, est.samples
        else:
            scen = analytic.TwoProjectScenario(a_val, b_val, cell.panel(), cell.t_min, cell.t_max, cell.kappa)
            mean, err = analytic.performance_two(scen, name, spec.quad, full_output=True)
            n = 0
        rows.append(SweepRow(name, cell.n_groups, cell.beta, cell.cost_label, cell.kappa, cell.r, n, mean, err))
    return rows


def _write_outputs(rows, spec: RunSpec, out: str):
    manifest = RunManifest.for_spec(spec)
    text = format_csv(rows, manifest.csv_preamble())
    if out == "-":
        sys.stdout.write(text)
        return
    path = Path(out)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(text.encode("utf-8"))
    path.with_name(path.name + ".manifest.json").write_text(manifest.to_json(), encoding="utf-8")
    log.info("wrote %s (%d rows)", path, len(rows))


def _cmd_run(args, runner) -> int:
    spec = parse_config(args.config, mode=args.command)
    samples = PAPER_SCALE_SAMPLES if args.paper_scale else args.samples
    spec = spec.with_overrides(seed=args.seed, samples=samples)
    rows = runner(spec, args.threads)
    _write_outputs(rows, spec, args.out or Path(args.config).with_suffix(".csv").name)
    return 0


def _cmd_solve(args) -> int:
    if len(args.values) != len(args.weights):
        raise ConfigError("values and weights differ in length")
    inst = KnapsackInstance(
        tuple(float(v) for v in args.values),
        tuple(Fraction(w) for w in args.weights),
        Fraction(args.capacity),
    )
    sel = solve(inst)
    items = " ".join(str(i + 1) for i in sel.indices)
    print(f"items: {items}")
    print(f"value: {sel.total_value:g}")
    print(f"weight: {sel.total_weight}")
    return 0


def _cmd_plot(args) -> int:
    y_range = tuple(args.y_range) if args.y_range else None
    plot_results(args.csv, args.out, y_range=y_range, title=args.title)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ck", description="Collective knapsack experiments.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    for name, help_ in (("simulate", "Monte-Carlo sweep"), ("analytic", "two-project quadrature")):
        s = sub.add_parser(name, help=help_)
        s.add_argument("config", help="YAML config file")
        s.add_argument("--out", help="CSV path ('-' for stdout); default: <config name>.csv")
        s.add_argument("--seed", type=int)
        s.add_argument("--samples", type=int)
        s.add_argument("--threads", type=int, default=1, help="worker threads (CK_THREADS overrides)")
        s.add_argument("--paper-scale", action="store_true", help=f"use {PAPER_SCALE_SAMPLES} samples per point")

    s = sub.add_parser("solve", help="solve one knapsack instance")
    s.add_argument("--values", nargs="+", required=True)
    s.add_argument("--weights", nargs="+", required=True, help="numbers or fractions like 1/10")
    s.add_argument("--capacity", required=True)

    s = sub.add_parser("plot", help="render a results CSV as SVG")
    s.add_argument("csv")
    s.add_argument("--out", required=True)
    s.add_argument("--y-range", nargs=2, type=float, metavar=("LOW", "HIGH"))
    s.add_argument("--title")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        if args.command == "simulate":
            return _cmd_run(args, run_simulate)
        if args.command == "analytic":
            return _cmd_run(args, run_analytic)
        if args.command == "solve":
            return _cmd_solve(args)
        return _cmd_plot(args)
    except (KnapsackTooLarge, analytic.QuadratureError) as exc:
        print(f"ck: {exc}", file=sys.stderr)
        return 3
    except (ConfigError, ValueError, FileNotFoundError) as exc:
        print(f"ck: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
