"""Command-line interface.

    mixbgk run <scenario> [--eps ...] [--kappa K] [--model ...] [--out DIR]
               [--threads N] [--nx N] [--nv N] [--t-end T]
    mixbgk list-scenarios
    mixbgk validate <scenario>
    mixbgk compare <csv-a> <csv-b> | <dir-a> <dir-b>
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .runio import read_csv, write_json
from .runner import run_scenario
from .scenarios import SHIPPED, load_scenario, validate_scenario


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mixbgk",
                                 description="BGK mixture model toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario")
    run.add_argument("scenario", help="shipped name or path to a .toml file")
    run.add_argument("--eps", type=float, nargs="+", default=None,
                     help="override the scenario eps list")
    run.add_argument("--kappa", type=float, default=None,
                     help="fix kappa instead of the scenario rule")
    run.add_argument("--model", nargs="+", default=None,
                     choices=["aap", "gs", "bbgsp"],
                     help="override the model list")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--threads", type=int, default=1)
    run.add_argument("--nx", type=int, default=None, help="override N_x")
    run.add_argument("--nv", type=int, default=None, help="override N_v")
    run.add_argument("--t-end", type=float, default=None,
                     help="override the final time")

    sub.add_parser("list-scenarios", help="list shipped scenarios")

    val = sub.add_parser("validate", help="check a scenario's constants")
    val.add_argument("scenario")

    cmp_ = sub.add_parser("compare", help="L1 distances between two outputs")
    cmp_.add_argument("a")
    cmp_.add_argument("b")
    cmp_.add_argument("--out", default=None, help="write the table as JSON")
    return ap


def _cmd_run(args) -> int:
    overrides = {}
    if args.eps:
        overrides["eps"] = args.eps
    if args.kappa is not None:
        overrides["kappa"] = args.kappa
    if args.model:
        overrides["models"] = args.model
    if args.nx:
        overrides["n_x"] = args.nx
    if args.nv:
        overrides["n_v"] = args.nv
    if args.t_end:
        overrides["t_end"] = args.t_end
    summary = run_scenario(args.scenario, args.out, overrides,
                           threads=args.threads)
    print(f"wrote {args.out}/summary.json")
    for key in ("pairs", "l1_diff", "l1_vs_reference", "plateau_rel_error",
                "light_species_deviation"):
        if key in summary:
            print(f"  {key}: {summary[key]}")
    return 0


def _cmd_list() -> int:
    for name in SHIPPED:
        scen = load_scenario(name)
        print(f"{name:26s} task={scen.raw['scenario']['task']:20s} "
              f"L={scen.params.L} grid={scen.sx.n_x}x{scen.vg.n_v} "
              f"bc={scen.sx.bc}")
    return 0


def _cmd_validate(args) -> int:
    scen = load_scenario(args.scenario)
    problems = validate_scenario(scen)
    if problems:
        for p in problems:
            print(f"FAIL {p}")
        return 1
    print(f"ok: {scen.name} validates")
    return 0


def _compare_files(pa: Path, pb: Path):
    meta_a, cols_a = read_csv(pa)
    _, cols_b = read_csv(pb)
    if list(cols_a) != list(cols_b):
        raise SystemExit(f"column layouts differ between {pa} and {pb}")
    names = list(cols_a)
    # abscissa columns (everything before the value columns) must match
    n_axes = names.index("value") if "value" in names else len(names) - 1
    for name in names[:n_axes]:
        if not np.array_equal(cols_a[name], cols_b[name]):
            raise SystemExit(f"grids differ between {pa} and {pb}")
    vals_a = np.concatenate([cols_a[n] for n in names[n_axes:]])
    vals_b = np.concatenate([cols_b[n] for n in names[n_axes:]])
    ref = np.abs(vals_a).sum()
    d = np.abs(vals_a - vals_b).sum()
    return meta_a, float(d / ref) if ref > 0 else 0.0


def _cmd_compare(args) -> int:
    pa, pb = Path(args.a), Path(args.b)
    table = {}
    if pa.is_dir() and pb.is_dir():
        names = sorted(set(f.name for f in pa.glob("*.csv"))
                       & set(f.name for f in pb.glob("*.csv")))
        if not names:
            print("no common csv files")
            return 1
        for name in names:
            _, d = _compare_files(pa / name, pb / name)
            table[name] = d
    else:
        _, d = _compare_files(pa, pb)
        table[pa.name] = d
    for name, d in table.items():
        print(f"{d: .6e}  {name}")
    if args.out:
        write_json(args.out, {"l1_relative": table})
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    if args.command == "run":
        return _cmd_run(args)
    if args.command == "list-scenarios":
        return _cmd_list()
    if args.command == "validate":
        return _cmd_validate(args)
    if args.command == "compare":
        return _cmd_compare(args)
    return 2


if __name__ == "__main__":
    sys.exit(main())
