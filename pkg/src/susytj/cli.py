"""Command line front end.

    python3 -m susytj.cli --config table1 --mode full --out out/table1
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .pipeline import DEFAULT_SEED, MODES, RunConfig, load_config, run
from .roots import SolveConfig


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="susytj", description="Spectrum and Bethe-root pipeline for the open t-J chain.")
    ap.add_argument("--config", required=True, help="JSON parameter file, or the name of a shipped config (table1, table2)")
    ap.add_argument("--mode", choices=MODES, default="full")
    ap.add_argument("--out", default="out", help="output directory")
    ap.add_argument("--seed", type=int, default=DEFAULT_SEED)
    ap.add_argument("--tol", type=float, default=1e-11, help="Bethe residual tolerance")
    ap.add_argument("--no-table-seeds", action="store_true", help="search from random seeds only")
    ap.add_argument("--budget", type=int, default=None, help="random seeds per M")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    err = lambda msg: print(msg, file=sys.stderr)
    try:
        params, M_list = load_config(args.config)
        solver = SolveConfig(tol=args.tol, seed=args.seed,
                             seeds="random" if args.no_table_seeds else "table+random",
                             random_budget=args.budget if args.budget is not None
                             else (200 if args.no_table_seeds else 60))
        cfg = RunConfig(params, args.mode, solver, M_list, Path(args.out))
        gates, _ = run(cfg, log=err)
    except (OSError, ValueError) as exc:
        err(f"error: {exc}")
        return 2
    for g in gates:
        print(g.line())
        if not g.passed:
            err(f"gate failed: {g.name}")
    return 0 if all(g.passed for g in gates) else 1


if __name__ == "__main__":
    sys.exit(main())
