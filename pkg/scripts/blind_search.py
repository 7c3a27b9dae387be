"""Multistart search for Bethe roots without any table seeds.

Reports how many exact-diagonalization levels the random seeds reach for a few
solver seeds and budgets.

    python3 scripts/blind_search.py --L 2 --budget 60 200 --seeds 0 1 2
"""

import argparse
import time

from susytj.kernels import table_params
from susytj.roots import SolveConfig, match_spectrum, multistart_search
from susytj.transfer import build_transfer, diagonalize, hamiltonian_direct
from susytj.tq import TQContext


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--L", type=int, default=2)
    ap.add_argument("--budget", type=int, nargs="+", default=[60, 200])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 20240607])
    args = ap.parse_args()

    p = table_params(args.L)
    ctx = TQContext(p)
    fam = build_transfer(p)
    ed = diagonalize(hamiltonian_direct(p), keep_vectors=True)
    print(f"{'budget':>6} {'seed':>9} {'found':>7} {'seconds':>8}  missing levels")
    for budget in args.budget:
        for seed in args.seeds:
            t0 = time.perf_counter()
            cfg = SolveConfig(seeds="random", random_budget=budget, seed=seed)
            sols = [s for M in range(p.L + 1) for s in multistart_search(M, ctx, cfg)]
            rep = match_spectrum(sols, ed, ctx, fam)
            missing = [f"{m.ed_energy.real:.4f}" for m in rep.levels if not m.matched]
            print(f"{budget:>6} {seed:>9} {rep.n_matched:>3}/{len(rep.levels):<3} "
                  f"{time.perf_counter() - t0:>8.1f}  {' '.join(missing) or '-'}")


if __name__ == "__main__":
    main()
