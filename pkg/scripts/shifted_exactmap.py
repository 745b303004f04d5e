"""Entries of the exact map that survive dropping, for a shifted sequence.

    python scripts/shifted_exactmap.py --m 30 --shifts 0,10,20,30 --out results/shifted
"""

import argparse
from pathlib import Path

from samap.experiment import ExperimentConfig, run_exactmap_study
from samap.problems import ShiftedConfig


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=30)
    p.add_argument("--shifts", help="comma-separated shifts (default 0, 10, ..., 90)")
    p.add_argument("--mass", choices=("diagonal", "tridiagonal"), default="diagonal")
    p.add_argument("--drop-tol", type=float, action="append", default=None)
    p.add_argument("--out", type=Path)
    args = p.parse_args()

    cfg = ShiftedConfig(m=args.m, mass_kind=args.mass)
    if args.shifts:
        cfg = ShiftedConfig(m=args.m, mass_kind=args.mass, shifts=[float(s) for s in args.shifts.split(",")])
    tols = args.drop_tol or [1e-2, 1e-4]
    rows = run_exactmap_study(ExperimentConfig(cfg, drop_tols=tols, output_dir=args.out))
    nnz = {(k, t): c for k, t, c in rows}
    print(f"{'k':>3} {'sigma':>8}" + "".join(f"{'nnz>%g' % t:>14}" for t in tols))
    for k, sigma in enumerate(cfg.shifts):
        print(f"{k:>3} {sigma:>8g}" + "".join(f"{nnz[k, t]:>14}" for t in tols))


if __name__ == "__main__":
    main()
