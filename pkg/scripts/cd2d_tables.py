"""Pattern sizes and relative residuals for the CD2D Newton sequence.

    python scripts/cd2d_tables.py --m 64 --out results/cd2d

Writes run.csv with every recipe at levels 1 and 2 plus the plain target
pattern, and prints one nnz table per level.
"""

import argparse
import logging
from pathlib import Path

from samap.experiment import ExperimentConfig, run_experiment
from samap.problems import Cd2dConfig, generate_cd2d_sequence

RECIPES = [
    "target", "target@level1",
    "global:0.01@level1", "col:0.6@level1", "col:0.7@level1", "col:0.8@level1",
    "lfil:3@level1", "lfil:5@level1",
    "col:0.8@level2", "lfil:5@level2",
]


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--m", type=int, default=64)
    p.add_argument("--out", type=Path, default=Path("results/cd2d"))
    args = p.parse_args()
    logging.basicConfig(level=logging.INFO)

    seq = generate_cd2d_sequence(Cd2dConfig(m=args.m))
    print(f"{len(seq)} Jacobians, n={seq.n}, nnz(A_0)={seq[0].nnz}")
    rows = run_experiment(ExperimentConfig(seq, recipes=RECIPES, output_dir=args.out), seq)

    ks = sorted({r.k for r in rows})
    print(f"{'recipe':<22}" + "".join(f"{'nnz(N_%d)' % k:>12}" for k in ks) + f"{'rel.res(k=1)':>14}")
    for label in RECIPES:
        mine = {r.k: r for r in rows if r.recipe_label == label}
        print(f"{label:<22}" + "".join(f"{mine[k].nnz_pattern:>12}" for k in ks)
              + f"{mine[ks[0]].relative_residual:>14.4e}")
    print(f"wrote {args.out / 'run.csv'}")


if __name__ == "__main__":
    main()
