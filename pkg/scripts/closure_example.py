"""Exact-map support vs transitive closure on the 7x7 worked example.

    python scripts/closure_example.py --seeds 100
"""

import argparse

import numpy as np

from samap.experiment import run_closure_check
from samap.problems import closure_example_pair
from samap.sam import exact_map


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--seeds", type=int, default=1, help="number of random value draws to check")
    args = p.parse_args()

    A_0, A_1 = closure_example_pair(seed=0)
    print("S(A_0):\n", A_0.pattern.to_dense().astype(int))
    print("S(A_1):\n", A_1.pattern.to_dense().astype(int))
    with np.printoptions(precision=3, suppress=True, linewidth=120):
        print("A_1^{-1} A_0:\n", exact_map(A_1, A_0))
    print(run_closure_check(A_1, A_0).summary())

    if args.seeds > 1:
        passed = sum(run_closure_check(*closure_example_pair(s)[::-1]).passed for s in range(args.seeds))
        print(f"{passed}/{args.seeds} seeds pass")


if __name__ == "__main__":
    main()
