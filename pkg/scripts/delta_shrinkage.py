#!/usr/bin/env python3
"""Tabulate how the symmetric-sum spread and the one-hot distance bound shrink
as the amplification m grows.

The spread column is the Monte Carlo sup of symmetric-sum differences over
random prediction pairs; the bound column is sqrt(1 - 1/K) / (m + 1). Both
should fall monotonically along m.

Example:
    python3 scripts/delta_shrinkage.py --classes 10 --ms 1,10,100,1000,10000
"""

import argparse
import sys

from eps_softmax.theory import measure_delta
from eps_softmax.transform import eps_bound


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--classes", type=int, default=10)
    parser.add_argument("--ms", default="1,10,100,1000,10000")
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    ms = [float(s) for s in args.ms.split(",")]
    print(f"{'m':>10}  {'spread':>12}  {'distance bound':>14}")
    previous = None
    monotone = True
    for m in ms:
        delta = measure_delta(args.classes, m, trials=args.trials, seed=args.seed)
        print(f"{m:10g}  {delta:12.4f}  {eps_bound(args.classes, m):14.6f}")
        if previous is not None and delta >= previous:
            monotone = False
        previous = delta
    if not monotone:
        print("warning: spread did not decrease monotonically", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
