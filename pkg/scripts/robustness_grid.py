#!/usr/bin/env python3
"""Run the loss x noise-rate grid and print seed-averaged final accuracies.

Existing result files are reused instead of rerun, so the script can be
interrupted and resumed; delete the output directory to start fresh.

Example:
    python3 scripts/robustness_grid.py --out-dir results/grid \
        --losses ce,ce_eps_mae --etas 0,0.2,0.4,0.6 --seeds 0,1,2
"""

import argparse
import dataclasses
import os
import sys

import numpy as np

from eps_softmax.cli import default_config
from eps_softmax.experiment import emit_results, read_results, run_experiment
from eps_softmax.losses import LOSS_KINDS, LossSpec
from eps_softmax.noise import NoiseSpec


def parse_args():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--losses", default="ce,ce_eps_mae,gce,sce")
    parser.add_argument("--etas", default="0,0.2,0.4,0.6,0.8")
    parser.add_argument("--seeds", default="0,1,2")
    parser.add_argument("--epochs", type=int, help="override the default epoch count")
    parser.add_argument("--m", type=float, default=1e4, help="amplification for the eps kinds")
    parser.add_argument("--alpha", type=float, default=0.1)
    parser.add_argument("--beta", type=float, default=1.0)
    return parser.parse_args()


def loss_spec(kind: str, args) -> LossSpec:
    if kind in ("ce_eps", "fl_eps"):
        return LossSpec(kind, m=args.m)
    if kind in ("ce_eps_mae", "fl_eps_mae"):
        return LossSpec(kind, m=args.m, alpha=args.alpha, beta=args.beta)
    return LossSpec(kind)


def run_cell(kind: str, eta: float, seed: int, args) -> float:
    path = os.path.join(args.out_dir, f"{kind}_eta{eta:g}_seed{seed}.jsonl")
    if os.path.exists(path):
        _, summary = read_results(path)
        return summary["last_test_top1"]
    config = default_config(seed)
    noise = (
        NoiseSpec("none", n_classes=4, seed=seed)
        if eta == 0.0
        else NoiseSpec("symmetric", eta=eta, n_classes=4, seed=seed)
    )
    config = dataclasses.replace(config, loss=loss_spec(kind, args), noise=noise)
    if args.epochs:
        config = dataclasses.replace(
            config, optim=dataclasses.replace(config.optim, epochs=args.epochs)
        )
    records, summary = run_experiment(config)
    emit_results(records, summary, path)
    print(f"  {kind} eta={eta:g} seed={seed}: top1 {summary['last_test_top1']:.4f}", file=sys.stderr)
    return summary["last_test_top1"]


def main() -> int:
    args = parse_args()
    losses = args.losses.split(",")
    for kind in losses:
        if kind not in LOSS_KINDS:
            print(f"error: unknown loss kind {kind!r}", file=sys.stderr)
            return 1
    etas = [float(s) for s in args.etas.split(",")]
    seeds = [int(s) for s in args.seeds.split(",")]
    os.makedirs(args.out_dir, exist_ok=True)

    header = "loss".ljust(12) + "".join(f"eta={eta:g}".rjust(10) for eta in etas)
    print(header)
    print("-" * len(header))
    for kind in losses:
        cells = []
        for eta in etas:
            accs = [run_cell(kind, eta, seed, args) for seed in seeds]
            cells.append(float(np.mean(accs)))
        print(kind.ljust(12) + "".join(f"{acc:10.4f}" for acc in cells))
    return 0


if __name__ == "__main__":
    sys.exit(main())
