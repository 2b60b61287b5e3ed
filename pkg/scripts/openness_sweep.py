#!/usr/bin/env python3
"""Openness sweep: fixed known classes, growing pool of unseen ones.

Generates four known clusters on the corners of a square plus a ring of
unseen clusters inside it, trains once on the knowns, then evaluates with
0, 1, 2, ... of the inner clusters mixed into the test stream as unknowns.
Inner placement matters: the explorer only carves out rejection regions in
the space it can reach, which is the territory between the knowns.

Writes sweep.csv and plots/sweep.svg (macro F1 and AUROC against openness)
under --out and prints the table. Note the macro F1 at zero unknowns
averages in an empty rejection class; compare rows at equal openness, not
across the zero boundary.
"""
from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from tes_osr.config import ExperimentConfig, save_config
from tes_osr.datagen import ToySpec, gen_toy, save_dataset
from tes_osr.experiment import sweep_openness

CORNERS = [[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]]


def main(argv: list[str] | None = None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", required=True, help="output directory")
    ap.add_argument("--unknown-clusters", type=int, default=5,
                    help="unseen clusters on the inner ring")
    ap.add_argument("--ring-radius", type=float, default=0.6)
    ap.add_argument("--counts", type=int, nargs="*", default=None,
                    help="unknown-class counts to sweep (default: 0..all)")
    ap.add_argument("--per-class", type=int, default=600)
    ap.add_argument("--spread", type=float, default=0.2)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--epochs", type=int, default=100)
    ap.add_argument("--teacher-epochs", type=int, default=40)
    args = ap.parse_args(argv)

    if args.unknown_clusters < 1:
        ap.error("--unknown-clusters must be at least 1")

    m = args.unknown_clusters
    inner = [[args.ring_radius * math.cos(2 * math.pi * k / m),
              args.ring_radius * math.sin(2 * math.pi * k / m)] for k in range(m)]
    centers = CORNERS + inner
    total = len(centers)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train_path = out / "train.csv"
    test_path = out / "test.csv"
    save_dataset(
        gen_toy(ToySpec(class_count=total, per_class=args.per_class,
                        spread=args.spread, centers=centers, seed=100)),
        train_path,
    )
    save_dataset(
        gen_toy(ToySpec(class_count=total, per_class=args.per_class // 4,
                        spread=args.spread, centers=centers, seed=101)),
        test_path,
    )

    cfg = ExperimentConfig(
        seed=args.seed,
        train_data=str(train_path),
        test_data=str(test_path),
        known_classes=[0, 1, 2, 3],
        lam=2.0,
        teacher_epochs=args.teacher_epochs,
        epochs=args.epochs,
        batch_size=256,
    )
    save_config(cfg, out / "config.json")

    counts = args.counts if args.counts is not None else list(range(m + 1))
    rows = sweep_openness(cfg, out, counts=counts)

    print(f"{'unknowns':>8}  {'openness':>8}  {'macro_f1':>8}  {'auroc':>8}")
    for r in rows:
        auroc = "-" if r["auroc"] is None else f"{r['auroc']:.4f}"
        print(f"{r['unknown_classes']:>8}  {r['openness']:>8.4f}  "
              f"{r['macro_f1']:>8.4f}  {auroc:>8}")
    print(f"artifacts under: {out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
