"""Command-line entry point.

Subcommands mirror the pipeline stages so runs can be scripted piecemeal:

    tes-osr gen-data toy --out train.csv --classes 4 --per-class 1000
    tes-osr train-teacher --config exp.json --out runs/a
    tes-osr distill       --config exp.json --out runs/a
    tes-osr train         --config exp.json --out runs/a
    tes-osr calibrate     --config exp.json --out runs/a
    tes-osr eval          --config exp.json --out runs/a
    tes-osr run           --config exp.json --out runs/a
    tes-osr sweep-openness --config exp.json --out runs/sweep
    tes-osr ablate        --config exp.json --out runs/ablate
    tes-osr xcv           --config exp.json --out runs/xcv

--seed overrides the config seed for any stage command.
"""
from __future__ import annotations

import argparse
import json
import sys

from .config import load_config
from .datagen import NoiseSpec, ToySpec, gen_noise, gen_toy, load_dataset, save_dataset
from .experiment import (
    ablate,
    cross_class_validate,
    make_state,
    run_experiment,
    stage_calibrate,
    stage_distill,
    stage_eval,
    stage_plots,
    stage_teacher,
    stage_train,
    sweep_openness,
)


def _add_stage_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=None, help="override config seed")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tes-osr", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    gd = sub.add_parser("gen-data", help="write a synthetic dataset CSV")
    gsub = gd.add_subparsers(dest="kind", required=True)

    toy = gsub.add_parser("toy", help="Gaussian clusters in 2-D")
    toy.add_argument("--out", required=True)
    toy.add_argument("--classes", type=int, default=4)
    toy.add_argument("--per-class", type=int, default=1000)
    toy.add_argument("--spread", type=float, default=0.35)
    toy.add_argument("--centers", default=None, help="JSON list of [x,y] centers")
    toy.add_argument("--seed", type=int, default=0)

    noise = gsub.add_parser("noise", help="uniform noise in [0,1]^d")
    noise.add_argument("--out", required=True)
    noise.add_argument("--dim", type=int, default=2)
    noise.add_argument("--count", type=int, default=1000)
    noise.add_argument("--seed", type=int, default=0)

    overlay = gsub.add_parser("overlay", help="noise superimposed on a dataset")
    overlay.add_argument("--out", required=True)
    overlay.add_argument("--source", required=True, help="source dataset CSV")
    overlay.add_argument("--count", type=int, default=None, help="default: source size")
    overlay.add_argument("--alpha", type=float, default=0.5)
    overlay.add_argument("--seed", type=int, default=0)

    for name in ("train-teacher", "distill", "train", "calibrate", "eval", "run",
                 "sweep-openness", "ablate", "xcv"):
        _add_stage_args(sub.add_parser(name))
    return ap


def _load_cfg(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    return cfg


def _gen_data(args) -> int:
    if args.kind == "toy":
        centers = json.loads(args.centers) if args.centers else None
        data = gen_toy(
            ToySpec(args.classes, args.per_class, args.spread, centers, args.seed)
        )
    elif args.kind == "noise":
        data = gen_noise(NoiseSpec(args.dim, args.count, "pure_noise", seed=args.seed))
    else:
        source = load_dataset(args.source)
        count = args.count if args.count is not None else len(source)
        data = gen_noise(
            NoiseSpec(source.dim, count, "overlay", source, args.alpha, args.seed)
        )
    save_dataset(data, args.out)
    print(f"wrote {len(data)} samples to {args.out}")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "gen-data":
            return _gen_data(args)
        cfg = _load_cfg(args)
        if args.command == "run":
            report, _ = run_experiment(cfg, args.out)
            print(json.dumps({"macro_f1": report.macro_f1, "auroc": report.auroc,
                              "openness": report.openness}, indent=2))
        elif args.command == "sweep-openness":
            rows = sweep_openness(cfg, args.out)
            for r in rows:
                print(f"unknown_classes={r['unknown_classes']} openness={r['openness']:.4f} "
                      f"macro_f1={r['macro_f1']:.4f}")
        elif args.command == "ablate":
            rows = ablate(cfg, args.out)
            for r in rows:
                cells = " ".join(f"{k}={v:.4f}" for k, v in sorted(r.items()))
                print(cells)
        elif args.command == "xcv":
            tau, lam, _ = cross_class_validate(cfg, args.out)
            print(f"best tau={tau} lambda={lam}")
        else:
            state = make_state(cfg, args.out)
            if args.command == "train-teacher":
                if cfg.variant not in ("ts", "tes"):
                    raise ValueError(f"variant {cfg.variant!r} trains no teacher")
                stage_teacher(state)
            elif args.command == "distill":
                stage_distill(state)
            elif args.command == "train":
                stage_train(state)
                stage_plots(state)
            elif args.command == "calibrate":
                stage_calibrate(state)
            elif args.command == "eval":
                stage_eval(state)
            print(f"{args.command} done -> {args.out}")
        return 0
    except (ValueError, RuntimeError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
