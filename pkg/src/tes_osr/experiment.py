"""Experiment harness: stages, artifacts, sweeps, ablations, validation.

Every stage reads what it needs from the output directory when it is not
already in memory, so the CLI can run stages one at a time and a full run
can thread everything through without touching disk twice. Stage failures
surface as RuntimeError("stage <name>: ...") with the original cause chained.
"""
from __future__ import annotations

import csv
import json
from contextlib import contextmanager
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .config import ExperimentConfig
from .datagen import LabeledDataset, load_dataset, split_known_unknown
from .distill import (
    DistillConfig,
    distill_targets,
    save_distilled,
    teacher_accuracy,
    train_teacher,
)
from .explorer import ExplorerPair, generate, sample_latent, LatentPrior
from .metrics import EvalReport, auroc, macro_f1, confusion_matrix, openness, per_class_scores
from .nn import AdamConfig, Model, feedforward, init_model, load_checkpoint, save_checkpoint
from .recognition import (
    Thresholds,
    calibrate_thresholds,
    collective_decision_scores,
    load_thresholds,
    predict_batch,
    save_thresholds,
)
from .student import StudentModel, build_student, student_forward, student_from_models, student_models, select_active_unknowns
from .svgplot import line_chart, scatter_chart
from .train import RunRecord, TrainConfig, joint_train, save_training_state


@contextmanager
def _stage(name: str):
    try:
        yield
    except Exception as e:
        raise RuntimeError(f"stage {name}: {e}") from e


def _seeds(root: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(root).generate_state(n)]


@dataclass
class DataBundle:
    train_known: LabeledDataset
    test_known: LabeledDataset | None
    unknown_sets: dict[str, LabeledDataset]
    mapping: dict[int, int] | None

    @property
    def unknown_class_count(self) -> int:
        return sum(len(np.unique(d.labels)) for d in self.unknown_sets.values())


def prepare_data(cfg: ExperimentConfig) -> DataBundle:
    if cfg.train_data is None:
        raise ValueError("config has no train_data")
    train_full = load_dataset(cfg.train_data)
    mapping = None
    if cfg.known_classes:
        train_known, _, mapping = split_known_unknown(train_full, cfg.known_classes)
    else:
        train_known = train_full
    train_known.validate_for_training()

    test_known = None
    unknown_sets: dict[str, LabeledDataset] = {}
    if cfg.test_data is not None:
        test_full = load_dataset(cfg.test_data, class_count=train_full.class_count)
        if cfg.known_classes:
            test_known, pool, _ = split_known_unknown(test_full, cfg.known_classes)
            if len(pool):
                unknown_sets["heldout_classes"] = pool
        else:
            test_known = test_full
        if test_known.class_count != train_known.class_count:
            raise ValueError("test label space does not match training")
        if len(test_known) and test_known.dim != train_known.dim:
            raise ValueError("test feature width does not match training")
    for path in cfg.unknown_data:
        d = load_dataset(path)
        if d.dim != train_known.dim:
            raise ValueError(f"{path}: feature width does not match training data")
        unknown_sets[Path(path).stem] = d
    return DataBundle(train_known, test_known, unknown_sets, mapping)


@dataclass
class ExperimentState:
    cfg: ExperimentConfig
    out: Path
    bundle: DataBundle | None = None
    teacher: Model | None = None
    student: StudentModel | None = None
    pair: ExplorerPair | None = None
    thresholds: Thresholds | None = None
    record: RunRecord | None = None
    report: EvalReport | None = None


def make_state(cfg: ExperimentConfig, out_dir) -> ExperimentState:
    cfg.validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return ExperimentState(cfg, out)


def _ensure_data(state: ExperimentState) -> DataBundle:
    if state.bundle is None:
        with _stage("data"):
            state.bundle = prepare_data(state.cfg)
    return state.bundle


def _uses_teacher(cfg: ExperimentConfig) -> bool:
    return cfg.variant in ("ts", "tes")


def _uses_explorer(cfg: ExperimentConfig) -> bool:
    return cfg.variant in ("es", "tes")


def teacher_spec(cfg: ExperimentConfig, in_dim: int, class_count: int):
    return feedforward([in_dim] + list(cfg.teacher_hidden) + [class_count], output="softmax")


def build_pair(cfg: ExperimentConfig, in_dim: int, seed_g: int, seed_d: int) -> ExplorerPair:
    gen = init_model(
        feedforward([cfg.latent_dim] + list(cfg.generator_hidden) + [in_dim], output="sigmoid"),
        seed_g,
    )
    disc = init_model(
        feedforward([in_dim] + list(cfg.discriminator_hidden) + [1], output="sigmoid"),
        seed_d,
    )
    return ExplorerPair(gen, disc, lam=cfg.lam, non_saturating=cfg.non_saturating)


def stage_teacher(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    if not _uses_teacher(cfg):
        return state
    bundle = _ensure_data(state)
    seed = _seeds(cfg.seed, 4)[0]
    with _stage("teacher"):
        teacher = train_teacher(
            bundle.train_known,
            teacher_spec(cfg, bundle.train_known.dim, bundle.train_known.class_count),
            cfg.teacher_epochs,
            cfg.teacher_adam,
            seed,
            cfg.batch_size,
        )
        save_checkpoint(state.out / "teacher.json", {"teacher": teacher}, {"teacher": cfg.teacher_adam})
        state.teacher = teacher
    return state


def _load_teacher(state: ExperimentState) -> Model:
    if state.teacher is None:
        path = state.out / "teacher.json"
        if not path.exists():
            raise ValueError(f"no teacher in memory and {path} does not exist")
        models, _ = load_checkpoint(path)
        state.teacher = models["teacher"]
    return state.teacher


def stage_distill(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    if not _uses_teacher(cfg):
        raise ValueError(f"variant {cfg.variant!r} has no teacher to distill from")
    bundle = _ensure_data(state)
    with _stage("distill"):
        teacher = _load_teacher(state)
        targets = distill_targets(
            teacher, bundle.train_known, DistillConfig(cfg.tau, cfg.q_min)
        )
        save_distilled(targets, state.out / "distilled_targets.csv")
    return state


def stage_train(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    bundle = _ensure_data(state)
    seeds = _seeds(cfg.seed, 4)
    with _stage("train"):
        teacher = _load_teacher(state) if _uses_teacher(cfg) else None
        student = build_student(
            bundle.train_known.dim,
            cfg.trunk_hidden,
            cfg.head_hidden,
            bundle.train_known.class_count,
            seeds[1],
        )
        pair = (
            build_pair(cfg, bundle.train_known.dim, seeds[2], _seeds(seeds[2], 2)[1])
            if _uses_explorer(cfg)
            else None
        )
        tc = TrainConfig(
            epochs=cfg.epochs,
            batch_size=cfg.batch_size,
            distill=DistillConfig(cfg.tau, cfg.q_min),
            student_adam=cfg.student_adam,
            generator_adam=cfg.generator_adam,
            discriminator_adam=cfg.discriminator_adam,
            use_explorer=pair is not None,
            dump_fakes_every=cfg.dump_fakes_every,
            dump_count=cfg.dump_count,
            checkpoint_every=cfg.checkpoint_every,
            out_dir=str(state.out),
        )
        student, pair, record = joint_train(
            teacher, student, pair, bundle.train_known, tc, seeds[3]
        )
        record.write_metrics(state.out / "metrics.csv")
        ckdir = state.out / "checkpoints"
        ckdir.mkdir(exist_ok=True)
        save_training_state(ckdir / "final.json", student, pair, tc)
        state.student, state.pair, state.record = student, pair, record
    return state


def _load_student(state: ExperimentState) -> StudentModel:
    if state.student is None:
        path = state.out / "checkpoints" / "final.json"
        if not path.exists():
            raise ValueError(f"no student in memory and {path} does not exist")
        models, _ = load_checkpoint(path)
        state.student = student_from_models(models)
        if "generator" in models and "discriminator" in models:
            state.pair = ExplorerPair(
                models["generator"],
                models["discriminator"],
                lam=state.cfg.lam,
                non_saturating=state.cfg.non_saturating,
            )
    return state.student


def stage_calibrate(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    bundle = _ensure_data(state)
    with _stage("calibrate"):
        student = _load_student(state)
        state.thresholds = calibrate_thresholds(
            student, bundle.train_known, cfg.coverage, cfg.use_uncertainty
        )
        save_thresholds(state.thresholds, state.out / "thresholds.txt")
    return state


def _load_thresholds(state: ExperimentState) -> Thresholds:
    if state.thresholds is None:
        path = state.out / "thresholds.txt"
        if not path.exists():
            raise ValueError(f"no thresholds in memory and {path} does not exist")
        state.thresholds = load_thresholds(path)
    return state.thresholds


def ranking_scores(
    student: StudentModel, features: np.ndarray, kind: str
) -> np.ndarray:
    """Known-ness score used for AUROC; higher should mean more known."""
    trace = student_forward(student, features)
    if kind == "max_cds":
        cds = collective_decision_scores(trace.logits)
        return cds[:, :-1].max(axis=1)
    if kind == "max_sigmoid":
        return trace.probs[:, :-1].max(axis=1)
    if kind == "one_minus_p_unknown":
        return 1.0 - trace.probs[:, -1]
    raise ValueError(f"unknown auroc score kind {kind!r}")


def evaluate_pipeline(
    student: StudentModel,
    thresholds: Thresholds,
    test_known: LabeledDataset | None,
    unknown_sets: dict[str, LabeledDataset],
    auroc_kind: str = "max_cds",
) -> tuple[EvalReport, list[dict]]:
    """Score the decision rule on known test data plus pooled unknown sets.

    Returns the report and one prediction row per sample for the CSV dump.
    """
    if test_known is None or len(test_known) == 0:
        raise ValueError("evaluation needs known test samples")
    reject = student.n_heads - 1
    parts: list[tuple[str, np.ndarray, np.ndarray]] = [
        ("known", test_known.features, test_known.labels.copy())
    ]
    for name, d in unknown_sets.items():
        if len(d):
            parts.append((name, d.features, np.full(len(d), reject, dtype=np.int64)))
    rows: list[dict] = []
    truths, preds, flags, scores = [], [], [], []
    index = 0
    for name, feats, truth in parts:
        labels, cds, p_u = predict_batch(student, thresholds, feats)
        rank = ranking_scores(student, feats, auroc_kind)
        is_known = name == "known"
        truths.append(truth)
        preds.append(labels)
        flags.append(np.full(len(truth), is_known))
        scores.append(rank)
        for i in range(len(truth)):
            rows.append(
                {
                    "index": index,
                    "set": name,
                    "truth": int(truth[i]),
                    "pred": int(labels[i]),
                    "cds": cds[i].tolist(),
                    "score": float(rank[i]),
                    "p_unknown": float(p_u[i]),
                }
            )
            index += 1
    truth_all = np.concatenate(truths)
    preds_all = np.concatenate(preds)
    flags_all = np.concatenate(flags)
    scores_all = np.concatenate(scores)
    f1, per_class = macro_f1(truth_all, preds_all, student.n_heads)
    conf = confusion_matrix(truth_all, preds_all, student.n_heads)
    unknown_classes = sum(
        len(np.unique(d.labels)) for d in unknown_sets.values() if len(d)
    )
    open_v = (
        openness(student.n_known, student.n_known + unknown_classes, student.n_known)
        if unknown_classes
        else 0.0
    )
    roc = (
        auroc(scores_all, flags_all)
        if flags_all.any() and not flags_all.all()
        else None
    )
    report = EvalReport(
        open_v,
        f1,
        roc,
        per_class,
        conf,
        int(flags_all.sum()),
        int((~flags_all).sum()),
    )
    return report, rows


def stage_eval(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    bundle = _ensure_data(state)
    with _stage("eval"):
        student = _load_student(state)
        thresholds = _load_thresholds(state)
        report, rows = evaluate_pipeline(
            student, thresholds, bundle.test_known, bundle.unknown_sets, cfg.auroc_score
        )
        report.extras.update(
            {
                "variant": cfg.variant,
                "seed": cfg.seed,
                "auroc_score": cfg.auroc_score,
                "use_uncertainty": thresholds.use_uncertainty,
                "unknown_sets": {k: len(v) for k, v in bundle.unknown_sets.items()},
            }
        )
        (state.out / "report.json").write_text(json.dumps(report.to_dict(), indent=2) + "\n")
        n_heads = student.n_heads
        cds_cols = [f"cds_{y}" for y in range(n_heads - 1)] + ["cds_U"]
        with (state.out / "predictions.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["index", "set", "truth", "pred"] + cds_cols + ["score", "p_unknown"])
            for r in rows:
                w.writerow(
                    [r["index"], r["set"], r["truth"], r["pred"]]
                    + [repr(v) for v in r["cds"]]
                    + [repr(r["score"]), repr(r["p_unknown"])]
                )
        state.report = report
    return state


def stage_plots(state: ExperimentState) -> ExperimentState:
    cfg = state.cfg
    with _stage("plots"):
        pdir = state.out / "plots"
        pdir.mkdir(exist_ok=True)
        if state.record is not None and state.record.epochs:
            ep = np.array([e.epoch for e in state.record.epochs], dtype=float)
            series = {
                "d_loss": [e.d_loss for e in state.record.epochs],
                "g_adv": [e.g_adv_loss for e in state.record.epochs],
                "g_student": [e.g_student_loss for e in state.record.epochs],
                "s_real": [e.s_real_loss for e in state.record.epochs],
                "s_fake": [e.s_fake_loss for e in state.record.epochs],
            }
            line_chart(pdir / "losses.svg", ep, series, "training losses", "epoch", "loss")
            line_chart(
                pdir / "active.svg",
                ep,
                {"active": [float(e.active_count) for e in state.record.epochs]},
                "active unknowns per epoch",
                "epoch",
                "count",
            )
        bundle = state.bundle
        if (
            bundle is not None
            and state.pair is not None
            and state.student is not None
            and bundle.train_known.dim == 2
        ):
            rng = np.random.default_rng(_seeds(cfg.seed, 6)[5])
            z = sample_latent(LatentPrior(state.pair.latent_dim), cfg.dump_count, rng)
            fakes = generate(state.pair, z)
            batch = select_active_unknowns(state.student, fakes, cfg.q_min)
            groups = {"train": bundle.train_known.features, "fake": fakes}
            if batch.count:
                groups["active"] = batch.samples
            scatter_chart(pdir / "scatter.svg", groups, "data vs generated")
    return state


def run_experiment(cfg: ExperimentConfig, out_dir) -> tuple[EvalReport, RunRecord]:
    """Full pipeline: data, teacher, distill, train, calibrate, eval, plots."""
    state = make_state(cfg, out_dir)
    _ensure_data(state)
    stage_teacher(state)
    if _uses_teacher(cfg):
        stage_distill(state)
    stage_train(state)
    stage_calibrate(state)
    stage_eval(state)
    stage_plots(state)
    return state.report, state.record


def _grouped_unknowns(bundle: DataBundle) -> list[tuple[int, LabeledDataset]]:
    """Heldout-class pool split per original class label, ascending."""
    pool = bundle.unknown_sets.get("heldout_classes")
    if pool is None or len(pool) == 0:
        return []
    out = []
    for label in np.unique(pool.labels):
        mask = pool.labels == label
        out.append(
            (int(label), LabeledDataset(pool.features[mask], pool.labels[mask], pool.class_count))
        )
    return out


def sweep_openness(cfg: ExperimentConfig, out_dir, counts: list[int] | None = None) -> list[dict]:
    """Train once, then widen the unknown pool class by class.

    counts are numbers of unknown classes per evaluation point; they must be
    non-negative, strictly increasing, and achievable from the heldout pool.
    """
    counts = list(counts) if counts is not None else list(cfg.sweep_unknown_counts)
    if not counts:
        raise ValueError("no sweep counts configured")
    if any(c < 0 for c in counts) or any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("sweep counts must be non-negative and strictly increasing")
    state = make_state(cfg, out_dir)
    _ensure_data(state)
    groups = _grouped_unknowns(state.bundle)
    if counts[-1] > len(groups):
        raise ValueError(
            f"sweep needs {counts[-1]} unknown classes, pool has {len(groups)}"
        )
    stage_teacher(state)
    if _uses_teacher(cfg):
        stage_distill(state)
    stage_train(state)
    stage_calibrate(state)
    rows = []
    with _stage("sweep"):
        for count in counts:
            subset = {f"class_{label}": d for label, d in groups[:count]}
            report, _ = evaluate_pipeline(
                state.student, state.thresholds, state.bundle.test_known, subset, cfg.auroc_score
            )
            rows.append(
                {
                    "unknown_classes": count,
                    "openness": report.openness,
                    "macro_f1": report.macro_f1,
                    "auroc": report.auroc,
                }
            )
        with (state.out / "sweep.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["unknown_classes", "openness", "macro_f1", "auroc"])
            for r in rows:
                w.writerow(
                    [
                        r["unknown_classes"],
                        repr(r["openness"]),
                        repr(r["macro_f1"]),
                        "" if r["auroc"] is None else repr(r["auroc"]),
                    ]
                )
        pdir = state.out / "plots"
        pdir.mkdir(exist_ok=True)
        xs = np.array([r["openness"] for r in rows])
        series = {"macro_f1": np.array([r["macro_f1"] for r in rows])}
        if all(r["auroc"] is not None for r in rows):
            series["auroc"] = np.array([r["auroc"] for r in rows])
        line_chart(pdir / "sweep.svg", xs, series, "score vs openness", "openness", "score")
    return rows


ABLATION_VARIANTS = ("ovrn", "ts", "es", "tes")


def ablate(cfg: ExperimentConfig, out_dir) -> list[dict]:
    """Run all four compositions from one config; score each with and
    without the uncertainty gate. One CSV row per openness point."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    pipelines: dict[str, ExperimentState] = {}
    for variant in ABLATION_VARIANTS:
        sub = replace(cfg, variant=variant)
        state = make_state(sub, out / variant)
        _ensure_data(state)
        stage_teacher(state)
        if _uses_teacher(sub):
            stage_distill(state)
        stage_train(state)
        stage_calibrate(state)
        stage_eval(state)
        stage_plots(state)
        pipelines[variant] = state

    # evaluation points: the sweep counts when given, else the full pool
    base = pipelines["tes"].bundle
    groups = _grouped_unknowns(base)
    if cfg.sweep_unknown_counts:
        if cfg.sweep_unknown_counts[-1] > len(groups):
            raise ValueError("sweep counts exceed the unknown pool")
        points = [
            ("%d" % c, {f"class_{l}": d for l, d in groups[:c]})
            for c in cfg.sweep_unknown_counts
        ]
    else:
        points = [("all", pipelines["tes"].bundle.unknown_sets)]

    rows = []
    with _stage("ablate"):
        for _, subset in points:
            row: dict = {}
            for variant, state in pipelines.items():
                for gated in (False, True):
                    th = Thresholds(
                        state.thresholds.eps_cds,
                        state.thresholds.eps_unknown,
                        gated,
                        state.thresholds.coverage,
                    )
                    report, _ = evaluate_pipeline(
                        state.student, th, state.bundle.test_known, subset, cfg.auroc_score
                    )
                    row[f"{variant}_{'cdu' if gated else 'cd'}"] = report.macro_f1
                    row["openness"] = report.openness
            rows.append(row)
        header = ["openness"] + [f"{v}_cd" for v in ABLATION_VARIANTS] + [
            f"{v}_cdu" for v in ABLATION_VARIANTS
        ]
        with (out / "ablation.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            for row in rows:
                w.writerow([repr(row["openness"])] + [repr(row[h]) for h in header[1:]])
    return rows


def cross_class_validate(
    cfg: ExperimentConfig, out_dir=None
) -> tuple[float, float, list[dict]]:
    """Grid-search tau and lambda by holding out known classes as
    fold-unknowns. Returns (best_tau, best_lambda, fold table); ties go to
    the earliest grid entry (tau-major order)."""
    cfg.validate()
    bundle = prepare_data(cfg)
    data = bundle.train_known
    n_known = data.class_count
    holdout_size = max(1, n_known // 4)
    if n_known - holdout_size < 2:
        raise ValueError("not enough classes to hold any out")
    grid = [(t, l) for t in cfg.xcv_tau_grid for l in cfg.xcv_lambda_grid]
    seeds = _seeds(cfg.seed, 2 + cfg.xcv_folds)
    rng = np.random.default_rng(seeds[0])
    rows: list[dict] = []
    sums = np.zeros(len(grid))
    for fold in range(cfg.xcv_folds):
        held = sorted(rng.choice(n_known, size=holdout_size, replace=False).tolist())
        kept = [c for c in range(n_known) if c not in held]
        fold_known, fold_unknown, _ = split_known_unknown(data, kept)
        # stratified 80/20 split of the fold-known samples
        tr_idx, va_idx = [], []
        split_rng = np.random.default_rng(seeds[2 + fold])
        for c in range(fold_known.class_count):
            idx = np.flatnonzero(fold_known.labels == c)
            idx = split_rng.permutation(idx)
            cut = max(1, int(round(0.8 * len(idx))))
            tr_idx.append(idx[:cut])
            va_idx.append(idx[cut:])
        tr_idx = np.concatenate(tr_idx)
        va_idx = np.concatenate(va_idx)
        tr = LabeledDataset(
            fold_known.features[tr_idx], fold_known.labels[tr_idx], fold_known.class_count
        )
        va = LabeledDataset(
            fold_known.features[va_idx], fold_known.labels[va_idx], fold_known.class_count
        )
        fold_seed = seeds[1] + fold
        teacher = train_teacher(
            tr,
            teacher_spec(cfg, tr.dim, tr.class_count),
            cfg.xcv_teacher_epochs,
            cfg.teacher_adam,
            fold_seed,
            cfg.batch_size,
        )
        for gi, (tau, lam) in enumerate(grid):
            sub = replace(
                cfg,
                tau=tau,
                lam=lam,
                epochs=cfg.xcv_epochs,
                variant="tes",
            )
            student = build_student(
                tr.dim, sub.trunk_hidden, sub.head_hidden, tr.class_count, fold_seed + 1
            )
            pair = build_pair(sub, tr.dim, fold_seed + 2, fold_seed + 3)
            tc = TrainConfig(
                epochs=sub.epochs,
                batch_size=sub.batch_size,
                distill=DistillConfig(sub.tau, sub.q_min),
                student_adam=sub.student_adam,
                generator_adam=sub.generator_adam,
                discriminator_adam=sub.discriminator_adam,
                use_explorer=True,
            )
            student, pair, _ = joint_train(teacher, student, pair, tr, tc, fold_seed + 4)
            thresholds = calibrate_thresholds(student, tr, sub.coverage, sub.use_uncertainty)
            report, _ = evaluate_pipeline(
                student,
                thresholds,
                va,
                {"fold_unknowns": fold_unknown},
                sub.auroc_score,
            )
            sums[gi] += report.macro_f1
            rows.append(
                {
                    "fold": fold,
                    "held_out": held,
                    "tau": tau,
                    "lambda": lam,
                    "macro_f1": report.macro_f1,
                }
            )
    means = sums / cfg.xcv_folds
    best = int(np.argmax(means))  # first max wins on ties
    best_tau, best_lam = grid[best]
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with (out / "xcv.csv").open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["fold", "held_out", "tau", "lambda", "macro_f1"])
            for r in rows:
                w.writerow(
                    [
                        r["fold"],
                        " ".join(str(c) for c in r["held_out"]),
                        repr(r["tau"]),
                        repr(r["lambda"]),
                        repr(r["macro_f1"]),
                    ]
                )
        (out / "xcv_best.json").write_text(
            json.dumps(
                {
                    "tau": best_tau,
                    "lambda": best_lam,
                    "mean_f1": {
                        f"tau={t} lambda={l}": float(m) for (t, l), m in zip(grid, means)
                    },
                },
                indent=2,
            )
            + "\n"
        )
    return best_tau, best_lam, rows
