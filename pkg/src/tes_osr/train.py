"""Joint training loop for the student and the explorer pair.

Distilled targets are computed exactly once up front. Each iteration then
walks one real mini-batch and one latent batch through three updates in a
fixed order: discriminator, generator, student. The student sees fakes
regenerated from the same latent batch after the generator moved, so it
always trains against the freshest forgeries.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .datagen import LabeledDataset
from .distill import DistillConfig, distill_targets, hard_targets, targets_matrix
from .explorer import ExplorerPair, LatentPrior, discriminator_step, generate, generator_step, sample_latent
from .nn import AdamConfig, Model, save_checkpoint
from .student import StudentModel, select_active_unknowns, student_models, student_step

METRICS_HEADER = [
    "epoch",
    "d_loss",
    "g_adv_loss",
    "g_student_loss",
    "s_real_loss",
    "s_fake_loss",
    "active_count",
]


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 128
    distill: DistillConfig = field(default_factory=DistillConfig)
    student_adam: AdamConfig = field(default_factory=AdamConfig)
    generator_adam: AdamConfig = field(default_factory=AdamConfig)
    discriminator_adam: AdamConfig = field(default_factory=AdamConfig)
    use_explorer: bool = True
    dump_fakes_every: int = 0  # 0 disables epoch dumps
    dump_count: int = 1000
    checkpoint_every: int = 0  # 0 disables periodic checkpoints
    out_dir: str | None = None

    def validate(self) -> None:
        if self.epochs < 0:
            raise ValueError("epochs must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.dump_fakes_every < 0 or self.checkpoint_every < 0:
            raise ValueError("cadences must be non-negative")
        if self.dump_count < 1:
            raise ValueError("dump_count must be at least 1")
        self.distill.validate()


@dataclass
class EpochStats:
    epoch: int
    d_loss: float
    g_adv_loss: float
    g_student_loss: float
    s_real_loss: float
    s_fake_loss: float
    active_count: int

    def row(self) -> list:
        return [
            self.epoch,
            repr(self.d_loss),
            repr(self.g_adv_loss),
            repr(self.g_student_loss),
            repr(self.s_real_loss),
            repr(self.s_fake_loss),
            self.active_count,
        ]


@dataclass
class RunRecord:
    epochs: list[EpochStats] = field(default_factory=list)
    artifacts: list[str] = field(default_factory=list)

    def write_metrics(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(METRICS_HEADER)
            for e in self.epochs:
                w.writerow(e.row())
        self.artifacts.append(str(path))


def _dump_fakes(
    student: StudentModel,
    pair: ExplorerPair,
    prior: LatentPrior,
    count: int,
    q_min: float,
    rng,
    path: Path,
) -> None:
    z = sample_latent(prior, count, rng)
    fakes = generate(pair, z)
    batch = select_active_unknowns(student, fakes, q_min)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"f{i}" for i in range(fakes.shape[1])] + ["active"])
        for row, flag in zip(fakes, batch.mask):
            w.writerow([repr(float(v)) for v in row] + [int(flag)])


def joint_train(
    teacher: Model | None,
    student: StudentModel,
    pair: ExplorerPair | None,
    data: LabeledDataset,
    cfg: TrainConfig,
    seed: int,
) -> tuple[StudentModel, ExplorerPair | None, RunRecord]:
    """Run the three-player loop over `data`.

    teacher=None trains against one-hot targets; pair=None (or
    cfg.use_explorer False) trains the student on real data alone, logging
    zeros for the explorer columns. The teacher is never modified.
    """
    cfg.validate()
    data.validate_for_training()
    if student.n_known != data.class_count:
        raise ValueError(
            f"student has {student.n_known} class heads, data has {data.class_count}"
        )
    if student.in_dim != data.dim:
        raise ValueError("student input width does not match data")
    use_explorer = cfg.use_explorer and pair is not None
    if use_explorer and pair.data_dim != data.dim:
        raise ValueError("generator output width does not match data")

    # targets precede the loop and are computed exactly once
    if teacher is None:
        targets = hard_targets(data)
    else:
        targets = distill_targets(teacher, data, cfg.distill)
    q = targets_matrix(targets)
    if q.shape != (len(data), student.n_heads):
        raise ValueError("distilled targets do not cover the training set")

    ss = np.random.SeedSequence(seed).spawn(3)
    shuffle_rng = np.random.default_rng(ss[0])
    latent_rng = np.random.default_rng(ss[1])
    dump_rng = np.random.default_rng(ss[2])
    prior = LatentPrior(pair.latent_dim) if use_explorer else None

    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    record = RunRecord()
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(len(data))
        sums = np.zeros(5)
        active_total = 0
        batches = 0
        for start in range(0, len(order), cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            xb = data.features[idx]
            qb = q[idx]
            if use_explorer:
                z = sample_latent(prior, len(idx), latent_rng)
                d_loss = discriminator_step(pair, xb, z, cfg.discriminator_adam)
                g_adv, g_stu = generator_step(pair, student, z, cfg.generator_adam)
                fakes = generate(pair, z)  # same latents, post-update generator
                stats = student_step(
                    student, xb, qb, fakes, cfg.distill.q_min, cfg.student_adam
                )
            else:
                d_loss = g_adv = g_stu = 0.0
                stats = student_step(student, xb, qb, None, cfg.distill.q_min, cfg.student_adam)
            sums += (d_loss, g_adv, g_stu, stats.real_loss, stats.fake_loss)
            active_total += stats.active_count
            batches += 1
        means = sums / batches
        record.epochs.append(
            EpochStats(
                epoch,
                float(means[0]),
                float(means[1]),
                float(means[2]),
                float(means[3]),
                float(means[4]),
                active_total,
            )
        )
        if out_dir is not None:
            if use_explorer and cfg.dump_fakes_every and epoch % cfg.dump_fakes_every == 0:
                fdir = out_dir / "fakes"
                fdir.mkdir(parents=True, exist_ok=True)
                fpath = fdir / f"epoch_{epoch}.csv"
                _dump_fakes(
                    student, pair, prior, cfg.dump_count, cfg.distill.q_min, dump_rng, fpath
                )
                record.artifacts.append(str(fpath))
            if cfg.checkpoint_every and epoch % cfg.checkpoint_every == 0:
                cdir = out_dir / "checkpoints"
                cdir.mkdir(parents=True, exist_ok=True)
                cpath = cdir / f"epoch_{epoch}.json"
                _save_all(cpath, student, pair if use_explorer else None, cfg)
                record.artifacts.append(str(cpath))
    return student, pair, record


def _save_all(
    path: Path, student: StudentModel, pair: ExplorerPair | None, cfg: TrainConfig
) -> None:
    models = dict(student_models(student))
    adam = {name: cfg.student_adam for name in models}
    if pair is not None:
        models["generator"] = pair.generator
        models["discriminator"] = pair.discriminator
        adam["generator"] = cfg.generator_adam
        adam["discriminator"] = cfg.discriminator_adam
    save_checkpoint(path, models, adam)


def save_training_state(
    path, student: StudentModel, pair: ExplorerPair | None, cfg: TrainConfig
) -> None:
    _save_all(Path(path), student, pair, cfg)
