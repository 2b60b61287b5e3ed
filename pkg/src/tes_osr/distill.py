"""Teacher training and hint extraction.

The teacher is a plain softmax classifier. Its temperature-scaled confidence
in the true class, min-max normalized over the correctly classified part of
the training set, is mapped into [q_min, 1] and becomes the soft target the
student regresses toward; misclassified samples fall back to q_min. Target
mass not given to the true class goes to the rejection slot, so every target
row carries exactly two nonzero entries that sum to 1.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datagen import LabeledDataset
from .nn import (
    AdamConfig,
    Model,
    categorical_cross_entropy,
    categorical_cross_entropy_grad,
    adam_step,
    backward,
    forward,
    init_model,
    output_dim,
)


@dataclass
class DistillConfig:
    tau: float = 2.0
    q_min: float = 0.7

    def validate(self) -> None:
        if self.tau <= 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not (0.5 < self.q_min < 1.0):
            raise ValueError(f"q_min must lie in (0.5, 1), got {self.q_min}")


@dataclass
class DistilledTarget:
    """Soft target for one training sample over the |Y|+1 student heads.

    q_d[target_class] lies in [q_min, 1], q_d[-1] is its exact complement,
    everything else is exactly 0.
    """

    target_class: int
    q_d: np.ndarray

    def __post_init__(self):
        self.q_d = np.ascontiguousarray(self.q_d, dtype=np.float64)
        if self.q_d.ndim != 1 or len(self.q_d) < 2:
            raise ValueError("q_d must be a vector over at least two heads")
        if not (0 <= self.target_class < len(self.q_d) - 1):
            raise ValueError("target_class must index a known-class head")


def one_hot(labels: np.ndarray, width: int) -> np.ndarray:
    out = np.zeros((len(labels), width), dtype=np.float64)
    out[np.arange(len(labels)), labels] = 1.0
    return out


def train_teacher(
    data: LabeledDataset,
    spec,
    epochs: int,
    adam: AdamConfig,
    seed: int,
    batch_size: int = 128,
) -> Model:
    """Minimize cross entropy with shuffled mini-batches; epochs=0 returns
    the freshly initialized network untouched."""
    data.validate_for_training()
    if epochs < 0:
        raise ValueError("epochs must be non-negative")
    if batch_size < 1:
        raise ValueError("batch_size must be at least 1")
    if output_dim(spec) != data.class_count:
        raise ValueError(
            f"teacher output width {output_dim(spec)} does not match "
            f"{data.class_count} classes"
        )
    if spec[-1].kind != "softmax":
        raise ValueError("teacher stack must end in softmax")
    ss = np.random.SeedSequence(seed).spawn(2)
    model = init_model(spec, np.random.default_rng(ss[0]))
    shuffle = np.random.default_rng(ss[1])
    targets = one_hot(data.labels, data.class_count)
    for _ in range(epochs):
        order = shuffle.permutation(len(data))
        # last short batch kept
        for start in range(0, len(order), batch_size):
            idx = order[start : start + batch_size]
            trace = forward(model, data.features[idx])
            dprob = categorical_cross_entropy_grad(trace.output, targets[idx])
            grads, _ = backward(trace, dprob)
            adam_step(model, grads, adam)
    return model


def teacher_logits(teacher: Model, features: np.ndarray) -> np.ndarray:
    """Pre-softmax activations; the stack must end in softmax."""
    if teacher.spec[-1].kind != "softmax":
        raise ValueError("teacher stack must end in softmax")
    trace = forward(teacher, features)
    return trace.activations[-2]


def teacher_accuracy(teacher: Model, data: LabeledDataset) -> float:
    probs = forward(teacher, data.features).output
    return float(np.mean(np.argmax(probs, axis=1) == data.labels))


def teacher_loss(teacher: Model, data: LabeledDataset) -> float:
    probs = forward(teacher, data.features).output
    return categorical_cross_entropy(probs, one_hot(data.labels, data.class_count))


def temperature_scale(logits, tau: float) -> np.ndarray:
    """Softened posterior: softmax of logits / tau. Accepts a vector or a
    batch; tau=1 is the plain posterior."""
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    arr = np.asarray(logits, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    z = arr / tau
    z = z - z.max(axis=1, keepdims=True)
    e = np.exp(z)
    p = e / e.sum(axis=1, keepdims=True)
    return p[0] if squeeze else p


def partition_by_correctness(
    teacher: Model, data: LabeledDataset
) -> tuple[np.ndarray, np.ndarray]:
    """Indices the teacher classifies correctly vs not; argmax ties go to the
    lowest class index, so the split is deterministic."""
    probs = forward(teacher, data.features).output
    correct = np.argmax(probs, axis=1) == data.labels
    idx = np.arange(len(data))
    return idx[correct], idx[~correct]


def distill_targets(
    teacher: Model, data: LabeledDataset, cfg: DistillConfig
) -> list[DistilledTarget]:
    """Soft targets for every training sample.

    The normalizer (min/max of the tempered true-class confidence) comes from
    the correctly classified subset only; a degenerate subset where max equals
    min maps every correct sample to confidence 1.
    """
    cfg.validate()
    data.validate_for_training()
    logits = teacher_logits(teacher, data.features)
    if logits.shape[1] != data.class_count:
        raise ValueError("teacher width does not match dataset classes")
    q_tau = temperature_scale(logits, cfg.tau)
    s = q_tau[np.arange(len(data)), data.labels]
    correct_idx, _ = partition_by_correctness(teacher, data)
    correct = np.zeros(len(data), dtype=bool)
    correct[correct_idx] = True
    if len(correct_idx) == 0:
        raise ValueError("teacher classifies nothing correctly; cannot normalize")
    lo = s[correct].min()
    hi = s[correct].max()
    span = hi - lo
    out: list[DistilledTarget] = []
    width = data.class_count + 1
    for i in range(len(data)):
        if correct[i]:
            norm = 1.0 if span == 0.0 else (s[i] - lo) / span
            q_t = cfg.q_min + (1.0 - cfg.q_min) * norm
        else:
            q_t = cfg.q_min
        row = np.zeros(width, dtype=np.float64)
        row[data.labels[i]] = q_t
        row[-1] = 1.0 - q_t  # exact for q_t in [0.5, 1]
        out.append(DistilledTarget(int(data.labels[i]), row))
    return out


def targets_matrix(targets: list[DistilledTarget]) -> np.ndarray:
    """Stack per-sample targets into an (M x (|Y|+1)) matrix, in order."""
    if not targets:
        raise ValueError("no distilled targets")
    width = len(targets[0].q_d)
    if any(len(t.q_d) != width for t in targets):
        raise ValueError("distilled targets have inconsistent widths")
    return np.stack([t.q_d for t in targets])


def hard_targets(data: LabeledDataset) -> list[DistilledTarget]:
    """One-hot stand-ins over |Y|+1 heads for runs without a teacher."""
    out = []
    for label in data.labels:
        row = np.zeros(data.class_count + 1, dtype=np.float64)
        row[label] = 1.0
        out.append(DistilledTarget(int(label), row))
    return out


def save_distilled(targets: list[DistilledTarget], path) -> None:
    """CSV columns: index,target_class,q_target,q_unknown."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["index", "target_class", "q_target", "q_unknown"])
        for i, t in enumerate(targets):
            w.writerow(
                [i, t.target_class, repr(float(t.q_d[t.target_class])), repr(float(t.q_d[-1]))]
            )


def load_distilled(path, class_count: int) -> list[DistilledTarget]:
    out: list[DistilledTarget] = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != ["index", "target_class", "q_target", "q_unknown"]:
            raise ValueError(f"{path}: unexpected header {header}")
        for lineno, row in enumerate(reader, start=2):
            if len(row) != 4:
                raise ValueError(f"{path}: line {lineno}: expected 4 fields")
            try:
                idx, target_class = int(row[0]), int(row[1])
                q_t, q_u = float(row[2]), float(row[3])
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: {e}") from None
            if idx != len(out):
                raise ValueError(f"{path}: line {lineno}: indices must be consecutive")
            vec = np.zeros(class_count + 1, dtype=np.float64)
            vec[target_class] = q_t
            vec[-1] = q_u
            out.append(DistilledTarget(target_class, vec))
    return out
