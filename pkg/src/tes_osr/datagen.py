"""Synthetic datasets and the on-disk CSV format.

Three families: Gaussian cluster layouts in 2-D, uniform noise in [0,1]^d,
and noise overlaid on an existing dataset. Every generator takes an explicit
seed and is reproducible sample for sample.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


@dataclass
class LabeledDataset:
    """Feature matrix (M x d), integer labels (M), and the label-space size.

    Labels must lie in [0, class_count). M = 0 is legal for containers; the
    trainers demand more via validate_for_training().
    """

    features: np.ndarray
    labels: np.ndarray
    class_count: int

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=np.float64)
        self.labels = np.ascontiguousarray(self.labels, dtype=np.int64)
        self.class_count = int(self.class_count)
        if self.features.ndim != 2:
            raise ValueError(f"features must be 2-D, got shape {self.features.shape}")
        if self.labels.ndim != 1 or len(self.labels) != len(self.features):
            raise ValueError("labels must be 1-D and match the number of feature rows")
        if not np.all(np.isfinite(self.features)):
            raise ValueError("features contain NaN or Inf")
        if self.class_count < 0:
            raise ValueError("class_count must be non-negative")
        if len(self.labels) and (
            self.labels.min() < 0 or self.labels.max() >= self.class_count
        ):
            raise ValueError("labels must lie in [0, class_count)")

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    def validate_for_training(self) -> None:
        if len(self) == 0:
            raise ValueError("training dataset is empty")
        if self.class_count < 2:
            raise ValueError("training needs at least two classes")
        present = np.unique(self.labels)
        missing = sorted(set(range(self.class_count)) - set(present.tolist()))
        if missing:
            raise ValueError(f"training dataset has no samples for classes {missing}")


def _default_centers(class_count: int) -> np.ndarray:
    if class_count == 4:
        return np.array([[-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0], [1.0, 1.0]])
    # other counts sit on the unit circle so large sweeps stay well spread
    ang = 2.0 * math.pi * np.arange(class_count) / class_count
    return np.stack([np.cos(ang), np.sin(ang)], axis=1)


@dataclass
class ToySpec:
    """Gaussian clusters in 2-D, min-max normalized to [0,1] per dimension."""

    class_count: int = 4
    per_class: int = 1000
    spread: float = 0.35
    centers: list[list[float]] | None = None
    seed: int = 0

    def validate(self) -> None:
        if self.class_count < 1:
            raise ValueError("class_count must be at least 1")
        if self.per_class < 1:
            raise ValueError("per_class must be at least 1")
        if self.spread <= 0:
            raise ValueError("spread must be positive")
        if self.centers is not None:
            c = np.asarray(self.centers, dtype=np.float64)
            if c.shape != (self.class_count, 2):
                raise ValueError(
                    f"centers must be {self.class_count} points in 2-D, got {c.shape}"
                )
            if len(np.unique(c, axis=0)) != len(c):
                raise ValueError("centers must be distinct")


def gen_toy(spec: ToySpec) -> LabeledDataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    centers = (
        np.asarray(spec.centers, dtype=np.float64)
        if spec.centers is not None
        else _default_centers(spec.class_count)
    )
    feats = np.concatenate(
        [
            centers[k] + rng.normal(0.0, spec.spread, size=(spec.per_class, 2))
            for k in range(spec.class_count)
        ]
    )
    labels = np.repeat(np.arange(spec.class_count), spec.per_class)
    lo = feats.min(axis=0)
    span = feats.max(axis=0) - lo
    span[span <= 0.0] = 1.0  # constant column maps to 0
    feats = (feats - lo) / span
    return LabeledDataset(feats, labels, spec.class_count)


@dataclass
class NoiseSpec:
    """Uniform noise, either standalone or overlaid on a source dataset.

    mode "pure_noise": count samples of U[0,1]^dim, single pseudo-label.
    mode "overlay": clip(source + alpha * U[0,1]^d, 0, 1) row for row; count
    rows are drawn from the source (in order when count matches its size).
    """

    dim: int = 2
    count: int = 1000
    mode: str = "pure_noise"
    overlay_source: LabeledDataset | None = None
    alpha: float = 0.5
    seed: int = 0

    def validate(self) -> None:
        if self.dim < 1:
            raise ValueError("dim must be at least 1")
        if self.count < 1:
            raise ValueError("count must be at least 1")
        if self.mode not in ("pure_noise", "overlay"):
            raise ValueError(f"unknown noise mode {self.mode!r}")
        if self.alpha < 0:
            raise ValueError("alpha must be non-negative")
        if self.mode == "overlay":
            if self.overlay_source is None:
                raise ValueError("overlay mode needs overlay_source")
            if self.overlay_source.dim != self.dim:
                raise ValueError(
                    f"source dim {self.overlay_source.dim} does not match spec dim {self.dim}"
                )


def gen_noise(spec: NoiseSpec) -> LabeledDataset:
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    if spec.mode == "pure_noise":
        feats = rng.uniform(0.0, 1.0, size=(spec.count, spec.dim))
        return LabeledDataset(feats, np.zeros(spec.count, dtype=np.int64), 1)
    source = spec.overlay_source
    if len(source) == 0:
        raise ValueError("overlay source is empty")
    if spec.count == len(source):
        base = source.features
    else:
        idx = rng.choice(len(source), size=spec.count, replace=spec.count > len(source))
        base = source.features[idx]
    noise = rng.uniform(0.0, 1.0, size=base.shape)
    feats = np.clip(base + spec.alpha * noise, 0.0, 1.0)
    return LabeledDataset(feats, np.zeros(len(feats), dtype=np.int64), 1)


def split_known_unknown(
    data: LabeledDataset, known_classes: list[int]
) -> tuple[LabeledDataset, LabeledDataset, dict[int, int]]:
    """Partition by class list.

    Knowns are relabeled 0..len(known_classes)-1 in the order given; the
    relabeling map (original -> new) is returned for audit. Unknowns keep
    their original labels and label-space size.
    """
    if len(known_classes) == 0:
        raise ValueError("known_classes must be non-empty")
    if len(set(known_classes)) != len(known_classes):
        raise ValueError("known_classes has duplicates")
    bad = [c for c in known_classes if not (0 <= c < data.class_count)]
    if bad:
        raise ValueError(f"known_classes outside the dataset label space: {bad}")
    mapping = {int(orig): new for new, orig in enumerate(known_classes)}
    known_mask = np.isin(data.labels, list(mapping))
    new_labels = np.array(
        [mapping[int(l)] for l in data.labels[known_mask]], dtype=np.int64
    )
    knowns = LabeledDataset(data.features[known_mask], new_labels, len(known_classes))
    unknowns = LabeledDataset(
        data.features[~known_mask], data.labels[~known_mask], data.class_count
    )
    return knowns, unknowns, mapping


def save_dataset(data: LabeledDataset, path) -> None:
    """CSV with header label,f0,...,f<d-1>; floats as shortest round-trip repr."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["label"] + [f"f{i}" for i in range(data.dim)])
        for label, row in zip(data.labels, data.features):
            w.writerow([int(label)] + [repr(float(v)) for v in row])


def load_dataset(path, class_count: int | None = None) -> LabeledDataset:
    """Read the CSV format back; class_count defaults to max(label)+1."""
    path = Path(path)
    feats: list[list[float]] = []
    labels: list[int] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty file, expected a header row") from None
        if len(header) < 2 or header[0] != "label":
            raise ValueError(f"{path}: line 1: expected header label,f0,...")
        dim = len(header) - 1
        for lineno, row in enumerate(reader, start=2):
            if len(row) != dim + 1:
                raise ValueError(
                    f"{path}: line {lineno}: expected {dim + 1} fields, got {len(row)}"
                )
            try:
                labels.append(int(row[0]))
                feats.append([float(v) for v in row[1:]])
            except ValueError as e:
                raise ValueError(f"{path}: line {lineno}: {e}") from None
    features = np.array(feats, dtype=np.float64).reshape(len(labels), dim)
    label_arr = np.array(labels, dtype=np.int64)
    if class_count is None:
        class_count = int(label_arr.max()) + 1 if len(label_arr) else 0
    return LabeledDataset(features, label_arr, class_count)
