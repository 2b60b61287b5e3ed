"""Collective decision scores and the calibrated accept/reject rule.

Each head's logit is compared against the mean of all the others, so a score
says "how much more does this head believe than the field". Per-class
acceptance thresholds come from a coverage quantile over the training
samples the model already assigns correctly; the rejection head's threshold
is pinned at zero.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .datagen import LabeledDataset
from .student import StudentModel, student_forward


def collective_decision_scores(logits) -> np.ndarray:
    """cds_y = l_y - mean of the other logits; accepts a vector or batch."""
    arr = np.asarray(logits, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise ValueError("logits must cover at least two heads")
    n = arr.shape[1]
    total = arr.sum(axis=1, keepdims=True)
    cds = arr - (total - arr) / (n - 1)
    return cds[0] if squeeze else cds


@dataclass
class Thresholds:
    """Per-head score thresholds plus the rejection-probability gate.

    eps_cds has one entry per head (rejection last, fixed at 0 by the
    calibrator). eps_unknown only matters when use_uncertainty is on.
    """

    eps_cds: np.ndarray
    eps_unknown: float
    use_uncertainty: bool = False
    coverage: float = 0.95

    def __post_init__(self):
        self.eps_cds = np.ascontiguousarray(self.eps_cds, dtype=np.float64)
        if self.eps_cds.ndim != 1 or len(self.eps_cds) < 2:
            raise ValueError("eps_cds must cover at least two heads")


@dataclass
class Prediction:
    label: int
    cds: np.ndarray
    p_unknown: float


def lower_quantile(values: np.ndarray, q: float) -> float:
    """Empirical quantile that never interpolates: sorted[floor(q*(n-1))]."""
    values = np.asarray(values, dtype=np.float64)
    if len(values) == 0:
        raise ValueError("quantile of an empty set")
    if not (0.0 <= q <= 1.0):
        raise ValueError(f"quantile must lie in [0, 1], got {q}")
    return float(np.quantile(values, q, method="lower"))


def calibrate_thresholds(
    student: StudentModel,
    train_data: LabeledDataset,
    coverage: float = 0.95,
    use_uncertainty: bool = False,
) -> Thresholds:
    """Pick thresholds so ~coverage of already-correct train samples pass.

    For class y, the threshold is the (1 - coverage) lower quantile of cds_y
    over training samples of class y whose top score is y. The rejection
    gate is the coverage quantile of the rejection probability over all
    training samples. A class with no correctly-assigned samples is an
    error: there is nothing to calibrate on.
    """
    if not (0.0 < coverage < 1.0):
        raise ValueError(f"coverage must lie in (0, 1), got {coverage}")
    train_data.validate_for_training()
    if train_data.class_count != student.n_known:
        raise ValueError("dataset classes do not match student heads")
    counts = np.bincount(train_data.labels, minlength=train_data.class_count)
    thin = [int(c) for c in np.flatnonzero(counts < 20)]
    if thin:
        raise ValueError(
            f"classes {thin} have fewer than 20 samples; the coverage quantile "
            "would be meaningless"
        )
    trace = student_forward(student, train_data.features)
    cds = collective_decision_scores(trace.logits)
    top = np.argmax(cds, axis=1)
    eps = np.zeros(student.n_heads, dtype=np.float64)
    for y in range(student.n_known):
        sel = (train_data.labels == y) & (top == y)
        if not sel.any():
            raise ValueError(
                f"class {y} has no correctly-assigned training samples; "
                "cannot calibrate"
            )
        eps[y] = lower_quantile(cds[sel, y], 1.0 - coverage)
    eps[-1] = 0.0  # rejection head threshold is fixed
    eps_unknown = lower_quantile(trace.probs[:, -1], coverage)
    return Thresholds(eps, eps_unknown, use_uncertainty, coverage)


def decide(cds_row: np.ndarray, p_unknown: float, thresholds: Thresholds) -> int:
    """Apply the rule to one score vector; returns a head index (rejection
    head index means "unknown"). Ties in the argmax go to the lowest index;
    sitting exactly on a threshold does not pass."""
    cds_row = np.asarray(cds_row, dtype=np.float64)
    if cds_row.shape != thresholds.eps_cds.shape:
        raise ValueError("score width does not match thresholds")
    reject = len(cds_row) - 1
    y = int(np.argmax(cds_row))
    if cds_row[y] <= thresholds.eps_cds[y]:
        return reject
    if thresholds.use_uncertainty and not (p_unknown < thresholds.eps_unknown):
        return reject
    return y


def predict(student: StudentModel, thresholds: Thresholds, x) -> Prediction:
    """Classify a single sample; the label |Y| means unknown."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x[None, :]
    if x.shape[0] != 1:
        raise ValueError("predict takes one sample; use predict_batch")
    trace = student_forward(student, x)
    cds = collective_decision_scores(trace.logits)[0]
    p_u = float(trace.probs[0, -1])
    return Prediction(decide(cds, p_u, thresholds), cds, p_u)


def predict_batch(
    student: StudentModel, thresholds: Thresholds, batch
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorized rule: (labels, cds matrix, rejection probabilities)."""
    trace = student_forward(student, batch)
    cds = collective_decision_scores(trace.logits)
    p_u = trace.probs[:, -1]
    reject = student.n_heads - 1
    top = np.argmax(cds, axis=1)
    accept = cds[np.arange(len(cds)), top] > thresholds.eps_cds[top]
    if thresholds.use_uncertainty:
        accept &= p_u < thresholds.eps_unknown
    labels = np.where(accept, top, reject)
    return labels.astype(np.int64), cds, p_u


def save_thresholds(thresholds: Thresholds, path) -> None:
    """Plain text, one threshold per line, class index then value."""
    lines = [f"coverage {thresholds.coverage!r}"]
    for y, v in enumerate(thresholds.eps_cds[:-1]):
        lines.append(f"eps_cds {y} {float(v)!r}")
    lines.append(f"eps_cds U {float(thresholds.eps_cds[-1])!r}")
    lines.append(f"eps_unknown {thresholds.eps_unknown!r}")
    lines.append(f"use_uncertainty {int(thresholds.use_uncertainty)}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_thresholds(path) -> Thresholds:
    coverage = 0.95
    eps: dict[str, float] = {}
    eps_unknown = 0.0
    use_uncertainty = False
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        parts = line.split()
        if not parts:
            continue
        try:
            if parts[0] == "coverage":
                coverage = float(parts[1])
            elif parts[0] == "eps_cds":
                eps[parts[1]] = float(parts[2])
            elif parts[0] == "eps_unknown":
                eps_unknown = float(parts[1])
            elif parts[0] == "use_uncertainty":
                use_uncertainty = bool(int(parts[1]))
            else:
                raise ValueError(f"unknown key {parts[0]!r}")
        except (IndexError, ValueError) as e:
            raise ValueError(f"{path}: line {lineno}: {e}") from None
    known = sorted((k for k in eps if k != "U"), key=int)
    if known != [str(i) for i in range(len(known))] or "U" not in eps:
        raise ValueError(f"{path}: incomplete threshold table")
    vec = np.array([eps[str(i)] for i in range(len(known))] + [eps["U"]])
    return Thresholds(vec, eps_unknown, use_uncertainty, coverage)
