"""Evaluation measures: openness, confusion-based F1, and ranking AUROC."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


def openness(train_classes: int, test_classes: int, target_classes: int) -> float:
    """1 - sqrt(2*train / (test + target)).

    Zero when testing sees nothing new; grows toward 1 as the test-time
    label space outnumbers the training one.
    """
    if train_classes < 1:
        raise ValueError("training class count must be positive")
    if test_classes < 0 or target_classes < 0:
        raise ValueError("class counts cannot be negative")
    if test_classes + target_classes <= 0:
        raise ValueError("test and target class counts cannot both be zero")
    if 2 * train_classes > test_classes + target_classes:
        raise ValueError("openness undefined: 2*train exceeds test + target")
    return 1.0 - math.sqrt(2.0 * train_classes / (test_classes + target_classes))


def confusion_matrix(truth: np.ndarray, preds: np.ndarray, n_classes: int) -> np.ndarray:
    truth = np.asarray(truth, dtype=np.int64)
    preds = np.asarray(preds, dtype=np.int64)
    if truth.shape != preds.shape or truth.ndim != 1:
        raise ValueError("truth and preds must be matching vectors")
    if len(truth) == 0:
        raise ValueError("cannot evaluate an empty prediction set")
    for name, a in (("truth", truth), ("preds", preds)):
        if a.min() < 0 or a.max() >= n_classes:
            raise ValueError(f"{name} labels outside [0, {n_classes})")
    m = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(m, (truth, preds), 1)
    return m


@dataclass
class ClassScore:
    label: int
    precision: float
    recall: float
    f1: float
    support: int
    absent: bool  # no truth and no predictions for this class


def per_class_scores(conf: np.ndarray) -> list[ClassScore]:
    scores = []
    for y in range(conf.shape[0]):
        tp = float(conf[y, y])
        truth_n = float(conf[y].sum())
        pred_n = float(conf[:, y].sum())
        precision = tp / pred_n if pred_n > 0 else 0.0
        recall = tp / truth_n if truth_n > 0 else 0.0
        f1 = (
            2.0 * precision * recall / (precision + recall)
            if precision + recall > 0
            else 0.0
        )
        scores.append(
            ClassScore(y, precision, recall, f1, int(truth_n), truth_n == 0 and pred_n == 0)
        )
    return scores


def macro_f1(truth, preds, n_classes: int) -> tuple[float, list[ClassScore]]:
    """Unweighted mean F1 over all n_classes labels.

    Classes absent from both truth and predictions still divide the mean
    (their F1 is 0) and come back flagged so callers can report them.
    """
    conf = confusion_matrix(np.asarray(truth), np.asarray(preds), n_classes)
    scores = per_class_scores(conf)
    return float(np.mean([s.f1 for s in scores])), scores


def _midranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=np.float64)
    sorted_v = values[order]
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and sorted_v[j + 1] == sorted_v[i]:
            j += 1
        # ties share the average of the ranks they span (1-based)
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


def auroc(scores, is_known) -> float:
    """Probability a known sample outranks an unknown one, ties counting half.

    Rank-sum formulation with midranks; exact for the modest sizes here.
    """
    s = np.asarray(scores, dtype=np.float64)
    k = np.asarray(is_known, dtype=bool)
    if s.shape != k.shape or s.ndim != 1:
        raise ValueError("scores and is_known must be matching vectors")
    if not np.all(np.isfinite(s)):
        raise ValueError("scores contain NaN or Inf")
    n_known = int(k.sum())
    n_unknown = len(k) - n_known
    if n_known == 0 or n_unknown == 0:
        raise ValueError("AUROC needs both known and unknown samples")
    ranks = _midranks(s)
    u = ranks[k].sum() - n_known * (n_known + 1) / 2.0
    return float(u / (n_known * n_unknown))


@dataclass
class EvalReport:
    openness: float
    macro_f1: float
    auroc: float | None
    per_class: list[ClassScore]
    confusion: np.ndarray
    known_count: int
    unknown_count: int
    extras: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "openness": self.openness,
            "macro_f1": self.macro_f1,
            "auroc": self.auroc,
            "known_count": self.known_count,
            "unknown_count": self.unknown_count,
            "per_class": [
                {
                    "label": s.label,
                    "precision": s.precision,
                    "recall": s.recall,
                    "f1": s.f1,
                    "support": s.support,
                    "absent": s.absent,
                }
                for s in self.per_class
            ],
            "confusion": self.confusion.tolist(),
            **self.extras,
        }
