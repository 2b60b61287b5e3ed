"""One-vs-rest student network.

A shared trunk feeds |Y|+1 independent sigmoid heads: one per known class
plus a rejection head at the last index. Heads are trained with binary cross
entropy against distilled targets on real data and against the pure-rejection
target on generated samples that every known head already scores low, the
"active unknowns".
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nn import (
    AdamConfig,
    ForwardTrace,
    Model,
    adam_step,
    backward,
    binary_cross_entropy,
    clone_model,
    feedforward,
    forward,
    init_model,
    input_dim,
    leaky_relu,
    output_dim,
    safe_log,
    stable_sigmoid,
)


@dataclass
class StudentModel:
    """Shared trunk plus one single-logit head per class and one for rejection."""

    trunk: Model
    heads: list[Model]

    def __post_init__(self):
        if len(self.heads) < 2:
            raise ValueError("student needs at least one class head plus rejection")
        trunk_out = output_dim(self.trunk.spec)
        for i, head in enumerate(self.heads):
            if input_dim(head.spec) != trunk_out:
                raise ValueError(f"head {i} input does not match trunk output")
            if output_dim(head.spec) != 1:
                raise ValueError(f"head {i} must emit a single logit")

    @property
    def n_known(self) -> int:
        return len(self.heads) - 1

    @property
    def n_heads(self) -> int:
        return len(self.heads)

    @property
    def in_dim(self) -> int:
        return input_dim(self.trunk.spec)


def build_student(
    in_dim: int,
    trunk_hidden: list[int],
    head_hidden: list[int],
    class_count: int,
    rng,
) -> StudentModel:
    """Glorot-initialized student with class_count + 1 heads.

    The trunk ends in a leaky ReLU; heads end in a raw logit (the sigmoid is
    applied in student_forward so both logits and probabilities are visible).
    """
    if class_count < 1:
        raise ValueError("class_count must be at least 1")
    gen = np.random.default_rng(rng)
    # trunk ends in a nonlinearity so heads see features, not raw affine output
    trunk_spec = feedforward([in_dim] + list(trunk_hidden)) + [leaky_relu(0.01)]
    trunk = init_model(trunk_spec, gen)
    width = trunk_hidden[-1]
    heads = [
        init_model(feedforward([width] + list(head_hidden) + [1]), gen)
        for _ in range(class_count + 1)
    ]
    return StudentModel(trunk, heads)


def clone_student(student: StudentModel) -> StudentModel:
    return StudentModel(clone_model(student.trunk), [clone_model(h) for h in student.heads])


@dataclass
class StudentTrace:
    """Forward pass through trunk and every head.

    logits and probs are (N x (|Y|+1)); column order matches the head list,
    rejection last.
    """

    trunk_trace: ForwardTrace
    head_traces: list[ForwardTrace]
    logits: np.ndarray
    probs: np.ndarray


def student_forward(student: StudentModel, batch) -> StudentTrace:
    trunk_trace = forward(student.trunk, batch)
    h = trunk_trace.output
    head_traces = [forward(head, h) for head in student.heads]
    logits = np.concatenate([t.output for t in head_traces], axis=1)
    probs = stable_sigmoid(logits)
    return StudentTrace(trunk_trace, head_traces, logits, probs)


def student_backward(
    student: StudentModel, trace: StudentTrace, dlogits: np.ndarray
) -> tuple[dict[str, np.ndarray], list[dict[str, np.ndarray]], np.ndarray]:
    """Push dL/dlogits back through heads and trunk.

    Returns (trunk grads, per-head grads, dL/dinput).
    """
    if dlogits.shape != trace.logits.shape:
        raise ValueError("dlogits shape does not match trace logits")
    head_grads: list[dict[str, np.ndarray]] = []
    dh = np.zeros_like(trace.trunk_trace.output)
    for k, head_trace in enumerate(trace.head_traces):
        g, dh_k = backward(head_trace, dlogits[:, k : k + 1])
        head_grads.append(g)
        dh += dh_k
    trunk_grads, dx = backward(trace.trunk_trace, dh)
    return trunk_grads, head_grads, dx


def student_input_grad(
    student: StudentModel, trace: StudentTrace, dlogits: np.ndarray
) -> np.ndarray:
    """dL/dinput only; used when the student is a frozen critic."""
    _, _, dx = student_backward(student, trace, dlogits)
    return dx


def student_adam(
    student: StudentModel,
    trunk_grads: dict[str, np.ndarray],
    head_grads: list[dict[str, np.ndarray]],
    cfg: AdamConfig,
) -> None:
    if len(head_grads) != len(student.heads):
        raise ValueError("head gradient list does not match head count")
    adam_step(student.trunk, trunk_grads, cfg)
    for head, g in zip(student.heads, head_grads):
        adam_step(head, g, cfg)


def _sum_grads(a: dict[str, np.ndarray], b: dict[str, np.ndarray]) -> dict[str, np.ndarray]:
    return {k: a[k] + b[k] for k in a}


def rejection_row(n_heads: int) -> np.ndarray:
    """Target that rejects everywhere: zeros with a 1 on the rejection head."""
    row = np.zeros(n_heads, dtype=np.float64)
    row[-1] = 1.0
    return row


def active_mask(known_max: np.ndarray, q_min: float) -> np.ndarray:
    """Strictly below the rejection band: max known sigmoid < 1 - q_min.

    A sample sitting exactly on the threshold is not selected.
    """
    if not (0.5 < q_min < 1.0):
        raise ValueError(f"q_min must lie in (0.5, 1), got {q_min}")
    return np.asarray(known_max, dtype=np.float64) < (1.0 - q_min)


@dataclass
class ActiveUnknownBatch:
    samples: np.ndarray  # (K x d), the selected rows
    mask: np.ndarray  # (N,) bool over the candidate batch

    @property
    def count(self) -> int:
        return int(self.mask.sum())


def select_active_unknowns(
    student: StudentModel, candidates: np.ndarray, q_min: float
) -> ActiveUnknownBatch:
    """Filter generated samples down to those no known head claims."""
    candidates = np.asarray(candidates, dtype=np.float64)
    if len(candidates) == 0:
        return ActiveUnknownBatch(candidates, np.zeros(0, dtype=bool))
    trace = student_forward(student, candidates)
    known_max = trace.probs[:, :-1].max(axis=1)
    mask = active_mask(known_max, q_min)
    return ActiveUnknownBatch(candidates[mask], mask)


@dataclass
class StudentStepStats:
    real_loss: float
    fake_loss: float
    active_count: int


def student_step(
    student: StudentModel,
    real_batch: np.ndarray,
    real_targets: np.ndarray,
    fakes: np.ndarray | None,
    q_min: float,
    adam: AdamConfig,
) -> StudentStepStats:
    """One combined update on a real batch and (optionally) generated fakes.

    The fake term keeps only active unknowns and is normalized by the fake
    batch size N, not the survivor count, so an epoch with no survivors
    contributes an exact zero. Passing fakes=None trains on real data alone.
    """
    real_batch = np.asarray(real_batch, dtype=np.float64)
    real_targets = np.asarray(real_targets, dtype=np.float64)
    if len(real_targets) != len(real_batch):
        raise ValueError("every real sample needs a distilled target row")
    if real_targets.shape[1] != student.n_heads:
        raise ValueError("target width does not match head count")
    n = len(real_batch)
    if n == 0:
        raise ValueError("real batch is empty")

    r_trace = student_forward(student, real_batch)
    real_loss = binary_cross_entropy(r_trace.probs, real_targets)
    dlog_r = (r_trace.probs - real_targets) / n
    trunk_g, head_g, _ = student_backward(student, r_trace, dlog_r)

    fake_loss = 0.0
    active = 0
    if fakes is not None:
        fakes = np.asarray(fakes, dtype=np.float64)
        if len(fakes) != n:
            raise ValueError("fake batch must match the real batch size")
        f_trace = student_forward(student, fakes)
        mask = active_mask(f_trace.probs[:, :-1].max(axis=1), q_min)
        active = int(mask.sum())
        if active > 0:
            y_u = rejection_row(student.n_heads)
            p = f_trace.probs[mask]
            fake_loss = float(
                -np.sum(y_u * safe_log(p) + (1.0 - y_u) * safe_log(1.0 - p)) / n
            )
            dlog_f = ((f_trace.probs - y_u) / n) * mask[:, None]
            trunk_gf, head_gf, _ = student_backward(student, f_trace, dlog_f)
            trunk_g = _sum_grads(trunk_g, trunk_gf)
            head_g = [_sum_grads(a, b) for a, b in zip(head_g, head_gf)]

    student_adam(student, trunk_g, head_g, adam)
    return StudentStepStats(real_loss, fake_loss, active)


def student_models(student: StudentModel) -> dict[str, Model]:
    """Named sub-models for checkpointing: trunk, head0..headK."""
    out = {"trunk": student.trunk}
    for i, head in enumerate(student.heads):
        out[f"head{i}"] = head
    return out


def student_from_models(models: dict[str, Model]) -> StudentModel:
    if "trunk" not in models:
        raise ValueError("checkpoint lacks a trunk model")
    heads = []
    i = 0
    while f"head{i}" in models:
        heads.append(models[f"head{i}"])
        i += 1
    if i != sum(1 for k in models if k.startswith("head")):
        raise ValueError("head indices are not consecutive")
    return StudentModel(models["trunk"], heads)
