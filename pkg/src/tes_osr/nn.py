"""Numeric core: flat tensors, dense feed-forward stacks, reverse-mode
gradients, Adam, and the two cross-entropy losses every trainer here uses.

Everything is float64 and deterministic given a seed. Models are plain
dataclasses mutated in place; gradients travel as name -> array maps so the
caller can sum contributions from several forward passes before stepping.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

# Floor applied to probabilities before any log; the losses blow up at 0.
PROB_FLOOR = 1e-12

LAYER_KINDS = ("dense", "leaky_relu", "sigmoid", "softmax")

CHECKPOINT_FORMAT = "dense-checkpoint-v1"


def require_finite(name: str, arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or Inf")


def _as_batch(x, name: str = "batch") -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 1-D or 2-D, got shape {arr.shape}")
    return arr


@dataclass
class Tensor:
    """Dense array stored flat in row-major order.

    `grad`, when present, is a flat buffer of the same length as `data`.
    """

    shape: tuple[int, ...]
    data: np.ndarray
    grad: np.ndarray | None = None

    def __post_init__(self):
        self.shape = tuple(int(s) for s in self.shape)
        if any(s <= 0 for s in self.shape):
            raise ValueError(f"tensor shape must be positive, got {self.shape}")
        self.data = np.ascontiguousarray(self.data, dtype=np.float64).ravel()
        size = math.prod(self.shape)
        if self.data.size != size:
            raise ValueError(
                f"tensor data length {self.data.size} does not match shape {self.shape}"
            )
        require_finite("tensor data", self.data)
        if self.grad is not None:
            self.grad = np.ascontiguousarray(self.grad, dtype=np.float64).ravel()
            if self.grad.size != size:
                raise ValueError(
                    f"tensor grad length {self.grad.size} does not match shape {self.shape}"
                )

    @property
    def values(self) -> np.ndarray:
        """The data reshaped to `shape` (a view, not a copy)."""
        return self.data.reshape(self.shape)


def tensor(values) -> Tensor:
    arr = np.asarray(values, dtype=np.float64)
    return Tensor(arr.shape, arr.ravel().copy())


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a feed-forward stack.

    kind "dense" uses in_dim/out_dim; "leaky_relu" uses leak; "sigmoid" and
    "softmax" take no parameters and are applied element- or row-wise.
    """

    kind: str
    in_dim: int = 0
    out_dim: int = 0
    leak: float = 0.01


def dense(in_dim: int, out_dim: int) -> LayerSpec:
    return LayerSpec("dense", in_dim=in_dim, out_dim=out_dim)


def leaky_relu(leak: float = 0.01) -> LayerSpec:
    return LayerSpec("leaky_relu", leak=leak)


def sigmoid_layer() -> LayerSpec:
    return LayerSpec("sigmoid")


def softmax_layer() -> LayerSpec:
    return LayerSpec("softmax")


def validate_layers(spec: Sequence[LayerSpec]) -> None:
    if len(spec) == 0:
        raise ValueError("layer stack must contain at least one layer")
    width: int | None = None
    for i, layer in enumerate(spec):
        if layer.kind not in LAYER_KINDS:
            raise ValueError(f"layer {i}: unknown kind {layer.kind!r}")
        if layer.kind == "dense":
            if layer.in_dim <= 0 or layer.out_dim <= 0:
                raise ValueError(f"layer {i}: dense dims must be positive")
            if width is not None and width != layer.in_dim:
                raise ValueError(
                    f"layer {i}: in_dim {layer.in_dim} does not match previous width {width}"
                )
            width = layer.out_dim
        elif layer.kind == "leaky_relu":
            if not (0.0 < layer.leak < 1.0):
                raise ValueError(f"layer {i}: leak must lie in (0, 1), got {layer.leak}")


def input_dim(spec: Sequence[LayerSpec]) -> int | None:
    """Width the stack expects, or None when no dense layer pins it."""
    for layer in spec:
        if layer.kind == "dense":
            return layer.in_dim
    return None


def output_dim(spec: Sequence[LayerSpec]) -> int | None:
    for layer in reversed(spec):
        if layer.kind == "dense":
            return layer.out_dim
    return None


def feedforward(
    dims: Sequence[int], output: str | None = None, leak: float = 0.01
) -> list[LayerSpec]:
    """Dense stack over `dims` with leaky ReLU between layers.

    `output` optionally appends a "sigmoid" or "softmax" head activation;
    None leaves raw logits.
    """
    if len(dims) < 2:
        raise ValueError("need at least an input and an output width")
    layers: list[LayerSpec] = []
    last = len(dims) - 2
    for i in range(len(dims) - 1):
        layers.append(dense(int(dims[i]), int(dims[i + 1])))
        if i < last:
            layers.append(leaky_relu(leak))
    if output is not None:
        if output == "sigmoid":
            layers.append(sigmoid_layer())
        elif output == "softmax":
            layers.append(softmax_layer())
        else:
            raise ValueError(f"unknown output activation {output!r}")
    return layers


@dataclass
class AdamConfig:
    lr: float = 0.002
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def validate(self) -> None:
        if self.lr <= 0:
            raise ValueError(f"lr must be positive, got {self.lr}")
        for name in ("beta1", "beta2"):
            b = getattr(self, name)
            if not (0.0 <= b < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {b}")
        if self.eps <= 0:
            raise ValueError(f"eps must be positive, got {self.eps}")


@dataclass
class Model:
    """Layer stack plus named parameters and Adam state.

    Parameter names are "layer<i>.w" / "layer<i>.b" for the dense layer at
    position i in `spec`. `m` and `v` hold the flat Adam moments; `step` is
    the shared update counter used for bias correction.
    """

    spec: list[LayerSpec]
    params: dict[str, Tensor]
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0


def init_model(spec: Sequence[LayerSpec], rng) -> Model:
    """Build a model with Glorot-uniform weights and zero biases.

    `rng` is a numpy Generator or a seed for one.
    """
    validate_layers(spec)
    gen = np.random.default_rng(rng)
    params: dict[str, Tensor] = {}
    for i, layer in enumerate(spec):
        if layer.kind != "dense":
            continue
        bound = math.sqrt(6.0 / (layer.in_dim + layer.out_dim))
        w = gen.uniform(-bound, bound, size=(layer.in_dim, layer.out_dim))
        params[f"layer{i}.w"] = Tensor((layer.in_dim, layer.out_dim), w.ravel())
        params[f"layer{i}.b"] = Tensor((layer.out_dim,), np.zeros(layer.out_dim))
    model = Model(list(spec), params)
    model.m = {k: np.zeros_like(t.data) for k, t in params.items()}
    model.v = {k: np.zeros_like(t.data) for k, t in params.items()}
    return model


def clone_model(model: Model) -> Model:
    out = Model(
        list(model.spec),
        {k: Tensor(t.shape, t.data.copy()) for k, t in model.params.items()},
        {k: a.copy() for k, a in model.m.items()},
        {k: a.copy() for k, a in model.v.items()},
        model.step,
    )
    return out


@dataclass
class ForwardTrace:
    """Per-layer activations from one forward pass.

    activations[0] is the input batch; activations[i+1] is the output of
    layer i. The trace is what backward() consumes.
    """

    model: Model
    activations: list[np.ndarray]

    @property
    def output(self) -> np.ndarray:
        return self.activations[-1]


def stable_sigmoid(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    # keep outputs strictly inside (0, 1) so downstream logs stay finite
    return np.clip(out, 1e-300, 1.0 - 1e-16)


def softmax_rows(x: np.ndarray) -> np.ndarray:
    z = x - np.max(x, axis=1, keepdims=True)
    e = np.exp(z)
    p = e / np.sum(e, axis=1, keepdims=True)
    return np.clip(p, 1e-300, 1.0)


def forward(model: Model, batch) -> ForwardTrace:
    x = _as_batch(batch, "input batch")
    require_finite("input batch", x)
    want = input_dim(model.spec)
    if want is not None and x.shape[1] != want:
        raise ValueError(f"batch width {x.shape[1]} does not match model input {want}")
    acts = [x]
    for i, layer in enumerate(model.spec):
        if layer.kind == "dense":
            w = model.params[f"layer{i}.w"].values
            b = model.params[f"layer{i}.b"].values
            x = x @ w + b
        elif layer.kind == "leaky_relu":
            x = np.where(x > 0.0, x, layer.leak * x)
        elif layer.kind == "sigmoid":
            x = stable_sigmoid(x)
        else:  # softmax
            x = softmax_rows(x)
        acts.append(x)
    require_finite("forward output", acts[-1])
    return ForwardTrace(model, acts)


def backward(trace: ForwardTrace, loss_grad) -> tuple[dict[str, np.ndarray], np.ndarray]:
    """Walk the trace in reverse.

    `loss_grad` is dL/d(output). Returns (parameter gradient map, dL/d(input)).
    The map covers every parameter of the traced model, shaped like the
    parameter values.
    """
    model = trace.model
    d = np.asarray(loss_grad, dtype=np.float64)
    out = trace.output
    if d.shape != out.shape:
        raise ValueError(f"loss grad shape {d.shape} does not match output {out.shape}")
    require_finite("loss grad", d)
    grads: dict[str, np.ndarray] = {}
    for i in reversed(range(len(model.spec))):
        layer = model.spec[i]
        x = trace.activations[i]
        y = trace.activations[i + 1]
        if layer.kind == "dense":
            w = model.params[f"layer{i}.w"].values
            grads[f"layer{i}.w"] = x.T @ d
            grads[f"layer{i}.b"] = d.sum(axis=0)
            d = d @ w.T
        elif layer.kind == "leaky_relu":
            d = d * np.where(x > 0.0, 1.0, layer.leak)
        elif layer.kind == "sigmoid":
            d = d * y * (1.0 - y)
        else:  # softmax: J^T d = y * (d - <d, y>)
            d = y * (d - np.sum(d * y, axis=1, keepdims=True))
    return grads, d


def adam_step(model: Model, grads: dict[str, np.ndarray], cfg: AdamConfig) -> Model:
    """One bias-corrected Adam update, in place. Returns the same model."""
    cfg.validate()
    missing = sorted(set(model.params) - set(grads))
    if missing:
        raise ValueError(f"gradient map missing parameters: {missing}")
    unknown = sorted(set(grads) - set(model.params))
    if unknown:
        raise ValueError(f"gradient map has unknown parameters: {unknown}")
    model.step += 1
    t = model.step
    c1 = 1.0 - cfg.beta1**t
    c2 = 1.0 - cfg.beta2**t
    for name, p in model.params.items():
        g = np.asarray(grads[name], dtype=np.float64).ravel()
        if g.size != p.data.size:
            raise ValueError(f"gradient for {name} has wrong size")
        require_finite(f"gradient for {name}", g)
        m = model.m[name]
        v = model.v[name]
        m *= cfg.beta1
        m += (1.0 - cfg.beta1) * g
        v *= cfg.beta2
        v += (1.0 - cfg.beta2) * g * g
        p.data -= cfg.lr * (m / c1) / (np.sqrt(v / c2) + cfg.eps)
    return model


def safe_log(x: np.ndarray) -> np.ndarray:
    """log with the argument floored at PROB_FLOOR, so losses stay finite and
    exact-match inputs still hit zero loss (log 1 == 0 untouched)."""
    return np.log(np.maximum(x, PROB_FLOOR))


def _check_one_hot(t: np.ndarray) -> None:
    if not np.all((t == 0.0) | (t == 1.0)):
        raise ValueError("targets must be one-hot (entries 0 or 1)")
    if not np.all(t.sum(axis=1) == 1.0):
        raise ValueError("targets must have exactly one 1 per row")


def categorical_cross_entropy(probs, targets) -> float:
    """Mean -sum(t * log p) over the batch. Rows of `probs` must sum to 1."""
    p = _as_batch(probs, "probs")
    t = _as_batch(targets, "targets")
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: probs {p.shape} vs targets {t.shape}")
    if np.max(np.abs(p.sum(axis=1) - 1.0)) > 1e-6:
        raise ValueError("probability rows must sum to 1")
    _check_one_hot(t)
    return float(-np.sum(t * safe_log(p)) / p.shape[0])


def categorical_cross_entropy_grad(probs, targets) -> np.ndarray:
    """d(loss)/d(probs); the floor clamp is treated as identity."""
    p = _as_batch(probs, "probs")
    t = _as_batch(targets, "targets")
    if p.shape != t.shape:
        raise ValueError(f"shape mismatch: probs {p.shape} vs targets {t.shape}")
    return -(t / np.maximum(p, PROB_FLOOR)) / p.shape[0]


def binary_cross_entropy(preds, targets) -> float:
    """Mean over rows of -sum(q log p + (1-q) log(1-p)); targets in [0, 1]."""
    p = _as_batch(preds, "preds")
    q = _as_batch(targets, "targets")
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: preds {p.shape} vs targets {q.shape}")
    if np.any((q < 0.0) | (q > 1.0)):
        raise ValueError("targets must lie in [0, 1]")
    return float(-np.sum(q * safe_log(p) + (1.0 - q) * safe_log(1.0 - p)) / p.shape[0])


def binary_cross_entropy_grad(preds, targets) -> np.ndarray:
    p = _as_batch(preds, "preds")
    q = _as_batch(targets, "targets")
    if p.shape != q.shape:
        raise ValueError(f"shape mismatch: preds {p.shape} vs targets {q.shape}")
    return (
        -(q / np.maximum(p, PROB_FLOOR)) + (1.0 - q) / np.maximum(1.0 - p, PROB_FLOOR)
    ) / p.shape[0]


def _layer_to_json(layer: LayerSpec) -> dict:
    return {
        "kind": layer.kind,
        "in_dim": layer.in_dim,
        "out_dim": layer.out_dim,
        "leak": layer.leak,
    }


def _model_to_json(model: Model, adam: AdamConfig) -> dict:
    return {
        "adam": {"lr": adam.lr, "beta1": adam.beta1, "beta2": adam.beta2, "eps": adam.eps},
        "step": model.step,
        "layers": [_layer_to_json(l) for l in model.spec],
        "params": [
            {"name": k, "shape": list(t.shape), "data": t.data.tolist()}
            for k, t in model.params.items()
        ],
        "moments": [
            {"name": k, "m": model.m[k].tolist(), "v": model.v[k].tolist()}
            for k in model.params
        ],
    }


def _model_from_json(obj: dict) -> tuple[Model, AdamConfig]:
    spec = [
        LayerSpec(l["kind"], int(l["in_dim"]), int(l["out_dim"]), float(l["leak"]))
        for l in obj["layers"]
    ]
    params = {
        p["name"]: Tensor(tuple(p["shape"]), np.array(p["data"], dtype=np.float64))
        for p in obj["params"]
    }
    model = Model(spec, params)
    model.step = int(obj["step"])
    model.m = {e["name"]: np.array(e["m"], dtype=np.float64) for e in obj["moments"]}
    model.v = {e["name"]: np.array(e["v"], dtype=np.float64) for e in obj["moments"]}
    if set(model.m) != set(params):
        raise ValueError("checkpoint moments do not cover parameters")
    a = obj["adam"]
    adam = AdamConfig(float(a["lr"]), float(a["beta1"]), float(a["beta2"]), float(a["eps"]))
    return model, adam


def save_checkpoint(path, models: dict[str, Model], adam: dict[str, AdamConfig]) -> None:
    """Write named models (params, Adam moments, step, config) as JSON.

    Floats survive the round trip exactly: json emits the shortest repr that
    parses back to the same float64.
    """
    if set(models) != set(adam):
        raise ValueError("models and adam configs must share the same keys")
    doc = {
        "format": CHECKPOINT_FORMAT,
        "models": {name: _model_to_json(models[name], adam[name]) for name in models},
    }
    Path(path).write_text(json.dumps(doc))


def load_checkpoint(path) -> tuple[dict[str, Model], dict[str, AdamConfig]]:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != CHECKPOINT_FORMAT:
        raise ValueError(f"unrecognized checkpoint format in {path}")
    models: dict[str, Model] = {}
    adam: dict[str, AdamConfig] = {}
    for name, obj in doc["models"].items():
        models[name], adam[name] = _model_from_json(obj)
    return models, adam
