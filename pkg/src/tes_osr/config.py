"""Experiment configuration: one dataclass, JSON on disk.

Unknown keys are rejected loudly so a typo cannot silently fall back to a
default. Relative data paths resolve against the config file's directory.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .nn import AdamConfig

VARIANTS = ("ovrn", "ts", "es", "tes")
AUROC_SCORES = ("max_cds", "max_sigmoid", "one_minus_p_unknown")


@dataclass
class ExperimentConfig:
    seed: int = 0

    # data: CSV paths; known_classes picks the training label subset
    train_data: str | None = None
    test_data: str | None = None
    unknown_data: list[str] = field(default_factory=list)
    known_classes: list[int] | None = None

    # network widths
    teacher_hidden: list[int] = field(default_factory=lambda: [32, 32])
    trunk_hidden: list[int] = field(default_factory=lambda: [64, 64])
    head_hidden: list[int] = field(default_factory=lambda: [16])
    latent_dim: int = 8
    generator_hidden: list[int] = field(default_factory=lambda: [32, 32])
    discriminator_hidden: list[int] = field(default_factory=lambda: [32, 32])

    # distillation and explorer
    tau: float = 2.0
    q_min: float = 0.7
    lam: float = 1.0
    non_saturating: bool = False

    # training
    teacher_epochs: int = 60
    epochs: int = 100
    batch_size: int = 128
    teacher_adam: AdamConfig = field(default_factory=AdamConfig)
    student_adam: AdamConfig = field(default_factory=AdamConfig)
    generator_adam: AdamConfig = field(default_factory=AdamConfig)
    discriminator_adam: AdamConfig = field(default_factory=AdamConfig)

    # decision rule and evaluation
    coverage: float = 0.95
    use_uncertainty: bool = False
    auroc_score: str = "max_cds"
    variant: str = "tes"

    # artifact cadences
    dump_fakes_every: int = 0
    dump_count: int = 1000
    checkpoint_every: int = 0

    # openness sweep and cross-class validation
    sweep_unknown_counts: list[int] = field(default_factory=list)
    xcv_tau_grid: list[float] = field(default_factory=lambda: [1.0, 2.0, 5.0])
    xcv_lambda_grid: list[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    xcv_folds: int = 3
    xcv_epochs: int = 10
    xcv_teacher_epochs: int = 20

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.auroc_score not in AUROC_SCORES:
            raise ValueError(
                f"auroc_score must be one of {AUROC_SCORES}, got {self.auroc_score!r}"
            )
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if not (0.5 < self.q_min < 1.0):
            raise ValueError("q_min must lie in (0.5, 1)")
        if self.lam < 0:
            raise ValueError("lam must be non-negative")
        if not (0.0 < self.coverage < 1.0):
            raise ValueError("coverage must lie in (0, 1)")
        if min(self.teacher_epochs, self.epochs) < 0:
            raise ValueError("epoch counts must be non-negative")
        if self.batch_size < 1:
            raise ValueError("batch_size must be at least 1")
        if self.xcv_folds < 1:
            raise ValueError("xcv_folds must be at least 1")
        if not self.xcv_tau_grid or not self.xcv_lambda_grid:
            raise ValueError("xcv grids must be non-empty")
        for hidden in (self.teacher_hidden, self.trunk_hidden, self.generator_hidden,
                       self.discriminator_hidden):
            if not hidden or any(h < 1 for h in hidden):
                raise ValueError("hidden widths must be non-empty positive lists")
        if self.latent_dim < 1:
            raise ValueError("latent_dim must be at least 1")
        for a in (self.teacher_adam, self.student_adam, self.generator_adam,
                  self.discriminator_adam):
            a.validate()

    def to_dict(self) -> dict:
        return asdict(self)


_ADAM_FIELDS = {"teacher_adam", "student_adam", "generator_adam", "discriminator_adam"}


def config_from_dict(obj: dict) -> ExperimentConfig:
    if not isinstance(obj, dict):
        raise ValueError("config must be a JSON object")
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = sorted(set(obj) - known)
    if unknown:
        raise ValueError(f"unknown config keys: {unknown}")
    kwargs = dict(obj)
    for name in _ADAM_FIELDS & set(kwargs):
        sub = kwargs[name]
        if not isinstance(sub, dict):
            raise ValueError(f"{name} must be an object")
        extra = sorted(set(sub) - {"lr", "beta1", "beta2", "eps"})
        if extra:
            raise ValueError(f"unknown keys in {name}: {extra}")
        kwargs[name] = AdamConfig(**sub)
    cfg = ExperimentConfig(**kwargs)
    cfg.validate()
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ValueError(f"{path}: not valid JSON: {e}") from None
    cfg = config_from_dict(obj)
    # data paths are relative to the config file
    base = path.parent
    for name in ("train_data", "test_data"):
        v = getattr(cfg, name)
        if v is not None:
            setattr(cfg, name, str((base / v).resolve()) if not Path(v).is_absolute() else v)
    cfg.unknown_data = [
        str((base / v).resolve()) if not Path(v).is_absolute() else v
        for v in cfg.unknown_data
    ]
    return cfg


def save_config(cfg: ExperimentConfig, path) -> None:
    Path(path).write_text(json.dumps(cfg.to_dict(), indent=2) + "\n")
