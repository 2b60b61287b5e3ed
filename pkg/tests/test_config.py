"""Config round-trips, strict key checking, and path resolution."""
import json

import pytest

from tes_osr.config import (
    ExperimentConfig,
    config_from_dict,
    load_config,
    save_config,
)
from tes_osr.nn import AdamConfig


class TestRoundTrip:
    def test_defaults_survive_save_load(self, tmp_path):
        cfg = ExperimentConfig()
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        assert load_config(path) == cfg

    def test_modified_fields_survive(self, tmp_path):
        cfg = ExperimentConfig(
            seed=17,
            tau=3.5,
            lam=0.25,
            non_saturating=True,
            teacher_hidden=[8],
            known_classes=[0, 2],
            variant="es",
            auroc_score="one_minus_p_unknown",
            student_adam=AdamConfig(lr=0.0005, beta1=0.8),
            sweep_unknown_counts=[0, 5, 10],
        )
        path = tmp_path / "cfg.json"
        save_config(cfg, path)
        loaded = load_config(path)
        assert loaded == cfg
        assert isinstance(loaded.student_adam, AdamConfig)

    def test_partial_json_fills_defaults(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"seed": 3, "epochs": 7}))
        cfg = load_config(path)
        assert cfg.seed == 3
        assert cfg.epochs == 7
        assert cfg.tau == ExperimentConfig().tau


class TestStrictKeys:
    def test_unknown_top_level_key_rejected(self):
        with pytest.raises(ValueError, match="unknown config keys.*epochss"):
            config_from_dict({"epochss": 10})

    def test_unknown_adam_key_rejected(self):
        with pytest.raises(ValueError, match="student_adam.*learning_rate"):
            config_from_dict({"student_adam": {"learning_rate": 0.001}})

    def test_adam_must_be_object(self):
        with pytest.raises(ValueError, match="teacher_adam"):
            config_from_dict({"teacher_adam": 0.001})

    def test_non_object_rejected(self):
        with pytest.raises(ValueError, match="JSON object"):
            config_from_dict([1, 2, 3])

    def test_invalid_json_names_file(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="bad.json"):
            load_config(path)


class TestValidation:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"variant": "teacher"},
            {"auroc_score": "entropy"},
            {"tau": 0.0},
            {"q_min": 0.5},
            {"q_min": 1.0},
            {"lam": -0.1},
            {"coverage": 0.0},
            {"coverage": 1.0},
            {"epochs": -1},
            {"teacher_epochs": -1},
            {"batch_size": 0},
            {"xcv_folds": 0},
            {"xcv_tau_grid": []},
            {"trunk_hidden": []},
            {"generator_hidden": [0]},
            {"latent_dim": 0},
        ],
    )
    def test_bad_values_rejected(self, overrides):
        with pytest.raises(ValueError):
            config_from_dict(overrides)

    def test_bad_nested_adam_rejected(self):
        with pytest.raises(ValueError):
            config_from_dict({"student_adam": {"lr": -1.0}})

    def test_defaults_validate(self):
        ExperimentConfig().validate()


class TestPathResolution:
    def test_relative_paths_resolve_against_config_dir(self, tmp_path):
        sub = tmp_path / "exp"
        sub.mkdir()
        path = sub / "cfg.json"
        path.write_text(json.dumps({
            "train_data": "train.csv",
            "test_data": "data/test.csv",
            "unknown_data": ["noise.csv"],
        }))
        cfg = load_config(path)
        assert cfg.train_data == str((sub / "train.csv").resolve())
        assert cfg.test_data == str((sub / "data" / "test.csv").resolve())
        assert cfg.unknown_data == [str((sub / "noise.csv").resolve())]

    def test_absolute_paths_untouched(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps({"train_data": "/abs/train.csv"}))
        assert load_config(path).train_data == "/abs/train.csv"

    def test_none_paths_stay_none(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{}")
        cfg = load_config(path)
        assert cfg.train_data is None
        assert cfg.test_data is None
