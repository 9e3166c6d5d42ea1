"""Tests for experiment configuration models, the config loader and runtime settings."""
from __future__ import annotations

from pathlib import Path

import pytest
from pydantic import ValidationError

from research_rl.core.config import ConfigLoader, build_config
from research_rl.core.exceptions import ConfigError
from research_rl.core.settings import (
    EnvConfig,
    ExperimentConfig,
    OptimizerConfig,
    RuntimeSettings,
    TrainingSettings,
)
from research_rl.core.types import Algorithm, GrammarMode, RewardKind, WorldKind

CONFIG_DIR = Path(__file__).resolve().parents[2] / "config"


@pytest.fixture
def loader() -> ConfigLoader:
    return ConfigLoader(config_dir=CONFIG_DIR)


# ---------------------------------------------------------------------------
# Models
# ---------------------------------------------------------------------------

def test_defaults():
    env = EnvConfig()
    assert (env.k, env.max_turns, env.max_response_tokens, env.max_info_tokens, env.max_context_tokens) == (
        3, 4, 500, 500, 4096
    )
    opt = OptimizerConfig()
    assert opt.group_size == 5
    assert opt.kl_coefficient == 0.001
    assert opt.clip_epsilon == 0.2
    assert opt.gae_gamma == opt.gae_lambda == 1.0
    assert opt.std_epsilon == 1e-8
    assert opt.use_group_baseline
    training = TrainingSettings()
    assert (training.steps, training.prompts_per_step, training.eval_every) == (600, 32, 20)
    assert training.eval_seeds == ()


def test_every_violation_is_listed():
    with pytest.raises(ConfigError) as exc_info:
        build_config({
            "env": {"k": 0},
            "optimizer": {"clip_epsilon": 1.5, "learning_rate": 0},
            "training": {"steps": -1},
        })
    violations = exc_info.value.violations
    assert len(violations) == 4
    for path in ("env.k", "optimizer.clip_epsilon", "optimizer.learning_rate", "training.steps"):
        assert any(v.startswith(path) for v in violations)
    assert "env.k" in str(exc_info.value)


def test_unknown_fields_rejected():
    with pytest.raises(ConfigError) as exc_info:
        build_config({"world": {"entities": 10}})
    assert exc_info.value.violations[0].startswith("world.entities")


@pytest.mark.parametrize(
    "data",
    [
        {"optimizer": {"algorithm": "grpo", "group_size": 1}},
        {"world": {"kind": "abstention", "eval_questions": 10}},
        {"world": {"kind": "bandit"}, "env": {"max_turns": 2}},
        {"actions": {"query_templates": ["verbatim", "verbatim"]}},
        {"grammar": "medium"},
    ],
)
def test_cross_field_rules(data):
    with pytest.raises(ConfigError):
        build_config(data)


def test_config_is_frozen_and_serialisable():
    config = build_config({"grammar": "slow", "reward": {"kind": "em"}, "run_seed": 3})
    with pytest.raises(ValidationError):
        config.run_seed = 4
    assert ExperimentConfig.model_validate(config.to_json_dict()) == config
    assert config.to_json_dict()["grammar"] == "slow"


# ---------------------------------------------------------------------------
# Loader and presets
# ---------------------------------------------------------------------------

def test_every_preset_resolves(loader):
    table = loader.presets()
    assert {"slow_em_ppo", "fast_f1plus_reinforce", "fast_em_reinforce", "slow_em_reinforce",
            "abstention_f1", "abstention_f1_plus", "bandit"} <= set(table)
    for name in table:
        config = loader.load(preset=name)
        assert config.name == name


def test_named_recipes(loader):
    r1 = loader.load(preset="slow_em_ppo")
    assert (r1.grammar, r1.reward.kind, r1.optimizer.algorithm) == (GrammarMode.SLOW, RewardKind.EM, Algorithm.PPO)
    pp = loader.load(preset="fast_f1plus_reinforce")
    assert (pp.grammar, pp.reward.kind, pp.optimizer.algorithm) == (
        GrammarMode.FAST, RewardKind.F1_PLUS, Algorithm.REINFORCE
    )
    assert pp.reward.alpha == pp.reward.beta == 0.1


def test_bandit_preset(loader):
    config = loader.load(preset="bandit")
    assert config.world.kind == WorldKind.BANDIT
    assert config.env.max_turns == 1
    assert config.optimizer.learning_rate == 0.1
    assert config.training.steps == 2000


def test_yaml_file_extends_preset(loader):
    config = loader.load(CONFIG_DIR / "dev.yaml")
    assert config.name == "dev"
    assert config.reward.kind == RewardKind.F1_PLUS
    assert config.world.n_entities == 12
    assert config.training.steps == 40


def test_overrides_win(loader, tmp_path):
    path = tmp_path / "exp.json"
    path.write_text('{"preset": "bandit", "run_seed": 1, "training": {"eval_every": 50}}', encoding="utf-8")
    config = loader.load(path, overrides={"run_seed": 9, "training": {"steps": 10}})
    assert config.run_seed == 9
    assert config.training.steps == 10
    assert config.training.eval_every == 50
    assert config.training.prompts_per_step == 2


def test_cli_preset_replaces_file_preset(loader, tmp_path):
    path = tmp_path / "exp.yaml"
    path.write_text("preset: bandit\nname: mine\n", encoding="utf-8")
    config = loader.load(path, preset="slow_em_ppo")
    assert config.name == "mine"
    assert config.optimizer.algorithm == Algorithm.PPO


def test_unknown_preset(loader):
    with pytest.raises(ConfigError):
        loader.load(preset="nope")


@pytest.mark.parametrize("text,suffix", [("{not json", ".json"), ("[1, 2]", ".json"), ("a: [", ".yaml")])
def test_bad_config_files(loader, tmp_path, text: str, suffix: str):
    path = tmp_path / f"bad{suffix}"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(ConfigError):
        loader.load(path)


def test_missing_config_file_is_io_error(loader, tmp_path):
    with pytest.raises(OSError):
        loader.load(tmp_path / "missing.json")


# ---------------------------------------------------------------------------
# Runtime settings
# ---------------------------------------------------------------------------

def test_runtime_settings_from_environment(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("RRL_THREADS", "8")
    monkeypatch.setenv("RRL_LOG_LEVEL", "DEBUG")
    settings = RuntimeSettings()
    assert settings.threads == 8
    assert settings.log_level == "DEBUG"
    assert settings.log_dir is None


def test_runtime_settings_from_dotenv(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("RRL_THREADS", raising=False)
    (tmp_path / ".env").write_text("RRL_THREADS=3\n", encoding="utf-8")
    assert RuntimeSettings().threads == 3


def test_runtime_settings_reject_negative_threads(monkeypatch, tmp_path):
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("RRL_THREADS", "-1")
    with pytest.raises(ValidationError):
        RuntimeSettings()
