"""Tests for logging setup, hierarchical seeding and the exception hierarchy."""
from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pytest

from research_rl.core.exceptions import (
    ArtifactIOError,
    ConfigError,
    ContractError,
    NonFiniteGradientError,
    ResearchRLError,
    RunAbortedError,
    TagRenderError,
)
from research_rl.core.logging import setup_logger
from research_rl.core.seeding import EVAL_STREAM, TRAIN_STREAM, derive_rng, derive_seed, rollout_seed


# --- LOGGING ---

def test_setup_logger_installs_handlers_only_on_root(tmp_path):
    logger = setup_logger("research_rl.test", verbose=True, log_dir=tmp_path, level="DEBUG")
    root = logging.getLogger()
    assert len(root.handlers) == 2
    assert logger.handlers == []
    logger.debug("hello %s", "file")
    for handler in root.handlers:
        handler.flush()
    files = list(tmp_path.glob("research_rl.test_*.log"))
    assert len(files) == 1
    assert "hello file" in files[0].read_text(encoding="utf-8")


def test_setup_logger_is_idempotent(tmp_path):
    setup_logger("research_rl", log_dir=None)
    setup_logger("research_rl", log_dir=None)
    assert len(logging.getLogger().handlers) == 1


def test_console_level_follows_verbose():
    setup_logger(None, verbose=False, log_dir=None)
    assert logging.getLogger().handlers[0].level == logging.WARNING
    setup_logger(None, verbose=True, log_dir=None)
    assert logging.getLogger().handlers[0].level == logging.INFO


# --- SEEDING ---

def test_derived_streams_are_reproducible():
    a = derive_rng(5, TRAIN_STREAM, 3, 1, 0).random(4)
    b = derive_rng(5, TRAIN_STREAM, 3, 1, 0).random(4)
    assert np.array_equal(a, b)


def test_derived_streams_are_distinct():
    draws = {
        float(np.random.default_rng(rollout_seed(5, step, prompt, member)).random())
        for step in range(3) for prompt in range(3) for member in range(3)
    }
    assert len(draws) == 27
    assert derive_rng(5, EVAL_STREAM, 0).random() != derive_rng(5, TRAIN_STREAM, 0).random()


def test_rollout_seed_is_a_path_below_the_run_seed():
    seed = rollout_seed(11, 2, 3, 4)
    assert seed.entropy == 11
    assert seed.spawn_key == (TRAIN_STREAM, 2, 3, 4)
    assert derive_seed(11, TRAIN_STREAM, 2, 3, 4).generate_state(4).tolist() == seed.generate_state(4).tolist()


# --- EXCEPTIONS ---

def test_exception_hierarchy():
    assert issubclass(ConfigError, ResearchRLError)
    assert issubclass(TagRenderError, ContractError)
    assert issubclass(ContractError, ValueError)
    assert issubclass(ArtifactIOError, OSError)
    assert issubclass(NonFiniteGradientError, ResearchRLError)


def test_config_error_lists_violations():
    exc = ConfigError("Invalid", ["a: bad", "b: worse"])
    assert exc.violations == ["a: bad", "b: worse"]
    assert "  - b: worse" in str(exc)


def test_error_context_fields():
    exc = NonFiniteGradientError("nan", trajectory_index=3, step_index=1)
    assert (exc.trajectory_index, exc.step_index) == (3, 1)
    aborted = RunAbortedError("stop", Path("runs/x/params_step00010.bin"))
    assert aborted.last_snapshot.name == "params_step00010.bin"
    with pytest.raises(ResearchRLError):
        raise aborted
