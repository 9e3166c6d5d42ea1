"""Hierarchical counter-based seeding.

Every random stream is addressed by a path of integers below ``run_seed``
(step -> prompt -> group member), so the stream a rollout sees never depends on how
many other rollouts ran before it or on which thread ran it.
"""
from __future__ import annotations

import numpy as np

# Top-level stream namespaces below the run seed.
TRAIN_STREAM = 0
PROMPT_STREAM = 1
EVAL_STREAM = 2


def derive_seed(root: int, *path: int) -> np.random.SeedSequence:
    """Return the SeedSequence addressed by ``path`` under ``root``."""
    return np.random.SeedSequence(entropy=root, spawn_key=tuple(int(p) for p in path))


def derive_rng(root: int, *path: int) -> np.random.Generator:
    """Return a fresh Generator for the stream addressed by ``path``."""
    return np.random.default_rng(derive_seed(root, *path))


def rollout_seed(run_seed: int, step: int, prompt: int, member: int) -> np.random.SeedSequence:
    """Seed of one training rollout: run_seed -> step -> prompt -> group member."""
    return derive_seed(run_seed, TRAIN_STREAM, step, prompt, member)
