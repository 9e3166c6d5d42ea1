"""
Policy updates: REINFORCE, PPO and GRPO over one ``TrajectoryBatch``.

All three share the same machinery: a per-step weight times the score function,
averaged over every decision in the batch, minus ``kl_coefficient`` times the exact KL
gradient towards a reference snapshot, followed by one gradient-ascent step. Sums are
accumulated in (group, member) order so collection order never changes the result.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Sequence

import numpy as np

from research_rl.core.exceptions import ContractError, NonFiniteGradientError
from research_rl.core.settings import OptimizerConfig
from research_rl.core.types import Algorithm
from research_rl.optimizers.advantages import (
    baseline_advantage,
    gae,
    grpo_advantage,
    rewards_to_go,
    terminal_rewards,
)
from research_rl.optimizers.batch import TrajectoryBatch
from research_rl.policy.linear import PolicyParams
from research_rl.policy.rollout import Trajectory

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class UpdateDiagnostics:
    step: int
    algorithm: Algorithm
    mean_reward: float
    grad_norm: float
    kl: float
    clip_fraction: float | None = None
    baseline: float | None = None
    group_std_min: float | None = None

    def to_record(self) -> dict[str, Any]:
        return {
            "step": self.step,
            "algorithm": self.algorithm.value,
            "mean_reward": self.mean_reward,
            "grad_norm": self.grad_norm,
            "kl": self.kl,
            "clip_fraction": self.clip_fraction,
            "baseline": self.baseline,
            "group_std_min": self.group_std_min,
        }


# ---------------------------------------------------------------------------
# Batched policy evaluation
# ---------------------------------------------------------------------------

def log_policy(weights: np.ndarray, feats: np.ndarray, masks: np.ndarray) -> np.ndarray:
    """Row-wise masked log-softmax of ``feats @ W.T``."""
    if not masks.any(axis=1).all():
        raise ContractError("Every action is masked in some state")
    z = np.where(masks, feats @ weights.T, -np.inf)
    z = z - z.max(axis=1, keepdims=True)
    return z - np.log(np.exp(z).sum(axis=1, keepdims=True))


def trajectory_score_gradient(weights: np.ndarray, trajectory: Trajectory, step_weights: np.ndarray) -> np.ndarray:
    """``sum_t w_t * grad_W log pi(a_t | s_t)`` for one trajectory."""
    probs = np.exp(log_policy(weights, trajectory.features, trajectory.masks))
    score = -probs
    score[np.arange(len(trajectory)), list(trajectory.actions)] += 1.0
    return (score * step_weights[:, None]).T @ trajectory.features


def weighted_score_gradient(
    weights: np.ndarray,
    trajectories: Sequence[Trajectory],
    step_weights: Sequence[np.ndarray],
) -> np.ndarray:
    """Sum of per-trajectory score gradients; raises on the first non-finite one."""
    grad = np.zeros_like(weights)
    for i, (trajectory, w) in enumerate(zip(trajectories, step_weights)):
        contrib = trajectory_score_gradient(weights, trajectory, np.asarray(w, dtype=np.float64))
        if not np.all(np.isfinite(contrib)):
            raise NonFiniteGradientError(f"Non-finite gradient from trajectory {i}", trajectory_index=i)
        grad += contrib
    return grad


def kl_and_gradient(
    weights: np.ndarray,
    ref_weights: np.ndarray,
    feats: np.ndarray,
    masks: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Mean exact ``KL(pi_W || pi_ref)`` over states and its gradient w.r.t. ``W``."""
    logp = log_policy(weights, feats, masks)
    logq = log_policy(ref_weights, feats, masks)
    diff = np.zeros_like(logp)
    np.subtract(logp, logq, out=diff, where=masks)
    p = np.exp(logp)
    per_state = (p * diff).sum(axis=1)
    g_logits = p * (diff - per_state[:, None])
    return float(per_state.mean()), g_logits.T @ feats / len(feats)


def kl_penalty(
    params_new: PolicyParams,
    params_ref: PolicyParams,
    feats: np.ndarray,
    masks: np.ndarray,
) -> float:
    """Mean over states of ``KL(pi_new(.|s) || pi_ref(.|s))``, summed exactly over actions."""
    if len(feats) == 0:
        raise ContractError("KL penalty needs at least one state")
    kl, _ = kl_and_gradient(params_new.weights, params_ref.weights, np.asarray(feats), np.asarray(masks, dtype=bool))
    return kl


def _ascend(
    params: PolicyParams,
    reference: PolicyParams,
    policy_grad: np.ndarray,
    batch: TrajectoryBatch,
    config: OptimizerConfig,
) -> tuple[np.ndarray, float, float]:
    feats, masks = batch.stacked_states()
    kl, kl_grad = kl_and_gradient(params.weights, reference.weights, feats, masks)
    direction = policy_grad - config.kl_coefficient * kl_grad
    return params.weights + config.learning_rate * direction, float(np.linalg.norm(direction)), kl


# ---------------------------------------------------------------------------
# REINFORCE
# ---------------------------------------------------------------------------

def reinforce_gradient(params: PolicyParams, batch: TrajectoryBatch, config: OptimizerConfig) -> tuple[np.ndarray, float]:
    """Mean over steps of ``(R - b) * grad log pi``; returns the gradient and mean baseline."""
    trajectories: list[Trajectory] = []
    weights: list[np.ndarray] = []
    baselines: list[float] = []
    for group in batch.groups:
        adv, b = baseline_advantage(group.rewards, config.use_group_baseline)
        baselines.append(b)
        for member, a in zip(group.members, adv):
            trajectories.append(member.trajectory)
            weights.append(np.full(len(member.trajectory), a))
    grad = weighted_score_gradient(params.weights, trajectories, weights) / batch.total_steps
    return grad, float(np.mean(baselines))


def reinforce_update(
    params: PolicyParams,
    batch: TrajectoryBatch,
    config: OptimizerConfig,
    reference: PolicyParams | None = None,
    *,
    step: int = 0,
) -> tuple[PolicyParams, UpdateDiagnostics]:
    grad, baseline = reinforce_gradient(params, batch, config)
    new_weights, norm, kl = _ascend(params, reference or params, grad, batch, config)
    diag = UpdateDiagnostics(
        step=step,
        algorithm=Algorithm.REINFORCE,
        mean_reward=batch.mean_reward,
        grad_norm=norm,
        kl=kl,
        baseline=baseline,
    )
    return params.with_weights(new_weights), diag


# ---------------------------------------------------------------------------
# GRPO
# ---------------------------------------------------------------------------

def grpo_gradient(params: PolicyParams, batch: TrajectoryBatch, config: OptimizerConfig) -> tuple[np.ndarray, float]:
    """Group-relative advantage applied to every step; returns the gradient and min group std."""
    if batch.group_size < 2:
        raise ContractError(f"GRPO needs groups of at least 2, got {batch.group_size}")
    trajectories: list[Trajectory] = []
    weights: list[np.ndarray] = []
    stds: list[float] = []
    for group in batch.groups:
        rewards = group.rewards
        stds.append(float(rewards.std()))
        for member, a in zip(group.members, grpo_advantage(rewards, config.std_epsilon)):
            trajectories.append(member.trajectory)
            weights.append(np.full(len(member.trajectory), a))
    grad = weighted_score_gradient(params.weights, trajectories, weights) / batch.total_steps
    return grad, min(stds)


def grpo_update(
    params: PolicyParams,
    batch: TrajectoryBatch,
    config: OptimizerConfig,
    reference: PolicyParams | None = None,
    *,
    step: int = 0,
) -> tuple[PolicyParams, UpdateDiagnostics]:
    grad, std_min = grpo_gradient(params, batch, config)
    new_weights, norm, kl = _ascend(params, reference or params, grad, batch, config)
    diag = UpdateDiagnostics(
        step=step,
        algorithm=Algorithm.GRPO,
        mean_reward=batch.mean_reward,
        grad_norm=norm,
        kl=kl,
        group_std_min=std_min,
    )
    return params.with_weights(new_weights), diag


# ---------------------------------------------------------------------------
# PPO
# ---------------------------------------------------------------------------

def ppo_surrogate(ratio: np.ndarray, advantage: np.ndarray, epsilon: float) -> np.ndarray:
    """Elementwise ``min(ratio * A, clip(ratio, 1 - eps, 1 + eps) * A)``."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    return np.minimum(ratio * advantage, np.clip(ratio, 1.0 - epsilon, 1.0 + epsilon) * advantage)


def ppo_clip_active(ratio: np.ndarray, advantage: np.ndarray, epsilon: float) -> np.ndarray:
    """Steps where the clipped branch is selected and the surrogate gradient vanishes."""
    ratio = np.asarray(ratio, dtype=np.float64)
    advantage = np.asarray(advantage, dtype=np.float64)
    return ((advantage > 0) & (ratio > 1.0 + epsilon)) | ((advantage < 0) & (ratio < 1.0 - epsilon))


def critic_step(value_weights: np.ndarray, feats: np.ndarray, targets: np.ndarray, learning_rate: float) -> np.ndarray:
    """One descent step on ``0.5 * mean((target - v @ phi)^2)``."""
    residual = targets - feats @ value_weights
    return value_weights + learning_rate * (residual[:, None] * feats).mean(axis=0)


def value_mse(value_weights: np.ndarray, feats: np.ndarray, targets: np.ndarray) -> float:
    return float(np.mean((targets - feats @ value_weights) ** 2))


def ppo_advantages(
    params: PolicyParams, batch: TrajectoryBatch, config: OptimizerConfig
) -> tuple[list[np.ndarray], list[np.ndarray]]:
    """GAE advantages from the current critic and discounted reward-to-go targets."""
    advantages: list[np.ndarray] = []
    targets: list[np.ndarray] = []
    for member in batch.members():
        trajectory = member.trajectory
        rewards = terminal_rewards(len(trajectory), member.total)
        values = trajectory.features @ params.value_weights
        advantages.append(gae(rewards, values, config.gae_gamma, config.gae_lambda).values)
        targets.append(rewards_to_go(rewards, config.gae_gamma))
    return advantages, targets


def ppo_gradient(
    weights: np.ndarray,
    trajectories: Sequence[Trajectory],
    advantages: Sequence[np.ndarray],
    epsilon: float,
) -> tuple[np.ndarray, int, int]:
    """Clipped-surrogate gradient summed over steps; returns (grad, clipped, total)."""
    grad = np.zeros_like(weights)
    clipped = total = 0
    for i, (trajectory, adv) in enumerate(zip(trajectories, advantages)):
        logp = log_policy(weights, trajectory.features, trajectory.masks)
        current = logp[np.arange(len(trajectory)), list(trajectory.actions)]
        with np.errstate(over="ignore", invalid="ignore"):
            ratio = np.exp(current - np.asarray(trajectory.log_probs))
        bad = np.flatnonzero(~np.isfinite(ratio))
        if bad.size:
            raise NonFiniteGradientError(
                f"Non-finite importance ratio in trajectory {i} at step {int(bad[0])}",
                trajectory_index=i,
                step_index=int(bad[0]),
            )
        active = ppo_clip_active(ratio, adv, epsilon)
        clipped += int(active.sum())
        total += len(trajectory)
        step_weights = np.where(active, 0.0, adv * ratio)
        contrib = trajectory_score_gradient(weights, trajectory, step_weights)
        if not np.all(np.isfinite(contrib)):
            raise NonFiniteGradientError(f"Non-finite gradient from trajectory {i}", trajectory_index=i)
        grad += contrib
    return grad, clipped, total


def ppo_update(
    params: PolicyParams,
    batch: TrajectoryBatch,
    config: OptimizerConfig,
    reference: PolicyParams | None = None,
    *,
    step: int = 0,
) -> tuple[PolicyParams, UpdateDiagnostics]:
    reference = reference or params
    trajectories = [m.trajectory for m in batch.members()]
    advantages, targets = ppo_advantages(params, batch, config)

    current = params
    clipped = total = 0
    norm = kl = 0.0
    for _ in range(config.ppo_epochs):
        grad, c, t = ppo_gradient(current.weights, trajectories, advantages, config.clip_epsilon)
        clipped += c
        total += t
        new_weights, norm, kl = _ascend(current, reference, grad / batch.total_steps, batch, config)
        current = current.with_weights(new_weights)

    feats, _ = batch.stacked_states()
    value_weights = critic_step(
        params.value_weights, feats, np.concatenate(targets), config.critic_learning_rate
    )
    diag = UpdateDiagnostics(
        step=step,
        algorithm=Algorithm.PPO,
        mean_reward=batch.mean_reward,
        grad_norm=norm,
        kl=kl,
        clip_fraction=clipped / total if total else 0.0,
    )
    return current.with_value_weights(value_weights), diag


_UPDATES = {
    Algorithm.REINFORCE: reinforce_update,
    Algorithm.PPO: ppo_update,
    Algorithm.GRPO: grpo_update,
}


def apply_update(
    params: PolicyParams,
    batch: TrajectoryBatch,
    config: OptimizerConfig,
    reference: PolicyParams | None = None,
    *,
    step: int = 0,
) -> tuple[PolicyParams, UpdateDiagnostics]:
    """Dispatch to the configured algorithm."""
    params, diag = _UPDATES[config.algorithm](params, batch, config, reference, step=step)
    logger.debug(
        "step %d %s: mean_reward=%.4f grad_norm=%.4g kl=%.3g",
        step, config.algorithm.value, diag.mean_reward, diag.grad_norm, diag.kl,
    )
    return params, diag
