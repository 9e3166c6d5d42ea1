"""
Linear softmax policy with a linear value head.

``pi(a | s) = softmax(W @ phi(s))`` restricted to the unmasked actions, and
``V(s) = v @ phi(s)``. Parameters are immutable snapshots; optimizers return new ones.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from research_rl.core.exceptions import ArtifactIOError, ContractError
from research_rl.environment.episode import EpisodeState
from research_rl.policy.actions import ActionSpace
from research_rl.policy.features import FEATURE_DIM, FEATURE_NAMES, FEATURE_SCHEMA_VERSION, features

logger = logging.getLogger(__name__)

SNAPSHOT_DTYPE = "<f8"


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=np.float64, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class PolicyParams:
    """Policy weights ``W`` (actions x features) and value-head weights ``v``."""
    weights: np.ndarray
    value_weights: np.ndarray

    def __post_init__(self) -> None:
        w = _frozen(self.weights)
        v = _frozen(self.value_weights)
        if w.ndim != 2 or v.shape != (w.shape[1],):
            raise ContractError(f"Incompatible shapes W{w.shape} v{v.shape}")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(v))):
            raise ContractError("Policy parameters must be finite")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "value_weights", v)

    @classmethod
    def zeros(cls, n_actions: int, dim: int = FEATURE_DIM) -> PolicyParams:
        return cls(np.zeros((n_actions, dim)), np.zeros(dim))

    @property
    def n_actions(self) -> int:
        return int(self.weights.shape[0])

    def with_weights(self, weights: np.ndarray) -> PolicyParams:
        return PolicyParams(weights, self.value_weights)

    def with_value_weights(self, value_weights: np.ndarray) -> PolicyParams:
        return PolicyParams(self.weights, value_weights)

    def equals(self, other: PolicyParams) -> bool:
        return bool(
            np.array_equal(self.weights, other.weights)
            and np.array_equal(self.value_weights, other.value_weights)
        )

    # ------------------------------------------------------------------
    # Snapshots: flat little-endian float64 array + JSON sidecar
    # ------------------------------------------------------------------

    def save(self, path: Path | str, *, step: int, action_names: Sequence[str]) -> Path:
        """Write ``<path>.bin`` and ``<path>.json``; returns the ``.bin`` path."""
        base = Path(path).with_suffix("")
        flat = np.concatenate([self.weights.ravel(), self.value_weights]).astype(SNAPSHOT_DTYPE)
        meta = {
            "schema_version": 1,
            "feature_schema_version": FEATURE_SCHEMA_VERSION,
            "dtype": SNAPSHOT_DTYPE,
            "weights_shape": list(self.weights.shape),
            "value_shape": list(self.value_weights.shape),
            "feature_names": list(FEATURE_NAMES),
            "action_names": list(action_names),
            "step": step,
        }
        try:
            base.parent.mkdir(parents=True, exist_ok=True)
            base.with_suffix(".bin").write_bytes(flat.tobytes())
            base.with_suffix(".json").write_text(json.dumps(meta, indent=2), encoding="utf-8")
        except OSError as exc:
            raise ArtifactIOError(f"Cannot write snapshot {base}: {exc}") from exc
        logger.debug("Saved params snapshot step=%d to %s", step, base)
        return base.with_suffix(".bin")

    @classmethod
    def load(cls, path: Path | str) -> tuple[PolicyParams, dict[str, Any]]:
        base = Path(path).with_suffix("")
        try:
            meta = json.loads(base.with_suffix(".json").read_text(encoding="utf-8"))
            raw = base.with_suffix(".bin").read_bytes()
        except OSError as exc:
            raise ArtifactIOError(f"Cannot read snapshot {base}: {exc}") from exc
        if meta.get("feature_schema_version") != FEATURE_SCHEMA_VERSION:
            raise ContractError(
                f"Snapshot feature schema {meta.get('feature_schema_version')} "
                f"does not match {FEATURE_SCHEMA_VERSION}"
            )
        flat = np.frombuffer(raw, dtype=meta.get("dtype", SNAPSHOT_DTYPE)).astype(np.float64)
        rows, cols = meta["weights_shape"]
        if flat.size != rows * cols + cols:
            raise ContractError(f"Snapshot {base} holds {flat.size} values, expected {rows * cols + cols}")
        weights = flat[: rows * cols].reshape(rows, cols)
        return cls(weights, flat[rows * cols:]), meta


# ---------------------------------------------------------------------------
# Distribution and gradients from (phi, mask)
# ---------------------------------------------------------------------------

def masked_log_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        raise ContractError("Every action is masked")
    z = np.where(mask, logits, -np.inf)
    z = z - z[mask].max()
    return z - np.log(np.exp(z).sum())


def masked_softmax(logits: np.ndarray, mask: np.ndarray) -> np.ndarray:
    if not mask.any():
        raise ContractError("Every action is masked")
    z = np.where(mask, logits, -np.inf)
    e = np.exp(z - z[mask].max())
    return e / e.sum()


def distribution(weights: np.ndarray, phi: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return masked_softmax(weights @ phi, mask)


def score_vector(probs: np.ndarray, action: int) -> np.ndarray:
    """d log pi(action) / d logits = onehot(action) - p."""
    g = -probs
    g[action] += 1.0
    return g


def grad_log_prob_from(weights: np.ndarray, phi: np.ndarray, mask: np.ndarray, action: int) -> np.ndarray:
    if not mask[action]:
        raise ContractError(f"Action {action} is masked")
    return np.outer(score_vector(distribution(weights, phi, mask), action), phi)


# ---------------------------------------------------------------------------
# State-level API
# ---------------------------------------------------------------------------

def action_distribution(params: PolicyParams, state: EpisodeState, space: ActionSpace) -> np.ndarray:
    """Action probabilities in ``state``; masked actions get exactly 0."""
    if state.terminal:
        raise ContractError("No decision is taken in a terminal state")
    return distribution(params.weights, features(state, space), space.mask(state))


def log_prob(params: PolicyParams, state: EpisodeState, action: int, space: ActionSpace) -> float:
    phi = features(state, space)
    return float(masked_log_softmax(params.weights @ phi, space.mask(state))[action])


def grad_log_prob(params: PolicyParams, state: EpisodeState, action: int, space: ActionSpace) -> np.ndarray:
    """Gradient of ``log pi(action | state)`` with respect to ``W``."""
    return grad_log_prob_from(params.weights, features(state, space), space.mask(state), action)


def value(params: PolicyParams, state: EpisodeState, space: ActionSpace) -> float:
    return float(params.value_weights @ features(state, space))


def value_gradient(state: EpisodeState, space: ActionSpace) -> np.ndarray:
    """Gradient of ``value`` with respect to ``v`` (it is phi itself)."""
    return features(state, space)
