"""Pydantic-based configuration models with validation.

Every experiment knob lives in a typed, validated model; ``ExperimentConfig`` is the
fully serializable root. Process-level knobs (thread count, logging) come from the
environment through ``RuntimeSettings``.
"""
from __future__ import annotations

from typing import Any

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from research_rl.core.types import Algorithm, GrammarMode, QueryTemplate, RewardKind, WorldKind


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class WorldSettings(_Frozen):
    """Which question world to build and how big it is."""
    kind: WorldKind = WorldKind.SYNTHETIC
    seed: int = Field(default=7, ge=0)
    n_entities: int = Field(default=40, ge=4)
    n_questions: int = Field(default=96, ge=1)
    eval_questions: int = Field(default=32, ge=1)
    multi_hop_fraction: float = Field(default=0.3, ge=0.0, le=1.0)
    facts_per_entity: int = Field(default=3, ge=1, le=8)


class EnvConfig(_Frozen):
    """Retrieval depth and token/turn budgets of one episode."""
    k: int = Field(default=3, ge=1)
    max_turns: int = Field(default=4, ge=1)
    max_response_tokens: int = Field(default=500, ge=1)
    max_info_tokens: int = Field(default=500, ge=0)
    max_context_tokens: int = Field(default=4096, ge=1)


class ActionSpaceSettings(_Frozen):
    """Shape of the macro-action vocabulary (fixed for a whole experiment)."""
    think_templates: int = Field(default=2, ge=0, le=2)
    query_templates: tuple[QueryTemplate, ...] = (
        QueryTemplate.VERBATIM,
        QueryTemplate.KEYWORDS,
        QueryTemplate.BRIDGE,
    )
    candidate_slots: int = Field(default=16, ge=0, le=16)
    best_guess: bool = True
    abstain: bool = True

    @field_validator("query_templates")
    @classmethod
    def _unique_templates(cls, v: tuple[QueryTemplate, ...]) -> tuple[QueryTemplate, ...]:
        if len(set(v)) != len(v):
            raise ValueError(f"query_templates must be unique, got {list(v)}")
        return v


class RewardSpec(_Frozen):
    """Active reward family; alpha/beta only matter for F1Plus."""
    kind: RewardKind = RewardKind.F1_PLUS
    alpha: float = Field(default=0.1, ge=0.0)
    beta: float = Field(default=0.1, ge=0.0)


class OptimizerConfig(_Frozen):
    """Hyperparameters shared by REINFORCE, PPO and GRPO."""
    algorithm: Algorithm = Algorithm.REINFORCE
    learning_rate: float = Field(default=0.05, gt=0.0)
    critic_learning_rate: float = Field(default=0.1, gt=0.0)
    group_size: int = Field(default=5, ge=1)
    kl_coefficient: float = Field(default=0.001, ge=0.0)
    clip_epsilon: float = Field(default=0.2, gt=0.0, lt=1.0)
    gae_gamma: float = Field(default=1.0, ge=0.0, le=1.0)
    gae_lambda: float = Field(default=1.0, ge=0.0, le=1.0)
    std_epsilon: float = Field(default=1e-8, gt=0.0)
    use_group_baseline: bool = True
    ppo_epochs: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _grpo_needs_groups(self) -> OptimizerConfig:
        if self.algorithm == Algorithm.GRPO and self.group_size < 2:
            raise ValueError("GRPO requires group_size >= 2")
        return self


class TrainingSettings(_Frozen):
    """Loop length, batch shape and evaluation cadence."""
    steps: int = Field(default=600, ge=0)
    prompts_per_step: int = Field(default=32, ge=1)
    eval_every: int = Field(default=20, ge=1)
    eval_seeds: tuple[int, ...] = ()


class ExperimentConfig(_Frozen):
    """Root of a fully serializable experiment description."""
    world: WorldSettings = Field(default_factory=WorldSettings)
    env: EnvConfig = Field(default_factory=EnvConfig)
    actions: ActionSpaceSettings = Field(default_factory=ActionSpaceSettings)
    grammar: GrammarMode = GrammarMode.FAST
    reward: RewardSpec = Field(default_factory=RewardSpec)
    optimizer: OptimizerConfig = Field(default_factory=OptimizerConfig)
    training: TrainingSettings = Field(default_factory=TrainingSettings)
    run_seed: int = Field(default=0, ge=0)
    name: str = "experiment"

    @model_validator(mode="after")
    def _world_fits(self) -> ExperimentConfig:
        if self.world.kind == WorldKind.ABSTENTION and self.world.eval_questions >= 10:
            raise ValueError("abstention world holds 10 questions; eval_questions must be < 10")
        if self.world.kind == WorldKind.BANDIT and self.env.max_turns != 1:
            raise ValueError("bandit world is single-turn; env.max_turns must be 1")
        return self

    def to_json_dict(self) -> dict[str, Any]:
        return self.model_dump(mode="json")


class RuntimeSettings(BaseSettings):
    """Process-level settings loaded from ``RRL_*`` environment variables or ``.env``."""

    model_config = SettingsConfigDict(env_prefix="RRL_", env_file=".env", extra="ignore")

    threads: int = Field(default=0, ge=0)
    log_level: str = "INFO"
    log_dir: str | None = None


def get_runtime_settings() -> RuntimeSettings:
    """Get runtime settings instance."""
    return RuntimeSettings()
