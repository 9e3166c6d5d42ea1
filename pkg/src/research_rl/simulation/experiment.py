"""
ExperimentRunner - seeded training runs for one ``ExperimentConfig``.

Each step samples ``prompts_per_step`` training questions, collects ``group_size``
rollouts per question, scores them, and applies one optimizer update. Every
``eval_every`` steps the policy is evaluated on the held-out split, a metrics record is
appended and a params snapshot saved.

Every random draw is addressed by (run_seed -> step -> prompt -> member), so results
are bit-identical whether rollouts run sequentially or on a thread pool.
"""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from research_rl.core.exceptions import ArtifactIOError, ContractError, NonFiniteGradientError, RunAbortedError
from research_rl.core.seeding import EVAL_STREAM, PROMPT_STREAM, derive_rng, derive_seed, rollout_seed
from research_rl.core.settings import ExperimentConfig, get_runtime_settings
from research_rl.diagnostics.collapse import collapse_events
from research_rl.diagnostics.metrics import StepMetrics, read_metrics, step_metrics, write_metrics
from research_rl.environment.episode import ResearchEnvironment
from research_rl.environment.world import QuestionSpec
from research_rl.optimizers.batch import ScoredTrajectory, TrajectoryBatch, TrajectoryGroup
from research_rl.optimizers.updates import apply_update
from research_rl.policy.actions import ActionSpace
from research_rl.policy.linear import PolicyParams
from research_rl.policy.rollout import SeedLike, Trajectory, rollout
from research_rl.protocol.tags import count_tokens, instruction_prompt
from research_rl.rewards.scoring import reward_breakdown
from research_rl.simulation.worlds import build_world

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.jsonl"
UPDATES_FILE = "updates.jsonl"
SAMPLES_FILE = "samples.jsonl"
SUMMARY_FILE = "summary.json"
CONFIG_FILE = "config.json"
TRANSCRIPT_FILE = "rollouts_step0.txt"
COLLAPSE_WINDOW = 50
COLLAPSE_DROP = 0.5
TRANSCRIPT_SAMPLES = 3


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    metrics_path: Path
    updates_path: Path
    samples_path: Path
    summary_path: Path
    snapshot_paths: tuple[Path, ...]
    summary: dict[str, Any]


@dataclass(frozen=True)
class _Job:
    question_id: int
    question: QuestionSpec
    seed: SeedLike
    greedy: bool


def snapshot_name(step: int) -> str:
    return f"params_step{step:05d}"


def summarize_metrics(records: Sequence[StepMetrics]) -> dict[str, Any]:
    """Run summary derived from the metrics records alone."""
    if not records:
        raise ContractError("Cannot summarise an empty metrics file")
    final = records[-1]
    events = collapse_events(
        [r.mean_reward for r in records],
        COLLAPSE_WINDOW,
        COLLAPSE_DROP,
        steps=[r.step for r in records],
    )
    return {
        "final_step": final.step,
        "overall_accuracy": final.overall_accuracy,
        "answered_only_accuracy": final.answered_only_accuracy,
        "answer_rate": final.answer_rate,
        "mean_search_count": final.mean_search_count,
        "mean_answer_tokens": final.mean_answer_tokens,
        "p90_answer_tokens": final.p90_answer_tokens,
        "mean_reward": final.mean_reward,
        "best_overall_accuracy": max(r.overall_accuracy for r in records),
        "collapse_events": [e.to_dict() for e in events],
    }


def _truncate_jsonl(path: Path, before_step: int) -> None:
    """Drop records with ``step >= before_step``."""
    if not path.exists():
        return
    with open(path, "r", encoding="utf-8") as f:
        kept = [line for line in f if line.strip() and json.loads(line)["step"] < before_step]
    with open(path, "w", encoding="utf-8") as f:
        f.writelines(kept)


class ExperimentRunner:
    def __init__(self, config: ExperimentConfig, out_dir: Path | str, *, threads: int | None = None):
        self.config = config
        self.out_dir = Path(out_dir)
        self.threads = get_runtime_settings().threads if threads is None else threads
        self.world = build_world(config.world)
        self.env = ResearchEnvironment(self.world.corpus, config.env)
        self.space = ActionSpace(config.actions)
        self.initial = PolicyParams.zeros(len(self.space))
        self._pool: ThreadPoolExecutor | None = None
        if not self.world.train or not self.world.evaluation:
            raise ContractError("World must provide training and evaluation questions")

    # ------------------------------------------------------------------
    # Rollout collection
    # ------------------------------------------------------------------

    def _rollouts(self, params: PolicyParams, jobs: list[_Job]) -> list[Trajectory]:
        def one(job: _Job) -> Trajectory:
            return rollout(
                params,
                self.env,
                job.question,
                job.seed,
                self.config.grammar,
                self.space,
                question_id=job.question_id,
                greedy=job.greedy,
            )

        if self._pool is None:
            return [one(job) for job in jobs]
        return list(self._pool.map(one, jobs))

    def evaluate(self, params: PolicyParams, step: int) -> tuple[StepMetrics, list[Trajectory]]:
        """Greedy evaluation (or one sampled pass per eval seed) on the held-out split."""
        questions = self.world.evaluation
        seeds = self.config.training.eval_seeds
        if not seeds:
            jobs = [_Job(i, q, 0, True) for i, q in enumerate(questions)]
        else:
            jobs = [
                _Job(i, q, derive_seed(seed, EVAL_STREAM, i), False)
                for seed in seeds
                for i, q in enumerate(questions)
            ]
        trajectories = self._rollouts(params, jobs)
        return step_metrics(trajectories, self.config.reward, step=step), trajectories

    def collect(self, params: PolicyParams, step: int) -> TrajectoryBatch:
        cfg = self.config
        n_train = len(self.world.train)
        prompts = cfg.training.prompts_per_step
        group = cfg.optimizer.group_size
        rng = derive_rng(cfg.run_seed, PROMPT_STREAM, step)
        chosen = rng.choice(n_train, size=prompts, replace=prompts > n_train)
        jobs = [
            _Job(int(qid), self.world.train[int(qid)], rollout_seed(cfg.run_seed, step, p, g), False)
            for p, qid in enumerate(chosen)
            for g in range(group)
        ]
        trajectories = self._rollouts(params, jobs)
        groups = []
        for p, qid in enumerate(chosen):
            members = tuple(
                ScoredTrajectory(t, reward_breakdown(t.prediction, t.golds, t.stats, cfg.reward))
                for t in trajectories[p * group:(p + 1) * group]
            )
            groups.append(TrajectoryGroup(int(qid), members))
        return TrajectoryBatch(tuple(groups))

    # ------------------------------------------------------------------
    # Artifact writing
    # ------------------------------------------------------------------

    def _append(self, path: Path, records: Iterable[dict[str, Any]]) -> None:
        try:
            with open(path, "a", encoding="utf-8") as f:
                for record in records:
                    f.write(json.dumps(record) + "\n")
        except OSError as exc:
            raise ArtifactIOError(f"Cannot append to {path}: {exc}") from exc

    def _sample_records(self, batch: TrajectoryBatch, step: int) -> Iterable[dict[str, Any]]:
        for p, group in enumerate(batch.groups):
            for g, member in enumerate(group.members):
                stats = member.trajectory.stats
                prediction = member.trajectory.prediction
                yield {
                    "step": step,
                    "prompt": p,
                    "member": g,
                    "question_id": group.question_id,
                    "think_count": stats.think_count,
                    "search_count": stats.search_count,
                    "answer_count": stats.answer_count,
                    "response_tokens": stats.response_tokens,
                    "answer_tokens": count_tokens(prediction) if prediction is not None else 0,
                    "outcome": member.reward.outcome,
                    "reward": member.reward.total,
                }

    def _write_transcripts(self, trajectories: list[Trajectory]) -> None:
        parts = []
        for t in trajectories[:TRANSCRIPT_SAMPLES]:
            parts.append(instruction_prompt(t.question.question, self.config.grammar) + t.text + "\n")
        (self.out_dir / TRANSCRIPT_FILE).write_text("\n".join(parts), encoding="utf-8")

    # ------------------------------------------------------------------
    # Main loop
    # ------------------------------------------------------------------

    def run(self, resume: Path | str | None = None) -> RunArtifacts:
        cfg = self.config
        out = self.out_dir
        try:
            out.mkdir(parents=True, exist_ok=True)
            (out / CONFIG_FILE).write_text(json.dumps(cfg.to_json_dict(), indent=2), encoding="utf-8")
        except OSError as exc:
            raise ArtifactIOError(f"Cannot prepare run directory {out}: {exc}") from exc

        metrics_path = out / METRICS_FILE
        updates_path = out / UPDATES_FILE
        samples_path = out / SAMPLES_FILE

        params = self.initial
        start = 0
        if resume is not None:
            params, meta = PolicyParams.load(resume)
            if tuple(meta.get("action_names", ())) != self.space.names:
                raise ContractError(f"Snapshot {resume} was taken with a different action space")
            start = int(meta["step"])
            logger.info("Resuming %s from step %d", cfg.name, start)
        for path in (metrics_path, updates_path, samples_path):
            if start == 0:
                path.write_text("", encoding="utf-8")
            else:
                _truncate_jsonl(path, start)

        logger.info(
            "Starting %s: %s grammar, %s reward, %s, %d steps (threads=%d)",
            cfg.name, cfg.grammar.value, cfg.reward.kind.value, cfg.optimizer.algorithm.value,
            cfg.training.steps, self.threads,
        )
        snapshots: list[Path] = []
        self._pool = ThreadPoolExecutor(max_workers=self.threads) if self.threads > 0 else None
        try:
            for step in range(start, cfg.training.steps + 1):
                if step % cfg.training.eval_every == 0 or step == cfg.training.steps:
                    metrics, evaluated = self.evaluate(params, step)
                    write_metrics([metrics], metrics_path, append=True)
                    snapshots.append(params.save(out / snapshot_name(step), step=step, action_names=self.space.names))
                    if step == 0:
                        self._write_transcripts(evaluated)
                    logger.info(
                        "step %d: reward=%.4f accuracy=%.4f answer_rate=%.3f searches=%.2f",
                        step, metrics.mean_reward, metrics.overall_accuracy,
                        metrics.answer_rate, metrics.mean_search_count,
                    )
                if step == cfg.training.steps:
                    break

                batch = self.collect(params, step)
                try:
                    params, diag = apply_update(params, batch, cfg.optimizer, self.initial, step=step)
                except NonFiniteGradientError as exc:
                    last = params.save(out / snapshot_name(step), step=step, action_names=self.space.names)
                    logger.error("Run %s aborted at step %d: %s", cfg.name, step, exc)
                    raise RunAbortedError(f"Run aborted at step {step}: {exc}", last_snapshot=last) from exc
                self._append(updates_path, [diag.to_record()])
                self._append(samples_path, self._sample_records(batch, step))
        finally:
            if self._pool is not None:
                self._pool.shutdown()
                self._pool = None

        records = read_metrics(metrics_path)
        summary = {
            "name": cfg.name,
            "grammar": cfg.grammar.value,
            "reward_kind": cfg.reward.kind.value,
            "algorithm": cfg.optimizer.algorithm.value,
            "world_seed": cfg.world.seed,
            **summarize_metrics(records),
        }
        summary_path = out / SUMMARY_FILE
        summary_path.write_text(json.dumps(summary, indent=2), encoding="utf-8")
        for event in summary["collapse_events"]:
            logger.warning("Collapse detected at step %d (drop %.0f%%)", event["detected_step"], 100 * event["drop_fraction"])
        logger.info("Run %s finished: accuracy=%.4f answer_rate=%.3f", cfg.name, summary["overall_accuracy"], summary["answer_rate"])
        return RunArtifacts(out, metrics_path, updates_path, samples_path, summary_path, tuple(snapshots), summary)


def run_experiment(
    config: ExperimentConfig,
    out_dir: Path | str,
    *,
    threads: int | None = None,
    resume: Path | str | None = None,
) -> RunArtifacts:
    """Run one experiment end to end and return its artifacts."""
    return ExperimentRunner(config, out_dir, threads=threads).run(resume=resume)
