"""
Grid runner - several experiment configs, one comparison table.

Rows are keyed by (grammar, reward kind, algorithm) and pair accuracy with mean search
count. The table streams to ``grid.csv``; floats are written with ``repr`` so the file
parses back to identical values.
"""
from __future__ import annotations

import csv
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Sequence

from rich.console import Console
from rich.table import Table

from research_rl.core.exceptions import ArtifactIOError, ContractError
from research_rl.core.settings import ExperimentConfig
from research_rl.simulation.experiment import RunArtifacts, run_experiment

logger = logging.getLogger(__name__)

GRID_FILE = "grid.csv"


@dataclass(frozen=True)
class GridRow:
    name: str
    grammar: str
    reward_kind: str
    algorithm: str
    accuracy: float
    mean_search_count: float
    answer_rate: float
    mean_reward: float
    world_seed: int
    world_seed_mismatch: bool

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.grammar, self.reward_kind, self.algorithm)

    @classmethod
    def from_artifacts(cls, config: ExperimentConfig, artifacts: RunArtifacts, mismatch: bool) -> GridRow:
        summary = artifacts.summary
        return cls(
            name=config.name,
            grammar=config.grammar.value,
            reward_kind=config.reward.kind.value,
            algorithm=config.optimizer.algorithm.value,
            accuracy=summary["overall_accuracy"],
            mean_search_count=summary["mean_search_count"],
            answer_rate=summary["answer_rate"],
            mean_reward=summary["mean_reward"],
            world_seed=config.world.seed,
            world_seed_mismatch=mismatch,
        )


_FIELDS = [f.name for f in fields(GridRow)]
_FLOAT_FIELDS = {"accuracy", "mean_search_count", "answer_rate", "mean_reward"}


def write_grid_csv(rows: Sequence[GridRow], path: Path | str) -> Path:
    path = Path(path)
    try:
        with open(path, "w", newline="", encoding="utf-8") as f:
            writer = csv.DictWriter(f, fieldnames=_FIELDS)
            writer.writeheader()
            for row in rows:
                record = asdict(row)
                for name in _FLOAT_FIELDS:
                    record[name] = repr(float(record[name]))
                writer.writerow(record)
    except OSError as exc:
        raise ArtifactIOError(f"Cannot write grid table {path}: {exc}") from exc
    return path


def read_grid_csv(path: Path | str) -> list[GridRow]:
    try:
        with open(path, "r", newline="", encoding="utf-8") as f:
            records = list(csv.DictReader(f))
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read grid table {path}: {exc}") from exc
    rows = []
    for r in records:
        rows.append(GridRow(
            name=r["name"],
            grammar=r["grammar"],
            reward_kind=r["reward_kind"],
            algorithm=r["algorithm"],
            accuracy=float(r["accuracy"]),
            mean_search_count=float(r["mean_search_count"]),
            answer_rate=float(r["answer_rate"]),
            mean_reward=float(r["mean_reward"]),
            world_seed=int(r["world_seed"]),
            world_seed_mismatch=r["world_seed_mismatch"] == "True",
        ))
    return rows


def render_grid(rows: Sequence[GridRow], console: Console | None = None) -> Table:
    """Print the comparison table and return it."""
    table = Table(title="Experiment grid")
    for header in ("name", "grammar", "reward", "algorithm", "acc", "searches", "answer rate", "reward"):
        table.add_column(header, justify="right" if header in ("acc", "searches", "answer rate", "reward") else "left")
    for row in rows:
        name = f"{row.name} [yellow](world seed {row.world_seed})[/yellow]" if row.world_seed_mismatch else row.name
        table.add_row(
            name,
            row.grammar,
            row.reward_kind,
            row.algorithm,
            f"{row.accuracy:.3f}",
            f"{row.mean_search_count:.2f}",
            f"{row.answer_rate:.3f}",
            f"{row.mean_reward:.3f}",
        )
    (console or Console()).print(table)
    return table


def run_grid(
    configs: Sequence[ExperimentConfig],
    out_dir: Path | str,
    *,
    threads: int | None = None,
) -> list[GridRow]:
    """Run every config in its own subdirectory and write ``grid.csv``."""
    if not configs:
        raise ContractError("run_grid needs at least one config")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    reference_seed = configs[0].world.seed
    rows: list[GridRow] = []
    for i, config in enumerate(configs):
        mismatch = config.world.seed != reference_seed
        if mismatch:
            logger.warning(
                "Config %s uses world seed %d, grid reference is %d; rows are not comparable",
                config.name, config.world.seed, reference_seed,
            )
        logger.info("[%d/%d] Running %s", i + 1, len(configs), config.name)
        artifacts = run_experiment(config, out / f"{i:02d}_{config.name}", threads=threads)
        rows.append(GridRow.from_artifacts(config, artifacts, mismatch))

    csv_path = write_grid_csv(rows, out / GRID_FILE)
    logger.info("Grid table written to %s", csv_path)
    return rows
