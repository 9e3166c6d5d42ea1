"""Worlds, training runs and experiment grids."""
from research_rl.simulation.experiment import ExperimentRunner, RunArtifacts, run_experiment, summarize_metrics
from research_rl.simulation.grid import GridRow, read_grid_csv, render_grid, run_grid, write_grid_csv
from research_rl.simulation.worlds import AbstentionMDP, World, abstention_world, bandit_world, build_world

__all__ = [
    "AbstentionMDP",
    "ExperimentRunner",
    "GridRow",
    "RunArtifacts",
    "World",
    "abstention_world",
    "bandit_world",
    "build_world",
    "read_grid_csv",
    "render_grid",
    "run_experiment",
    "run_grid",
    "summarize_metrics",
    "write_grid_csv",
]
