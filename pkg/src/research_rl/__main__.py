"""Unified CLI entry point for research-rl-lab.

Usage::

    python -m research_rl run --preset fast_f1plus_reinforce --out runs/pp
    python -m research_rl grid --presets abstention_f1 abstention_f1_plus --out runs/abstention
    python -m research_rl analyze --metrics runs/pp/metrics.jsonl
    python -m research_rl world --seed 7 --entities 40 --questions 96 --out data/world
    python -m research_rl presets
    python -m research_rl compare --runs runs/pp runs/r1

Exit codes: 0 success, 2 invalid config, 3 run aborted, 4 I/O failure.
"""
from __future__ import annotations

import argparse
import json
import signal
import sys
from pathlib import Path
from typing import Any

from research_rl.core.exceptions import ArtifactIOError, ConfigError, RunAbortedError

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ABORTED = 3
EXIT_IO = 4


def _setup_logging(args: argparse.Namespace, log_dir: Path | None) -> None:
    from research_rl.core.logging import setup_logger
    from research_rl.core.settings import get_runtime_settings

    runtime = get_runtime_settings()
    target = runtime.log_dir if runtime.log_dir is not None else log_dir
    setup_logger("research_rl", verbose=getattr(args, "verbose", False), log_dir=target, level=runtime.log_level)


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides: dict[str, Any] = {}
    if getattr(args, "seed", None) is not None:
        overrides["run_seed"] = args.seed
    if getattr(args, "steps", None) is not None:
        overrides["training"] = {"steps": args.steps}
    return overrides


def _cmd_run(args: argparse.Namespace) -> None:
    """Train one experiment."""
    from rich.console import Console

    from research_rl.core.config import ConfigLoader
    from research_rl.simulation.experiment import run_experiment

    if not args.config and not args.preset:
        raise ConfigError("run needs --config or --preset", ["config: missing"])
    config = ConfigLoader().load(args.config, preset=args.preset, overrides=_overrides(args))
    out = Path(args.out or Path("runs") / config.name)
    _setup_logging(args, out)

    artifacts = run_experiment(config, out, threads=args.threads, resume=args.resume)
    summary = artifacts.summary
    Console().print(
        f"[bold]{config.name}[/bold]: accuracy={summary['overall_accuracy']:.4f} "
        f"answer_rate={summary['answer_rate']:.3f} searches={summary['mean_search_count']:.2f} "
        f"collapses={len(summary['collapse_events'])}"
    )
    print(f"Results saved to {out}")


def _cmd_grid(args: argparse.Namespace) -> None:
    """Run several experiments and print the comparison table."""
    from research_rl.core.config import ConfigLoader
    from research_rl.simulation.grid import render_grid, run_grid

    loader = ConfigLoader()
    overrides = _overrides(args)
    configs = [loader.load(path, overrides=overrides) for path in args.configs or []]
    configs += [loader.load(preset=name, overrides=overrides) for name in args.presets or []]
    if not configs:
        raise ConfigError("grid needs --configs or --presets", ["configs: empty"])
    out = Path(args.out)
    _setup_logging(args, out)

    rows = run_grid(configs, out, threads=args.threads)
    render_grid(rows)
    print(f"Grid table saved to {out / 'grid.csv'}")


def _cmd_analyze(args: argparse.Namespace) -> None:
    """Collapse detection and think/reward correlation for a finished run."""
    from research_rl.reporting.analysis import analyze_run

    _setup_logging(args, None)
    report = analyze_run(
        args.metrics,
        collapse_window=args.collapse_window,
        drop_threshold=args.drop_threshold,
        k=args.k,
        bins=args.bins,
    )
    text = json.dumps(report, indent=2)
    if args.out:
        try:
            Path(args.out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise ArtifactIOError(f"Cannot write analysis {args.out}: {exc}") from exc
        print(f"Analysis saved to {args.out}")
    else:
        print(text)


def _cmd_world(args: argparse.Namespace) -> None:
    """Generate a synthetic world and export it as JSON lines."""
    from research_rl.environment.world import build_synthetic_world, save_corpus, save_questions

    _setup_logging(args, None)
    corpus, questions = build_synthetic_world(
        args.seed,
        args.entities,
        args.questions,
        args.multi_hop_fraction,
        facts_per_entity=args.facts_per_entity,
    )
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"Cannot create {out}: {exc}") from exc
    save_corpus(corpus, out / "corpus.jsonl")
    save_questions(questions, out / "questions.jsonl")
    print(f"World saved to {out} ({len(corpus)} documents, {len(questions)} questions)")


def _cmd_presets(args: argparse.Namespace) -> None:
    """List named experiment presets."""
    from research_rl.core.config import ConfigLoader

    table = ConfigLoader().presets()
    if not table:
        print("No presets found.")
        return
    for name, body in table.items():
        print(f"  {name:<22} {body.get('description', '')}")


def _cmd_compare(args: argparse.Namespace) -> None:
    """Rank finished runs by evaluation accuracy."""
    from research_rl.reporting.comparison import compare_runs, format_leaderboard

    _setup_logging(args, None)
    board = compare_runs(args.runs)
    if not board:
        print("No finished runs found.")
        return
    print(format_leaderboard(board))


def build_parser() -> argparse.ArgumentParser:
    """Build the unified CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog="research-rl",
        description="Research RL lab - tag-protocol search agents trained with policy gradients",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    # --- run ---
    run = subparsers.add_parser("run", help="Train one experiment")
    run.add_argument("--config", "-c", help="Experiment config (JSON or YAML)")
    run.add_argument("--preset", "-p", help="Named preset from config/presets.yaml")
    run.add_argument("--out", "-o", help="Run directory (default runs/<name>)")
    run.add_argument("--seed", type=int, default=None, help="Override run_seed")
    run.add_argument("--steps", type=int, default=None, help="Override training.steps")
    run.add_argument("--threads", type=int, default=None, help="Rollout threads (default RRL_THREADS)")
    run.add_argument("--resume", default=None, help="Params snapshot to resume from")
    run.add_argument("--verbose", "-v", action="store_true")
    run.set_defaults(func=_cmd_run)

    # --- grid ---
    grid = subparsers.add_parser("grid", help="Run several experiments and compare them")
    grid.add_argument("--configs", nargs="+", metavar="PATH")
    grid.add_argument("--presets", nargs="+", metavar="NAME")
    grid.add_argument("--out", "-o", default="runs/grid")
    grid.add_argument("--seed", type=int, default=None, help="Override run_seed of every config")
    grid.add_argument("--steps", type=int, default=None, help="Override training.steps of every config")
    grid.add_argument("--threads", type=int, default=None)
    grid.add_argument("--verbose", "-v", action="store_true")
    grid.set_defaults(func=_cmd_grid)

    # --- analyze ---
    analyze = subparsers.add_parser("analyze", help="Collapse and think/reward correlation analysis")
    analyze.add_argument("--metrics", "-m", required=True, help="Path to metrics.jsonl")
    analyze.add_argument("--collapse-window", type=int, default=50)
    analyze.add_argument("--drop-threshold", type=float, default=0.5)
    analyze.add_argument("--k", type=int, default=100, help="Steps before the collapse to correlate")
    analyze.add_argument("--bins", type=int, default=10)
    analyze.add_argument("--out", "-o", default=None, help="Write the report JSON here")
    analyze.set_defaults(func=_cmd_analyze)

    # --- world ---
    world = subparsers.add_parser("world", help="Generate and export a synthetic world")
    world.add_argument("--seed", type=int, default=7)
    world.add_argument("--entities", type=int, default=40)
    world.add_argument("--questions", type=int, default=96)
    world.add_argument("--multi-hop-fraction", type=float, default=0.3)
    world.add_argument("--facts-per-entity", type=int, default=3)
    world.add_argument("--out", "-o", default="data/world")
    world.set_defaults(func=_cmd_world)

    # --- presets ---
    presets = subparsers.add_parser("presets", help="List named experiment presets")
    presets.set_defaults(func=_cmd_presets)

    # --- compare ---
    compare = subparsers.add_parser("compare", help="Leaderboard of finished runs")
    compare.add_argument("--runs", nargs="+", required=True, metavar="DIR")
    compare.set_defaults(func=_cmd_compare)

    return parser


def _install_signal_handlers() -> None:
    """Install graceful shutdown handlers for SIGINT/SIGTERM."""
    def _handler(signum: int, _frame: object) -> None:
        name = signal.Signals(signum).name
        print(f"\nReceived {name}. Shutting down gracefully...", file=sys.stderr)
        sys.exit(128 + signum)

    signal.signal(signal.SIGINT, _handler)
    signal.signal(signal.SIGTERM, _handler)


def run_command(args: argparse.Namespace) -> int:
    """Execute a parsed command and map failures to exit codes."""
    try:
        args.func(args)
    except ConfigError as exc:
        print(f"Invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except RunAbortedError as exc:
        print(f"Run aborted: {exc} (last snapshot: {exc.last_snapshot})", file=sys.stderr)
        return EXIT_ABORTED
    except OSError as exc:
        print(f"I/O failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main(argv: list[str] | None = None) -> None:
    _install_signal_handlers()

    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        sys.exit(1)

    sys.exit(run_command(args))


if __name__ == "__main__":
    main()
