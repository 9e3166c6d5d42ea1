"""Training-dynamics instrumentation."""
from research_rl.diagnostics.collapse import CollapseEvent, collapse_events, detect_collapse
from research_rl.diagnostics.correlation import (
    CorrelationReport,
    QuantileBin,
    SampleRecord,
    pearson,
    quantile_bins,
    windowed_think_reward_correlation,
)
from research_rl.diagnostics.metrics import StepMetrics, read_metrics, step_metrics, write_metrics

__all__ = [
    "CollapseEvent",
    "CorrelationReport",
    "QuantileBin",
    "SampleRecord",
    "StepMetrics",
    "collapse_events",
    "detect_collapse",
    "pearson",
    "quantile_bins",
    "read_metrics",
    "step_metrics",
    "windowed_think_reward_correlation",
    "write_metrics",
]
