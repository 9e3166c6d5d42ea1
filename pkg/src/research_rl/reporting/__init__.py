"""Reporting - cross-run comparison, leaderboards and post-hoc analysis."""
from __future__ import annotations

__all__ = [
    "analysis",
    "comparison",
]
