"""Synthetic corpus, lexical retrieval and multi-turn episode stepping."""
from research_rl.environment.episode import EpisodeState, ResearchEnvironment, StepResult
from research_rl.environment.retriever import RetrievalResult, TfidfIndex, tokenize
from research_rl.environment.world import Document, QuestionSpec, build_synthetic_world

__all__ = [
    "Document",
    "EpisodeState",
    "QuestionSpec",
    "ResearchEnvironment",
    "RetrievalResult",
    "StepResult",
    "TfidfIndex",
    "build_synthetic_world",
    "tokenize",
]
