"""
Structural interface contracts shared across packages.

Diagnostics and rewards only need a few read-only attributes of an episode, so they
accept anything shaped like ``EpisodeOutcome`` (rollout trajectories, recorded samples,
test doubles) instead of importing the policy package.
"""
from __future__ import annotations

from typing import TYPE_CHECKING, Protocol, Sequence, runtime_checkable

if TYPE_CHECKING:
    from research_rl.environment.retriever import RetrievalResult
    from research_rl.protocol.tags import ProtocolStats


@runtime_checkable
class EpisodeOutcome(Protocol):
    """A finished episode: the acted-upon answer (if any), its golds and protocol counts."""

    @property
    def prediction(self) -> str | None: ...

    @property
    def golds(self) -> Sequence[str]: ...

    @property
    def stats(self) -> ProtocolStats: ...


@runtime_checkable
class Retriever(Protocol):
    """Contract for corpus indexes the environment can search.

    Satisfied by ``TfidfIndex`` and test doubles.
    """

    def retrieve(self, query: str, k: int) -> RetrievalResult: ...
