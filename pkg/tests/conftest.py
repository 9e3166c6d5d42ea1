"""Shared fixtures: protocol transcripts, small worlds and environments."""
from __future__ import annotations

import pytest

from research_rl.core.settings import ActionSpaceSettings, EnvConfig, RewardSpec
from research_rl.core.types import QueryTemplate, RewardKind
from research_rl.environment.episode import ResearchEnvironment
from research_rl.environment.world import Document, build_synthetic_world
from research_rl.policy.actions import ActionSpace
from research_rl.simulation.worlds import abstention_world

NORMAL_TRANSCRIPT = (
    "<think> The definition of the function of management by POSDCORB is in Wikipedia. "
    "So I conduct the following search </think>\n"
    "<search> POSDCORB function of management </search>\n"
    "<information>Doc 1(Title: POSDCORB) Committee, Luther Gulick asks rhetorically "
    "\"What is the work of the chief executive? What does he do?\" POSDCORB is the answer."
    "</information>\n"
    "<think> The elements of POSDCORB come from Luther Gulick's notes on the theory of "
    "organization. </think>\n"
    "<answer> Luther Gulick </answer>"
)


@pytest.fixture
def normal_transcript() -> str:
    """A clean search-then-answer rollout with two reasoning blocks."""
    return NORMAL_TRANSCRIPT


@pytest.fixture
def five_doc_corpus() -> list[Document]:
    return [
        Document(0, "Lagos", "Lagos is the largest city of Nigeria."),
        Document(1, "Abuja", "Abuja is the capital of Nigeria."),
        Document(2, "Accra", "Accra is the capital of Ghana."),
        Document(3, "Nile", "The Nile flows north through Egypt."),
        Document(4, "Sahara", "The Sahara is the largest hot desert."),
    ]


@pytest.fixture(scope="session")
def small_world():
    return build_synthetic_world(7, 10, 20, 0.3)


@pytest.fixture
def small_env(small_world) -> ResearchEnvironment:
    corpus, _ = small_world
    return ResearchEnvironment(corpus, EnvConfig())


@pytest.fixture(scope="session")
def abstention():
    """(corpus, questions, mdp) of the fixed abstention world."""
    return abstention_world()


@pytest.fixture
def two_step_space() -> ActionSpace:
    """Search, best-guess answer and abstain: a small space with an enumerable tree."""
    return ActionSpace(ActionSpaceSettings(
        think_templates=0,
        query_templates=(QueryTemplate.VERBATIM,),
        candidate_slots=0,
        best_guess=True,
        abstain=True,
    ))


@pytest.fixture
def f1_plus_spec() -> RewardSpec:
    return RewardSpec(kind=RewardKind.F1_PLUS, alpha=0.1, beta=0.1)
