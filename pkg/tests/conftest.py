"""Conftest for pytest configuration."""

from collections.abc import Callable
from pathlib import Path

import httpx
import numpy as np
import pytest

from statepipe.containers.config import StatepipeConfig, TrainConfig, load_statepipe_config
from statepipe.models import (
    ActionStateChain,
    ManipulationAction,
    NarrationSentence,
    NarrationTranscript,
    StateDef,
    StateDescription,
    StateVerdict,
    StateVocabulary,
    TernaryLabel,
)
from statepipe.synthetic import CONFIG_NAME, SyntheticSpec, SyntheticWorld, generate_synthetic


class ScriptedClient:
    """Completion client answering from a function of the prompt and recording every prompt."""

    def __init__(self, answer: Callable[[str], str]) -> None:
        self.answer = answer
        self.prompts: list[str] = []

    def complete(self, prompt: str) -> str:
        self.prompts.append(prompt)
        return self.answer(prompt)


@pytest.fixture
def apple_vocab() -> StateVocabulary:
    """Three-state vocabulary for an apple."""
    return StateVocabulary(
        object_primary_name="apple",
        object_secondary_names=("fruit",),
        states=(
            StateDef(
                name="whole",
                description="The apple is in one piece and has not been cut.",
                state_text="The apple is whole",
            ),
            StateDef(
                name="peeled",
                description="The skin of the apple has been removed.",
                state_text="The apple is peeled",
            ),
            StateDef(
                name="sliced",
                description="The apple has been cut into thin pieces.",
                state_text="The apple is sliced",
            ),
        ),
    )


@pytest.fixture
def apple_transcript() -> NarrationTranscript:
    """Four narration sentences about preparing an apple."""
    return NarrationTranscript(
        video_id="vid001",
        duration_s=40.0,
        sentences=(
            NarrationSentence(text="first grab a fresh apple", start_s=0.0, end_s=5.0),
            NarrationSentence(text="now peel the apple with a knife", start_s=5.0, end_s=15.0),
            NarrationSentence(text="then slice it into thin pieces", start_s=15.0, end_s=30.0),
            NarrationSentence(text="serve on a plate", start_s=30.0, end_s=40.0),
        ),
    )


@pytest.fixture
def apple_chain() -> ActionStateChain:
    """Two actions: peel over frames 5..14, slice over frames 15..29."""
    actions = (
        ManipulationAction(index=0, summary="Peel the apple", support_text="now peel", start_s=5.0, end_s=15.0),
        ManipulationAction(index=1, summary="Slice the apple", support_text="then slice", start_s=15.0, end_s=30.0),
    )
    descriptions = (
        StateDescription(action_index=0, text="The apple is peeled but whole.", object_alias="apple"),
        StateDescription(action_index=1, text="The apple is peeled and sliced.", object_alias="apple"),
    )
    rows = (
        (TernaryLabel.POSITIVE, TernaryLabel.POSITIVE, TernaryLabel.NEGATIVE),
        (TernaryLabel.NEGATIVE, TernaryLabel.POSITIVE, TernaryLabel.POSITIVE),
    )
    verdicts = tuple(
        tuple(StateVerdict(action_index=i, state_index=k, verdict=v) for k, v in enumerate(row))
        for i, row in enumerate(rows)
    )
    return ActionStateChain(video_id="vid001", actions=actions, descriptions=descriptions, verdicts=verdicts)


@pytest.fixture
def scripted_client() -> type[ScriptedClient]:
    """The scripted completion client class."""
    return ScriptedClient


@pytest.fixture
def tiny_train_config() -> TrainConfig:
    """Few epochs over small models."""
    return TrainConfig(
        epochs_stage1=3,
        epochs_stage2=2,
        lr=1e-3,
        hidden_dim=16,
        tcn_stages=2,
        tcn_layers=2,
        tcn_channels=8,
        dropout=0.0,
    )


@pytest.fixture
def synthetic_spec(tiny_train_config: TrainConfig) -> SyntheticSpec:
    """A small world with 40% of the label cells hidden."""
    return SyntheticSpec(
        seed=7,
        num_videos=3,
        num_frames=40,
        feature_dim=8,
        num_states=3,
        action_rate=0.15,
        mask_rate=0.4,
        train=tiny_train_config,
    )


@pytest.fixture
def synthetic_world(tmp_path: Path, synthetic_spec: SyntheticSpec) -> SyntheticWorld:
    """The small world written under ``tmp_path/world``."""
    return generate_synthetic(synthetic_spec, tmp_path / "world")


@pytest.fixture
def synthetic_config_path(tmp_path: Path, synthetic_world: SyntheticWorld) -> Path:  # noqa: ARG001
    """Pipeline YAML of the written world."""
    return tmp_path / "world" / CONFIG_NAME


@pytest.fixture
def synthetic_config(synthetic_config_path: Path) -> StatepipeConfig:
    """Validated, path-resolved configuration of the written world."""
    return load_statepipe_config(synthetic_config_path)


@pytest.fixture
def no_network() -> tuple[httpx.MockTransport, list[httpx.Request]]:
    """A transport that fails every request and remembers it."""
    requests: list[httpx.Request] = []

    def handler(request: httpx.Request) -> httpx.Response:
        requests.append(request)
        return httpx.Response(599, json={"error": "network access in an offline test"})

    return httpx.MockTransport(handler), requests


@pytest.fixture
def rng() -> np.random.Generator:
    """Seeded generator."""
    return np.random.default_rng(1234)
