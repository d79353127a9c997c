"""
Synthetic oracle worlds for offline end-to-end runs.

Each video is a tiling of [0, T) seconds into actions. Every action toggles
the states named by its transition-table row, so the state vector after each
action is known exactly. Features embed the per-frame state vector linearly
plus seeded noise. The language-model cache is scripted through the same
prompt renderers and cache keys the labeler uses, so replaying the chain
reproduces the generator's actions, descriptions and verdicts; the stub
scorer answers every frame with the action that contains it.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml
from pydantic import Field, model_validator

from statepipe.api_clients.chat import LabelerClient
from statepipe.containers.config import LabelerConfig, LlmClientConfig, TrainConfig
from statepipe.core.formats import feature_path, label_path, write_feature_file, write_label_file
from statepipe.labeler import prompts
from statepipe.labeler.chain import history_window
from statepipe.models import (
    FeatureSequence,
    GroundTruthTimeline,
    PseudoLabelTimeline,
    QueryKind,
    StateDef,
    StatepipeBaseModel,
    StateVocabulary,
    VerbLexicon,
)
from statepipe.models.timeline import UNASSIGNED
from statepipe.parsers.transcript import META_SUFFIX, TRANSCRIPT_SUFFIX

logger = logging.getLogger(__name__)

_STATE_WORDS = (
    ("painted", "paint"),
    ("folded", "fold"),
    ("sealed", "seal"),
    ("polished", "polish"),
    ("stacked", "stack"),
    ("labeled", "label"),
    ("washed", "wash"),
    ("drilled", "drill"),
)

CONFIG_NAME = "statepipe.yaml"
STUB_FIXTURE = "stub_scorer.json"


def _small_train_config() -> TrainConfig:
    return TrainConfig(
        epochs_stage1=30,
        epochs_stage2=30,
        lr=1e-3,
        hidden_dim=64,
        tcn_stages=2,
        tcn_layers=4,
        tcn_channels=32,
        dropout=0.1,
    )


class SyntheticSpec(StatepipeBaseModel):
    """Parameters of a synthetic world."""

    seed: int = Field(default=0, ge=0)
    num_videos: int = Field(default=4, ge=1)
    num_frames: int = Field(default=64, ge=1)
    feature_dim: int = Field(default=16, ge=1)
    num_states: int = Field(default=4, ge=1)
    action_rate: float = Field(default=0.1, gt=0.0, le=1.0, description="Actions per frame")
    transitions: tuple[tuple[int, ...], ...] | None = Field(
        default=None,
        description="States toggled by each action type; default: type k toggles state k",
    )
    mask_rate: float = Field(default=0.0, ge=0.0, le=1.0, description="Fraction of cells hidden")
    noise_scale: float = Field(default=0.1, ge=0.0)
    embedding_scale: float = Field(default=1.0, gt=0.0)
    object_name: str = Field(default="widget", min_length=1)
    train: TrainConfig = Field(default_factory=_small_train_config)

    @model_validator(mode="after")
    def _check_transitions(self) -> "SyntheticSpec":
        for row in self.transition_table:
            if not row:
                msg = "every action type must toggle at least one state"
                raise ValueError(msg)
            if any(not 0 <= k < self.num_states for k in row):
                msg = f"transition row {row} names a state outside [0, {self.num_states})"
                raise ValueError(msg)
        return self

    @property
    def transition_table(self) -> tuple[tuple[int, ...], ...]:
        """Configured transitions, or one toggle per state."""
        if self.transitions is not None:
            return self.transitions
        return tuple((k,) for k in range(self.num_states))


@dataclass(frozen=True)
class SyntheticAction:
    """One generated action and the state vector after it."""

    index: int
    start: int
    end: int
    kind: int
    summary: str
    sentence: str
    description: str
    state_after: tuple[bool, ...]


@dataclass
class SyntheticVideo:
    """Everything known about one generated video."""

    video_id: str
    actions: list[SyntheticAction]
    ground_truth: np.ndarray
    hidden: np.ndarray
    features: np.ndarray

    def expected_labels(self) -> np.ndarray:
        """Ground truth with hidden cells Unassigned."""
        labels = self.ground_truth.astype(np.int8)
        labels[self.hidden] = UNASSIGNED
        return labels


@dataclass
class SyntheticWorld:
    """A generated vocabulary, lexicon and set of videos."""

    spec: SyntheticSpec
    vocab: StateVocabulary
    lexicon: VerbLexicon
    videos: list[SyntheticVideo] = field(default_factory=list)

    def ground_truth(self) -> dict[str, GroundTruthTimeline]:
        """Binary timelines per video."""
        return {v.video_id: GroundTruthTimeline.from_binary(v.video_id, v.ground_truth) for v in self.videos}

    def expected_pseudo_labels(self) -> dict[str, PseudoLabelTimeline]:
        """Pseudo-label timelines the offline pipeline must reproduce."""
        out = {}
        for video in self.videos:
            labels = video.expected_labels()
            provenance = np.full(labels.shape, None, dtype=object)
            provenance[labels != UNASSIGNED] = "synthetic"
            out[video.video_id] = PseudoLabelTimeline(
                video_id=video.video_id,
                labels=labels,
                provenance=provenance,
            )
        return out

    def dataset(self) -> list[tuple[FeatureSequence, PseudoLabelTimeline]]:
        """(features, masked labels) pairs for direct training."""
        expected = self.expected_pseudo_labels()
        return [
            (FeatureSequence(video_id=v.video_id, data=v.features), expected[v.video_id]) for v in self.videos
        ]


def _vocabulary(spec: SyntheticSpec) -> tuple[StateVocabulary, list[str]]:
    states = []
    verbs = []
    for k in range(spec.num_states):
        name, verb = _STATE_WORDS[k] if k < len(_STATE_WORDS) else (f"marked{k}", f"mark{k}")
        verbs.append(verb)
        states.append(
            StateDef(
                name=name,
                description=f"The {spec.object_name} has been {name} and still shows it.",
                state_text=f"The {spec.object_name} is {name}",
            ),
        )
    return StateVocabulary(object_primary_name=spec.object_name, states=tuple(states)), verbs


def _describe(object_name: str, step: int, state: np.ndarray, names: list[str]) -> str:
    parts = [name if on else f"not {name}" for name, on in zip(names, state, strict=True)]
    return f"The {object_name} after step {step} is " + ", ".join(parts) + "."


def _hide_cells(spec: SyntheticSpec, videos: list[SyntheticVideo], rng: np.random.Generator) -> None:
    """Hide whole (action, state) verdicts until the hidden-cell budget is met."""
    total = sum(v.ground_truth.size for v in videos)
    budget = round(spec.mask_rate * total)
    pairs = [(vi, a.index, k) for vi, v in enumerate(videos) for a in v.actions for k in range(spec.num_states)]
    hidden = 0
    for p in rng.permutation(len(pairs)):
        vi, ai, k = pairs[p]
        action = videos[vi].actions[ai]
        size = action.end - action.start
        if hidden + size <= budget:
            videos[vi].hidden[action.start : action.end, k] = True
            hidden += size
        if hidden == budget:
            break


def build_world(spec: SyntheticSpec) -> SyntheticWorld:
    """Generate a world in memory; identical specs give identical worlds."""
    rng = np.random.default_rng(spec.seed)
    vocab, verbs = _vocabulary(spec)
    table = spec.transition_table
    lexicon = VerbLexicon(
        object_name=spec.object_name,
        verbs={
            state.name: tuple(sorted({verbs[row[0]] for row in table if k in row}))
            for k, state in enumerate(vocab.states)
        },
    )
    embedding = rng.standard_normal((spec.num_states, spec.feature_dim)) * spec.embedding_scale

    world = SyntheticWorld(spec=spec, vocab=vocab, lexicon=lexicon)
    steps = spec.num_frames
    for v in range(spec.num_videos):
        video_id = f"synth{v:03d}"
        count = min(steps, max(1, round(spec.action_rate * steps)))
        cuts = np.sort(rng.choice(np.arange(1, steps), size=count - 1, replace=False)) if count > 1 else []
        bounds = [0, *map(int, cuts), steps]
        state = np.zeros(spec.num_states, dtype=bool)
        truth = np.zeros((steps, spec.num_states), dtype=np.int8)
        actions = []
        for i, (start, end) in enumerate(zip(bounds[:-1], bounds[1:], strict=True)):
            kind = int(rng.integers(len(table)))
            state = state.copy()
            state[list(table[kind])] ^= True
            verb = verbs[table[kind][0]]
            truth[start:end] = state
            actions.append(
                SyntheticAction(
                    index=i,
                    start=start,
                    end=end,
                    kind=kind,
                    summary=f"Step {i + 1}: {verb} the {spec.object_name} using method {kind}",
                    sentence=f"in step {i + 1} we {verb} the {spec.object_name} with method {kind}",
                    description=_describe(spec.object_name, i + 1, state, vocab.state_names),
                    state_after=tuple(bool(s) for s in state),
                ),
            )
        noise = rng.standard_normal((steps, spec.feature_dim)) * spec.noise_scale
        world.videos.append(
            SyntheticVideo(
                video_id=video_id,
                actions=actions,
                ground_truth=truth,
                hidden=np.zeros(truth.shape, dtype=bool),
                features=(truth @ embedding + noise).astype(np.float32),
            ),
        )
    _hide_cells(spec, world.videos, rng)
    return world


class CacheScript:
    """Writes the responses the labeling chain will request, keyed like the client."""

    def __init__(self, llm: LlmClientConfig, labeler: LabelerConfig) -> None:
        """Initialize with the client and chain settings the pipeline will use."""
        self.client = LabelerClient(llm)
        self.labeler = labeler
        self.entries = 0

    def put(self, prompt: str, response: str) -> None:
        """Store the response of a single-message prompt."""
        key = self.client.cache_key([{"role": "user", "content": prompt}])
        self.client.cache.put(key, response)
        self.entries += 1

    def script_lexicon(self, world: SyntheticWorld) -> None:
        """Verb-listing response matching the world's lexicon."""
        rows = [
            f"{prompts.csv_field(state.state_text)},{prompts.csv_field(','.join(world.lexicon.verbs[state.name]))}"
            for state in world.vocab.states
        ]
        self.put(prompts.render_list_verbs([s.state_text for s in world.vocab.states]), "\n".join(rows))

    def script_video(self, world: SyntheticWorld, video: SyntheticVideo) -> None:
        """Responses of all three chain stages for one video."""
        object_name = world.vocab.object_primary_name
        size = self.labeler.sentences_per_block
        for first in range(0, len(video.actions), size):
            block = video.actions[first : first + size]
            rows = [f"{prompts.csv_field(a.summary)},{prompts.csv_field(a.sentence)}" for a in block]
            self.put(prompts.render_extract_actions([a.sentence for a in block]), "\n".join(rows))

        previous = prompts.unknown_state(object_name)
        size = self.labeler.actions_per_block
        for first in range(0, len(video.actions), size):
            block = video.actions[first : first + size]
            rows = [f"{prompts.csv_field(a.summary)},{prompts.csv_field(a.description)}" for a in block]
            self.put(prompts.render_describe_states(object_name, previous, [a.summary for a in block]), "\n".join(rows))
            previous = block[-1].description

        descriptions = [a.description for a in video.actions]
        for action in video.actions:
            history = history_window(descriptions, action.index, self.labeler.context_cap)
            for k, state in enumerate(world.vocab.states):
                if video.hidden[action.start, k]:
                    answer = "ambiguous, the history does not say"
                else:
                    answer = "yes" if action.state_after[k] else "no"
                response = (
                    f"Judging points: the {object_name} must be {state.name}.\n\n"
                    f"Comparison: traced over step {action.index + 1}.\n\n"
                    f"Answer: {answer}"
                )
                self.put(prompts.render_infer_state(object_name, history, state.state_text, state.description), response)


def stub_fixture(world: SyntheticWorld) -> dict[str, object]:
    """Scorer answers: each frame's containing action; filters and background default to pass."""
    answers = {}
    for video in world.videos:
        for action in video.actions:
            for frame in range(action.start, action.end):
                answers[f"{video.video_id}/{frame}/{QueryKind.ACTION.value}"] = action.summary
    return {"answers": answers, "defaults": {}}


def _write_json(path: Path, payload: object) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_world(
    world: SyntheticWorld,
    out_dir: Path,
    llm: LlmClientConfig | None = None,
    labeler: LabelerConfig | None = None,
) -> Path:
    """
    Write a world as pipeline inputs and return the pipeline config path.

    Layout under ``out_dir``: ``vocab.json``, ``lexicon.json``,
    ``transcripts/``, ``features/``, ``ground_truth/``, ``cache/llm/``,
    ``stub_scorer.json`` and ``statepipe.yaml``.
    """
    labeler = labeler or LabelerConfig(max_concurrency=1)
    llm = (llm or LlmClientConfig(url="http://127.0.0.1:9/unused", api_key="")).model_copy(
        update={"cache_dir": str(out_dir / "cache" / "llm")},
    )
    world.vocab.to_file(out_dir / "vocab.json")
    world.lexicon.to_file(out_dir / "lexicon.json")

    script = CacheScript(llm, labeler)
    script.script_lexicon(world)
    for video in world.videos:
        transcript = out_dir / "transcripts" / f"{video.video_id}{TRANSCRIPT_SUFFIX}"
        transcript.parent.mkdir(parents=True, exist_ok=True)
        lines = [
            json.dumps({"text": a.sentence, "start_s": float(a.start), "end_s": float(a.end)}) for a in video.actions
        ]
        transcript.write_text("\n".join(lines) + "\n", encoding="utf-8")
        _write_json(
            transcript.with_name(f"{video.video_id}{META_SUFFIX}"),
            {
                "video_id": video.video_id,
                "duration_s": float(world.spec.num_frames),
                "title": f"How to finish a {world.vocab.object_primary_name}",
            },
        )
        write_feature_file(
            FeatureSequence(video_id=video.video_id, data=video.features),
            feature_path(out_dir / "features", video.video_id),
        )
        write_label_file(
            GroundTruthTimeline.from_binary(video.video_id, video.ground_truth),
            world.vocab,
            label_path(out_dir / "ground_truth", video.video_id),
        )
        script.script_video(world, video)
    _write_json(out_dir / STUB_FIXTURE, stub_fixture(world))

    config = {
        "pipeline": {
            "vocab": "vocab.json",
            "lexicon": "lexicon.json",
            "transcripts": "transcripts",
            "features": "features",
            "ground_truth": "ground_truth",
            "work_dir": "work",
        },
        "llm": {"model": llm.model, "temperature": llm.temperature, "cache_dir": "cache/llm", "mode": "replay"},
        "vlm": {"kind": "stub", "stub_fixture": STUB_FIXTURE, "mode": "replay", "cache_dir": "cache/vlm"},
        "labeler": labeler.model_dump(mode="json"),
        "alignment": {"max_concurrency": 1},
        "train": world.spec.train.model_dump(mode="json"),
    }
    config_path = out_dir / CONFIG_NAME
    config_path.write_text(yaml.safe_dump(config, sort_keys=True), encoding="utf-8")
    logger.info(
        "Wrote %d synthetic videos and %d cache entries to %s",
        len(world.videos),
        script.entries,
        out_dir,
    )
    return config_path


def generate_synthetic(
    spec: SyntheticSpec,
    out_dir: Path,
    llm: LlmClientConfig | None = None,
    labeler: LabelerConfig | None = None,
) -> SyntheticWorld:
    """Build a world from ``spec`` and write it under ``out_dir``."""
    world = build_world(spec)
    write_world(world, out_dir, llm, labeler)
    return world


__all__ = [
    "CONFIG_NAME",
    "STUB_FIXTURE",
    "CacheScript",
    "SyntheticAction",
    "SyntheticSpec",
    "SyntheticVideo",
    "SyntheticWorld",
    "build_world",
    "generate_synthetic",
    "stub_fixture",
    "write_world",
]
