"""Configuration management for dependency injection."""

import os
from pathlib import Path
from typing import Any, Literal, TypeVar

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator

from statepipe.core.exceptions import ConfigurationError
from statepipe.models.base import CacheMode, Precision, ScorerKind

DEFAULT_LLM_URL = "http://localhost:8000/v1/chat/completions"
DEFAULT_VLM_URL = "http://localhost:8001/v1/chat/completions"

ModelT = TypeVar("ModelT", bound=BaseModel)


def _resolved(model: ModelT, base: Path, names: tuple[str, ...]) -> ModelT:
    """Copy of ``model`` with the named relative path fields joined onto ``base``."""
    update = {}
    for name in names:
        value = getattr(model, name)
        if value is not None and not Path(value).is_absolute():
            update[name] = str(base / value)
    return model.model_copy(update=update)


def _env(name: str, default: str = "") -> str:
    return os.environ.get(name, default)


class LlmClientConfig(BaseModel):
    """Chat-completion client configuration."""

    url: str = Field(
        default_factory=lambda: _env("STATEPIPE_LLM_URL", DEFAULT_LLM_URL),
        description="Chat-completion endpoint (STATEPIPE_LLM_URL)",
    )
    api_key: str = Field(
        default_factory=lambda: _env("STATEPIPE_LLM_KEY"),
        description="Bearer token (STATEPIPE_LLM_KEY)",
        repr=False,
    )
    model: str = Field(default="gpt-3.5-turbo-1106", description="Model identifier")
    temperature: float = Field(default=0.0, ge=0.0, description="Sampling temperature")
    timeout: float = Field(default=60.0, gt=0, description="Request timeout in seconds")
    retries: int = Field(default=3, ge=1, description="Attempts per request")
    backoff_s: float = Field(default=1.0, ge=0, description="Initial retry backoff")
    cache_dir: str = Field(default="cache/llm", description="Response cache directory")
    mode: CacheMode = Field(default=CacheMode.REPLAY, description="live, record or replay")


class VlmScorerConfig(BaseModel):
    """Frame scorer configuration."""

    kind: ScorerKind = Field(default=ScorerKind.STUB, description="Scorer backend")
    url: str = Field(
        default_factory=lambda: _env("STATEPIPE_VLM_URL", DEFAULT_VLM_URL),
        description="Vision-language endpoint (STATEPIPE_VLM_URL)",
    )
    api_key: str = Field(default="", repr=False)
    model: str = Field(default="llava-v1.6-34b", description="Vision-language model id")
    timeout: float = Field(default=60.0, gt=0)
    retries: int = Field(default=3, ge=1)
    cache_dir: str = Field(default="cache/vlm", description="Response cache directory")
    mode: CacheMode = Field(default=CacheMode.REPLAY)
    frames_dir: str = Field(default="frames", description="frames/<video_id>/<frame:06d>.jpg")
    stub_fixture: str | None = Field(default=None, description="Stub answers JSON")
    frame_embeddings_dir: str | None = Field(
        default=None,
        description="Per-video frame embeddings in feature-file format",
    )
    text_embeddings: str | None = Field(
        default=None,
        description="JSON mapping prompt text to an embedding vector",
    )


class LabelerConfig(BaseModel):
    """Prompt-chain configuration."""

    sentences_per_block: int = Field(default=10, ge=1)
    actions_per_block: int = Field(default=10, ge=1)
    context_cap: int | None = Field(
        default=None,
        ge=1,
        description="Max descriptions shown per verdict prompt; None = full prefix",
    )
    match_floor: float = Field(default=0.5, ge=0.0, le=1.0)
    max_concurrency: int = Field(default=4, ge=1)


class AlignmentConfig(BaseModel):
    """Frame alignment configuration."""

    delta_t: float = Field(default=10.0, gt=0, description="Candidate window in seconds")
    background_threshold: float = Field(default=0.2, ge=0.0, lt=1.0)
    background_prompts: list[str] = Field(
        default_factory=list,
        description="Defaults to 'a photo of <name>' over all object names",
    )
    use_background: bool = True
    use_action_selection: bool = True
    use_state_filter: bool = True
    restrict_to_action_interval: bool = True
    max_concurrency: int = Field(default=4, ge=1)


class CurationConfig(BaseModel):
    """Training-video curation configuration."""

    max_words: int = Field(default=12000, gt=0)
    strict_title_and_narration: bool = False


class TrainConfig(BaseModel):
    """Optimization settings for teacher training and self-training."""

    model_config = ConfigDict(extra="forbid")

    batch_size: int = Field(default=16, ge=1)
    epochs_stage1: int = Field(default=50, ge=0)
    epochs_stage2: int = Field(default=50, ge=0)
    lr: float = Field(default=1e-4, ge=0.0)
    weight_decay: float = Field(default=0.01, ge=0.0)
    alpha: float = Field(default=0.5, ge=0.0, le=1.0)
    ema_momentum: float = Field(default=0.999, ge=0.0, le=1.0)
    seed: int = 0
    max_steps: int | None = Field(default=None, ge=0)
    precision: Precision = Precision.SINGLE
    ema_per: Literal["step", "epoch"] = "step"
    targets_on: Literal["all", "assigned"] = "all"
    student_loss: Literal["multi_stage", "final_stage"] = "multi_stage"
    hidden_dim: int = Field(default=512, ge=1)
    tcn_stages: int = Field(default=4, ge=1)
    tcn_layers: int = Field(default=10, ge=1)
    tcn_channels: int = Field(default=512, ge=1)
    dropout: float = Field(default=0.5, ge=0.0, lt=1.0)

    @classmethod
    def from_kv_text(cls, text: str, source: str = "<string>") -> "TrainConfig":
        """Parse ``key=value`` lines; ``#`` comments and blank lines are ignored."""
        values: dict[str, str] = {}
        for line_number, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                msg = f"{source}:{line_number}: expected key=value, got {raw.strip()!r}"
                raise ConfigurationError(msg)
            values[key.strip()] = value.strip()
        unknown = set(values) - set(cls.model_fields)
        if unknown:
            msg = f"{source}: unknown training keys {sorted(unknown)}"
            raise ConfigurationError(msg)
        parsed: dict[str, Any] = {
            key: (None if value.lower() in {"none", ""} else value) for key, value in values.items()
        }
        return cls.model_validate(parsed)

    @classmethod
    def from_file(cls, path: Path) -> "TrainConfig":
        """Read a key=value file, or YAML when the suffix is .yaml/.yml."""
        if not path.exists():
            msg = f"Training configuration not found: {path}"
            raise ConfigurationError(msg)
        text = path.read_text(encoding="utf-8")
        if path.suffix in {".yaml", ".yml"}:
            return cls.model_validate(yaml.safe_load(text) or {})
        return cls.from_kv_text(text, source=str(path))

    def to_kv_text(self) -> str:
        """Render as a key=value file."""
        lines = []
        for key, value in self.model_dump(mode="json").items():
            lines.append(f"{key}={'none' if value is None else value}")
        return "\n".join(lines) + "\n"


class PipelineConfig(BaseModel):
    """Input and work locations of one object category's pipeline run."""

    vocab: str = Field(description="StateVocabulary JSON")
    lexicon: str | None = Field(default=None, description="VerbLexicon JSON; built when absent")
    transcripts: str = Field(description="Directory of <video_id>.jsonl transcripts")
    features: str = Field(description="Directory of <video_id>.fsq feature files")
    ground_truth: str | None = Field(default=None, description="Directory of label files")
    work_dir: str = Field(default="work", description="Stage outputs and manifest")
    eval_videos: list[str] = Field(
        default_factory=list,
        description="Videos evaluated against ground truth; empty = all with ground truth",
    )
    threads: int = Field(default=1, ge=1, description="Worker threads across videos")

    def resolve(self, base: Path) -> "PipelineConfig":
        """Resolve relative paths against ``base``."""
        return _resolved(self, base, ("vocab", "lexicon", "transcripts", "features", "ground_truth", "work_dir"))


class StatepipeConfig(BaseModel):
    """Main Statepipe configuration."""

    pipeline: PipelineConfig
    llm: LlmClientConfig = Field(default_factory=LlmClientConfig)
    vlm: VlmScorerConfig = Field(default_factory=VlmScorerConfig)
    labeler: LabelerConfig = Field(default_factory=LabelerConfig)
    alignment: AlignmentConfig = Field(default_factory=AlignmentConfig)
    curation: CurationConfig = Field(default_factory=CurationConfig)
    train: TrainConfig = Field(default_factory=TrainConfig)

    @field_validator("pipeline")
    @classmethod
    def _vocab_named(cls, value: PipelineConfig) -> PipelineConfig:
        if not value.vocab:
            msg = "pipeline.vocab is required"
            raise ValueError(msg)
        return value


def load_config(config_path: str | Path) -> dict[str, Any]:
    """
    Load configuration from YAML file.

    Args:
        config_path: Path to configuration file

    Returns:
        Configuration dictionary

    Raises:
        ConfigurationError: File missing or not a YAML mapping

    """
    config_file = Path(config_path)

    if not config_file.exists():
        msg = f"Configuration file not found: {config_path}"
        raise ConfigurationError(msg)

    with config_file.open("r", encoding="utf-8") as f:
        payload = yaml.safe_load(f)
    if not isinstance(payload, dict):
        msg = f"Configuration file {config_path} is not a mapping"
        raise ConfigurationError(msg)
    return payload


def validate_config(config_dict: dict[str, Any], base: Path | None = None) -> StatepipeConfig:
    """
    Validate configuration dictionary.

    Args:
        config_dict: Configuration dictionary
        base: Directory that relative input, work and cache paths are resolved against

    Returns:
        Validated configuration object

    """
    config = StatepipeConfig.model_validate(config_dict)
    if base is not None:
        config = config.model_copy(
            update={
                "pipeline": config.pipeline.resolve(base),
                "llm": _resolved(config.llm, base, ("cache_dir",)),
                "vlm": _resolved(
                    config.vlm,
                    base,
                    ("cache_dir", "frames_dir", "stub_fixture", "frame_embeddings_dir", "text_embeddings"),
                ),
            },
        )
    return config


def load_statepipe_config(config_path: str | Path) -> StatepipeConfig:
    """Load, validate and path-resolve a pipeline YAML file."""
    path = Path(config_path)
    return validate_config(load_config(path), base=path.parent)
