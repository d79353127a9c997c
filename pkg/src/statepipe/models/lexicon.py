"""Verb lexicon used by the curation filter."""

import json
from pathlib import Path

from pydantic import Field, field_validator

from statepipe.core.exceptions import FormatError
from statepipe.models.base import StatepipeBaseModel


class VerbLexicon(StatepipeBaseModel):
    """Per-state verbs likely to accompany a state change of one object."""

    object_name: str = Field(min_length=1)
    verbs: dict[str, tuple[str, ...]] = Field(
        default_factory=dict,
        description="State name -> lowercase single-token infinitives",
    )
    skipped_rows: int = Field(default=0, ge=0)

    @field_validator("verbs")
    @classmethod
    def _check_verbs(cls, value: dict[str, tuple[str, ...]]) -> dict[str, tuple[str, ...]]:
        for state, verbs in value.items():
            for verb in verbs:
                if not verb or verb != verb.lower() or len(verb.split()) != 1:
                    msg = f"verb {verb!r} for state {state!r} must be one lowercase token"
                    raise ValueError(msg)
            if len(set(verbs)) != len(verbs):
                msg = f"duplicate verbs for state {state!r}"
                raise ValueError(msg)
        return value

    @property
    def all_verbs(self) -> list[str]:
        """Distinct verbs across states, first occurrence order."""
        return list(dict.fromkeys(verb for verbs in self.verbs.values() for verb in verbs))

    @classmethod
    def from_file(cls, path: Path) -> "VerbLexicon":
        """Load a lexicon JSON file."""
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Cannot read lexicon {path}: {e}"
            raise FormatError(msg, path=str(path)) from e
        return cls.model_validate(payload)

    def to_file(self, path: Path) -> None:
        """Write the lexicon as indented JSON."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
