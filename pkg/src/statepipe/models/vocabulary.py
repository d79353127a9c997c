"""Object state vocabulary: the K-state label space of one object category."""

import json
from pathlib import Path

from pydantic import Field, field_validator, model_validator

from statepipe.core.exceptions import FormatError
from statepipe.models.base import StatepipeBaseModel


class StateDef(StatepipeBaseModel):
    """A named object state with its textual definition."""

    name: str = Field(min_length=1, description="Short state phrase, e.g. 'sliced'")
    description: str = Field(min_length=1, description="Multi-sentence definition")
    state_text: str = Field(
        min_length=1,
        description="Full sentence form, e.g. 'The apple is sliced'",
    )

    @field_validator("name", "description", "state_text")
    @classmethod
    def _not_blank(cls, value: str) -> str:
        if not value.strip():
            msg = "must not be blank"
            raise ValueError(msg)
        return value


class StateVocabulary(StatepipeBaseModel):
    """
    Ordered state list for one object category.

    The order of ``states`` fixes the label index k of every timeline,
    verdict matrix and model output column.
    """

    object_primary_name: str = Field(min_length=1)
    object_secondary_names: tuple[str, ...] = ()
    states: tuple[StateDef, ...] = Field(min_length=1)

    @model_validator(mode="after")
    def _check_states(self) -> "StateVocabulary":
        names = [state.name for state in self.states]
        if len(set(names)) != len(names):
            msg = f"state names must be unique: {names}"
            raise ValueError(msg)
        primary = self.object_primary_name.lower()
        for state in self.states:
            if primary not in state.state_text.lower():
                msg = (
                    f"state_text {state.state_text!r} does not mention "
                    f"object {self.object_primary_name!r}"
                )
                raise ValueError(msg)
        return self

    @property
    def num_states(self) -> int:
        """K, the number of state categories."""
        return len(self.states)

    @property
    def state_names(self) -> list[str]:
        """State names in label-index order."""
        return [state.name for state in self.states]

    @property
    def object_names(self) -> list[str]:
        """Primary name followed by secondary names."""
        return [self.object_primary_name, *self.object_secondary_names]

    def index_of(self, name: str) -> int:
        """Label index of a state name."""
        try:
            return self.state_names.index(name)
        except ValueError as e:
            msg = f"Unknown state {name!r} for object {self.object_primary_name!r}"
            raise KeyError(msg) from e

    @classmethod
    def from_file(cls, path: Path) -> "StateVocabulary":
        """Load a vocabulary JSON file."""
        try:
            payload = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            msg = f"Cannot read vocabulary {path}: {e}"
            raise FormatError(msg, path=str(path)) from e
        return cls.model_validate(payload)

    def to_file(self, path: Path) -> None:
        """Write the vocabulary as indented JSON."""
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
