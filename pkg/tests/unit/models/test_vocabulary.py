"""Tests for the state vocabulary and verb lexicon models."""

from pathlib import Path

import pydantic
import pytest

from statepipe.core.exceptions import FormatError
from statepipe.models import StateDef, StateVocabulary, TernaryLabel, VerbLexicon


class TestStateVocabulary:
    """Vocabulary validation and lookups."""

    def test_index_order(self, apple_vocab: StateVocabulary) -> None:
        """State order fixes the label index."""
        assert apple_vocab.num_states == 3
        assert apple_vocab.state_names == ["whole", "peeled", "sliced"]
        assert apple_vocab.index_of("sliced") == 2
        assert apple_vocab.object_names == ["apple", "fruit"]

    def test_unknown_state(self, apple_vocab: StateVocabulary) -> None:
        """Unknown names raise KeyError."""
        with pytest.raises(KeyError, match="mashed"):
            apple_vocab.index_of("mashed")

    def test_duplicate_names_rejected(self) -> None:
        """State names are unique."""
        state = StateDef(name="whole", description="d", state_text="The apple is whole")
        with pytest.raises(pydantic.ValidationError, match="unique"):
            StateVocabulary(object_primary_name="apple", states=(state, state))

    def test_state_text_mentions_object(self) -> None:
        """Every state sentence names the primary object."""
        state = StateDef(name="whole", description="d", state_text="The pear is whole")
        with pytest.raises(pydantic.ValidationError, match="does not mention"):
            StateVocabulary(object_primary_name="apple", states=(state,))

    def test_blank_fields_rejected(self) -> None:
        """Whitespace-only text is blank."""
        with pytest.raises(pydantic.ValidationError, match="blank"):
            StateDef(name="   ", description="d", state_text="The apple is whole")

    def test_empty_vocabulary_rejected(self) -> None:
        """At least one state."""
        with pytest.raises(pydantic.ValidationError):
            StateVocabulary(object_primary_name="apple", states=())

    def test_file_round_trip(self, tmp_path: Path, apple_vocab: StateVocabulary) -> None:
        """JSON on disk reloads to an equal vocabulary."""
        path = tmp_path / "nested" / "vocab.json"
        apple_vocab.to_file(path)
        assert StateVocabulary.from_file(path) == apple_vocab

    def test_unreadable_file(self, tmp_path: Path) -> None:
        """Invalid JSON is a FormatError naming the path."""
        path = tmp_path / "vocab.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(FormatError) as exc_info:
            StateVocabulary.from_file(path)
        assert exc_info.value.path == str(path)


class TestTernaryLabel:
    """Label tags."""

    @pytest.mark.parametrize(
        ("label", "tag"),
        [
            (TernaryLabel.POSITIVE, "pos"),
            (TernaryLabel.NEGATIVE, "neg"),
            (TernaryLabel.UNASSIGNED, "unassigned"),
        ],
    )
    def test_tags(self, label: TernaryLabel, tag: str) -> None:
        """Tags map both ways."""
        assert label.tag == tag
        assert TernaryLabel.from_tag(tag) is label

    def test_unknown_tag(self) -> None:
        """Other strings are rejected."""
        with pytest.raises(ValueError, match="Unknown label tag"):
            TernaryLabel.from_tag("maybe")


class TestVerbLexicon:
    """Lexicon validation."""

    def test_all_verbs_deduplicated(self) -> None:
        """Verbs shared between states appear once, in first-seen order."""
        lexicon = VerbLexicon(
            object_name="apple",
            verbs={"peeled": ("peel", "skin"), "sliced": ("cut", "slice", "peel")},
        )
        assert lexicon.all_verbs == ["peel", "skin", "cut", "slice"]

    @pytest.mark.parametrize("verb", ["Peel", "cut up", ""])
    def test_rejects_non_token_verbs(self, verb: str) -> None:
        """Verbs are single lowercase tokens."""
        with pytest.raises(pydantic.ValidationError, match="lowercase token"):
            VerbLexicon(object_name="apple", verbs={"peeled": (verb,)})

    def test_rejects_duplicates_within_state(self) -> None:
        """One state lists each verb once."""
        with pytest.raises(pydantic.ValidationError, match="duplicate"):
            VerbLexicon(object_name="apple", verbs={"peeled": ("peel", "peel")})

    def test_file_round_trip(self, tmp_path: Path) -> None:
        """JSON on disk reloads to an equal lexicon."""
        lexicon = VerbLexicon(object_name="apple", verbs={"sliced": ("cut",)}, skipped_rows=2)
        lexicon.to_file(tmp_path / "lexicon.json")
        assert VerbLexicon.from_file(tmp_path / "lexicon.json") == lexicon
