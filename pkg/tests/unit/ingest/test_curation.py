"""Tests for training-video curation and the verb lexicon."""

import json
from pathlib import Path

import pytest

from statepipe.ingest import build_verb_lexicon, curate, decide, verb_forms, write_kept_videos
from statepipe.ingest.curation import matched_verbs, mentions_name
from statepipe.models import NarrationSentence, NarrationTranscript, StateVocabulary, VerbLexicon, VideoRecord

LEXICON = VerbLexicon(object_name="apple", verbs={"peeled": ("peel",), "sliced": ("slice", "cut")})


def _video(video_id: str, title: str, *sentences: str) -> VideoRecord:
    transcript = NarrationTranscript(
        video_id=video_id,
        duration_s=float(len(sentences) * 5),
        sentences=tuple(
            NarrationSentence(text=text, start_s=i * 5.0, end_s=i * 5.0 + 5.0) for i, text in enumerate(sentences)
        ),
    )
    return VideoRecord(video_id=video_id, title=title, transcript=transcript)


class TestMatching:
    """Name and verb matching helpers."""

    @pytest.mark.parametrize(
        ("verb", "token", "expected"),
        [
            ("slice", "sliced", True),
            ("slice", "slicing", True),
            ("slice", "slices", True),
            ("peel", "peeling", True),
            ("cut", "cutting", True),
            ("Chop", "chopped", True),
            ("fry", "fried", True),
            ("cut", "cute", False),
            ("cut", "cutlery", False),
            ("peel", "repeel", False),
            ("grate", "grateful", False),
        ],
    )
    def test_verb_forms(self, verb: str, token: str, expected: bool) -> None:
        """Inflections match as whole tokens; longer words sharing the prefix do not."""
        assert (token in verb_forms(verb)) is expected

    @pytest.mark.parametrize(
        ("text", "name", "expected"),
        [
            ("How to slice an Apple!", "apple", True),
            ("pineapple upside down cake", "apple", False),
            ("apples are great", "apple", False),
            ("peel the green apple now", "green apple", True),
            ("anything", "", False),
        ],
    )
    def test_mentions_name(self, text: str, name: str, expected: bool) -> None:
        """Whole-word phrase matching."""
        assert mentions_name(text, name) is expected

    def test_matched_verbs_by_inflection(self) -> None:
        """Inflected forms match; words that merely start with a verb do not."""
        assert matched_verbs("I am slicing it, then peeled it", LEXICON) == ["peel", "slice"]
        assert matched_verbs("cutting board", LEXICON) == ["cut"]
        assert matched_verbs("just look at it", LEXICON) == []
        assert matched_verbs("a cute set of cutlery", LEXICON) == []


class TestDecide:
    """Per-video decisions and their reasons."""

    def test_kept(self, apple_vocab: StateVocabulary) -> None:
        """Name, verb and length all pass."""
        decision = decide(_video("v", "Apple pie", "slice the apple"), apple_vocab, LEXICON, 100)
        assert decision.kept
        assert decision.reason == "kept"
        assert decision.verbs == ("slice",)

    def test_name_in_title_only_is_enough_by_default(self, apple_vocab: StateVocabulary) -> None:
        """The lenient check accepts the name in either place."""
        video = _video("v", "Apple tart", "slice it thin")
        assert decide(video, apple_vocab, LEXICON, 100).kept
        strict = decide(video, apple_vocab, LEXICON, 100, strict_title_and_narration=True)
        assert (strict.kept, strict.reason) == (False, "object name missing")

    def test_reasons_in_order(self, apple_vocab: StateVocabulary) -> None:
        """Name is checked before verbs, verbs before length."""
        no_name = decide(_video("a", "Pie", "slice it"), apple_vocab, LEXICON, 1)
        no_verb = decide(_video("b", "Apple", "look at it for a while"), apple_vocab, LEXICON, 1)
        too_long = decide(_video("c", "Apple", "slice the apple thin"), apple_vocab, LEXICON, 3)
        assert no_name.reason == "object name missing"
        assert no_verb.reason == "no lexicon verb"
        assert too_long.reason == "4 words > 3"

    def test_word_limit_inclusive(self, apple_vocab: StateVocabulary) -> None:
        """Exactly max_words is kept."""
        assert decide(_video("c", "Apple", "slice the apple thin"), apple_vocab, LEXICON, 4).kept


class TestCurate:
    """Filtering a collection."""

    def test_keeps_input_order(self, apple_vocab: StateVocabulary) -> None:
        """Kept videos come back in the order given."""
        videos = [
            _video("z", "Apple", "peel the apple"),
            _video("y", "Bread", "slice the bread"),
            _video("x", "", "cut the apple"),
        ]
        assert [v.video_id for v in curate(videos, apple_vocab, LEXICON, 10)] == ["z", "x"]

    def test_rejects_non_positive_limit(self, apple_vocab: StateVocabulary) -> None:
        """A word limit must be positive."""
        with pytest.raises(ValueError, match="max_words"):
            curate([], apple_vocab, LEXICON, 0)


    def test_write_kept_videos(self, tmp_path: Path) -> None:
        """One JSON object per video with the verbs its narration used."""
        videos = [_video("z", "Apple", "peel the apple", "then cut it"), _video("x", "", "slicing apples")]
        out = tmp_path / "kept" / "kept.jsonl"
        write_kept_videos(videos, LEXICON, out)
        rows = [json.loads(line) for line in out.read_text(encoding="utf-8").splitlines()]
        assert rows == [
            {"video_id": "z", "title": "Apple", "word_count": 6, "verbs": ["peel", "cut"]},
            {"video_id": "x", "title": "", "word_count": 2, "verbs": ["slice"]},
        ]


class TestBuildVerbLexicon:
    """Lexicon construction through the completion client."""

    def test_lexicon_from_answer(self, scripted_client: type, apple_vocab: StateVocabulary) -> None:
        """Rows are matched to states; unusable rows are counted."""
        answer = (
            '"The apple is whole","hold,wash,buy"\n'
            '"The apple is peeled","peel,skin"\n'
            '"The apple is mashed","mash"\n'
        )
        client = scripted_client(lambda _: answer)
        lexicon = build_verb_lexicon(apple_vocab, client)
        assert lexicon.object_name == "apple"
        assert lexicon.verbs == {"whole": ("hold", "wash", "buy"), "peeled": ("peel", "skin"), "sliced": ()}
        assert lexicon.skipped_rows == 1
        assert "The apple is sliced" in client.prompts[0]
