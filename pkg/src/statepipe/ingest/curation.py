"""Training-video curation filters."""

import json
import logging
import re
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from statepipe.models import StateVocabulary, VerbLexicon, VideoRecord

logger = logging.getLogger(__name__)

_TOKEN = re.compile(r"[a-z0-9']+")

# Regular inflections: slices, sliced, slicing, slicer
_SUFFIXES = ("", "s", "es", "d", "ed", "ing", "r", "er", "rs", "ers")


def verb_forms(verb: str) -> frozenset[str]:
    """
    Whole tokens that count as an inflection of a lexicon verb.

    A form is the verb, or its stem, followed by a regular suffix: a final
    "e" drops before "-ing" ("slicing"), a final consonant may double
    ("cutting", "chopped") and a final "y" turns into "i" ("fried").
    Nothing else may follow, so "cut" does not match "cute" or "cutlery".
    """
    verb = verb.lower()
    if not verb:
        return frozenset()
    forms = {verb + suffix for suffix in _SUFFIXES}
    forms.update(verb + verb[-1] + suffix for suffix in ("ing", "ed", "er", "ers"))
    if verb.endswith("e"):
        forms.add(verb[:-1] + "ing")
    if verb.endswith("y"):
        forms.update(verb[:-1] + suffix for suffix in ("ies", "ied", "ier"))
    return frozenset(forms)


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def mentions_name(text: str, name: str) -> bool:
    """Whole-word, case-insensitive phrase match."""
    words = _tokens(name)
    if not words:
        return False
    tokens = _tokens(text)
    return any(tokens[i : i + len(words)] == words for i in range(len(tokens) - len(words) + 1))


def matched_verbs(text: str, lexicon: VerbLexicon) -> list[str]:
    """Lexicon verbs with an inflected form among the tokens of ``text``."""
    tokens = set(_tokens(text))
    return [
        verb
        for verb in lexicon.all_verbs
        if not tokens.isdisjoint(verb_forms(verb))
    ]


@dataclass(frozen=True)
class CurationDecision:
    """Why a video was kept or dropped."""

    video_id: str
    in_title: bool
    in_narration: bool
    verbs: tuple[str, ...]
    word_count: int
    kept: bool
    reason: str


def decide(
    video: VideoRecord,
    vocab: StateVocabulary,
    lexicon: VerbLexicon,
    max_words: int,
    *,
    strict_title_and_narration: bool = False,
) -> CurationDecision:
    """Apply the object-name, verb and length filters to one video."""
    narration = video.transcript.text
    in_title = mentions_name(video.title, vocab.object_primary_name)
    in_narration = mentions_name(narration, vocab.object_primary_name)
    verbs = tuple(matched_verbs(narration, lexicon))
    word_count = video.word_count

    name_ok = (in_title and in_narration) if strict_title_and_narration else (in_title or in_narration)
    if not name_ok:
        reason = "object name missing"
    elif not verbs:
        reason = "no lexicon verb"
    elif word_count > max_words:
        reason = f"{word_count} words > {max_words}"
    else:
        reason = "kept"
    return CurationDecision(
        video_id=video.video_id,
        in_title=in_title,
        in_narration=in_narration,
        verbs=verbs,
        word_count=word_count,
        kept=reason == "kept",
        reason=reason,
    )


def curate(
    videos: Sequence[VideoRecord],
    vocab: StateVocabulary,
    lexicon: VerbLexicon,
    max_words: int,
    *,
    strict_title_and_narration: bool = False,
) -> list[VideoRecord]:
    """
    Keep videos about the object that mention a lexicon verb and are not too long.

    Args:
        videos: Candidate videos
        vocab: Vocabulary supplying the primary object name
        lexicon: Verbs associated with the object's states
        max_words: Longest narration kept, in words
        strict_title_and_narration: Require the name in both title and narration

    Returns:
        Kept videos in input order

    """
    if max_words <= 0:
        msg = f"max_words must be positive, got {max_words}"
        raise ValueError(msg)
    kept = []
    for video in videos:
        decision = decide(
            video,
            vocab,
            lexicon,
            max_words,
            strict_title_and_narration=strict_title_and_narration,
        )
        logger.debug("%s: %s", video.video_id, decision.reason)
        if decision.kept:
            kept.append(video)
    logger.info("Curated %d of %d videos", len(kept), len(videos))
    return kept


def write_kept_videos(videos: Sequence[VideoRecord], lexicon: VerbLexicon, path: Path) -> None:
    """
    Write kept videos as JSON lines.

    One ``{video_id, title, word_count, verbs}`` object per video, in input
    order; ``verbs`` lists the lexicon verbs the narration matched.
    """
    lines = [
        json.dumps(
            {
                "video_id": video.video_id,
                "title": video.title,
                "word_count": video.word_count,
                "verbs": matched_verbs(video.transcript.text, lexicon),
            },
            sort_keys=True,
        )
        for video in videos
    ]
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text("".join(f"{line}\n" for line in lines), encoding="utf-8")
