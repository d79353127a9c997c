"""Transcript ingestion and training-video curation."""

from statepipe.ingest.curation import CurationDecision, curate, decide, verb_forms, write_kept_videos
from statepipe.ingest.lexicon import build_verb_lexicon
from statepipe.parsers.transcript import load_transcript

__all__ = [
    "CurationDecision",
    "build_verb_lexicon",
    "curate",
    "decide",
    "load_transcript",
    "verb_forms",
    "write_kept_videos",
]
