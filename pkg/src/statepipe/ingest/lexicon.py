"""Verb lexicon construction."""

import logging

from statepipe.labeler.chain import CompletionClient
from statepipe.labeler.prompts import render_list_verbs
from statepipe.models import StateVocabulary, VerbLexicon
from statepipe.parsers import VerbRowParser

logger = logging.getLogger(__name__)


def build_verb_lexicon(vocab: StateVocabulary, client: CompletionClient) -> VerbLexicon:
    """
    Ask the language model for verbs associated with each state.

    Args:
        vocab: Vocabulary whose sentence forms are listed in the prompt
        client: Chat-completion client (or replay cache)

    Returns:
        Verbs per state; unusable rows are skipped and counted

    """
    prompt = render_list_verbs([state.state_text for state in vocab.states])
    parser = VerbRowParser(vocab)
    verbs = parser.parse(client.complete(prompt))
    if parser.skipped_rows:
        logger.warning("Skipped %d verb rows for %s", parser.skipped_rows, vocab.object_primary_name)
    return VerbLexicon(
        object_name=vocab.object_primary_name,
        verbs={name: tuple(found) for name, found in verbs.items()},
        skipped_rows=parser.skipped_rows,
    )
