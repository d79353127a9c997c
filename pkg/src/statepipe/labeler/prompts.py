"""Prompt rendering for the labeling chain, verb listing and frame scorers."""

from collections.abc import Sequence
from functools import lru_cache

from jinja2 import Environment, PackageLoader, StrictUndefined

UNKNOWN_STATE = "The state of {object} is unknown."
BACKGROUND_PROMPT = "a photo of {name}"
OTHERS_OPTION = "others"


def csv_field(value: str) -> str:
    """Quote a value as a single CSV field."""
    return '"' + value.replace('"', '""') + '"'


@lru_cache(maxsize=1)
def _environment() -> Environment:
    environment = Environment(  # noqa: S701 - plain-text prompts, not HTML
        loader=PackageLoader("statepipe.labeler", "templates"),
        undefined=StrictUndefined,
        keep_trailing_newline=False,
        trim_blocks=False,
    )
    environment.filters["csv_field"] = csv_field
    return environment


def _render(template: str, **context: object) -> str:
    return _environment().get_template(template).render(**context).rstrip() + "\n"


def unknown_state(object_name: str) -> str:
    """Seed description of the first description block."""
    return UNKNOWN_STATE.format(object=object_name)


def background_prompts(names: Sequence[str]) -> list[str]:
    """``a photo of <name>`` for every object name."""
    return [BACKGROUND_PROMPT.format(name=name) for name in names]


def render_extract_actions(sentences: Sequence[str]) -> str:
    """Action-extraction prompt for one block of narration sentences."""
    return _render("extract_actions.j2", sentences=list(sentences))


def render_describe_states(object_name: str, previous: str, actions: Sequence[str]) -> str:
    """State-description prompt for one block of action summaries."""
    return _render(
        "describe_states.j2",
        object=object_name,
        previous=previous,
        actions=list(actions),
    )


def render_infer_state(
    object_name: str,
    history: Sequence[str],
    state_text: str,
    definition: str,
) -> str:
    """Verdict prompt for one (description prefix, state) pair."""
    return _render(
        "infer_state.j2",
        object=object_name,
        history=list(history),
        state=state_text,
        definition=definition,
    )


def render_infer_changeit(
    object_name: str,
    history: Sequence[str],
    end_states: Sequence[str],
    action: str,
) -> str:
    """Initial/Action/End phase prompt."""
    return _render(
        "infer_changeit.j2",
        object=object_name,
        history=list(history),
        end_states=list(end_states),
        action=action,
    )


def render_list_verbs(state_texts: Sequence[str]) -> str:
    """Verb-listing prompt over the vocabulary's sentence forms."""
    return _render("list_verbs.j2", states=list(state_texts))


def render_choose_action(candidates: Sequence[str]) -> str:
    """Frame-level action choice prompt; candidates already include ``others``."""
    return _render("choose_action.j2", candidates=list(candidates))


def render_filter_state(action: str, state_text: str) -> str:
    """Frame-level state-description filter prompt."""
    return _render("filter_state.j2", action=action, state=state_text)
