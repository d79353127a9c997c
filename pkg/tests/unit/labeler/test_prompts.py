"""Tests for prompt rendering."""

import pytest

from statepipe.labeler import prompts


def test_csv_field_escapes_quotes() -> None:
    """Embedded quotes are doubled."""
    assert prompts.csv_field('say "hi", then go') == '"say ""hi"", then go"'


def test_extract_actions_lists_quoted_sentences() -> None:
    """Each narration sentence is one quoted CSV line."""
    text = prompts.render_extract_actions(["peel the apple", 'it is "done"'])
    assert '\n"peel the apple"\n"it is ""done"""\n' in text
    assert text.endswith('"let\'s add the whisked eggs into the pan"\n')


def test_unknown_state_and_background() -> None:
    """Seed description and background prompts use the object names."""
    assert prompts.unknown_state("apple") == "The state of apple is unknown."
    assert prompts.background_prompts(["apple", "fruit"]) == ["a photo of apple", "a photo of fruit"]


def test_choose_action_lists_candidates() -> None:
    """Candidates are bulleted in order, ending with others."""
    text = prompts.render_choose_action(["Peel the apple", prompts.OTHERS_OPTION])
    assert text.endswith("- Peel the apple\n- others\n")


def test_filter_state_names_action_and_state() -> None:
    """The filter asks for a True/False judgement."""
    text = prompts.render_filter_state("Peel the apple", "The apple is peeled")
    assert text.startswith("The image possibly shows people Peel the apple.")
    assert '"The apple is peeled" is true or not' in text
    assert 'The answer is True/False' in text


def test_infer_state_history_order() -> None:
    """History lines appear oldest first, followed by the definition."""
    text = prompts.render_infer_state("apple", ["first", "second"], "The apple is peeled", "Skin removed.")
    assert text.index("first") < text.index("second") < text.index("Skin removed.")
    assert 'fit the definition of "The apple is peeled"?' in text


def test_list_verbs_lists_states() -> None:
    """Every sentence form is listed."""
    text = prompts.render_list_verbs(["The apple is whole", "The apple is sliced"])
    assert "The apple is whole\nThe apple is sliced\n" in text


@pytest.mark.parametrize(
    "render",
    [
        lambda: prompts.render_describe_states("apple", "The state of apple is unknown.", ["a"]),
        lambda: prompts.render_infer_changeit("apple", ["x"], ["sliced", "diced"], "slicing apple"),
    ],
)
def test_single_trailing_newline(render: object) -> None:
    """Rendered prompts end with exactly one newline."""
    text = render()  # type: ignore[operator]
    assert text.endswith("\n")
    assert not text.endswith("\n\n")
