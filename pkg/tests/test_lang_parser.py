import string

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lacy.lang_parser import ParseError, ParseErrorKind, intents_equivalent, parse
from lacy.scene import Direction8, GridCell, Point2, Scene, SceneObject
from lacy.spatial_lang import AbsolutePlacement, Intent, RelativePlacement, render

CATALOG = ("mug", "plate", "mustard bottle", "tennis ball")


def test_parse_absolute():
    intent = parse("pick the mug and place it in the top left of the workspace", CATALOG)
    assert intent == Intent("mug", AbsolutePlacement(GridCell.from_label("top left")))


def test_parse_relative():
    intent = parse("take the tennis ball and put it on the bottom right side of the plate", CATALOG)
    assert intent == Intent("tennis ball", RelativePlacement(Direction8.BOTTOM_RIGHT, "plate"))


def test_parse_is_case_insensitive_and_normalizes():
    intent = parse("Pick the MUG and Place it In The Center of the Workspace", CATALOG)
    assert intent.pick_target == "mug"
    assert intent.placement.cell.label == "center"


def test_parse_tolerates_punctuation_and_spacing():
    assert parse("pick the mug and place it in the center of the workspace.", CATALOG)
    assert parse("pick the mug and place it in the center of the workspace!", CATALOG)
    assert parse("  pick   the mug  and put it to the   left of the   plate  ", CATALOG)


def test_parse_accepts_middle_center_synonym():
    intent = parse("pick the mug and place it in the middle center of the workspace", CATALOG)
    assert intent.placement.cell.label == "center"


def test_parse_longest_object_name_wins():
    # "mustard bottle" must not stop at a shorter prefix of another entry.
    catalog = ("mustard", "mustard bottle")
    intent = parse("pick the mustard bottle and place it in the center of the workspace", catalog)
    assert intent.pick_target == "mustard bottle"


def test_parse_allows_self_reference():
    # Grammatically valid; semantics treat the reference at its recorded spot.
    intent = parse("pick the mug and place it to the left of the mug", CATALOG)
    assert intent.placement == RelativePlacement(Direction8.LEFT, "mug")


@pytest.mark.parametrize(
    "text,kind,fragment",
    [
        ("fold the towel and place it in the center of the workspace", ParseErrorKind.UNKNOWN_VERB, "fold"),
        ("pick the towel and place it in the center of the workspace", ParseErrorKind.UNKNOWN_OBJECT, "towel"),
        ("pick the mug and shove it in the center of the workspace", ParseErrorKind.UNKNOWN_VERB, "shove"),
        ("pick the mug and place it in the middle of the workspace", ParseErrorKind.UNKNOWN_CELL, "middle"),
        ("pick the mug and place it to the northwest of the plate", ParseErrorKind.UNKNOWN_DIRECTION, "northwest"),
        ("pick the mug and place it to the left of the towel", ParseErrorKind.UNKNOWN_OBJECT, "towel"),
        ("pick the mug near the plate", ParseErrorKind.MALFORMED_STRUCTURE, None),
        ("pick the mug and place it wherever you like", ParseErrorKind.MALFORMED_STRUCTURE, None),
        ("", ParseErrorKind.MALFORMED_STRUCTURE, None),
        ("   ", ParseErrorKind.MALFORMED_STRUCTURE, None),
    ],
)
def test_parse_error_kinds_and_spans(text, kind, fragment):
    with pytest.raises(ParseError) as err:
        parse(text, CATALOG)
    assert err.value.kind is kind
    if fragment is not None:
        lo, hi = err.value.span
        assert text[lo:hi].strip().startswith(fragment)


def test_parse_error_is_value_error():
    assert issubclass(ParseError, ValueError)


@settings(max_examples=300, deadline=None)
@given(st.text(alphabet=string.printable, max_size=80))
def test_parse_raises_only_parse_error(text):
    try:
        parse(text, CATALOG)
    except ParseError:
        pass


_intents = st.one_of(
    st.builds(
        Intent,
        st.sampled_from(CATALOG),
        st.builds(AbsolutePlacement, st.sampled_from([GridCell.from_label(l) for l in (
            "top left", "top center", "top right", "middle left", "center",
            "middle right", "bottom left", "bottom center", "bottom right")])),
    ),
    st.builds(
        Intent,
        st.sampled_from(CATALOG),
        st.builds(RelativePlacement, st.sampled_from(list(Direction8)), st.sampled_from(CATALOG)),
    ),
)


@settings(max_examples=300, deadline=None)
@given(_intents, st.integers(0, 2**31))
def test_round_trip_property(intent, seed):
    assert parse(render(intent, seed=seed), CATALOG) == intent


def _scene():
    return Scene(
        "eq",
        (
            SceneObject("mug", Point2(0.9, 0.9)),
            SceneObject("plate", Point2(0.15, 0.15)),
            SceneObject("fork", Point2(0.85, 0.15)),
        ),
    )


def test_equivalence_same_type():
    scene = _scene()
    a = Intent("mug", AbsolutePlacement(GridCell.from_label("top left")))
    b = Intent("mug", AbsolutePlacement(GridCell.from_label("top left")))
    c = Intent("mug", AbsolutePlacement(GridCell.from_label("top right")))
    assert intents_equivalent(a, b, scene)
    assert not intents_equivalent(a, c, scene)

    r1 = Intent("mug", RelativePlacement(Direction8.TOP, "plate"))
    r2 = Intent("mug", RelativePlacement(Direction8.TOP, "plate"))
    r3 = Intent("mug", RelativePlacement(Direction8.TOP, "fork"))
    assert intents_equivalent(r1, r2, scene)
    assert not intents_equivalent(r1, r3, scene)


def test_equivalence_requires_same_pick_target():
    scene = _scene()
    a = Intent("mug", AbsolutePlacement(GridCell.from_label("top left")))
    b = Intent("plate", AbsolutePlacement(GridCell.from_label("top left")))
    assert not intents_equivalent(a, b, scene)


def test_equivalence_across_types_uses_region_overlap():
    scene = _scene()
    # "top left of the workspace" overlaps the neighborhood of the plate
    # (at 0.15, 0.15) but not the fork's (at 0.85, 0.15).
    grid = Intent("mug", AbsolutePlacement(GridCell.from_label("top left")))
    near_plate = Intent("mug", RelativePlacement(Direction8.LEFT, "plate"))
    near_fork = Intent("mug", RelativePlacement(Direction8.RIGHT, "fork"))
    assert intents_equivalent(grid, near_plate, scene)
    assert intents_equivalent(near_plate, grid, scene)
    assert not intents_equivalent(grid, near_fork, scene)


@settings(max_examples=200, deadline=None)
@given(_intents, _intents)
def test_equivalence_reflexive_and_symmetric(a, b):
    scene = _scene()
    catalog_names = set(_scene().names()) | set(CATALOG)
    # Restrict to intents whose references exist in the scene.
    for intent in (a, b):
        if isinstance(intent.placement, RelativePlacement):
            if intent.placement.reference not in scene.names():
                return
    assert intents_equivalent(a, a, scene)
    assert intents_equivalent(a, b, scene) == intents_equivalent(b, a, scene)
