import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from lacy.scene import (
    ALL_CELLS,
    CELL_LABELS,
    SECTOR_ORDER,
    Col,
    DegenerateDirection,
    Direction8,
    EmptyScene,
    GridCell,
    Point2,
    Row,
    Scene,
    SceneObject,
    direction_of,
    grid_cell_of,
    min_pairwise_distance,
    nearest_object,
    sector_index,
)


def test_point_rejects_out_of_range():
    with pytest.raises(ValueError):
        Point2(-0.01, 0.5)
    with pytest.raises(ValueError):
        Point2(0.5, 1.01)
    Point2(0.0, 1.0)  # boundary is allowed


def test_point_distance():
    assert math.isclose(Point2(0.2, 0.2).distance_to(Point2(0.25, 0.25)), 0.05 * math.sqrt(2))


def test_scene_object_name_validation():
    with pytest.raises(ValueError):
        SceneObject("", Point2(0.5, 0.5))
    with pytest.raises(ValueError):
        SceneObject(" mug", Point2(0.5, 0.5))
    with pytest.raises(ValueError):
        SceneObject("Mug", Point2(0.5, 0.5))


def test_scene_validation():
    mug = SceneObject("mug", Point2(0.2, 0.2))
    with pytest.raises(ValueError):
        Scene("s", ())
    with pytest.raises(ValueError):
        Scene("s", (mug, SceneObject("mug", Point2(0.8, 0.8))))
    coerced = Scene("s", [mug])
    assert isinstance(coerced.objects, tuple)
    with pytest.raises(KeyError):
        coerced.object_named("plate")


@pytest.mark.parametrize(
    "point,label",
    [
        ((0.0, 0.0), "top left"),
        ((0.5, 0.5), "center"),
        ((1.0, 1.0), "bottom right"),
        ((1 / 3, 0.9), "bottom left"),  # x on the boundary stays left
        ((2 / 3, 0.5), "center"),
        ((0.7, 0.1), "top right"),
        ((0.5, 2 / 3), "center"),
        ((0.5, 0.67), "bottom center"),
    ],
)
def test_grid_cell_of(point, label):
    assert grid_cell_of(Point2(*point)).label == label


def test_cell_labels_are_canonical():
    assert len(set(CELL_LABELS)) == 9
    assert "center" in CELL_LABELS
    assert "middle center" not in CELL_LABELS
    for cell in ALL_CELLS:
        assert GridCell.from_label(cell.label) == cell
    assert GridCell.from_label("middle center") == GridCell(Row.MIDDLE, Col.CENTER)
    with pytest.raises(ValueError):
        GridCell.from_label("upper left")


def test_cell_center_round_trips_through_grid():
    for cell in ALL_CELLS:
        c = cell.center
        x_lo, x_hi, y_lo, y_hi = cell.bounds
        assert x_lo < c.x < x_hi and y_lo < c.y < y_hi
        assert grid_cell_of(c) == cell


@pytest.mark.parametrize(
    "vec,direction",
    [
        ((1.0, 0.0), Direction8.RIGHT),
        ((0.0, 1.0), Direction8.BOTTOM),  # y grows downward
        ((-1.0, 0.0), Direction8.LEFT),
        ((0.0, -1.0), Direction8.TOP),
        ((1.0, 1.0), Direction8.BOTTOM_RIGHT),
        ((1.0, -1.0), Direction8.TOP_RIGHT),
        ((-1.0, 1.0), Direction8.BOTTOM_LEFT),
        ((-1.0, -1.0), Direction8.TOP_LEFT),
    ],
)
def test_sector_centers(vec, direction):
    assert SECTOR_ORDER[sector_index(*vec)] is direction


def test_sector_seams():
    # Boundary angles (odd multiples of 22.5 degrees) have no exact float
    # vector, so pin the seam from both sides instead.
    eps = 1e-6
    for k in range(8):
        boundary = 22.5 + 45.0 * k
        below, above = math.radians(boundary - eps), math.radians(boundary + eps)
        assert sector_index(math.cos(below), math.sin(below)) == k
        assert sector_index(math.cos(above), math.sin(above)) == (k + 1) % 8


@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0))
def test_sector_antipodal_exact(dx, dy):
    if math.hypot(dx, dy) < 1e-6:
        return
    assert sector_index(-dx, -dy) == (sector_index(dx, dy) + 4) % 8


def test_direction_of_and_opposite():
    a, b = Point2(0.5, 0.5), Point2(0.9, 0.5)
    assert direction_of(a, b) is Direction8.RIGHT
    assert direction_of(b, a) is Direction8.LEFT
    for d in Direction8:
        assert d.opposite.opposite is d
    with pytest.raises(DegenerateDirection):
        direction_of(a, Point2(0.5, 0.5 + 1e-12))


def test_nearest_object(two_object_scene):
    obj, d = nearest_object(two_object_scene, Point2(0.25, 0.25))
    assert obj.name == "mug"
    assert math.isclose(d, 0.05 * math.sqrt(2))

    obj, _ = nearest_object(two_object_scene, Point2(0.25, 0.25), exclude="mug")
    assert obj.name == "plate"


def test_nearest_object_tie_prefers_earlier_entry():
    scene = Scene(
        "tie",
        (
            SceneObject("fork", Point2(0.4, 0.5)),
            SceneObject("spoon", Point2(0.6, 0.5)),
        ),
    )
    obj, _ = nearest_object(scene, Point2(0.5, 0.5))
    assert obj.name == "fork"


def test_nearest_object_empty_after_exclusion():
    scene = Scene("solo", (SceneObject("mug", Point2(0.5, 0.5)),))
    with pytest.raises(EmptyScene):
        nearest_object(scene, Point2(0.1, 0.1), exclude="mug")


def test_min_pairwise_distance():
    objs = [
        SceneObject("a", Point2(0.1, 0.1)),
        SceneObject("b", Point2(0.1, 0.4)),
        SceneObject("c", Point2(0.9, 0.9)),
    ]
    assert math.isclose(min_pairwise_distance(objs), 0.3)
    assert min_pairwise_distance(objs[:1]) == math.inf
