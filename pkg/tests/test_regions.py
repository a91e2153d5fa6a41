import math

import pytest

from lacy.regions import (
    EmptyRegion,
    clear_region_caches,
    point_in_region,
    region_centroid,
    region_mask,
    regions_intersect,
    sample_in_region,
)
from lacy.scene import ALL_CELLS, Direction8, GridCell, Point2, Scene, SceneObject, grid_cell_of
from lacy.seeding import rng_for
from lacy.spatial_lang import AbsolutePlacement, RelativePlacement, ThresholdConfig


def _scene(ref=(0.5, 0.5)):
    return Scene("r", (SceneObject("mug", Point2(*ref)),))


def test_absolute_membership_matches_grid():
    scene = _scene()
    for cell in ALL_CELLS:
        placement = AbsolutePlacement(cell)
        for x in (0.1, 0.5, 0.9):
            for y in (0.1, 0.5, 0.9):
                p = Point2(x, y)
                assert point_in_region(p, placement, scene) == (grid_cell_of(p) == cell)


def test_relative_membership_band_and_sector():
    scene = _scene()
    placement = RelativePlacement(Direction8.RIGHT, "mug")
    assert point_in_region(Point2(0.7, 0.5), placement, scene)
    # Wrong direction.
    assert not point_in_region(Point2(0.3, 0.5), placement, scene)
    # Outside the proximity band.
    assert not point_in_region(Point2(0.9, 0.5), placement, scene)
    # Degenerate: exactly on the reference.
    assert not point_in_region(Point2(0.5, 0.5), placement, scene)


def test_relative_membership_unknown_reference():
    scene = _scene()
    with pytest.raises(KeyError):
        point_in_region(Point2(0.7, 0.5), RelativePlacement(Direction8.RIGHT, "ghost"), scene)


def test_absolute_centroid_is_cell_center():
    scene = _scene()
    for cell in ALL_CELLS:
        c = region_centroid(AbsolutePlacement(cell), scene)
        assert c == cell.center


def test_relative_centroid_lies_in_region():
    scene = _scene()
    for direction in Direction8:
        placement = RelativePlacement(direction, "mug")
        c = region_centroid(placement, scene)
        assert point_in_region(c, placement, scene)


def test_relative_centroid_direction_agrees():
    scene = _scene()
    c = region_centroid(RelativePlacement(Direction8.BOTTOM, "mug"), scene)
    assert c.y > 0.5
    assert abs(c.x - 0.5) < 0.05


def test_empty_region_raises():
    # Reference on the left edge: nothing lies strictly to its left inside
    # the workspace, and the raster finds no pixels.
    scene = _scene(ref=(0.0, 0.5))
    with pytest.raises(EmptyRegion):
        region_centroid(RelativePlacement(Direction8.LEFT, "mug"), scene)


def test_near_empty_region_falls_back_to_bisector():
    # A sliver region too thin for the raster still yields a usable centroid.
    scene = _scene(ref=(0.001, 0.5))
    placement = RelativePlacement(Direction8.LEFT, "mug")
    c = region_centroid(placement, scene)
    assert point_in_region(c, placement, scene)


def test_sample_in_region_stays_inside():
    scene = _scene()
    for direction in (Direction8.RIGHT, Direction8.TOP_LEFT):
        placement = RelativePlacement(direction, "mug")
        rng = rng_for(7)
        for _ in range(200):
            p = sample_in_region(placement, scene, rng)
            assert point_in_region(p, placement, scene)


def test_sample_in_region_deterministic_per_seed():
    scene = _scene()
    placement = AbsolutePlacement(GridCell.from_label("top left"))
    a = [sample_in_region(placement, scene, rng_for(3)) for _ in range(5)]
    b = [sample_in_region(placement, scene, rng_for(3)) for _ in range(5)]
    assert a == b


def test_regions_intersect_neighbouring_band():
    scene = Scene(
        "x",
        (SceneObject("mug", Point2(0.2, 0.2)), SceneObject("plate", Point2(0.8, 0.8))),
    )
    near_mug = RelativePlacement(Direction8.RIGHT, "mug")
    top_left = AbsolutePlacement(GridCell.from_label("top left"))
    bottom_right = AbsolutePlacement(GridCell.from_label("bottom right"))
    assert regions_intersect(near_mug, top_left, scene)
    assert not regions_intersect(near_mug, bottom_right, scene)
    assert regions_intersect(top_left, top_left, scene)


def test_mask_shape_and_readonly():
    scene = _scene()
    mask = region_mask(RelativePlacement(Direction8.RIGHT, "mug"), scene)
    assert mask.shape == (200, 200)
    assert mask.dtype == bool
    assert not mask.flags.writeable


def test_mask_is_cached_by_identity():
    clear_region_caches()
    scene = _scene()
    placement = RelativePlacement(Direction8.TOP, "mug")
    assert region_mask(placement, scene) is region_mask(placement, scene)


def test_custom_thresholds_change_band_width():
    scene = _scene()
    placement = RelativePlacement(Direction8.RIGHT, "mug")
    wide = ThresholdConfig(d_abs=0.15, d_rel=0.45)
    p = Point2(0.88, 0.5)
    assert not point_in_region(p, placement, scene)
    assert point_in_region(p, placement, scene, thresholds=wide)
