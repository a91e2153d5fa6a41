"""Placement regions induced by intents, and a raster oracle over them.

An absolute placement denotes its grid cell. A relative placement denotes
the points whose direction from the reference matches and whose distance to
the reference is below d_rel.

Exact membership is computed analytically. Region-intersection questions
(needed to compare an absolute intent against a relative one) use a dense
raster sampled at the centers of a 200x200 lattice over the workspace; that
raster is the documented oracle for cross-type equivalence, and its masks
are cached per cell and per (reference center, direction, d_rel).
"""

from __future__ import annotations

import math
import random
from functools import lru_cache

import numpy as np

from .scene import (
    Col,
    DEGENERATE_EPS,
    Direction8,
    GridCell,
    Point2,
    Row,
    Scene,
    SECTOR_ORDER,
    grid_cell_of,
    sector_index,
)
from .spatial_lang import (
    AbsolutePlacement,
    PlacementSpec,
    RelativePlacement,
    ThresholdConfig,
    DEFAULT_THRESHOLDS,
)

RASTER_RESOLUTION = 200

_SECTOR_CENTER_DEG = {d: 45.0 * i for i, d in enumerate(SECTOR_ORDER)}


class EmptyRegion(ValueError):
    """A placement region contains no usable point."""


def _resolve_reference(spec: RelativePlacement, scene: Scene) -> Point2:
    return scene.object_named(spec.reference).center


def point_in_region(
    p: Point2,
    spec: PlacementSpec,
    scene: Scene,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
) -> bool:
    if isinstance(spec, AbsolutePlacement):
        return grid_cell_of(p) == spec.cell
    ref = _resolve_reference(spec, scene)
    d = p.distance_to(ref)
    if d >= thresholds.d_rel or d < DEGENERATE_EPS:
        return False
    return SECTOR_ORDER[sector_index(p.x - ref.x, p.y - ref.y)] is spec.direction


@lru_cache(maxsize=1)
def _lattice() -> tuple[np.ndarray, np.ndarray]:
    coords = (np.arange(RASTER_RESOLUTION) + 0.5) / RASTER_RESOLUTION
    return np.meshgrid(coords, coords, indexing="xy")


@lru_cache(maxsize=64)
def _absolute_mask(cell: GridCell) -> np.ndarray:
    xs, ys = _lattice()
    col_idx = np.where(xs <= 1 / 3, 0, np.where(xs <= 2 / 3, 1, 2))
    row_idx = np.where(ys <= 1 / 3, 0, np.where(ys <= 2 / 3, 1, 2))
    ci = list(Col).index(cell.col)
    ri = list(Row).index(cell.row)
    mask = (col_idx == ci) & (row_idx == ri)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=4096)
def _relative_mask(cx: float, cy: float, direction: Direction8, d_rel: float) -> np.ndarray:
    xs, ys = _lattice()
    dx = xs - cx
    dy = ys - cy
    dist2 = dx * dx + dy * dy
    theta = np.degrees(np.arctan2(dy, dx))
    idx = np.ceil((theta - 22.5) / 45.0).astype(np.int64) % 8
    target = SECTOR_ORDER.index(direction)
    mask = (dist2 < d_rel * d_rel) & (dist2 > DEGENERATE_EPS * DEGENERATE_EPS) & (idx == target)
    mask.flags.writeable = False
    return mask


def region_mask(
    spec: PlacementSpec,
    scene: Scene,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
) -> np.ndarray:
    if isinstance(spec, AbsolutePlacement):
        return _absolute_mask(spec.cell)
    ref = _resolve_reference(spec, scene)
    return _relative_mask(ref.x, ref.y, spec.direction, thresholds.d_rel)


def regions_intersect(
    a: PlacementSpec,
    b: PlacementSpec,
    scene: Scene,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
) -> bool:
    """True when the two regions share at least one raster point."""
    return bool(np.any(region_mask(a, scene, thresholds) & region_mask(b, scene, thresholds)))


def _bisector_fallback(
    spec: RelativePlacement, scene: Scene, thresholds: ThresholdConfig
) -> Point2:
    ref = _resolve_reference(spec, scene)
    angle = math.radians(_SECTOR_CENTER_DEG[spec.direction])
    ux, uy = math.cos(angle), math.sin(angle)
    r = thresholds.d_rel / 2.0
    while r > 1e-6:
        x, y = ref.x + ux * r, ref.y + uy * r
        if 0.0 <= x <= 1.0 and 0.0 <= y <= 1.0:
            p = Point2(x, y)
            if point_in_region(p, spec, scene, thresholds):
                return p
        r /= 2.0
    raise EmptyRegion(f"no usable point for {spec} in scene {scene.scene_id!r}")


def region_centroid(
    spec: PlacementSpec,
    scene: Scene,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
) -> Point2:
    """A deterministic interior point: the cell center, or the raster mean.

    Both region kinds are convex (a cell; a 45-degree disc sector clipped
    to the workspace), so the mean of member raster points lies inside.
    """
    if isinstance(spec, AbsolutePlacement):
        return spec.cell.center
    mask = region_mask(spec, scene, thresholds)
    if not mask.any():
        return _bisector_fallback(spec, scene, thresholds)
    xs, ys = _lattice()
    p = Point2(float(xs[mask].mean()), float(ys[mask].mean()))
    if point_in_region(p, spec, scene, thresholds):
        return p
    return _bisector_fallback(spec, scene, thresholds)


def sample_in_region(
    spec: PlacementSpec,
    scene: Scene,
    rng: random.Random,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
    max_attempts: int = 10_000,
) -> Point2:
    """Uniform draw from the region by rejection inside its bounding box."""
    if isinstance(spec, AbsolutePlacement):
        x_lo, x_hi, y_lo, y_hi = spec.cell.bounds
    else:
        ref = _resolve_reference(spec, scene)
        x_lo = max(0.0, ref.x - thresholds.d_rel)
        x_hi = min(1.0, ref.x + thresholds.d_rel)
        y_lo = max(0.0, ref.y - thresholds.d_rel)
        y_hi = min(1.0, ref.y + thresholds.d_rel)
    for _ in range(max_attempts):
        p = Point2(rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi))
        if point_in_region(p, spec, scene, thresholds):
            return p
    return region_centroid(spec, scene, thresholds)


def clear_region_caches() -> None:
    _absolute_mask.cache_clear()
    _relative_mask.cache_clear()
