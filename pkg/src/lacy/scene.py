"""Workspace geometry: points, objects, actions, grid cells, compass directions.

Coordinate conventions
----------------------
All coordinates are normalized to [0, 1]. (0, 0) is the left/top corner of
the workspace and y grows downward, so "top" always means smaller y.

The workspace splits into a 3x3 grid of equal cells. A point exactly on a
cell boundary belongs to the left/top cell.

Directions between two points use eight 45-degree sectors centered on the
four cardinal and four diagonal axes. An angle exactly on a sector boundary
belongs to the sector on its counterclockwise side (as seen on screen, with
y pointing down).

Objects are abstracted to center points; minimum pairwise separation plus a
pick radius stand in for contours and graspability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

DEFAULT_MIN_SEPARATION = 0.08

ONE_THIRD = 1.0 / 3.0
TWO_THIRDS = 2.0 / 3.0

# Below this center-to-center distance the direction of one point from
# another is considered undefined.
DEGENERATE_EPS = 1e-9


class EmptyScene(ValueError):
    """Raised when no object is left to consider after exclusions."""


class DegenerateDirection(ValueError):
    """Raised when two points are too close for a direction to make sense."""


@dataclass(frozen=True)
class Point2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.x <= 1.0) or not (0.0 <= self.y <= 1.0):
            raise ValueError(f"point ({self.x}, {self.y}) outside the unit workspace")

    def distance_to(self, other: Point2) -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class SceneObject:
    name: str
    center: Point2

    def __post_init__(self) -> None:
        if not self.name or self.name != self.name.strip():
            raise ValueError(f"bad object name: {self.name!r}")
        if self.name != self.name.lower():
            raise ValueError(f"object names are lowercase: {self.name!r}")


@dataclass(frozen=True)
class Scene:
    """An ordered collection of uniquely named objects on the workspace.

    Order matters: nearest-object ties break toward the earlier entry.
    """

    scene_id: str
    objects: tuple[SceneObject, ...]

    def __post_init__(self) -> None:
        if not isinstance(self.objects, tuple):
            object.__setattr__(self, "objects", tuple(self.objects))
        if not self.objects:
            raise ValueError("a scene needs at least one object")
        names = [o.name for o in self.objects]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate object names in scene {self.scene_id!r}")

    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.objects)

    def object_named(self, name: str) -> SceneObject:
        for obj in self.objects:
            if obj.name == name:
                return obj
        raise KeyError(name)


@dataclass(frozen=True)
class Action:
    """A pick point and a place point, both in workspace coordinates."""

    pick: Point2
    place: Point2


class Row(Enum):
    TOP = "top"
    MIDDLE = "middle"
    BOTTOM = "bottom"


class Col(Enum):
    LEFT = "left"
    CENTER = "center"
    RIGHT = "right"


@dataclass(frozen=True)
class GridCell:
    row: Row
    col: Col

    @property
    def label(self) -> str:
        if self.row is Row.MIDDLE and self.col is Col.CENTER:
            return "center"
        return f"{self.row.value} {self.col.value}"

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        """(x_lo, x_hi, y_lo, y_hi) of this cell's third of the workspace."""
        ci = list(Col).index(self.col)
        ri = list(Row).index(self.row)
        return (ci / 3.0, (ci + 1) / 3.0, ri / 3.0, (ri + 1) / 3.0)

    @property
    def center(self) -> Point2:
        ci = list(Col).index(self.col)
        ri = list(Row).index(self.row)
        return Point2((ci + 0.5) / 3.0, (ri + 0.5) / 3.0)

    @staticmethod
    def from_label(label: str) -> GridCell:
        try:
            return _CELLS_BY_LABEL[label]
        except KeyError:
            raise ValueError(f"unknown grid cell label: {label!r}") from None


ALL_CELLS: tuple[GridCell, ...] = tuple(
    GridCell(row, col) for row in Row for col in Col
)

_CELLS_BY_LABEL: dict[str, GridCell] = {c.label: c for c in ALL_CELLS}
# Tolerated synonym for the canonical "center".
_CELLS_BY_LABEL["middle center"] = GridCell(Row.MIDDLE, Col.CENTER)

CELL_LABELS: tuple[str, ...] = tuple(c.label for c in ALL_CELLS)


class Direction8(Enum):
    LEFT = "left"
    RIGHT = "right"
    TOP = "top"
    BOTTOM = "bottom"
    TOP_LEFT = "top left"
    TOP_RIGHT = "top right"
    BOTTOM_LEFT = "bottom left"
    BOTTOM_RIGHT = "bottom right"

    @property
    def opposite(self) -> Direction8:
        idx = SECTOR_ORDER.index(self)
        return SECTOR_ORDER[(idx + 4) % 8]


# Sector i is centered at i * 45 degrees of atan2(dy, dx) with y down:
# 0 degrees points right, 90 degrees points down (bottom).
SECTOR_ORDER: tuple[Direction8, ...] = (
    Direction8.RIGHT,
    Direction8.BOTTOM_RIGHT,
    Direction8.BOTTOM,
    Direction8.BOTTOM_LEFT,
    Direction8.LEFT,
    Direction8.TOP_LEFT,
    Direction8.TOP,
    Direction8.TOP_RIGHT,
)

DIRECTION_LABELS: tuple[str, ...] = tuple(d.value for d in Direction8)


def grid_cell_of(p: Point2) -> GridCell:
    """Map a point to its 3x3 grid cell; boundary points go left/top."""
    col = Col.LEFT if p.x <= ONE_THIRD else (Col.CENTER if p.x <= TWO_THIRDS else Col.RIGHT)
    row = Row.TOP if p.y <= ONE_THIRD else (Row.MIDDLE if p.y <= TWO_THIRDS else Row.BOTTOM)
    return GridCell(row, col)


def sector_index(dx: float, dy: float) -> int:
    """45-degree sector index of the vector (dx, dy), y pointing down.

    A boundary angle joins the lower-angle (counterclockwise) sector.
    """
    theta = math.degrees(math.atan2(dy, dx))
    return math.ceil((theta - 22.5) / 45.0) % 8


def direction_of(reference: Point2, target: Point2) -> Direction8:
    """Compass direction of ``target`` as seen from ``reference``."""
    dx = target.x - reference.x
    dy = target.y - reference.y
    if math.hypot(dx, dy) < DEGENERATE_EPS:
        raise DegenerateDirection(
            f"points ({reference.x}, {reference.y}) and ({target.x}, {target.y}) coincide"
        )
    return SECTOR_ORDER[sector_index(dx, dy)]


def nearest_object(
    scene: Scene, p: Point2, exclude: str | None = None
) -> tuple[SceneObject, float]:
    """Closest object to ``p`` by center distance, ties to the earlier entry."""
    best: SceneObject | None = None
    best_d = math.inf
    for obj in scene.objects:
        if exclude is not None and obj.name == exclude:
            continue
        d = obj.center.distance_to(p)
        if d < best_d:
            best, best_d = obj, d
    if best is None:
        raise EmptyScene(f"no candidate object in scene {scene.scene_id!r}")
    return best, best_d


def min_pairwise_distance(objects: Sequence[SceneObject]) -> float:
    """Smallest center-to-center distance; inf for fewer than two objects."""
    best = math.inf
    for i, a in enumerate(objects):
        for b in objects[i + 1 :]:
            best = min(best, a.center.distance_to(b.center))
    return best
