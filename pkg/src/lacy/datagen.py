"""Scene and demonstration generators, object catalogs, JSONL persistence.

Every generated coordinate is rounded to six decimals before entering a
scene or an action, so in-memory values equal their serialized form and
save -> load -> save is byte-idempotent.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import IO, Iterable, Sequence

from .scene import (
    Action,
    DEFAULT_MIN_SEPARATION,
    DegenerateDirection,
    Direction8,
    GridCell,
    Point2,
    Scene,
    SceneObject,
    min_pairwise_distance,
)
from .seeding import rng_for
from .spatial_lang import (
    AbsolutePlacement,
    Intent,
    NoReference,
    RelativePlacement,
    RESERVED_WORDS,
    TemplateBank,
    ThresholdConfig,
    DEFAULT_THRESHOLDS,
    describe,
)

PLACE_MARGIN = 0.05
MAX_SCENE_ATTEMPTS = 10_000
COORD_DECIMALS = 6


class PlacementInfeasible(RuntimeError):
    """Rejection sampling could not fit the requested objects."""


class SchemaViolation(ValueError):
    """A persisted dataset line does not match the expected schema."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class Provenance(Enum):
    HUMAN = "human"
    CYCLE = "cycle"


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    tags: frozenset[str]


@dataclass(frozen=True)
class Catalog:
    entries: tuple[CatalogEntry, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for entry in self.entries:
            name = entry.name
            if not name or name != name.strip() or name != name.lower():
                raise ValueError(f"bad catalog name: {name!r}")
            words = name.split()
            if not all(w.isalnum() for w in words):
                raise ValueError(f"catalog names are words of [a-z0-9]: {name!r}")
            clash = RESERVED_WORDS.intersection(words)
            if clash:
                raise ValueError(f"{name!r} uses grammar words: {sorted(clash)}")
            if name in seen:
                raise ValueError(f"duplicate catalog name: {name!r}")
            seen.add(name)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(e.name for e in self.entries)

    def subset(self, tag: str) -> Catalog:
        return Catalog(tuple(e for e in self.entries if tag in e.tags))

    def __len__(self) -> int:
        return len(self.entries)


_SIM_NAMES = (
    "cracker box", "sugar box", "tomato soup can", "mustard bottle",
    "tuna fish can", "pudding box", "gelatin box", "potted meat can",
    "banana", "strawberry", "apple", "lemon",
    "peach", "pear", "orange", "plum",
    "pitcher base", "bleach cleanser", "bowl", "mug",
    "sponge", "skillet", "plate", "fork",
    "spoon", "knife", "spatula", "power drill",
    "wood block", "scissors", "padlock", "large marker",
)

_REAL_NAMES = (
    "yellow block", "green block", "red block", "blue cylinder",
    "cable", "mug", "sponge", "mustard bottle",
    "tennis ball", "screwdriver", "tape measure", "eraser",
)


def default_catalog() -> Catalog:
    """32 simulation names plus a 12-name real-world subset (3 shared)."""
    tags: dict[str, set[str]] = {}
    for name in _SIM_NAMES:
        tags.setdefault(name, set()).add("sim")
    for name in _REAL_NAMES:
        tags.setdefault(name, set()).add("real")
    return Catalog(
        tuple(CatalogEntry(name, frozenset(ts)) for name, ts in tags.items())
    )


def load_catalog(path: str) -> Catalog:
    """One name per line; blank lines and # comments ignored. Tagged 'custom'."""
    entries = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if line and not line.startswith("#"):
                entries.append(CatalogEntry(line, frozenset({"custom"})))
    return Catalog(tuple(entries))


@dataclass(frozen=True)
class Demonstration:
    id: str
    provenance: Provenance
    scene: Scene
    instruction: str
    action: Action
    intent: Intent


Dataset = list[Demonstration]


def _round_coord(v: float) -> float:
    return round(v, COORD_DECIMALS)


def gen_scene(
    catalog: Catalog,
    n_objects: int,
    seed: int,
    min_separation: float = DEFAULT_MIN_SEPARATION,
    margin: float = PLACE_MARGIN,
) -> Scene:
    """Rejection-sample well-separated object placements inside the margin."""
    if not (1 <= n_objects <= len(catalog)):
        raise ValueError(f"cannot place {n_objects} objects from {len(catalog)} names")
    rng = rng_for(seed)
    names = rng.sample(list(catalog.names), n_objects)
    centers: list[Point2] = []
    attempts = 0
    while len(centers) < n_objects:
        if attempts >= MAX_SCENE_ATTEMPTS:
            raise PlacementInfeasible(
                f"{n_objects} objects at separation {min_separation} "
                f"did not fit after {attempts} attempts"
            )
        attempts += 1
        p = Point2(
            _round_coord(rng.uniform(margin, 1.0 - margin)),
            _round_coord(rng.uniform(margin, 1.0 - margin)),
        )
        if all(p.distance_to(c) >= min_separation for c in centers):
            centers.append(p)
    objects = tuple(SceneObject(n, c) for n, c in zip(names, centers))
    return Scene(scene_id=f"scene-{seed:016x}", objects=objects)


def gen_demo(
    scene: Scene,
    seed: int,
    demo_id: str,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
    bank: TemplateBank | None = None,
    max_attempts: int = 100,
) -> Demonstration:
    """A demonstration that succeeds by construction.

    The pick lands exactly on its object's center; the place point is
    uniform over the workspace interior and redrawn when describing it
    fails (no reference in range, degenerate direction).
    """
    rng = rng_for(seed)
    target = rng.choice(scene.objects)
    last_error: Exception | None = None
    for _ in range(max_attempts):
        place = Point2(
            _round_coord(rng.uniform(PLACE_MARGIN, 1.0 - PLACE_MARGIN)),
            _round_coord(rng.uniform(PLACE_MARGIN, 1.0 - PLACE_MARGIN)),
        )
        action = Action(pick=target.center, place=place)
        try:
            text, intent = describe(
                scene, action, thresholds, seed=rng.getrandbits(63), bank=bank
            )
        except (NoReference, DegenerateDirection) as exc:
            last_error = exc
            continue
        return Demonstration(
            id=demo_id,
            provenance=Provenance.HUMAN,
            scene=scene,
            instruction=text,
            action=action,
            intent=intent,
        )
    raise PlacementInfeasible(f"no describable place point found: {last_error}")


def gen_dataset(
    catalog: Catalog,
    count: int,
    seed: int,
    objects_min: int = 3,
    objects_max: int = 6,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
    bank: TemplateBank | None = None,
    min_separation: float = DEFAULT_MIN_SEPARATION,
) -> Dataset:
    if not (1 <= objects_min <= objects_max):
        raise ValueError(f"bad object count range [{objects_min}, {objects_max}]")
    demos: Dataset = []
    for i in range(count):
        rng = rng_for(seed, i)
        n_objects = rng.randint(objects_min, objects_max)
        scene = gen_scene(catalog, n_objects, rng.getrandbits(63), min_separation)
        demos.append(
            gen_demo(scene, rng.getrandbits(63), f"d{i:06d}", thresholds, bank)
        )
    return demos


# --- persistence ---------------------------------------------------------


def _point_dict(p: Point2) -> dict:
    return {"x": _round_coord(p.x), "y": _round_coord(p.y)}


def _placement_dict(intent: Intent) -> dict:
    placement = intent.placement
    if isinstance(placement, AbsolutePlacement):
        return {"type": "absolute", "cell": placement.cell.label}
    return {
        "type": "relative",
        "direction": placement.direction.value,
        "reference": placement.reference,
    }


def demo_to_dict(demo: Demonstration) -> dict:
    return {
        "id": demo.id,
        "provenance": demo.provenance.value,
        "scene": {
            "scene_id": demo.scene.scene_id,
            "objects": [
                {"name": o.name, "x": _round_coord(o.center.x), "y": _round_coord(o.center.y)}
                for o in demo.scene.objects
            ],
        },
        "instruction": demo.instruction,
        "action": {"pick": _point_dict(demo.action.pick), "place": _point_dict(demo.action.place)},
        "intent": {
            "pick_target": demo.intent.pick_target,
            "placement": _placement_dict(demo.intent),
        },
    }


def _require(entry: dict, key: str, kind: type, line_no: int):
    if key not in entry:
        raise SchemaViolation(line_no, f"missing field {key!r}")
    value = entry[key]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise SchemaViolation(line_no, f"field {key!r} is not a number")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaViolation(line_no, f"field {key!r} is not {kind.__name__}")
    return value


def _point_from(entry: dict, key: str, line_no: int) -> Point2:
    obj = _require(entry, key, dict, line_no)
    try:
        return Point2(_require(obj, "x", float, line_no), _require(obj, "y", float, line_no))
    except ValueError as exc:
        if isinstance(exc, SchemaViolation):
            raise
        raise SchemaViolation(line_no, str(exc)) from exc


def demo_from_dict(entry: dict, line_no: int = 0) -> Demonstration:
    try:
        provenance = Provenance(_require(entry, "provenance", str, line_no))
    except ValueError as exc:
        if isinstance(exc, SchemaViolation):
            raise
        raise SchemaViolation(line_no, f"bad provenance: {entry.get('provenance')!r}") from exc
    scene_entry = _require(entry, "scene", dict, line_no)
    objects_entry = _require(scene_entry, "objects", list, line_no)
    objects = []
    try:
        for o in objects_entry:
            if not isinstance(o, dict):
                raise SchemaViolation(line_no, "scene object is not a JSON object")
            objects.append(
                SceneObject(
                    _require(o, "name", str, line_no),
                    Point2(_require(o, "x", float, line_no), _require(o, "y", float, line_no)),
                )
            )
        scene = Scene(_require(scene_entry, "scene_id", str, line_no), tuple(objects))
    except ValueError as exc:
        if isinstance(exc, SchemaViolation):
            raise
        raise SchemaViolation(line_no, str(exc)) from exc
    action_entry = _require(entry, "action", dict, line_no)
    action = Action(
        pick=_point_from(action_entry, "pick", line_no),
        place=_point_from(action_entry, "place", line_no),
    )
    intent_entry = _require(entry, "intent", dict, line_no)
    placement_entry = _require(intent_entry, "placement", dict, line_no)
    ptype = _require(placement_entry, "type", str, line_no)
    try:
        if ptype == "absolute":
            placement: AbsolutePlacement | RelativePlacement = AbsolutePlacement(
                GridCell.from_label(_require(placement_entry, "cell", str, line_no))
            )
        elif ptype == "relative":
            placement = RelativePlacement(
                Direction8(_require(placement_entry, "direction", str, line_no)),
                _require(placement_entry, "reference", str, line_no),
            )
        else:
            raise SchemaViolation(line_no, f"bad placement type: {ptype!r}")
    except ValueError as exc:
        if isinstance(exc, SchemaViolation):
            raise
        raise SchemaViolation(line_no, str(exc)) from exc
    intent = Intent(_require(intent_entry, "pick_target", str, line_no), placement)
    if intent.pick_target not in scene.names():
        raise SchemaViolation(line_no, f"pick target {intent.pick_target!r} not in scene")
    if isinstance(placement, RelativePlacement) and placement.reference not in scene.names():
        raise SchemaViolation(line_no, f"reference {placement.reference!r} not in scene")
    return Demonstration(
        id=_require(entry, "id", str, line_no),
        provenance=provenance,
        scene=scene,
        instruction=_require(entry, "instruction", str, line_no),
        action=action,
        intent=intent,
    )


def dump_demos(demos: Iterable[Demonstration], fh: IO[str]) -> None:
    for demo in demos:
        fh.write(json.dumps(demo_to_dict(demo), separators=(",", ":")) + "\n")


def save_dataset(demos: Iterable[Demonstration], path: str) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        dump_demos(demos, fh)


def append_dataset(demos: Iterable[Demonstration], path: str) -> None:
    with open(path, "a", encoding="utf-8") as fh:
        dump_demos(demos, fh)


def load_dataset(path: str) -> Dataset:
    demos: Dataset = []
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolation(line_no, f"not valid JSON: {exc.msg}") from exc
            if not isinstance(entry, dict):
                raise SchemaViolation(line_no, "line is not a JSON object")
            demos.append(demo_from_dict(entry, line_no))
    return demos
