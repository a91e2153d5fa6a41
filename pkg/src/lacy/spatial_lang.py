"""Spatial placement descriptions: intents, templates, and the describe step.

A placement is described either absolutely (a grid cell of the workspace)
or relative to a nearby reference object. Which kinds are available for a
given action depends on the distance d from the place point to the nearest
object that is not being picked:

- relative descriptions need a reference close enough to anchor the
  listener's attention, so they require d < d_rel;
- absolute descriptions are misleading when the place point practically
  touches another object, so they require d >= d_abs.

With the defaults (d_abs = 0.15 < d_rel = 0.3) the two bands overlap and
both kinds are eligible in between; a describer picks one uniformly at
random there. The rule never yields an empty set: with no reference object
at all, or with d >= d_rel, absolute descriptions remain available.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .scene import (
    Action,
    DegenerateDirection,
    Direction8,
    EmptyScene,
    GridCell,
    Scene,
    SceneObject,
    direction_of,
    grid_cell_of,
    nearest_object,
)

DEFAULT_PICK_RADIUS = 0.05

_SQRT2 = 2.0**0.5


class NoPickTarget(ValueError):
    """The pick point does not land within the pick radius of any object."""


class NoReference(ValueError):
    """A relative description was required but no reference object exists."""


class DescriptionType(Enum):
    ABSOLUTE = "absolute"
    RELATIVE = "relative"


@dataclass(frozen=True)
class AbsolutePlacement:
    cell: GridCell


@dataclass(frozen=True)
class RelativePlacement:
    direction: Direction8
    reference: str


PlacementSpec = AbsolutePlacement | RelativePlacement


@dataclass(frozen=True)
class Intent:
    """What an instruction asks for: the object to pick and where to place it."""

    pick_target: str
    placement: PlacementSpec


@dataclass(frozen=True)
class ThresholdConfig:
    d_abs: float = 0.15
    d_rel: float = 0.3

    def __post_init__(self) -> None:
        if not (0.0 < self.d_abs <= self.d_rel <= _SQRT2):
            raise ValueError(
                f"need 0 < d_abs <= d_rel <= sqrt(2), got {self.d_abs}, {self.d_rel}"
            )


DEFAULT_THRESHOLDS = ThresholdConfig()

_SLOT_RE = re.compile(r"\{(cell|direction|reference)\}")

# Words the grammar claims for itself; object names must avoid them so a
# sentence always splits unambiguously.
RESERVED_WORDS = frozenset(
    {
        "the", "a", "an", "and", "it",
        "in", "at", "on", "to", "of", "side",
        "workspace", "table",
        "left", "right", "top", "bottom", "middle", "center",
        "pick", "up", "grasp", "take", "place", "put", "move",
    }
)


@dataclass(frozen=True)
class TemplateBank:
    pick_verbs: tuple[str, ...]
    place_verbs: tuple[str, ...]
    absolute_frames: tuple[str, ...]
    relative_frames: tuple[str, ...]

    def __post_init__(self) -> None:
        for field_name in ("pick_verbs", "place_verbs", "absolute_frames", "relative_frames"):
            if not getattr(self, field_name):
                raise ValueError(f"template bank has no {field_name}")
        for frame in self.absolute_frames:
            if sorted(_SLOT_RE.findall(frame)) != ["cell"]:
                raise ValueError(f"absolute frame needs exactly a {{cell}} slot: {frame!r}")
        for frame in self.relative_frames:
            if sorted(_SLOT_RE.findall(frame)) != ["direction", "reference"]:
                raise ValueError(
                    f"relative frame needs {{direction}} and {{reference}} slots: {frame!r}"
                )

    @staticmethod
    def from_text(text: str) -> TemplateBank:
        """Parse a plain-text bank: one ``<kind> <template>`` entry per line."""
        buckets: dict[str, list[str]] = {
            "pick_verb": [],
            "place_verb": [],
            "absolute_frame": [],
            "relative_frame": [],
        }
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            kind, _, template = line.partition(" ")
            if kind not in buckets or not template.strip():
                raise ValueError(f"bad template line {lineno}: {raw!r}")
            buckets[kind].append(template.strip())
        return TemplateBank(
            pick_verbs=tuple(buckets["pick_verb"]),
            place_verbs=tuple(buckets["place_verb"]),
            absolute_frames=tuple(buckets["absolute_frame"]),
            relative_frames=tuple(buckets["relative_frame"]),
        )

    @staticmethod
    def from_file(path: str) -> TemplateBank:
        with open(path, "r", encoding="utf-8") as fh:
            return TemplateBank.from_text(fh.read())


def default_bank() -> TemplateBank:
    text = resources.files("lacy.assets").joinpath("templates.txt").read_text("utf-8")
    return TemplateBank.from_text(text)


_DEFAULT_BANK: TemplateBank | None = None


def get_default_bank() -> TemplateBank:
    global _DEFAULT_BANK
    if _DEFAULT_BANK is None:
        _DEFAULT_BANK = default_bank()
    return _DEFAULT_BANK


def bind_pick_target(
    scene: Scene, action: Action, pick_radius: float = DEFAULT_PICK_RADIUS
) -> SceneObject:
    """The object a pick point refers to: nearest, and within the pick radius."""
    obj, dist = nearest_object(scene, action.pick)
    if dist > pick_radius:
        raise NoPickTarget(
            f"pick point ({action.pick.x}, {action.pick.y}) is {dist:.3f} from the "
            f"nearest object, beyond the pick radius {pick_radius}"
        )
    return obj


def reference_distance(
    scene: Scene, action: Action, pick_target: str
) -> tuple[SceneObject | None, float | None]:
    """Nearest non-picked object to the place point, or (None, None)."""
    try:
        ref, d = nearest_object(scene, action.place, exclude=pick_target)
    except EmptyScene:
        return None, None
    return ref, d


def eligible_description_types(
    scene: Scene,
    action: Action,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
    pick_radius: float = DEFAULT_PICK_RADIUS,
) -> frozenset[DescriptionType]:
    """Description types available for this action; never empty."""
    target = bind_pick_target(scene, action, pick_radius)
    _, d = reference_distance(scene, action, target.name)
    types: set[DescriptionType] = set()
    if d is None or d >= thresholds.d_abs:
        types.add(DescriptionType.ABSOLUTE)
    if d is not None and d < thresholds.d_rel:
        types.add(DescriptionType.RELATIVE)
    return frozenset(types)


def render_with(intent: Intent, bank: TemplateBank, rng: random.Random) -> str:
    """Render with bank choices drawn in a stable order: pick verb, place verb, frame."""
    pick_verb = rng.choice(bank.pick_verbs)
    place_verb = rng.choice(bank.place_verbs)
    if isinstance(intent.placement, AbsolutePlacement):
        frame = rng.choice(bank.absolute_frames)
        tail = frame.replace("{cell}", intent.placement.cell.label)
    else:
        frame = rng.choice(bank.relative_frames)
        tail = frame.replace("{direction}", intent.placement.direction.value).replace(
            "{reference}", intent.placement.reference
        )
    return f"{pick_verb} the {intent.pick_target} and {place_verb} it {tail}"


def render_indexed(
    intent: Intent,
    bank: TemplateBank,
    pick_verb_idx: int = 0,
    place_verb_idx: int = 0,
    frame_idx: int = 0,
) -> str:
    """Render with explicit template choices (index 0 is the canonical form)."""
    pick_verb = bank.pick_verbs[pick_verb_idx]
    place_verb = bank.place_verbs[place_verb_idx]
    if isinstance(intent.placement, AbsolutePlacement):
        frame = bank.absolute_frames[frame_idx]
        tail = frame.replace("{cell}", intent.placement.cell.label)
    else:
        frame = bank.relative_frames[frame_idx]
        tail = frame.replace("{direction}", intent.placement.direction.value).replace(
            "{reference}", intent.placement.reference
        )
    return f"{pick_verb} the {intent.pick_target} and {place_verb} it {tail}"


def render(intent: Intent, bank: TemplateBank | None = None, seed: int = 0) -> str:
    """One surface form of an intent; parseable back to the same intent."""
    bank = bank if bank is not None else get_default_bank()
    return render_with(intent, bank, random.Random(seed))


def build_intent(
    scene: Scene,
    action: Action,
    desc_type: DescriptionType,
    pick_target: str,
) -> Intent:
    if desc_type is DescriptionType.ABSOLUTE:
        return Intent(pick_target, AbsolutePlacement(grid_cell_of(action.place)))
    ref, _ = reference_distance(scene, action, pick_target)
    if ref is None:
        raise NoReference(f"scene {scene.scene_id!r} has no object besides {pick_target!r}")
    direction = direction_of(ref.center, action.place)
    return Intent(pick_target, RelativePlacement(direction, ref.name))


def describe(
    scene: Scene,
    action: Action,
    thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
    seed: int = 0,
    *,
    bank: TemplateBank | None = None,
    pick_radius: float = DEFAULT_PICK_RADIUS,
) -> tuple[str, Intent]:
    """Describe an action in words.

    Draws are made in a stable order (type, pick verb, place verb, frame)
    from a single stream seeded by ``seed``, so equal inputs plus equal
    seeds give equal output.
    """
    bank = bank if bank is not None else get_default_bank()
    target = bind_pick_target(scene, action, pick_radius)
    types = eligible_description_types(scene, action, thresholds, pick_radius)
    rng = random.Random(seed)
    choice = rng.choice(sorted(types, key=lambda t: t.value))
    intent = build_intent(scene, action, choice, target.name)
    return render_with(intent, bank, rng), intent


def swap_relation(intent: Intent, rng: random.Random) -> Intent:
    """Replace the cell or direction with a uniformly chosen wrong one."""
    if isinstance(intent.placement, AbsolutePlacement):
        from .scene import ALL_CELLS

        wrong = [c for c in ALL_CELLS if c != intent.placement.cell]
        return Intent(intent.pick_target, AbsolutePlacement(rng.choice(wrong)))
    wrong_dirs = [d for d in Direction8 if d != intent.placement.direction]
    return Intent(
        intent.pick_target,
        RelativePlacement(rng.choice(wrong_dirs), intent.placement.reference),
    )
