"""A perfect-knowledge backend with corruptible behavior.

The oracle answers the three tasks from ground truth and then degrades its
answers through a noise profile, emulating a model of tunable quality:

- p_wrong_object: probability of grasping a uniformly chosen wrong object;
- place_sigma: Gaussian blur on the place point, scaled by temperature;
- p_wrong_relation: probability a description swaps its cell/direction;
- l2c_logit_scale: sharpness of consistency logits, z1 - z0 = +/- scale;
- l2c_noise_sigma: optional Gaussian noise on that logit difference.

Temperature 0 answers are pure functions of the inputs: corruption coins
come from an input-keyed stream, so a given (scene, instruction) is
reliably answered well or reliably answered badly, the way a weak model is
consistently wrong on specific items. Temperature > 0 draws everything
from the caller's seed, and the place point is sampled uniformly from the
placement region instead of taking its centroid.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, replace

from ..lang_parser import ParseError, intents_equivalent, parse
from ..regions import EmptyRegion, region_centroid, sample_in_region
from ..scene import Action, Point2, Scene
from ..seeding import input_keyed_rng, rng_for
from ..spatial_lang import (
    DescriptionType,
    TemplateBank,
    ThresholdConfig,
    DEFAULT_PICK_RADIUS,
    DEFAULT_THRESHOLDS,
    bind_pick_target,
    build_intent,
    eligible_description_types,
    get_default_bank,
    render_indexed,
    render_with,
    swap_relation,
)
from .base import A2LResponse, L2AResponse, L2CResponse


@dataclass(frozen=True)
class OracleNoise:
    p_wrong_object: float = 0.0
    place_sigma: float = 0.0
    p_wrong_relation: float = 0.0
    l2c_logit_scale: float = 4.0
    l2c_noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        for prob in (self.p_wrong_object, self.p_wrong_relation):
            if not (0.0 <= prob <= 1.0):
                raise ValueError(f"probability out of range: {prob}")
        if self.place_sigma < 0 or self.l2c_noise_sigma < 0:
            raise ValueError("sigmas are non-negative")
        if self.l2c_logit_scale <= 0:
            raise ValueError("l2c_logit_scale must be positive")

    def scaled(self, factor: float, floor: float = 0.0) -> OracleNoise:
        """Error rates multiplied by ``factor`` (sharpness untouched)."""
        return replace(
            self,
            p_wrong_object=max(floor, self.p_wrong_object * factor),
            place_sigma=max(floor, self.place_sigma * factor),
            p_wrong_relation=max(floor, self.p_wrong_relation * factor),
            l2c_noise_sigma=max(floor, self.l2c_noise_sigma * factor),
        )


NOISELESS = OracleNoise()

_WORKSPACE_CENTER = Point2(0.5, 0.5)


def _scene_key(scene: Scene) -> str:
    objs = ";".join(f"{o.name}@{o.center.x!r},{o.center.y!r}" for o in scene.objects)
    return f"{scene.scene_id}|{objs}"


def _action_key(action: Action) -> str:
    return f"{action.pick.x!r},{action.pick.y!r}->{action.place.x!r},{action.place.y!r}"


def _clamp01(v: float) -> float:
    return min(1.0, max(0.0, v))


class OracleBackend:
    """Ground-truth backend; deterministic given (inputs, temperature, seed)."""

    def __init__(
        self,
        noise: OracleNoise = NOISELESS,
        thresholds: ThresholdConfig = DEFAULT_THRESHOLDS,
        bank: TemplateBank | None = None,
        pick_radius: float = DEFAULT_PICK_RADIUS,
    ):
        self.noise = noise
        self.thresholds = thresholds
        self.bank = bank if bank is not None else get_default_bank()
        self.pick_radius = pick_radius

    @property
    def model_id(self) -> str:
        n = self.noise
        if n == NOISELESS:
            return "oracle"
        return (
            f"oracle[po={n.p_wrong_object:g},ps={n.place_sigma:g},"
            f"pr={n.p_wrong_relation:g},scale={n.l2c_logit_scale:g},ls={n.l2c_noise_sigma:g}]"
        )

    def retrained(self, noise: OracleNoise) -> OracleBackend:
        return OracleBackend(noise, self.thresholds, self.bank, self.pick_radius)

    # -- L2A ---------------------------------------------------------------

    def l2a(
        self, scene: Scene, instruction: str, temperature: float = 0.0, seed: int = 0
    ) -> L2AResponse:
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        grounding = scene.objects
        try:
            intent = parse(instruction, scene.names(), self.bank)
        except ParseError:
            action = Action(_WORKSPACE_CENTER, _WORKSPACE_CENTER)
            return L2AResponse(grounding, action, warnings=("unparseable-instruction",))

        if temperature == 0:
            rng = input_keyed_rng("l2a", _scene_key(scene), instruction)
        else:
            rng = rng_for(seed)

        target = scene.object_named(intent.pick_target)
        pick_obj = target
        if self.noise.p_wrong_object > 0 and len(scene.objects) > 1:
            if rng.random() < self.noise.p_wrong_object:
                others = [o for o in scene.objects if o.name != target.name]
                pick_obj = rng.choice(others)

        try:
            if temperature == 0:
                place = region_centroid(intent.placement, scene, self.thresholds)
            else:
                place = sample_in_region(intent.placement, scene, rng, self.thresholds)
        except EmptyRegion:
            action = Action(_WORKSPACE_CENTER, _WORKSPACE_CENTER)
            return L2AResponse(grounding, action, warnings=("empty-region",))

        sigma = self.noise.place_sigma * temperature
        if sigma > 0:
            place = Point2(
                _clamp01(rng.gauss(place.x, sigma)), _clamp01(rng.gauss(place.y, sigma))
            )
        return L2AResponse(grounding, Action(pick=pick_obj.center, place=place))

    # -- A2L ---------------------------------------------------------------

    def a2l(
        self, scene: Scene, action: Action, temperature: float = 0.0, seed: int = 0
    ) -> A2LResponse:
        if temperature < 0:
            raise ValueError("temperature must be >= 0")
        grounding = scene.objects
        target = bind_pick_target(scene, action, self.pick_radius)
        eligible = eligible_description_types(
            scene, action, self.thresholds, self.pick_radius
        )

        if temperature == 0:
            # Greedy form: prefer the more specific relative description,
            # canonical templates; coins keyed by the inputs.
            rng = input_keyed_rng("a2l", _scene_key(scene), _action_key(action))
            choice = (
                DescriptionType.RELATIVE
                if DescriptionType.RELATIVE in eligible
                else DescriptionType.ABSOLUTE
            )
            intent = build_intent(scene, action, choice, target.name)
            if self.noise.p_wrong_relation > 0 and rng.random() < self.noise.p_wrong_relation:
                intent = swap_relation(intent, rng)
            return A2LResponse(grounding, render_indexed(intent, self.bank))

        rng = rng_for(seed)
        choice = rng.choice(sorted(eligible, key=lambda t: t.value))
        intent = build_intent(scene, action, choice, target.name)
        if self.noise.p_wrong_relation > 0 and rng.random() < self.noise.p_wrong_relation:
            intent = swap_relation(intent, rng)
        return A2LResponse(grounding, render_with(intent, self.bank, rng))

    # -- L2C ---------------------------------------------------------------

    def l2c(self, scene: Scene, instruction: str, candidate: str) -> L2CResponse:
        grounding = scene.objects
        consistent = self._ground_truth_consistent(scene, instruction, candidate)
        delta = self.noise.l2c_logit_scale * (1.0 if consistent else -1.0)
        if self.noise.l2c_noise_sigma > 0:
            rng = input_keyed_rng("l2c", _scene_key(scene), instruction, candidate)
            delta += rng.gauss(0.0, self.noise.l2c_noise_sigma)
        return L2CResponse(grounding, z0=-delta / 2.0, z1=delta / 2.0)

    def _ground_truth_consistent(
        self, scene: Scene, instruction: str, candidate: str
    ) -> bool:
        try:
            a = parse(instruction, scene.names(), self.bank)
            b = parse(candidate, scene.names(), self.bank)
        except ParseError:
            return False
        return intents_equivalent(a, b, scene, self.thresholds)
