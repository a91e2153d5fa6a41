"""Backend interface: grounding-first responses over the three tasks.

Every response leads with a grounding set, the (name, center) pairs the
model committed to before answering. Consistency judgments return raw
logits for the "0"/"1" verdict tokens; the confidence is always computed
client-side as sigmoid(z1 - z0), which equals the two-class softmax
probability of "1".
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Protocol, runtime_checkable

from ..scene import Action, Scene, SceneObject
from ..seeding import derive_seed


class BackendUnavailable(RuntimeError):
    """The backend cannot be reached or cannot answer."""


GroundingSet = tuple[SceneObject, ...]


@dataclass(frozen=True)
class L2AResponse:
    grounding: GroundingSet
    action: Action
    # Local diagnostics; not part of the wire format.
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class A2LResponse:
    grounding: GroundingSet
    text: str

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("empty description")


@dataclass(frozen=True)
class L2CResponse:
    grounding: GroundingSet
    z0: float
    z1: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.z0) and math.isfinite(self.z1)):
            raise ValueError(f"non-finite logits: ({self.z0}, {self.z1})")


@runtime_checkable
class Backend(Protocol):
    @property
    def model_id(self) -> str: ...

    def l2a(
        self, scene: Scene, instruction: str, temperature: float = 0.0, seed: int = 0
    ) -> L2AResponse: ...

    def a2l(
        self, scene: Scene, action: Action, temperature: float = 0.0, seed: int = 0
    ) -> A2LResponse: ...

    def l2c(self, scene: Scene, instruction: str, candidate: str) -> L2CResponse: ...


def confidence_from_logits(z0: float, z1: float) -> float:
    """sigmoid(z1 - z0), computed on the side that cannot overflow."""
    d = z1 - z0
    if d >= 0:
        return 1.0 / (1.0 + math.exp(-d))
    e = math.exp(d)
    return e / (1.0 + e)


def l2c_confidence(
    backend: Backend, scene: Scene, instruction: str, candidate: str
) -> tuple[L2CResponse, float]:
    response = backend.l2c(scene, instruction, candidate)
    return response, confidence_from_logits(response.z0, response.z1)


def stochastic_l2a(
    backend: Backend,
    scene: Scene,
    instruction: str,
    n: int,
    seed: int,
    temperature: float = 1.0,
) -> list[Action]:
    """n independent sampled actions; sub-seeds derived by sample counter."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if temperature <= 0:
        raise ValueError("stochastic sampling needs temperature > 0")
    return [
        backend.l2a(scene, instruction, temperature, derive_seed(seed, i)).action
        for i in range(n)
    ]


def stochastic_a2l(
    backend: Backend,
    scene: Scene,
    action: Action,
    n: int,
    seed: int,
    temperature: float = 1.0,
) -> list[str]:
    """n independent sampled descriptions; sub-seeds derived by counter."""
    if n < 1:
        raise ValueError(f"need at least one sample, got {n}")
    if temperature <= 0:
        raise ValueError("stochastic sampling needs temperature > 0")
    return [
        backend.a2l(scene, action, temperature, derive_seed(seed, i)).text
        for i in range(n)
    ]
