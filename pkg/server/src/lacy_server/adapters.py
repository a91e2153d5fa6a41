"""Model adapters behind the HTTP surface.

An adapter owns a model and answers the three tasks in domain terms;
the app layer owns the wire format. The logit convention is fixed here:
l2c returns the raw pre-sigmoid pair (z0, z1) and nothing derived from
it, so the client stays the sole owner of the confidence mapping.
"""

from __future__ import annotations

from lacy.backends import OracleBackend
from lacy.scene import Action, Scene

from .config import AdapterConfig


class AdapterNotLoaded(RuntimeError):
    """The configured adapter has no model behind it."""


class ScriptedMockAdapter:
    """Serves the in-process oracle as if it were a remote model.

    With all noise fields zero this is behaviorally identical to the
    noiseless oracle: the equivalence tests depend on that, so any
    transformation of inputs or outputs beyond wire codec work is a bug.
    """

    loaded = True

    def __init__(self, config: AdapterConfig):
        self._backend = OracleBackend(config.noise())

    @property
    def model_id(self) -> str:
        return f"scripted-mock/{self._backend.model_id}"

    def l2a(self, scene: Scene, instruction: str, temperature: float, seed: int):
        return self._backend.l2a(scene, instruction, temperature, seed)

    def a2l(self, scene: Scene, action: Action, temperature: float, seed: int):
        return self._backend.a2l(scene, action, temperature, seed)

    def l2c(self, scene: Scene, instruction: str, candidate: str):
        return self._backend.l2c(scene, instruction, candidate)


class ExternalModelStub:
    """Placeholder showing where a real model plugs in.

    A live implementation would hold the loaded model and, for l2c,
    extract the logits of the two judgment tokens from the final
    decoding step, returning them untouched. This stub ships no
    weights, so every call reports the adapter as not loaded and the
    server answers 503.
    """

    model_id = "external-model-stub"
    loaded = False

    def _unavailable(self) -> AdapterNotLoaded:
        return AdapterNotLoaded(
            "external-model-stub has no model loaded; "
            "serve scripted-mock or implement this adapter"
        )

    def l2a(self, scene, instruction, temperature, seed):
        raise self._unavailable()

    def a2l(self, scene, action, temperature, seed):
        raise self._unavailable()

    def l2c(self, scene, instruction, candidate):
        raise self._unavailable()


def make_adapter(config: AdapterConfig):
    if config.adapter == "scripted-mock":
        return ScriptedMockAdapter(config)
    return ExternalModelStub()
