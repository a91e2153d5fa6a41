"""HTTP client backend speaking the model-server wire protocol.

The server is expected to expose POST /l2a, /a2l, /l2c and GET /health.
Request and response bodies are JSON; coordinates travel as plain floats.
Transient failures (connection errors, 5xx) are retried with exponential
backoff; anything else surfaces as BackendUnavailable so callers never see
raw requests exceptions.
"""

from __future__ import annotations

import os
import threading
import time

import requests

from ..scene import Action, Point2, Scene, SceneObject
from .base import A2LResponse, BackendUnavailable, GroundingSet, L2AResponse, L2CResponse

ENV_BACKEND_URL = "LACY_BACKEND_URL"

DEFAULT_TIMEOUT = 10.0
DEFAULT_RETRIES = 2
BACKOFF_BASE = 0.5


def scene_to_wire(scene: Scene) -> dict:
    return {
        "scene_id": scene.scene_id,
        "objects": [{"name": o.name, "x": o.center.x, "y": o.center.y} for o in scene.objects],
    }


def action_to_wire(action: Action) -> dict:
    return {
        "pick": {"x": action.pick.x, "y": action.pick.y},
        "place": {"x": action.place.x, "y": action.place.y},
    }


def _point_from_wire(obj: object, where: str) -> Point2:
    if not isinstance(obj, dict):
        raise BackendUnavailable(f"malformed response: {where} is not an object")
    try:
        x, y = float(obj["x"]), float(obj["y"])
    except (KeyError, TypeError, ValueError) as exc:
        raise BackendUnavailable(f"malformed response: bad coordinates in {where}") from exc
    try:
        return Point2(x, y)
    except ValueError as exc:
        raise BackendUnavailable(f"malformed response: {where} out of range") from exc


def action_from_wire(obj: object) -> Action:
    if not isinstance(obj, dict):
        raise BackendUnavailable("malformed response: action is not an object")
    return Action(
        pick=_point_from_wire(obj.get("pick"), "action.pick"),
        place=_point_from_wire(obj.get("place"), "action.place"),
    )


def grounding_from_wire(obj: object) -> GroundingSet:
    if not isinstance(obj, list):
        raise BackendUnavailable("malformed response: grounding is not a list")
    out = []
    for i, entry in enumerate(obj):
        if not isinstance(entry, dict) or not isinstance(entry.get("name"), str):
            raise BackendUnavailable(f"malformed response: grounding[{i}] lacks a name")
        out.append(SceneObject(entry["name"], _point_from_wire(entry, f"grounding[{i}]")))
    return tuple(out)


class RemoteBackend:
    """Backend proxy for a model server reachable over HTTP."""

    def __init__(
        self,
        base_url: str,
        *,
        timeout: float = DEFAULT_TIMEOUT,
        retries: int = DEFAULT_RETRIES,
    ):
        if retries < 0:
            raise ValueError("retries must be >= 0")
        self.base_url = base_url.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self._local = threading.local()
        self._model_id: str | None = None

    @classmethod
    def from_env(cls, **kwargs) -> "RemoteBackend":
        url = os.environ.get(ENV_BACKEND_URL)
        if not url:
            raise BackendUnavailable(f"{ENV_BACKEND_URL} is not set")
        return cls(url, **kwargs)

    # One Session per thread: Session objects are not thread-safe and
    # evaluation may fan calls out across workers.
    def _session(self) -> requests.Session:
        sess = getattr(self._local, "session", None)
        if sess is None:
            sess = requests.Session()
            self._local.session = sess
        return sess

    def _request(self, method: str, path: str, payload: dict | None = None) -> dict:
        url = self.base_url + path
        last_exc: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._session().request(method, url, json=payload, timeout=self.timeout)
            except requests.RequestException as exc:
                last_exc = exc
            else:
                if resp.status_code < 400:
                    try:
                        body = resp.json()
                    except ValueError as exc:
                        raise BackendUnavailable(f"non-JSON response from {url}") from exc
                    if not isinstance(body, dict):
                        raise BackendUnavailable(f"malformed response from {url}: not an object")
                    return body
                if resp.status_code < 500:
                    raise BackendUnavailable(f"{url} rejected the request: {resp.status_code} {resp.text[:200]}")
                last_exc = BackendUnavailable(f"{url} returned {resp.status_code}")
            if attempt < self.retries:
                time.sleep(BACKOFF_BASE * (2**attempt))
        raise BackendUnavailable(f"{url} unreachable after {self.retries + 1} attempts") from last_exc

    def health(self) -> dict:
        return self._request("GET", "/health")

    @property
    def model_id(self) -> str:
        if self._model_id is None:
            body = self.health()
            mid = body.get("model_id")
            if not isinstance(mid, str) or not mid:
                raise BackendUnavailable("health response lacks model_id")
            self._model_id = mid
        return self._model_id

    def l2a(
        self, scene: Scene, instruction: str, temperature: float = 0.0, seed: int = 0
    ) -> L2AResponse:
        body = self._request(
            "POST",
            "/l2a",
            {
                "scene": scene_to_wire(scene),
                "instruction": instruction,
                "temperature": temperature,
                "seed": seed,
            },
        )
        return L2AResponse(
            grounding=grounding_from_wire(body.get("grounding")),
            action=action_from_wire(body.get("action")),
        )

    def a2l(
        self, scene: Scene, action: Action, temperature: float = 0.0, seed: int = 0
    ) -> A2LResponse:
        body = self._request(
            "POST",
            "/a2l",
            {
                "scene": scene_to_wire(scene),
                "action": action_to_wire(action),
                "temperature": temperature,
                "seed": seed,
            },
        )
        text = body.get("text")
        if not isinstance(text, str) or not text:
            raise BackendUnavailable("malformed response: text missing from /a2l")
        return A2LResponse(grounding=grounding_from_wire(body.get("grounding")), text=text)

    def l2c(self, scene: Scene, instruction: str, candidate: str) -> L2CResponse:
        body = self._request(
            "POST",
            "/l2c",
            {
                "scene": scene_to_wire(scene),
                "instruction": instruction,
                "candidate": candidate,
            },
        )
        try:
            z0, z1 = float(body["z0"]), float(body["z1"])
        except (KeyError, TypeError, ValueError) as exc:
            raise BackendUnavailable("malformed response: logits missing from /l2c") from exc
        return L2CResponse(grounding=grounding_from_wire(body.get("grounding")), z0=z0, z1=z1)
