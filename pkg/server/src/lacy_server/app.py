"""HTTP surface speaking the lacy wire format.

Route handlers translate between wire JSON and domain objects, then
delegate to the adapter. Responses carry exactly the wire fields:
l2a answers never include backend warnings, and l2c answers are the
raw logit pair with no derived confidence.

Schema violations answer 400 with a path to the offending field;
an adapter without a model behind it answers 503.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, field_validator

from lacy.backends.base import GroundingSet
from lacy.scene import Action, Point2, Scene, SceneObject
from lacy.spatial_lang import NoPickTarget

from .adapters import AdapterNotLoaded, make_adapter
from .config import AdapterConfig


class WirePoint(BaseModel):
    x: float = Field(ge=0.0, le=1.0)
    y: float = Field(ge=0.0, le=1.0)


class WireObject(WirePoint):
    name: str = Field(min_length=1)


class WireScene(BaseModel):
    scene_id: str = Field(min_length=1)
    objects: list[WireObject] = Field(min_length=1)

    @field_validator("objects")
    @classmethod
    def _names_unique(cls, objects: list[WireObject]) -> list[WireObject]:
        seen: set[str] = set()
        for obj in objects:
            if obj.name in seen:
                raise ValueError(f"duplicate object name {obj.name!r}")
            seen.add(obj.name)
        return objects


class WireAction(BaseModel):
    pick: WirePoint
    place: WirePoint


class L2ARequest(BaseModel):
    scene: WireScene
    instruction: str
    temperature: float = Field(default=0.0, ge=0.0)
    seed: int = 0


class A2LRequest(BaseModel):
    scene: WireScene
    action: WireAction
    temperature: float = Field(default=0.0, ge=0.0)
    seed: int = 0


class L2CRequest(BaseModel):
    scene: WireScene
    instruction: str
    candidate: str


class WireError(Exception):
    """Carries a ready-to-send error body past the route handler."""

    def __init__(self, status: int, body: dict):
        super().__init__(body.get("error", ""))
        self.status = status
        self.body = body


def _field_path(loc: tuple) -> str:
    parts = []
    for item in loc:
        if isinstance(item, int):
            parts.append(f"[{item}]")
        else:
            parts.append(f".{item}" if parts else str(item))
    return "".join(parts)


def _to_scene(wire: WireScene) -> Scene:
    try:
        objects = tuple(
            SceneObject(o.name, Point2(o.x, o.y)) for o in wire.objects
        )
        return Scene(wire.scene_id, objects)
    except ValueError as exc:
        raise WireError(
            400,
            {
                "error": "invalid scene",
                "violations": [{"field": "body.scene", "message": str(exc)}],
            },
        ) from exc


def _to_action(wire: WireAction) -> Action:
    return Action(
        pick=Point2(wire.pick.x, wire.pick.y),
        place=Point2(wire.place.x, wire.place.y),
    )


def _grounding_wire(grounding: GroundingSet) -> list[dict]:
    return [{"name": o.name, "x": o.center.x, "y": o.center.y} for o in grounding]


def create_app(config: AdapterConfig | None = None) -> FastAPI:
    cfg = config if config is not None else AdapterConfig()
    adapter = make_adapter(cfg)
    app = FastAPI(title="lacy-server", docs_url=None, redoc_url=None)

    @app.exception_handler(RequestValidationError)
    async def _on_validation(request: Request, exc: RequestValidationError):
        violations = [
            {"field": _field_path(tuple(err["loc"])), "message": err["msg"]}
            for err in exc.errors()
        ]
        return JSONResponse(
            status_code=400,
            content={"error": "request does not match the wire schema",
                     "violations": violations},
        )

    @app.exception_handler(WireError)
    async def _on_wire_error(request: Request, exc: WireError):
        return JSONResponse(status_code=exc.status, content=exc.body)

    @app.exception_handler(AdapterNotLoaded)
    async def _on_not_loaded(request: Request, exc: AdapterNotLoaded):
        return JSONResponse(status_code=503, content={"error": str(exc)})

    @app.get("/health")
    def health():
        if not adapter.loaded:
            return {
                "status": "degraded",
                "adapter": cfg.adapter,
                "detail": "no model loaded; task endpoints answer 503",
            }
        return {"status": "ok", "model_id": adapter.model_id}

    @app.post("/l2a")
    def l2a(req: L2ARequest):
        scene = _to_scene(req.scene)
        resp = adapter.l2a(scene, req.instruction, req.temperature, req.seed)
        return {
            "grounding": _grounding_wire(resp.grounding),
            "action": {
                "pick": {"x": resp.action.pick.x, "y": resp.action.pick.y},
                "place": {"x": resp.action.place.x, "y": resp.action.place.y},
            },
        }

    @app.post("/a2l")
    def a2l(req: A2LRequest):
        scene = _to_scene(req.scene)
        try:
            resp = adapter.a2l(scene, _to_action(req.action), req.temperature, req.seed)
        except NoPickTarget as exc:
            raise WireError(
                400,
                {
                    "error": str(exc),
                    "violations": [{"field": "body.action.pick", "message": str(exc)}],
                },
            ) from exc
        return {"grounding": _grounding_wire(resp.grounding), "text": resp.text}

    @app.post("/l2c")
    def l2c(req: L2CRequest):
        scene = _to_scene(req.scene)
        resp = adapter.l2c(scene, req.instruction, req.candidate)
        return {
            "grounding": _grounding_wire(resp.grounding),
            "z0": resp.z0,
            "z1": resp.z1,
        }

    return app
