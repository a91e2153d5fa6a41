"""Regenerate the golden wire fixtures.

Each fixture freezes one request/response pair. The protocol tests
replay them byte-for-byte (after canonical JSON dumping), so rerun
this script only when the wire format itself is meant to change,
and review the diff.

Usage: python3 server/scripts/gen_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

from fastapi.testclient import TestClient

from lacy_server import AdapterConfig, create_app

OUT_DIR = Path(__file__).resolve().parents[1] / "fixtures" / "protocol"

SCENE = {
    "scene_id": "fixture-scene",
    "objects": [
        {"name": "mug", "x": 0.2, "y": 0.3},
        {"name": "sponge", "x": 0.7, "y": 0.6},
    ],
}

ABS_TEXT = "pick the mug and place it in the top left of the workspace"
REL_TEXT = "pick the mug and place it to the top of the sponge"

CASES = [
    ("health_ok", "scripted-mock", "GET", "/health", None),
    ("l2a_absolute", "scripted-mock", "POST", "/l2a",
     {"scene": SCENE, "instruction": ABS_TEXT, "temperature": 0.0, "seed": 0}),
    ("l2a_relative", "scripted-mock", "POST", "/l2a",
     {"scene": SCENE, "instruction": REL_TEXT, "temperature": 0.0, "seed": 0}),
    ("l2a_unparseable", "scripted-mock", "POST", "/l2a",
     {"scene": SCENE, "instruction": "put the mug somewhere nice",
      "temperature": 0.0, "seed": 0}),
    ("a2l_absolute", "scripted-mock", "POST", "/a2l",
     {"scene": SCENE,
      "action": {"pick": {"x": 0.2, "y": 0.3}, "place": {"x": 0.1, "y": 0.1}},
      "temperature": 0.0, "seed": 0}),
    ("a2l_relative", "scripted-mock", "POST", "/a2l",
     {"scene": SCENE,
      "action": {"pick": {"x": 0.2, "y": 0.3}, "place": {"x": 0.7, "y": 0.45}},
      "temperature": 0.0, "seed": 0}),
    ("l2c_consistent", "scripted-mock", "POST", "/l2c",
     {"scene": SCENE, "instruction": ABS_TEXT, "candidate": ABS_TEXT}),
    ("l2c_inconsistent", "scripted-mock", "POST", "/l2c",
     {"scene": SCENE, "instruction": ABS_TEXT, "candidate": REL_TEXT}),
    ("reject_coord_range", "scripted-mock", "POST", "/l2a",
     {"scene": {"scene_id": "s", "objects": [{"name": "mug", "x": 1.4, "y": 0.3}]},
      "instruction": ABS_TEXT}),
    ("reject_duplicate_name", "scripted-mock", "POST", "/l2a",
     {"scene": {"scene_id": "s", "objects": [
         {"name": "mug", "x": 0.4, "y": 0.3}, {"name": "mug", "x": 0.6, "y": 0.3}]},
      "instruction": ABS_TEXT}),
    ("reject_unbindable_pick", "scripted-mock", "POST", "/a2l",
     {"scene": SCENE,
      "action": {"pick": {"x": 0.95, "y": 0.95}, "place": {"x": 0.5, "y": 0.5}},
      "temperature": 0.0, "seed": 0}),
    ("health_degraded", "external-model-stub", "GET", "/health", None),
    ("reject_not_loaded", "external-model-stub", "POST", "/l2a",
     {"scene": SCENE, "instruction": ABS_TEXT, "temperature": 0.0, "seed": 0}),
]


def main() -> None:
    OUT_DIR.mkdir(parents=True, exist_ok=True)
    clients = {
        name: TestClient(create_app(AdapterConfig(adapter=name)))
        for name in ("scripted-mock", "external-model-stub")
    }
    for name, adapter, method, endpoint, request in CASES:
        client = clients[adapter]
        if method == "GET":
            resp = client.get(endpoint)
        else:
            resp = client.post(endpoint, json=request)
        fixture = {
            "adapter": adapter,
            "method": method,
            "endpoint": endpoint,
            "request": request,
            "status": resp.status_code,
            "response": resp.json(),
        }
        path = OUT_DIR / f"{name}.json"
        path.write_text(json.dumps(fixture, indent=2, sort_keys=True) + "\n",
                        encoding="utf-8")
        print(f"wrote {path.relative_to(OUT_DIR.parents[1])}")


if __name__ == "__main__":
    main()
