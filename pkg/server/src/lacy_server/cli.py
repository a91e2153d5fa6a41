"""lacy-server entry point."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import uvicorn

from .app import create_app
from .config import ADAPTERS, AdapterConfig

EXIT_CONFIG = 2


def _noise_fields(profile: str) -> dict:
    text = profile.strip()
    if not text.startswith("{"):
        try:
            text = Path(profile).read_text(encoding="utf-8")
        except OSError as exc:
            raise ValueError(f"cannot read noise profile: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"noise profile is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ValueError("noise profile must be a JSON object")
    allowed = {
        "p_wrong_object",
        "place_sigma",
        "p_wrong_relation",
        "l2c_logit_scale",
        "l2c_noise_sigma",
    }
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ValueError(f"unknown noise profile field: {', '.join(unknown)}")
    return data


def build_config(argv: list[str] | None = None) -> AdapterConfig:
    parser = argparse.ArgumentParser(
        prog="lacy-server",
        description="Serve a model adapter over the lacy wire format.",
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8080,
                        help="listen port; 0 lets the OS pick")
    parser.add_argument("--adapter", default="scripted-mock", choices=ADAPTERS)
    parser.add_argument("--noise-profile",
                        help="scripted-mock noise: inline JSON object or a path to one")
    opt = parser.parse_args(argv)

    fields = _noise_fields(opt.noise_profile) if opt.noise_profile else {}
    if fields and opt.adapter != "scripted-mock":
        raise ValueError("--noise-profile applies to the scripted-mock adapter only")
    return AdapterConfig(host=opt.host, port=opt.port, adapter=opt.adapter, **fields)


def main(argv: list[str] | None = None) -> int:
    try:
        config = build_config(argv)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


if __name__ == "__main__":
    sys.exit(main())
