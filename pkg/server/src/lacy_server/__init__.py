"""HTTP adapter server exposing model backends over the lacy wire format."""

from .adapters import AdapterNotLoaded, make_adapter
from .app import create_app
from .config import ADAPTERS, AdapterConfig

__all__ = [
    "ADAPTERS",
    "AdapterConfig",
    "AdapterNotLoaded",
    "create_app",
    "make_adapter",
]
