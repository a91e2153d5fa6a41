from .base import (
    A2LResponse,
    Backend,
    BackendUnavailable,
    GroundingSet,
    L2AResponse,
    L2CResponse,
    confidence_from_logits,
    l2c_confidence,
    stochastic_a2l,
    stochastic_l2a,
)
from .oracle import NOISELESS, OracleBackend, OracleNoise
from .remote import ENV_BACKEND_URL, RemoteBackend

__all__ = [
    "A2LResponse",
    "Backend",
    "BackendUnavailable",
    "ENV_BACKEND_URL",
    "GroundingSet",
    "L2AResponse",
    "L2CResponse",
    "NOISELESS",
    "OracleBackend",
    "OracleNoise",
    "RemoteBackend",
    "confidence_from_logits",
    "l2c_confidence",
    "stochastic_a2l",
    "stochastic_l2a",
]
