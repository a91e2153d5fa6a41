"""Server configuration.

The noise fields mirror the oracle's error model so one config block can
describe both where the server listens and how the scripted mock should
misbehave. All-zero noise (the default) makes the mock an exact stand-in
for the noiseless in-process oracle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from lacy.backends import OracleNoise

ADAPTERS = ("scripted-mock", "external-model-stub")


@dataclass(frozen=True)
class AdapterConfig:
    host: str = "127.0.0.1"
    port: int = 8080  # 0 lets the OS pick, useful under test
    adapter: str = "scripted-mock"
    p_wrong_object: float = 0.0
    place_sigma: float = 0.0
    p_wrong_relation: float = 0.0
    l2c_logit_scale: float = 4.0
    l2c_noise_sigma: float = 0.0

    def __post_init__(self) -> None:
        if not self.host:
            raise ValueError("host must be non-empty")
        if not 0 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        if self.adapter not in ADAPTERS:
            raise ValueError(f"unknown adapter {self.adapter!r}; choose from {ADAPTERS}")
        self.noise()  # validates the noise fields

    def noise(self) -> OracleNoise:
        return OracleNoise(
            p_wrong_object=self.p_wrong_object,
            place_sigma=self.place_sigma,
            p_wrong_relation=self.p_wrong_relation,
            l2c_logit_scale=self.l2c_logit_scale,
            l2c_noise_sigma=self.l2c_noise_sigma,
        )
