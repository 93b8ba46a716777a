"""Experiment configuration: a single JSON document, unknown keys rejected."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .errors import ConfigError
from .sobolev import mixed_exponents_admissible

INIT_KINDS = ("taylor-green", "stratified", "random-hs", "custom-file")


@dataclass(frozen=True)
class ExperimentConfig:
    n: int = 64
    nu: float = 1.0
    dt: float = 1e-3
    t_end: float = 1.0
    snapshot_every: int = 10
    checkpoint_every: int = 0
    init_kind: str = "random-hs"
    s_u: float = 2.0
    s_rho: float = 2.0
    seed: int = 0
    delta: float = 0.1
    epsilon: float = 1.0
    # initial-data amplitudes: target H^1 norms for random-hs data (None keeps
    # the raw synthesized spectrum, 0 switches the field off)
    u_norm_h1: float | None = None
    rho_norm_h1: float | None = None
    u_amplitude: float = 1.0
    rho_amplitude: float = 1.0
    stratified_mode: int = 1
    init_file: str | None = None
    mode_cutoff: int | None = None
    converged_threshold: float = 1e-3
    late_fraction: float = 0.25
    output_dir: str = "output"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if int(self.n) != self.n or self.n < 8 or self.n % 2:
            raise ConfigError(f"n must be an even integer >= 8, got {self.n!r}")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigError(f"dt must be positive, got {self.dt!r}")
        if not (self.t_end >= 0 and math.isfinite(self.t_end)):
            raise ConfigError(f"t_end must be a finite nonnegative time, got {self.t_end!r}")
        if not self.nu > 0:
            raise ConfigError(f"nu must be positive, got {self.nu!r}")
        if int(self.snapshot_every) != self.snapshot_every or self.snapshot_every < 1:
            raise ConfigError("snapshot_every must be a positive integer")
        if int(self.checkpoint_every) != self.checkpoint_every or self.checkpoint_every < 0:
            raise ConfigError("checkpoint_every must be a nonnegative integer (0 disables)")
        if self.init_kind not in INIT_KINDS:
            raise ConfigError(f"init_kind must be one of {INIT_KINDS}, got {self.init_kind!r}")
        if self.init_kind == "custom-file" and not self.init_file:
            raise ConfigError("init_kind 'custom-file' requires init_file")
        if not (self.s_u > 0 and self.s_rho > 0):
            raise ConfigError("s_u and s_rho must be positive")
        if not (0 <= int(self.seed) < 2**64) or int(self.seed) != self.seed:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if not (self.delta > 0 and self.epsilon > 0):
            raise ConfigError("delta and epsilon must be positive")
        if not mixed_exponents_admissible(self.delta, self.epsilon, self.s_u):
            raise ConfigError(
                f"inadmissible exponents: delta/(1+delta) - 1/(2+epsilon) = "
                f"{self.delta / (1 + self.delta) - 1 / (2 + self.epsilon):.4f} is not below "
                f"s_u/2 - 1/2 = {0.5 * self.s_u - 0.5:.4f}"
            )
        if self.mode_cutoff is not None and self.mode_cutoff < 1:
            raise ConfigError("mode_cutoff must be a positive integer")
        if not 0 < self.late_fraction <= 1:
            raise ConfigError("late_fraction must lie in (0, 1]")
        if not self.converged_threshold > 0:
            raise ConfigError("converged_threshold must be positive")

    @property
    def nsteps(self) -> int:
        return int(math.floor(self.t_end / self.dt + 1e-9))

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - names)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict):
            raise ConfigError(f"{path}: top level must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)
