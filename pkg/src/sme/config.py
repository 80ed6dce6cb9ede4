"""Environment configuration: the genome of one SME instance."""

from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Any, Mapping

FORMAT_VERSION = 1

DEFAULTS: dict[str, Any] = {
    "n_state": 8,
    "n_action": 4,
    "reward_interval": 1,
    "min_reward": 0.0,
    "survival_difficulty": 0.0,
    "policy_complexity": 1,
    "horizon": 100,
    "master_seed": 1,
}


class ConfigError(ValueError):
    """A configuration field is missing, mistyped, or out of range."""


@dataclass(frozen=True)
class EnvConfig:
    """Difficulty axes plus horizon and master seed.

    n_state/n_action are the topological state and action dimensions,
    reward_interval is the payout period k, min_reward gates the step reward,
    survival_difficulty is the termination threshold D, policy_complexity is
    the optimal-policy depth, horizon the episode truncation length.
    """

    n_state: int = 8
    n_action: int = 4
    reward_interval: int = 1
    min_reward: float = 0.0
    survival_difficulty: float = 0.0
    policy_complexity: int = 1
    horizon: int = 100
    master_seed: int = 1

    def __post_init__(self):
        for name in ("n_state", "n_action", "reward_interval",
                     "policy_complexity", "horizon"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{name} must be an integer")
            if value < 1:
                raise ConfigError(f"{name} must be ≥ 1")
        for name in ("min_reward", "survival_difficulty"):
            value = getattr(self, name)
            if not isinstance(value, (int, float)) or isinstance(value, bool):
                raise ConfigError(f"{name} must be a number")
            if not 0.0 <= float(value) < 1.0:
                raise ConfigError(f"{name} must lie in [0,1)")
            object.__setattr__(self, name, float(value))
        seed = self.master_seed
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError("master_seed must be an integer")
        if not 0 <= seed < 2**64:
            raise ConfigError("master_seed must fit in 64 unsigned bits")

    def to_json_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"format_version": FORMAT_VERSION}
        for f in fields(self):
            doc[f.name] = getattr(self, f.name)
        return doc


def validate_config(raw: Mapping[str, Any]) -> EnvConfig:
    """Build an EnvConfig from a partial mapping, filling defaults.

    Unknown keys are rejected so typos fail loudly; a "format_version" key is
    accepted (and checked) so serialized documents validate directly.
    """
    data = dict(raw)
    version = data.pop("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ConfigError(f"unsupported config format_version {version!r}")
    unknown = set(data) - set(DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown config field {sorted(unknown)[0]!r}")
    merged = {**DEFAULTS, **data}
    return EnvConfig(**merged)
