"""Navigation reward and its multiplicative empowered variant."""
from __future__ import annotations

import math
from dataclasses import dataclass, asdict

import numpy as np

from .errors import ConfigError, ContractViolation


@dataclass(frozen=True)
class RewardConfig:
    """``safety_coefficient`` has units 1/m^2: it scales an area inside a log.

    ``goal_bonus`` is added once on the step that reaches the goal (0 keeps the
    plain per-step reward).
    """

    safety_coefficient: float = 1.0
    volume_floor: float = 1e-4
    empowered: bool = False
    goal_bonus: float = 0.0

    def __post_init__(self):
        if not self.safety_coefficient > 0:
            raise ConfigError("must be > 0", "reward.safety_coefficient")
        if not self.volume_floor > 0:
            raise ConfigError("must be > 0", "reward.volume_floor")
        if self.goal_bonus < 0:
            raise ConfigError("must be >= 0", "reward.goal_bonus")

    def to_dict(self) -> dict:
        return asdict(self)


def nav_reward(p, goal) -> float:
    """``exp(-||p - goal||)`` with distances in metres."""
    d = math.hypot(float(p[0]) - float(goal[0]), float(p[1]) - float(goal[1]))
    return math.exp(-d)


def empowered_reward(r_d: float, free_area: float, cfg: RewardConfig) -> float:
    """``r_d * log(c * max(free_area, floor))``; negative whenever ``c * area < 1``."""
    if not 0.0 <= r_d <= 1.0:
        raise ContractViolation(f"task reward {r_d} outside [0, 1]")
    if free_area < 0 or not np.isfinite(free_area):
        raise ContractViolation(f"free area {free_area} must be finite and >= 0")
    c = cfg.safety_coefficient
    return r_d * math.log(c * max(free_area, cfg.volume_floor))
