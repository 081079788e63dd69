"""Episodic navigation environments: the two-route point maze and the
randomised corridor with a 2D LiDAR."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import kernels
from .dynamics import SystemSpec, SystemState
from .empowerment import EmpowermentParams, check_resolution, estimate_empowerment
from .errors import ConfigError, ContractViolation
from .reward import RewardConfig, empowered_reward, nav_reward
from .world import (CorridorTemplate, LidarConfig, WorldMap, distance_to_nearest_obstacle,
                    lidar_scan, randomize_map, route_lengths)

REASONS = ("none", "collision", "goal_reached", "timeout")
TRACE_FIELDS = ("t", "x", "y", "vx", "vy", "reward", "emp_value", "dist_obstacle")


@dataclass(frozen=True)
class EnvConfig:
    system: SystemSpec = field(default_factory=SystemSpec)
    # a fixed map, or a template drawn afresh at every reset
    world: Union[WorldMap, CorridorTemplate, None] = None
    reward: RewardConfig = field(default_factory=RewardConfig)
    empowerment: EmpowermentParams = field(default_factory=EmpowermentParams)
    control_dt: float = 0.05
    substeps: int = 5
    max_steps: int = 400
    # None omits the scan from the observation
    lidar: Optional[LidarConfig] = None

    def __post_init__(self):
        if not self.control_dt > 0:
            raise ConfigError("must be > 0", "env.control_dt")
        if self.substeps < 1:
            raise ConfigError("must be >= 1", "env.substeps")
        if self.max_steps < 1:
            raise ConfigError("must be >= 1", "env.max_steps")
        if self.world is None:
            raise ConfigError("a map or corridor template is required", "map")

    @property
    def obs_dim(self) -> int:
        return 4 + (self.lidar.beam_count if self.lidar is not None else 0)

    @property
    def act_dim(self) -> int:
        return self.system.control_dim


@dataclass(frozen=True)
class StepResult:
    observation: np.ndarray
    reward: float
    terminated: bool
    termination_reason: str
    info: dict

    def __post_init__(self):
        if self.termination_reason not in REASONS:
            raise ContractViolation(f"unknown termination reason {self.termination_reason!r}")
        if self.terminated != (self.termination_reason != "none"):
            raise ContractViolation("terminated must match termination_reason")


class NavEnv:
    """Drive a planar agent to the goal. Observation is
    ``[goal - position, velocity, lidar...]``.

    ``reset`` consumes the caller's generator in the same way whether or not
    the reward is empowered, so both variants see identical maps and starts.
    """

    def __init__(self, cfg: EnvConfig, record_trace: bool = False):
        self.cfg = cfg
        self.record_trace = record_trace
        self.world: Optional[WorldMap] = cfg.world if isinstance(cfg.world, WorldMap) else None
        self.state: Optional[SystemState] = None
        self.steps = 0
        self.done = True
        self.trace: list = []
        self._emp_rng: Optional[np.random.Generator] = None
        self._emp_value = None
        if self.world is not None:
            self._validate_world(self.world)

    def _validate_world(self, world: WorldMap) -> None:
        if world.start_region is None:
            raise ConfigError("map needs a start region", "map.start_region")
        if self.cfg.reward.empowered:
            check_resolution(self.cfg.system, world, self.cfg.empowerment)
        lengths = route_lengths(world)
        if "narrow_gap" in lengths and "wide_gap" in lengths and not lengths["narrow_gap"] < lengths["wide_gap"]:
            raise ConfigError("the narrow route must be the shorter one", "map.goal_position")

    @property
    def obs_dim(self) -> int:
        return self.cfg.obs_dim

    @property
    def act_dim(self) -> int:
        return self.cfg.act_dim

    def observation(self) -> np.ndarray:
        p = self.state.position
        g = self.world.goal_position
        head = np.array([g[0] - p[0], g[1] - p[1], self.state.velocity[0], self.state.velocity[1]])
        if self.cfg.lidar is None:
            return head
        return np.concatenate([head, lidar_scan(self.world, p, self.cfg.lidar)])

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        if isinstance(self.cfg.world, CorridorTemplate):
            self.world = randomize_map(rng, self.cfg.world)
            if self.cfg.reward.empowered:
                check_resolution(self.cfg.system, self.world, self.cfg.empowerment)
        s = self.world.start_region
        p = rng.uniform(s.min_corner, s.max_corner)
        self._emp_rng = np.random.default_rng(int(rng.integers(0, 2**63)))
        self.state = SystemState(p, np.zeros(2))
        self.steps = 0
        self.done = False
        self._emp_value = None
        self.trace = []
        return self.observation()

    def _empowerment(self, collided: bool) -> tuple:
        """(free_area, value) at the current state, held for ``stride`` steps."""
        params = self.cfg.empowerment
        if collided:
            return 0.0, math.log(params.volume_floor)
        if self._emp_value is None or (self.steps - 1) % params.stride == 0:
            e = estimate_empowerment(self.cfg.system, self.world, self.state, params, self._emp_rng)
            self._emp_value = (e.free_area, e.value)
        return self._emp_value

    def step(self, action) -> StepResult:
        if self.done:
            raise ContractViolation("step() on a terminated episode; call reset()")
        cfg = self.cfg
        u = cfg.system.clip(np.asarray(action, dtype=np.float64).reshape(-1))
        if u.shape[0] != cfg.act_dim:
            raise ContractViolation(f"action dim {u.shape[0]} != {cfg.act_dim}")
        states = kernels.integrate_states(
            self.state.as_vector(), u.reshape(1, 2), cfg.control_dt, cfg.control_dt / cfg.substeps,
            cfg.substeps, cfg.system.kind_code, 1.0 / cfg.system.mass, cfg.system.linear_damping,
            cfg.system.v_max)
        if states.shape[0] != cfg.substeps + 1:
            raise ContractViolation("integration diverged inside a control step")
        w = self.world
        hit = -1
        for i in range(1, states.shape[0]):
            if kernels.collides(states[i, 0], states[i, 1], w.boxes, w.bounds_array, w.agent_radius):
                hit = i
                break
        final = states[hit] if hit > 0 else states[-1]
        self.steps += 1
        self.state = SystemState.from_vector(final, self.state.time + cfg.control_dt * (hit / cfg.substeps if hit > 0 else 1.0))
        collided = hit > 0

        r_d = nav_reward(self.state.position, w.goal_position)
        emp = None
        if cfg.reward.empowered:
            area, emp = self._empowerment(collided)
            reward = empowered_reward(r_d, area, cfg.reward)
        else:
            reward = r_d
        dist_goal = math.hypot(self.state.position[0] - w.goal_position[0],
                               self.state.position[1] - w.goal_position[1])
        if collided:
            reason = "collision"
        elif dist_goal <= w.goal_radius:
            reason = "goal_reached"
            reward += cfg.reward.goal_bonus
        elif self.steps >= cfg.max_steps:
            reason = "timeout"
        else:
            reason = "none"
        self.done = reason != "none"
        d_obs = distance_to_nearest_obstacle(w, self.state.position)
        info = {"distance_to_obstacle": d_obs, "empowerment_value": emp, "step": self.steps}
        if self.record_trace:
            p, v = self.state.position, self.state.velocity
            self.trace.append((self.state.time, p[0], p[1], v[0], v[1], reward,
                               "" if emp is None else emp, d_obs))
        return StepResult(self.observation(), float(reward), self.done, reason, info)


def write_trace(path, rows) -> None:
    """Episode trace CSV with one row per control step."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(TRACE_FIELDS)
        for r in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])


def observation_scale(cfg: EnvConfig) -> np.ndarray:
    """Fixed per-input scale that brings observations to roughly unit size."""
    head = np.array([0.5, 0.5, 1.0 / cfg.system.v_max, 1.0 / cfg.system.v_max])
    if cfg.lidar is None:
        return head
    return np.concatenate([head, np.full(cfg.lidar.beam_count, 1.0 / cfg.lidar.max_range)])
