"""Deterministic planar dynamics, RK4 integration and control sampling.

Both built-in systems are 2D double integrators with linear damping::

    d/dt p = v
    d/dt v = u / mass - damping * v

with the speed clamped to ``v_max`` after every integration step. A
``single_integrator`` kind (``d/dt p = u``) exists for oracle tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field, asdict
from typing import Literal, Optional

import numpy as np

from . import kernels
from .errors import ConfigError, ContractViolation, IntegrationError

SystemKind = Literal["point_mass_2d", "planar_drone", "single_integrator"]


@dataclass(frozen=True)
class SystemState:
    position: np.ndarray
    velocity: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        p = np.asarray(self.position, dtype=np.float64).reshape(-1)
        v = np.asarray(self.velocity, dtype=np.float64).reshape(-1)
        if p.shape != v.shape:
            raise ContractViolation(f"position dim {p.shape[0]} != velocity dim {v.shape[0]}")
        if not (np.all(np.isfinite(p)) and np.all(np.isfinite(v)) and np.isfinite(self.time)):
            raise ContractViolation("state must be finite")
        if self.time < 0:
            raise ContractViolation("time must be >= 0")
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "velocity", v)

    @classmethod
    def from_vector(cls, x, time=0.0):
        x = np.asarray(x, dtype=np.float64)
        return cls(x[:2], x[2:4], time)

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.position, self.velocity])


@dataclass(frozen=True)
class SystemSpec:
    kind: SystemKind = "planar_drone"
    mass: float = 1.0
    linear_damping: float = 0.3
    v_max: float = 2.0
    a_max: float = 2.0
    # per-axis [lo, hi]; defaults to +-mass * a_max
    control_bounds: Optional[tuple] = None
    # "ball" treats the bounds as a disk of radius hi (symmetric bounds only)
    control_set: Literal["box", "ball"] = "box"
    state_dim: int = field(default=2, init=False)
    control_dim: int = field(default=2, init=False)

    def __post_init__(self):
        if self.kind not in kernels.KIND_CODES:
            raise ConfigError(f"unknown system kind {self.kind!r}", "system.kind")
        if self.mass <= 0:
            raise ConfigError("must be > 0", "system.mass")
        if self.a_max <= 0:
            raise ConfigError("must be > 0", "system.a_max")
        if self.v_max <= 0:
            raise ConfigError("must be > 0", "system.v_max")
        if self.linear_damping < 0:
            raise ConfigError("must be >= 0", "system.linear_damping")
        if self.control_bounds is None:
            u = self.mass * self.a_max
            bounds = ((-u, u), (-u, u))
        else:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.control_bounds)
        if len(bounds) != self.control_dim:
            raise ConfigError(f"need {self.control_dim} axes", "system.control_bounds")
        for lo, hi in bounds:
            if not lo < hi:
                raise ConfigError("lo < hi required per axis", "system.control_bounds")
        if self.control_set not in ("box", "ball"):
            raise ConfigError(f"unknown control set {self.control_set!r}", "system.control_set")
        if self.control_set == "ball" and any(lo != -hi for lo, hi in bounds):
            raise ConfigError("ball control set needs symmetric bounds", "system.control_bounds")
        object.__setattr__(self, "control_bounds", bounds)

    @property
    def lo(self) -> np.ndarray:
        return np.array([b[0] for b in self.control_bounds])

    @property
    def hi(self) -> np.ndarray:
        return np.array([b[1] for b in self.control_bounds])

    @property
    def kind_code(self) -> int:
        return kernels.KIND_CODES[self.kind]

    @property
    def max_speed(self) -> float:
        if self.kind == "single_integrator":
            return float(np.max(np.abs(self.control_bounds)) * (np.sqrt(2.0) if self.control_set == "box" else 1.0))
        return self.v_max

    def admissible(self, u, tol: float = 1e-12) -> bool:
        u = np.asarray(u, dtype=np.float64)
        if self.control_set == "ball":
            return bool(np.linalg.norm(u) <= self.hi[0] + tol)
        return bool(np.all(u >= self.lo - tol) and np.all(u <= self.hi + tol))

    def clip(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=np.float64)
        if self.control_set == "ball":
            n = np.linalg.norm(u)
            r = self.hi[0]
            return u * (r / n) if n > r else u.copy()
        return np.clip(u, self.lo, self.hi)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("state_dim")
        d.pop("control_dim")
        d["control_bounds"] = [list(b) for b in self.control_bounds]
        return d


@dataclass(frozen=True)
class PiecewiseControl:
    """Piecewise-constant input: ``segments[k]`` holds on ``[k*dt, (k+1)*dt)``."""

    segments: np.ndarray
    segment_duration: float

    def __post_init__(self):
        seg = np.atleast_2d(np.asarray(self.segments, dtype=np.float64))
        if seg.shape[0] < 1:
            raise ContractViolation("need at least one segment")
        if not self.segment_duration > 0:
            raise ContractViolation("segment_duration must be > 0")
        object.__setattr__(self, "segments", seg)

    @property
    def horizon(self) -> float:
        return self.segments.shape[0] * self.segment_duration

    def at(self, t: float) -> np.ndarray:
        k = min(int(t // self.segment_duration), self.segments.shape[0] - 1)
        return self.segments[max(k, 0)]


@dataclass(frozen=True)
class StateTrajectory:
    """States sampled every ``dt`` starting at ``t0``; rows are (px, py, vx, vy)."""

    states: np.ndarray
    dt: float
    t0: float = 0.0

    def __len__(self):
        return self.states.shape[0]

    @property
    def positions(self) -> np.ndarray:
        return self.states[:, :2]

    @property
    def velocities(self) -> np.ndarray:
        return self.states[:, 2:]

    @property
    def times(self) -> np.ndarray:
        return self.t0 + self.dt * np.arange(len(self))

    def state(self, i: int) -> SystemState:
        return SystemState.from_vector(self.states[i], self.t0 + self.dt * (i % len(self)))


def _check_dims(spec: SystemSpec, x: SystemState, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64).reshape(-1)
    if x.position.shape[0] != spec.state_dim:
        raise ContractViolation(f"state dim {x.position.shape[0]} != {spec.state_dim}")
    if u.shape[0] != spec.control_dim:
        raise ContractViolation(f"control dim {u.shape[0]} != {spec.control_dim}")
    return u


def derivative(spec: SystemSpec, x: SystemState, u) -> np.ndarray:
    """State derivative ``(p_dot, v_dot)`` as a length-4 vector.

    No speed clamping here; that is applied per integration step.
    """
    u = _check_dims(spec, x, u)
    if not spec.admissible(u):
        raise ContractViolation(f"control {u} outside admissible set")
    if spec.kind == "single_integrator":
        return np.concatenate([u, np.zeros(2)])
    acc = u / spec.mass - spec.linear_damping * x.velocity
    return np.concatenate([x.velocity, acc])


def integrate(spec: SystemSpec, x0: SystemState, ctrl: PiecewiseControl, T: float,
              steps: int = 100) -> StateTrajectory:
    """Classical RK4 with fixed step ``T / steps`` and per-step speed clamp.

    The control is held at its value at each step's midpoint.
    """
    if not T > 0:
        raise ContractViolation("T must be > 0")
    if steps < 1:
        raise ContractViolation("steps must be >= 1")
    if ctrl.horizon < T * (1 - 1e-12):
        raise ContractViolation(f"control horizon {ctrl.horizon} shorter than T={T}")
    _check_dims(spec, x0, ctrl.segments[0])
    dt = T / steps
    states = kernels.integrate_states(
        x0.as_vector(), ctrl.segments, ctrl.segment_duration, dt, steps,
        spec.kind_code, 1.0 / spec.mass, spec.linear_damping, spec.v_max)
    if states.shape[0] != steps + 1 or not np.all(np.isfinite(states[-1])):
        raise IntegrationError(states.shape[0] - 1)
    return StateTrajectory(states, dt, x0.time)


def sample_controls(rng: np.random.Generator, spec: SystemSpec, n: int, segments: int) -> np.ndarray:
    """Draw an ``(n, segments, m)`` array uniformly from the admissible set."""
    if segments < 1:
        raise ContractViolation("segments must be >= 1")
    raw = rng.random((n, segments, spec.control_dim))
    if spec.control_set == "ball":
        r = spec.hi[0] * np.sqrt(raw[..., 0])
        theta = 2.0 * np.pi * raw[..., 1]
        return np.stack([r * np.cos(theta), r * np.sin(theta)], axis=-1)
    return spec.lo + (spec.hi - spec.lo) * raw


def sample_control(rng: np.random.Generator, spec: SystemSpec, mode: str, T: float,
                   segments: int = 5) -> PiecewiseControl:
    """Sample one admissible input over ``[0, T]``.

    ``mode="piecewise"`` draws ``segments`` independent values of duration
    ``T / segments``; ``mode="constant"`` draws a single held value.
    """
    if mode == "constant":
        segments = 1
    elif mode != "piecewise":
        raise ContractViolation(f"unknown sampling mode {mode!r}")
    u = sample_controls(rng, spec, 1, segments)[0]
    return PiecewiseControl(u, T / segments)


def default_horizon(spec: SystemSpec) -> float:
    """Worst-case stopping time from top speed, ``v_max / a_max``."""
    return spec.v_max / spec.a_max


def system_from_dict(d: dict) -> SystemSpec:
    d = dict(d)
    if "control_bounds" in d and d["control_bounds"] is not None:
        d["control_bounds"] = tuple(tuple(b) for b in d["control_bounds"])
    return SystemSpec(**d)
