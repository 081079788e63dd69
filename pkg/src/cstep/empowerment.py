"""Sampling-based continuous space-time empowerment.

For a state ``x`` we sample ``N`` admissible inputs over the horizon, roll
each out with RK4, and split the endpoints into free endpoints and terminal
points (position at the first colliding sample). The estimate is::

    free_area = hull_area(all endpoints) - union_area(terminal cluster hulls)
    value     = log(max(free_area, floor))
"""
from __future__ import annotations

import csv
import math
import os
from dataclasses import dataclass, asdict, fields
from typing import Literal, Optional

import numpy as np

from . import kernels
from .dynamics import SystemSpec, SystemState, default_horizon, sample_controls
from .errors import ConfigError, ContractViolation
from .geometry import ConvexPolygon, cluster_hulls, convex_hull, dbscan, polygon_area, union_of_cluster_hulls
from .world import WorldMap, point_free


@dataclass(frozen=True)
class EmpowermentParams:
    horizon: Optional[float] = 1.0  # None -> v_max / a_max
    n_trajectories: int = 150
    steps_per_trajectory: int = 100
    sampling_mode: Literal["piecewise", "constant"] = "constant"
    segments: int = 5
    cluster_eps: Optional[float] = None  # None -> 2 * sqrt(reach_area / N)
    cluster_min_pts: int = 3
    mc_samples: int = 20000
    volume_floor: float = 1e-4
    # evaluate every k-th env step and hold the last value in between
    stride: int = 1

    def __post_init__(self):
        if self.horizon is not None and not self.horizon > 0:
            raise ConfigError("must be > 0", "empowerment.horizon")
        if self.n_trajectories < 1:
            raise ConfigError("must be >= 1", "empowerment.n_trajectories")
        if self.steps_per_trajectory < 1:
            raise ConfigError("must be >= 1", "empowerment.steps_per_trajectory")
        if self.sampling_mode not in ("piecewise", "constant"):
            raise ConfigError(f"unknown mode {self.sampling_mode!r}", "empowerment.sampling_mode")
        if self.segments < 1:
            raise ConfigError("must be >= 1", "empowerment.segments")
        if self.cluster_eps is not None and not self.cluster_eps > 0:
            raise ConfigError("must be > 0", "empowerment.cluster_eps")
        if self.cluster_min_pts < 1:
            raise ConfigError("must be >= 1", "empowerment.cluster_min_pts")
        if self.mc_samples < 1:
            raise ConfigError("must be >= 1", "empowerment.mc_samples")
        if not self.volume_floor > 0:
            raise ConfigError("must be > 0", "empowerment.volume_floor")
        if self.stride < 1:
            raise ConfigError("must be >= 1", "empowerment.stride")

    def resolve_horizon(self, spec: SystemSpec) -> float:
        T = default_horizon(spec) if self.horizon is None else self.horizon
        if not T > 0:
            raise ConfigError("resolved horizon must be > 0", "empowerment.horizon")
        return T

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class EmpowermentEstimate:
    reach_area: float
    terminal_area: float
    free_area: float
    value: float
    n_free: int
    n_terminal: int

    def as_row(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class ReachSet:
    estimate: EmpowermentEstimate
    endpoints: np.ndarray
    collision_index: np.ndarray
    reach_hull: ConvexPolygon
    terminal_labels: np.ndarray
    terminal_hulls: tuple

    def to_dict(self) -> dict:
        free = self.collision_index < 0
        return {
            "estimate": self.estimate.as_row(),
            "reach_hull": self.reach_hull.to_list(),
            "terminal_hulls": [h.to_list() for h in self.terminal_hulls],
            "free_endpoints": self.endpoints[free].tolist(),
            "terminal_points": self.endpoints[~free].tolist(),
            "terminal_labels": self.terminal_labels.tolist(),
        }


def check_resolution(spec: SystemSpec, world: WorldMap, params: EmpowermentParams) -> None:
    """Sampled collision checks need per-step motion below half the thinnest obstacle."""
    T = params.resolve_horizon(spec)
    step = spec.max_speed * T / params.steps_per_trajectory
    if not step < world.min_thickness / 2:
        raise ConfigError(
            f"per-step displacement {step:.4g} m >= half the thinnest obstacle "
            f"({world.min_thickness / 2:.4g} m); raise steps_per_trajectory",
            "empowerment.steps_per_trajectory")


def _eps(params: EmpowermentParams, reach_area: float, endpoints: np.ndarray, n: int) -> float:
    """Cluster radius: twice the mean endpoint spacing unless set explicitly."""
    if params.cluster_eps is not None:
        return params.cluster_eps
    if reach_area > 0:
        return 2.0 * math.sqrt(reach_area / n)
    return 2.0 * float(np.ptp(endpoints, axis=0).max()) / n + 1e-12


def reachable_set(spec: SystemSpec, world: WorldMap, x: SystemState, params: EmpowermentParams,
                  rng: np.random.Generator) -> ReachSet:
    """Run the estimator and keep the intermediate geometry."""
    if not point_free(world, x.position):
        raise ContractViolation(f"state {x.position} is not collision-free")
    T = params.resolve_horizon(spec)
    n = params.n_trajectories
    k = 1 if params.sampling_mode == "constant" else params.segments
    # row i is trajectory i's input; drawn up front so evaluation order cannot matter
    controls = sample_controls(rng, spec, n, k)
    endpoints, coll = kernels.rollout_batch(
        x.as_vector(), controls, T / k, T / params.steps_per_trajectory,
        params.steps_per_trajectory, spec.kind_code, 1.0 / spec.mass, spec.linear_damping,
        spec.v_max, world.boxes, world.bounds_array, world.agent_radius)
    reach = convex_hull(endpoints)
    reach_area = polygon_area(reach)
    terminal = endpoints[coll >= 0]
    if terminal.shape[0] == n:
        # no free endpoint at all: the whole reach hull is terminal
        labels = dbscan(terminal, _eps(params, reach_area, endpoints, n), params.cluster_min_pts)
        terminal_area, hulls = reach_area, cluster_hulls(terminal, labels)
    elif terminal.shape[0]:
        u = union_of_cluster_hulls(terminal, _eps(params, reach_area, endpoints, n), params.cluster_min_pts, reach,
                                   params.mc_samples, rng)
        terminal_area, labels, hulls = u.area, u.labels, u.hulls
    else:
        terminal_area, labels, hulls = 0.0, np.empty(0, dtype=np.int64), ()
    free_area = max(reach_area - terminal_area, 0.0)
    est = EmpowermentEstimate(
        reach_area=reach_area,
        terminal_area=terminal_area,
        free_area=free_area,
        value=math.log(max(free_area, params.volume_floor)),
        n_free=int(n - terminal.shape[0]),
        n_terminal=int(terminal.shape[0]),
    )
    return ReachSet(est, endpoints, coll, reach, labels, hulls)


def estimate_empowerment(spec: SystemSpec, world: WorldMap, x: SystemState,
                         params: EmpowermentParams, rng: np.random.Generator) -> EmpowermentEstimate:
    """Estimated log free reachable area at ``x`` (nats, floored)."""
    return reachable_set(spec, world, x, params, rng).estimate


def empowerment_field(spec: SystemSpec, world: WorldMap, xs, ys, velocity,
                      params: EmpowermentParams, seed: int) -> np.ndarray:
    """Estimate on the lattice ``xs x ys`` at fixed velocity; shape ``(len(ys), len(xs))``.

    Cell ``(i, j)`` uses its own generator keyed by ``(seed, i, j)``; colliding
    cells get ``log(volume_floor)``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    b = world.bounds_array
    if xs.min() < b[0] or xs.max() > b[2] or ys.min() < b[1] or ys.max() > b[3]:
        raise ContractViolation("grid extends outside the map bounds")
    velocity = np.asarray(velocity, dtype=np.float64)
    floor = math.log(params.volume_floor)
    out = np.full((ys.size, xs.size), floor)
    for i, y in enumerate(ys):
        for j, xv in enumerate(xs):
            if not point_free(world, (xv, y)):
                continue
            rng = np.random.default_rng([seed, i, j])
            out[i, j] = estimate_empowerment(spec, world, SystemState((xv, y), velocity), params, rng).value
    return out


def field_to_dict(xs, ys, velocity, values) -> dict:
    return {
        "grid_spec": {"x": [float(v) for v in xs], "y": [float(v) for v in ys]},
        "velocity": [float(v) for v in velocity],
        "values": np.asarray(values).tolist(),
    }


def append_trace(path, estimates) -> None:
    """Append diagnostic rows to a CSV, writing the header for a new file."""
    names = [f.name for f in fields(EmpowermentEstimate)]
    new = not os.path.exists(path) or os.path.getsize(path) == 0
    with open(path, "a", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=names)
        if new:
            w.writeheader()
        for e in estimates:
            w.writerow(e.as_row())
