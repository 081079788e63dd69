"""Obstacle maps, collision checks, LiDAR and corridor randomisation.

The agent is a disk of radius ``agent_radius``. A position collides when the
disk touches the outer walls or any axis-aligned box (closed sets, so
touching counts as a collision).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import kernels
from .dynamics import StateTrajectory
from .errors import ConfigError, ContractViolation


@dataclass(frozen=True)
class Box:
    min_corner: tuple
    max_corner: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in self.min_corner)
        hi = tuple(float(v) for v in self.max_corner)
        if not (lo[0] < hi[0] and lo[1] < hi[1]):
            raise ConfigError(f"box corners not ordered: {lo} {hi}")
        object.__setattr__(self, "min_corner", lo)
        object.__setattr__(self, "max_corner", hi)

    @classmethod
    def from_list(cls, v):
        return cls((v[0], v[1]), (v[2], v[3]))

    def as_list(self):
        return [*self.min_corner, *self.max_corner]

    def contains(self, p) -> bool:
        return (self.min_corner[0] <= p[0] <= self.max_corner[0]
                and self.min_corner[1] <= p[1] <= self.max_corner[1])

    def polygon(self):
        (x0, y0), (x1, y1) = self.min_corner, self.max_corner
        return [[x0, y0], [x1, y0], [x1, y1], [x0, y1]]


Obstacle = Box


@dataclass(frozen=True)
class WorldMap:
    bounds: Box
    obstacles: tuple = ()
    start_region: Optional[Box] = None
    goal_position: tuple = (0.0, 0.0)
    goal_radius: float = 0.2
    agent_radius: float = 0.0
    # named boxes used for route classification, e.g. ("narrow_gap", Box)
    regions: tuple = ()
    # x coordinate past which the central obstacle counts as cleared
    clear_x: Optional[float] = None
    _boxes: np.ndarray = field(init=False, repr=False, compare=False)
    _bounds: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "goal_position", tuple(float(v) for v in self.goal_position))
        object.__setattr__(self, "regions", tuple((str(k), b) for k, b in self.regions))
        if self.goal_radius <= 0:
            raise ConfigError("must be > 0", "map.goal_radius")
        if self.agent_radius < 0:
            raise ConfigError("must be >= 0", "map.agent_radius")
        boxes = np.array([o.as_list() for o in self.obstacles], dtype=np.float64).reshape(-1, 4)
        object.__setattr__(self, "_boxes", boxes)
        object.__setattr__(self, "_bounds", np.array(self.bounds.as_list(), dtype=np.float64))
        if not point_free(self, self.goal_position):
            raise ConfigError("goal position collides or lies outside bounds", "map.goal_position")
        if self.start_region is not None:
            s = self.start_region
            for corner in ((s.min_corner[0], s.min_corner[1]), (s.max_corner[0], s.max_corner[1]),
                           (s.min_corner[0], s.max_corner[1]), (s.max_corner[0], s.min_corner[1])):
                if distance_to_nearest_obstacle(self, corner) <= 0:
                    raise ConfigError("start region must lie in free space", "map.start_region")

    @property
    def boxes(self) -> np.ndarray:
        return self._boxes

    @property
    def bounds_array(self) -> np.ndarray:
        return self._bounds

    @property
    def min_thickness(self) -> float:
        """Smallest extent of any disk-inflated obstacle (inf with no obstacles)."""
        if not self.obstacles:
            return math.inf
        ext = np.minimum(self._boxes[:, 2] - self._boxes[:, 0], self._boxes[:, 3] - self._boxes[:, 1])
        return float(ext.min() + 2.0 * self.agent_radius)

    @property
    def diagonal(self) -> float:
        b = self._bounds
        return float(math.hypot(b[2] - b[0], b[3] - b[1]))

    def region(self, name: str) -> Optional[Box]:
        for k, b in self.regions:
            if k == name:
                return b
        return None

    def with_obstacles(self, obstacles: Sequence[Box]) -> "WorldMap":
        return WorldMap(self.bounds, tuple(obstacles), self.start_region, self.goal_position,
                        self.goal_radius, self.agent_radius, self.regions, self.clear_x)

    def to_dict(self) -> dict:
        d = {
            "bounds": self.bounds.as_list(),
            "obstacles": [o.as_list() for o in self.obstacles],
            "start_region": self.start_region.as_list() if self.start_region else None,
            "goal_position": list(self.goal_position),
            "goal_radius": self.goal_radius,
            "agent_radius": self.agent_radius,
        }
        if self.regions:
            d["regions"] = {k: b.as_list() for k, b in self.regions}
        if self.clear_x is not None:
            d["clear_x"] = self.clear_x
        return d

    def to_polygons(self) -> dict:
        """Plot-friendly JSON: every obstacle and the outer wall as vertex lists."""
        return {
            "bounds": self.bounds.polygon(),
            "obstacles": [o.polygon() for o in self.obstacles],
            "goal": {"center": list(self.goal_position), "radius": self.goal_radius},
            "start_region": self.start_region.polygon() if self.start_region else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "WorldMap":
        return cls(
            bounds=Box.from_list(d["bounds"]),
            obstacles=tuple(Box.from_list(o) for o in d.get("obstacles", [])),
            start_region=Box.from_list(d["start_region"]) if d.get("start_region") else None,
            goal_position=tuple(d["goal_position"]),
            goal_radius=d.get("goal_radius", 0.2),
            agent_radius=d.get("agent_radius", 0.0),
            regions=tuple((k, Box.from_list(v)) for k, v in d.get("regions", {}).items()),
            clear_x=d.get("clear_x"),
        )


@dataclass(frozen=True)
class LidarConfig:
    beam_count: int = 180
    max_range: float = 5.0
    _cos: np.ndarray = field(init=False, repr=False, compare=False)
    _sin: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.beam_count < 1 or self.max_range <= 0:
            raise ConfigError("beam_count >= 1 and max_range > 0 required", "env.lidar")
        ang = 2.0 * np.pi * np.arange(self.beam_count) / self.beam_count
        object.__setattr__(self, "_cos", np.cos(ang))
        object.__setattr__(self, "_sin", np.sin(ang))


@dataclass(frozen=True)
class TrajectoryOutcome:
    free: bool
    first_collision_index: Optional[int]
    final_position: np.ndarray


def point_free(world: WorldMap, p) -> bool:
    return not kernels.collides(float(p[0]), float(p[1]), world.boxes, world.bounds_array,
                                world.agent_radius)


def check_trajectory(world: WorldMap, traj: StateTrajectory) -> TrajectoryOutcome:
    """Test sampled positions in order and report the first collision."""
    pos = traj.positions
    if pos.shape[0] == 0:
        raise ContractViolation("empty trajectory")
    hit = kernels.collides(pos[:, 0], pos[:, 1], world.boxes, world.bounds_array, world.agent_radius)
    idx = np.flatnonzero(hit)
    if idx.size:
        i = int(idx[0])
        return TrajectoryOutcome(False, i, pos[i].copy())
    return TrajectoryOutcome(True, None, pos[-1].copy())


def lidar_scan(world: WorldMap, position, cfg: LidarConfig = LidarConfig()) -> np.ndarray:
    """Range to the nearest wall or box along each beam, capped at ``max_range``."""
    return kernels.lidar_scan(float(position[0]), float(position[1]), cfg._cos, cfg._sin,
                              world.boxes, world.bounds_array, cfg.max_range)


def _box_sdf(boxes: np.ndarray, p) -> np.ndarray:
    cx = 0.5 * (boxes[:, 0] + boxes[:, 2])
    cy = 0.5 * (boxes[:, 1] + boxes[:, 3])
    hx = 0.5 * (boxes[:, 2] - boxes[:, 0])
    hy = 0.5 * (boxes[:, 3] - boxes[:, 1])
    qx = np.abs(p[0] - cx) - hx
    qy = np.abs(p[1] - cy) - hy
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return outside + inside


def distance_to_nearest_obstacle(world: WorldMap, p) -> float:
    """Signed clearance between the agent disk and the nearest surface.

    Positive in free space, zero on contact, negative when overlapping.
    """
    b = world.bounds_array
    d = min(p[0] - b[0], b[2] - p[0], p[1] - b[1], b[3] - p[1])
    if world.obstacles:
        d = min(d, float(_box_sdf(world.boxes, p).min()))
    return float(d - world.agent_radius)


@dataclass(frozen=True)
class CorridorTemplate:
    """Fixed 5 m x 2.5 m corridor with one randomised central obstacle.

    The obstacle spans ``obstacle_x`` along the corridor; its lateral width and
    centre are drawn per episode.
    """

    bounds: tuple = (0.0, 0.0, 5.0, 2.5)
    obstacle_x: tuple = (2.3, 2.7)
    width_range: tuple = (0.6, 1.4)
    center_range: tuple = (0.3, 2.2)
    min_gap: float = 0.6
    start_region: tuple = (0.3, 0.5, 0.8, 2.0)
    goal_position: tuple = (4.5, 1.25)
    goal_radius: float = 0.25
    agent_radius: float = 0.1

    def __post_init__(self):
        if not self.width_range[0] <= self.width_range[1]:
            raise ConfigError("width_range must be ordered", "map.width_range")
        if not self.center_range[0] <= self.center_range[1]:
            raise ConfigError("center_range must be ordered", "map.center_range")
        if self.width_range[0] <= 0:
            raise ConfigError("widths must be > 0", "map.width_range")
        if self.min_gap <= 0:
            raise ConfigError("must be > 0", "map.min_gap")
        # feasible set shrinks with width, so checking the widest obstacle suffices
        if not _feasible_centers(self, self.width_range[1]):
            raise ConfigError("no obstacle placement leaves min_gap", "map")

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _feasible_centers(t: CorridorTemplate, width: float) -> list:
    """Intervals of obstacle centres leaving at least one gap >= min_gap."""
    y0, y1 = t.bounds[1], t.bounds[3]
    c_lo = max(t.center_range[0], y0 + width / 2)
    c_hi = min(t.center_range[1], y1 - width / 2)
    out = []
    for lo, hi in ((c_lo, min(c_hi, y1 - width / 2 - t.min_gap)),   # gap above
                   (max(c_lo, y0 + width / 2 + t.min_gap), c_hi)):  # gap below
        if lo <= hi:
            out.append((lo, hi))
    if len(out) == 2 and out[1][0] <= out[0][1]:
        out = [(out[0][0], max(out[0][1], out[1][1]))]
    return out


def corridor_map(t: CorridorTemplate, width: float, center: float) -> WorldMap:
    y0, y1 = t.bounds[1], t.bounds[3]
    lo = max(center - width / 2, y0)
    hi = min(center + width / 2, y1)
    obstacle = Box((t.obstacle_x[0], lo), (t.obstacle_x[1], hi))
    return WorldMap(
        bounds=Box.from_list(t.bounds),
        obstacles=(obstacle,),
        start_region=Box.from_list(t.start_region),
        goal_position=tuple(t.goal_position),
        goal_radius=t.goal_radius,
        agent_radius=t.agent_radius,
        clear_x=t.obstacle_x[1],
    )


def gaps(world: WorldMap) -> tuple:
    """Lateral gaps (below, above) around the first obstacle of a corridor map."""
    o = world.obstacles[0]
    return o.min_corner[1] - world.bounds.min_corner[1], world.bounds.max_corner[1] - o.max_corner[1]


def randomize_map(rng: np.random.Generator, template: CorridorTemplate) -> WorldMap:
    """Draw the obstacle width, then a centre uniformly over the feasible set."""
    w_lo, w_hi = template.width_range
    width = w_lo if w_lo == w_hi else float(rng.uniform(w_lo, w_hi))
    intervals = _feasible_centers(template, width)
    if not intervals:
        raise ConfigError("no obstacle placement leaves min_gap", "map")
    lengths = np.array([hi - lo for lo, hi in intervals])
    total = float(lengths.sum())
    if total == 0.0:
        center = intervals[0][0]
    else:
        u = float(rng.uniform(0.0, total))
        k = 0
        while k < len(intervals) - 1 and u > lengths[k]:
            u -= lengths[k]
            k += 1
        center = intervals[k][0] + min(u, lengths[k])
    return corridor_map(template, width, center)


def point_maze() -> WorldMap:
    """Two routes through a wall at x in [1.4, 2.6]: a 0.5 m gap on the straight
    start-goal line (2.5 agent diameters) and a 1.2 m gap above it (6 diameters).
    """
    radius = 0.1
    return WorldMap(
        bounds=Box((0.0, 0.0), (4.5, 3.2)),
        obstacles=(Box((1.4, 0.0), (2.6, 1.0)), Box((1.4, 1.5), (2.6, 2.0))),
        start_region=Box((0.3, 0.75), (0.7, 1.75)),
        goal_position=(3.6, 1.25),
        goal_radius=0.25,
        agent_radius=radius,
        regions=(("narrow_gap", Box((1.4, 1.0), (2.6, 1.5))),
                 ("wide_gap", Box((1.4, 2.0), (2.6, 3.2)))),
        clear_x=2.6,
    )


def route_lengths(world: WorldMap) -> dict:
    """Polyline length start-centre -> gap-centre -> goal for every named gap."""
    s = world.start_region
    start = np.array([(s.min_corner[0] + s.max_corner[0]) / 2, (s.min_corner[1] + s.max_corner[1]) / 2])
    goal = np.array(world.goal_position)
    out = {}
    for name, b in world.regions:
        gx0, gy0 = b.min_corner
        gx1, gy1 = b.max_corner
        gy = (gy0 + gy1) / 2
        a = np.array([gx0, gy])
        c = np.array([gx1, gy])
        out[name] = float(np.linalg.norm(a - start) + (gx1 - gx0) + np.linalg.norm(goal - c))
    return out


def classify_route(world: WorldMap, positions: np.ndarray) -> Optional[str]:
    """Name of the first region the path enters, or ``None``."""
    positions = np.asarray(positions).reshape(-1, 2)
    first = None
    for name, b in world.regions:
        inside = ((positions[:, 0] >= b.min_corner[0]) & (positions[:, 0] <= b.max_corner[0])
                  & (positions[:, 1] >= b.min_corner[1]) & (positions[:, 1] <= b.max_corner[1]))
        idx = np.flatnonzero(inside)
        if idx.size and (first is None or idx[0] < first[0]):
            first = (int(idx[0]), name)
    return None if first is None else first[1]
