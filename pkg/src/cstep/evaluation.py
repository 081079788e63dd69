"""Deterministic-policy evaluation and its summary report."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, asdict, field
from typing import Optional

import numpy as np

from .envs import EnvConfig, NavEnv
from .world import classify_route

THRESHOLDS = (0.1, 0.2, 0.3, 0.4, 0.5)
EPISODE_FIELDS = ("episode", "reason", "steps", "return", "clear_time", "goal_time", "route",
                  *(f"time_under_{t}" for t in THRESHOLDS))


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    reason: str
    steps: int
    ret: float
    clear_time: Optional[float]
    goal_time: Optional[float]
    route: Optional[str]
    time_under: tuple

    def row(self) -> list:
        return [self.episode, self.reason, self.steps, repr(self.ret),
                "" if self.clear_time is None else repr(self.clear_time),
                "" if self.goal_time is None else repr(self.goal_time),
                self.route or "", *(repr(v) for v in self.time_under)]


@dataclass(frozen=True)
class EvalReport:
    """Rates use ``n_episodes`` as denominator.

    ``avg_clear_time`` averages successful episodes only; ``avg_clear_time_all``
    averages every episode that passed the obstacle. ``time_under_threshold``
    is seconds per episode over all episodes.
    """

    n_episodes: int
    success_rate: float
    collision_rate: float
    timeout_rate: float
    avg_clear_time: Optional[float]
    avg_clear_time_all: Optional[float]
    avg_goal_time: Optional[float]
    time_under_threshold: dict
    mean_return: float
    route_counts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _mean_or_none(v):
    return float(np.mean(v)) if len(v) else None


def run_episode(policy, env: NavEnv, rng: np.random.Generator, index: int = 0) -> EpisodeRecord:
    obs = env.reset(rng)
    w = env.world
    dt = env.cfg.control_dt
    under = np.zeros(len(THRESHOLDS))
    positions = [env.state.position.copy()]
    ret = 0.0
    clear_time = None
    while True:
        res = env.step(policy.act_deterministic(obs))
        ret += res.reward
        p = env.state.position
        positions.append(p.copy())
        d = res.info["distance_to_obstacle"]
        under += dt * (d < np.asarray(THRESHOLDS))
        if clear_time is None and w.clear_x is not None and p[0] > w.clear_x and res.termination_reason != "collision":
            clear_time = env.steps * dt
        obs = res.observation
        if res.terminated:
            break
    reason = res.termination_reason
    return EpisodeRecord(
        episode=index, reason=reason, steps=env.steps, ret=ret, clear_time=clear_time,
        goal_time=env.steps * dt if reason == "goal_reached" else None,
        route=classify_route(w, np.array(positions)) if w.regions else None,
        time_under=tuple(float(u) for u in under))


def evaluate(policy, env_cfg: EnvConfig, n_episodes: int, seed: int, records: Optional[list] = None) -> EvalReport:
    """Episode ``j`` draws its map and start from ``default_rng([seed, j])``, so
    different policies evaluated with one seed face identical episodes."""
    env = NavEnv(env_cfg)
    recs = [run_episode(policy, env, np.random.default_rng([int(seed), j]), j) for j in range(n_episodes)]
    if records is not None:
        records.extend(recs)
    return summarize(recs)


def summarize(recs: list) -> EvalReport:
    n = len(recs)
    count = {r: sum(e.reason == r for e in recs) for r in ("goal_reached", "collision", "timeout")}
    routes = {}
    for e in recs:
        if e.route is not None:
            routes[e.route] = routes.get(e.route, 0) + 1
    return EvalReport(
        n_episodes=n,
        success_rate=count["goal_reached"] / n if n else 0.0,
        collision_rate=count["collision"] / n if n else 0.0,
        timeout_rate=count["timeout"] / n if n else 0.0,
        avg_clear_time=_mean_or_none([e.clear_time for e in recs if e.reason == "goal_reached" and e.clear_time is not None]),
        avg_clear_time_all=_mean_or_none([e.clear_time for e in recs if e.clear_time is not None]),
        avg_goal_time=_mean_or_none([e.goal_time for e in recs if e.goal_time is not None]),
        time_under_threshold={str(t): (float(np.mean([e.time_under[k] for e in recs])) if n else 0.0)
                              for k, t in enumerate(THRESHOLDS)},
        mean_return=float(np.mean([e.ret for e in recs])) if n else math.nan,
        route_counts=dict(sorted(routes.items())),
    )


def write_episodes(path, recs: list) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(EPISODE_FIELDS)
        for r in recs:
            w.writerow(r.row())
