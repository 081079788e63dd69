import csv

import jsonschema
import numpy as np
import pytest

from cstep.envs import EnvConfig
from cstep.evaluation import EPISODE_FIELDS, EpisodeRecord, evaluate, summarize, write_episodes
from cstep.schemas import EVAL_REPORT
from cstep.world import point_maze


class Hover:
    def act_deterministic(self, obs):
        return np.zeros(2)


class Toward:
    """Bang-bang push toward a fixed point, ignoring obstacles."""

    def __init__(self, target):
        self.target = np.asarray(target, float)

    def act_deterministic(self, obs):
        # obs is scaled by 0.5 in position
        return np.clip(4.0 * (self.target - obs[:2] / 0.5) - obs[2:4], -2, 2)


def rec(reason, ret=1.0, clear=None, goal=None, route=None):
    return EpisodeRecord(0, reason, 10, ret, clear, goal, route, (0.0,) * 5)


def test_hover_policy_always_times_out():
    rep = evaluate(Hover(), EnvConfig(world=point_maze(), max_steps=30), 7, seed=0)
    assert rep.timeout_rate == 1.0 and rep.success_rate == 0 and rep.collision_rate == 0
    assert rep.avg_clear_time is None and rep.n_episodes == 7


def test_straight_line_into_wall_collides():
    rep = evaluate(Toward((3.6, 0.5)), EnvConfig(world=point_maze(), max_steps=200), 5, seed=1)
    assert rep.collision_rate == 1.0


def test_rates_are_exact_fractions():
    recs = [rec("goal_reached", goal=3.0, clear=2.0)] * 3 + [rec("collision")] * 2 + [rec("timeout", clear=4.0)] * 2
    rep = summarize(recs)
    assert rep.success_rate == 3 / 7 and rep.collision_rate == 2 / 7 and rep.timeout_rate == 2 / 7
    assert rep.avg_clear_time == 2.0 and rep.avg_clear_time_all == pytest.approx((3 * 2.0 + 2 * 4.0) / 5)
    assert rep.avg_goal_time == 3.0


def test_rate_identity_and_schema():
    rep = evaluate(Toward((3.6, 1.25)), EnvConfig(world=point_maze(), max_steps=120), 12, seed=4)
    assert rep.success_rate + rep.collision_rate + rep.timeout_rate == pytest.approx(1.0, abs=1e-12)
    assert sum(rep.route_counts.values()) <= rep.n_episodes
    jsonschema.validate(rep.to_dict(), EVAL_REPORT)


def test_same_seed_same_report():
    cfg = EnvConfig(world=point_maze(), max_steps=60)
    a = evaluate(Toward((3.0, 2.5)), cfg, 4, seed=9).to_dict()
    b = evaluate(Toward((3.0, 2.5)), cfg, 4, seed=9).to_dict()
    assert a == b


def test_episode_csv(tmp_path):
    recs = []
    evaluate(Hover(), EnvConfig(world=point_maze(), max_steps=5), 3, seed=0, records=recs)
    write_episodes(tmp_path / "e.csv", recs)
    rows = list(csv.reader(open(tmp_path / "e.csv")))
    assert tuple(rows[0]) == EPISODE_FIELDS and len(rows) == 4
    assert rows[1][1] == "timeout" and rows[1][2] == "5"
