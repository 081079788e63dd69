import csv
import math

import numpy as np
import pytest

from cstep.dynamics import SystemSpec
from cstep.empowerment import EmpowermentParams
from cstep.envs import EnvConfig, NavEnv, StepResult, observation_scale, write_trace
from cstep.errors import ConfigError, ContractViolation
from cstep.reward import RewardConfig, nav_reward
from cstep.world import Box, CorridorTemplate, LidarConfig, WorldMap, gaps, point_free, point_maze

FAST_EMP = EmpowermentParams(n_trajectories=30, mc_samples=2000)


def maze_env(empowered=False, **kw):
    return NavEnv(EnvConfig(world=point_maze(), reward=RewardConfig(empowered=empowered), empowerment=FAST_EMP, **kw))


def corridor_env(empowered=False, **kw):
    return NavEnv(EnvConfig(world=CorridorTemplate(), reward=RewardConfig(safety_coefficient=0.5, empowered=empowered),
                            empowerment=FAST_EMP, lidar=LidarConfig(), **kw))


class TestReset:
    def test_maze_start(self, rng):
        env = maze_env()
        obs = env.reset(rng)
        s = env.world.start_region
        assert s.contains(env.state.position)
        assert np.array_equal(env.state.velocity, [0, 0])
        assert obs.shape == (4,) and np.array_equal(obs[2:], [0, 0])

    def test_seeded_reset_identical(self):
        a, b = corridor_env(), corridor_env()
        oa = a.reset(np.random.default_rng(5))
        ob = b.reset(np.random.default_rng(5))
        assert oa.tobytes() == ob.tobytes() and a.world == b.world

    def test_corridor_resets_respect_min_gap(self):
        env = corridor_env()
        g = np.random.default_rng(0)
        seen = set()
        for _ in range(100):
            env.reset(g)
            assert max(gaps(env.world)) >= CorridorTemplate().min_gap - 1e-12
            seen.add(env.world.obstacles[0])
        assert len(seen) == 100

    def test_observation_layout(self, rng):
        env = corridor_env()
        obs = env.reset(rng)
        assert obs.shape == (184,)
        g = env.world.goal_position
        assert np.allclose(obs[:2], np.subtract(g, env.state.position))
        assert np.all((obs[4:] >= 0) & (obs[4:] <= 5.0))
        assert observation_scale(env.cfg).shape == (184,)


class TestStep:
    def test_goal_reached(self):
        w = WorldMap(Box((0, 0), (4, 4)), start_region=Box((1.9, 1.9), (2.0, 2.0)), goal_position=(2.0, 2.0),
                     goal_radius=0.3)
        env = NavEnv(EnvConfig(world=w))
        env.reset(np.random.default_rng(0))
        res = env.step([0.0, 0.0])
        assert res.terminated and res.termination_reason == "goal_reached"
        assert res.reward == nav_reward(env.state.position, w.goal_position)

    def test_wall_collision(self):
        w = WorldMap(Box((0, 0), (4, 4)), start_region=Box((3.897, 2.0), (3.899, 2.01)), goal_position=(1, 1),
                     agent_radius=0.1)
        env = NavEnv(EnvConfig(world=w))
        env.reset(np.random.default_rng(0))
        res = env.step([2.0, 0.0])
        assert res.terminated and res.termination_reason == "collision"
        assert not point_free(w, env.state.position)

    def test_unempowered_reward_is_nav_reward(self, rng):
        env = maze_env()
        env.reset(rng)
        for _ in range(30):
            res = env.step(rng.uniform(-2, 2, 2))
            assert res.reward == nav_reward(env.state.position, env.world.goal_position)
            assert res.info["empowerment_value"] is None
            if res.terminated:
                break

    def test_timeout(self, rng):
        env = maze_env(max_steps=5)
        env.reset(rng)
        reasons = [env.step([0.0, 0.0]).termination_reason for _ in range(5)]
        assert reasons == ["none"] * 4 + ["timeout"]

    def test_step_after_termination_rejected(self, rng):
        env = maze_env(max_steps=1)
        env.reset(rng)
        env.step([0, 0])
        with pytest.raises(ContractViolation):
            env.step([0, 0])

    def test_step_before_reset_rejected(self):
        with pytest.raises(ContractViolation):
            maze_env().step([0, 0])

    def test_actions_clipped(self, rng):
        a, b = maze_env(), maze_env()
        a.reset(np.random.default_rng(1))
        b.reset(np.random.default_rng(1))
        ra = a.step([50.0, -50.0])
        rb = b.step([2.0, -2.0])
        assert ra.observation.tobytes() == rb.observation.tobytes()

    def test_empowered_collision_uses_floor(self):
        w = WorldMap(Box((0, 0), (4, 4)), start_region=Box((3.897, 2.0), (3.899, 2.01)), goal_position=(1, 1),
                     agent_radius=0.1)
        env = NavEnv(EnvConfig(world=w, reward=RewardConfig(empowered=True), empowerment=FAST_EMP))
        env.reset(np.random.default_rng(0))
        while True:
            res = env.step([2.0, 0.0])
            if res.terminated:
                break
        assert res.termination_reason == "collision"
        assert res.info["empowerment_value"] == math.log(1e-4)
        assert res.reward == nav_reward(env.state.position, w.goal_position) * math.log(1e-4)

    def test_step_result_contract(self):
        with pytest.raises(ContractViolation):
            StepResult(np.zeros(4), 0.0, True, "none", {})
        with pytest.raises(ContractViolation):
            StepResult(np.zeros(4), 0.0, False, "exploded", {})


class TestInvariants:
    def test_episode_determinism(self):
        def run():
            env = corridor_env(empowered=True)
            g = np.random.default_rng(11)
            env.reset(g)
            out = []
            acts = np.random.default_rng(3).uniform(-2, 2, (40, 2))
            for a in acts:
                r = env.step(a)
                out.append((r.observation.tobytes(), r.reward, r.termination_reason))
                if r.terminated:
                    break
            return out
        assert run() == run()

    def test_empowered_and_plain_share_transitions(self):
        acts = np.random.default_rng(3).uniform(-2, 2, (60, 2))
        trajs = []
        for emp in (False, True):
            env = corridor_env(empowered=emp)
            env.reset(np.random.default_rng(2))
            t = []
            for a in acts:
                r = env.step(a)
                t.append(r.observation.tobytes())
                if r.terminated:
                    break
            trajs.append(t)
        assert trajs[0] == trajs[1]

    def test_goal_delta_bounded(self, rng):
        env = corridor_env()
        for _ in range(5):
            obs = env.reset(rng)
            while True:
                assert np.linalg.norm(obs[:2]) <= env.world.diagonal
                assert np.all(obs[4:] <= 5.0)
                r = env.step(rng.uniform(-2, 2, 2))
                obs = r.observation
                if r.terminated:
                    break

    def test_stride_holds_value(self, rng):
        cfg = EnvConfig(world=point_maze(), reward=RewardConfig(empowered=True),
                        empowerment=EmpowermentParams(n_trajectories=30, mc_samples=2000, stride=3))
        env = NavEnv(cfg)
        env.reset(rng)
        vals = [env.step([0.5, 0.0]).info["empowerment_value"] for _ in range(6)]
        assert vals[0] == vals[1] == vals[2] and vals[3] == vals[4] == vals[5]


class TestConfig:
    def test_needs_world(self):
        with pytest.raises(ConfigError):
            EnvConfig()

    @pytest.mark.parametrize("kw", [{"control_dt": 0}, {"max_steps": 0}, {"substeps": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ConfigError):
            EnvConfig(world=point_maze(), **kw)

    def test_narrow_route_must_be_shorter(self):
        m = point_maze()
        flipped = WorldMap(m.bounds, m.obstacles, m.start_region, m.goal_position, m.goal_radius, m.agent_radius,
                           (("narrow_gap", m.region("wide_gap")), ("wide_gap", m.region("narrow_gap"))), m.clear_x)
        with pytest.raises(ConfigError):
            NavEnv(EnvConfig(world=flipped))


def test_trace_export(tmp_path, rng):
    env = NavEnv(EnvConfig(world=point_maze(), reward=RewardConfig(empowered=True), empowerment=FAST_EMP),
                 record_trace=True)
    env.reset(rng)
    for _ in range(5):
        env.step([1.0, 0.0])
    path = tmp_path / "ep.csv"
    write_trace(path, env.trace)
    rows = list(csv.reader(open(path)))
    assert rows[0] == ["t", "x", "y", "vx", "vy", "reward", "emp_value", "dist_obstacle"]
    assert len(rows) == 6
    assert abs(float(rows[-1][0]) - 0.25) < 1e-12
