import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cstep.dynamics import StateTrajectory
from cstep.errors import ConfigError
from cstep.world import (Box, CorridorTemplate, LidarConfig, WorldMap, check_trajectory, classify_route,
                         corridor_map, distance_to_nearest_obstacle, gaps, lidar_scan, point_free,
                         point_maze, randomize_map, route_lengths)


def room(obstacles=(), r=0.0, size=4.0):
    g = (size / 2, size / 2) if not obstacles else (size - 0.3 - r, size - 0.3 - r)
    return WorldMap(Box((0, 0), (size, size)), tuple(obstacles), goal_position=g, agent_radius=r)


def traj(points):
    pts = np.asarray(points, dtype=float)
    return StateTrajectory(np.hstack([pts, np.zeros_like(pts)]), 0.01)


class TestPointFree:
    def test_empty_center(self):
        assert point_free(room(), (2, 2))

    def test_inside_obstacle(self):
        assert not point_free(room([Box((1, 1), (2, 2))]), (1.5, 1.5))

    def test_touching_inflated_face_collides(self):
        w = room([Box((1, 1), (2, 2))], r=0.25)
        assert not point_free(w, (0.75, 1.5))
        assert point_free(w, (0.75 - 1e-9, 1.5))

    def test_outer_wall_deflated(self):
        w = room(r=0.2)
        assert not point_free(w, (0.2, 2.0))
        assert point_free(w, (0.2001, 2.0))

    def test_corner_is_rounded(self):
        # disk inflation: near a box corner the free region follows a circle
        w = room([Box((1, 1), (2, 2))], r=0.5)
        d = 0.5 / math.sqrt(2)
        assert point_free(w, (2 + d + 1e-6, 2 + d + 1e-6))
        assert not point_free(w, (2 + d - 1e-6, 2 + d - 1e-6))


class TestCheckTrajectory:
    def test_open_space(self):
        out = check_trajectory(room(), traj([[1, 1], [1.5, 1.5], [2, 2]]))
        assert out.free and out.first_collision_index is None
        assert np.array_equal(out.final_position, [2, 2])

    def test_fifth_sample(self):
        w = room([Box((1.0, 0.0), (1.2, 4.0))])
        pts = [[0.5 + 0.1 * i, 2.0] for i in range(10)]
        out = check_trajectory(w, traj(pts))
        assert not out.free and out.first_collision_index == 5

    def test_thin_wall_against_dense_resampling(self):
        w = room([Box((1.5, 0.0), (1.55, 4.0))])
        xs = np.linspace(1.0, 2.0, 100)
        coarse = check_trajectory(w, traj(np.c_[xs, np.full(100, 2.0)]))
        dense_x = np.linspace(1.0, 2.0, 100_000)
        dense = check_trajectory(w, traj(np.c_[dense_x, np.full(dense_x.size, 2.0)]))
        assert not coarse.free and not dense.free
        assert abs(coarse.final_position[0] - dense.final_position[0]) <= 0.0102

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 4), st.floats(0, 4)), min_size=1, max_size=30))
    def test_free_means_every_sample_free(self, pts):
        w = room([Box((1, 1), (2, 2)), Box((2.5, 0.5), (3, 3.5))], r=0.1)
        out = check_trajectory(w, traj(pts))
        if out.free:
            assert all(point_free(w, p) for p in pts)
        else:
            i = out.first_collision_index
            assert all(point_free(w, p) for p in pts[:i]) and not point_free(w, pts[i])


class TestLidar:
    def test_centered_plus_x(self):
        assert abs(lidar_scan(room(), (2, 2))[0] - 2.0) < 1e-12

    def test_cap(self):
        w = WorldMap(Box((-1e3, -1e3), (1e3, 1e3)), goal_position=(0, 0))
        assert np.all(lidar_scan(w, (0, 0), LidarConfig(max_range=5.0)) == 5.0)

    def test_perpendicular_wall(self):
        w = WorldMap(Box((-50, -50), (50, 50)), (Box((0.5, -40), (1.0, 40)),), goal_position=(0, 0))
        assert abs(lidar_scan(w, (0, 0))[0] - 0.5) < 1e-9

    def test_symmetric_room(self):
        s = lidar_scan(room(), (2, 2))
        # 180 beams: +45 indices is a quarter turn, +90 a half turn
        assert np.allclose(s, np.roll(s, -45), atol=1e-9, rtol=0)
        assert np.allclose(s, np.roll(s, -90), atol=1e-9, rtol=0)

    def test_ranges_bounded(self, rng):
        w = point_maze()
        for _ in range(50):
            p = rng.uniform((0.2, 0.2), (4.3, 3.0))
            if point_free(w, p):
                s = lidar_scan(w, p)
                assert s.shape == (180,) and np.all((s >= 0) & (s <= 5.0))


class TestDistance:
    def test_single_wall(self):
        w = WorldMap(Box((-50, -50), (50, 50)), (Box((0.37, -40), (1.0, 40)),), goal_position=(-1, 0))
        assert abs(distance_to_nearest_obstacle(w, (0, 0)) - 0.37) < 1e-12

    def test_surface_zero(self):
        w = room([Box((1, 1), (2, 2))])
        assert distance_to_nearest_obstacle(w, (1.0, 1.5)) == 0.0

    def test_equidistant(self):
        w = room([Box((0.5, 1.5), (1.0, 2.5)), Box((3.0, 1.5), (3.5, 2.5))])
        assert abs(distance_to_nearest_obstacle(w, (2.0, 2.0)) - 1.0) < 1e-12

    @settings(max_examples=200, deadline=None)
    @given(st.floats(0.01, 3.99), st.floats(0.01, 3.99))
    def test_sign_matches_point_free(self, x, y):
        w = room([Box((1, 1), (2, 2)), Box((2.5, 0.5), (3, 3.5))], r=0.15)
        d = distance_to_nearest_obstacle(w, (x, y))
        assert (d > 0) == point_free(w, (x, y))


class TestMaps:
    def test_goal_must_be_free(self):
        with pytest.raises(ConfigError):
            WorldMap(Box((0, 0), (4, 4)), (Box((1, 1), (2, 2)),), goal_position=(1.5, 1.5))

    def test_start_region_must_be_free(self):
        with pytest.raises(ConfigError):
            WorldMap(Box((0, 0), (4, 4)), (Box((1, 1), (2, 2)),), start_region=Box((0.5, 0.5), (1.5, 1.5)),
                     goal_position=(3, 3))

    def test_dict_roundtrip(self):
        w = point_maze()
        assert WorldMap.from_dict(w.to_dict()) == w

    def test_polygons(self):
        p = point_maze().to_polygons()
        assert len(p["obstacles"]) == 2 and len(p["bounds"]) == 4

    def test_maze_gap_ratios(self):
        w = point_maze()
        d = 2 * w.agent_radius
        n, wd = w.region("narrow_gap"), w.region("wide_gap")
        assert math.isclose((n.max_corner[1] - n.min_corner[1]) / d, 2.5)
        assert math.isclose((wd.max_corner[1] - wd.min_corner[1]) / d, 6.0)
        lengths = route_lengths(w)
        assert lengths["narrow_gap"] < lengths["wide_gap"]

    def test_route_classification(self):
        w = point_maze()
        assert classify_route(w, [[0.5, 1.2], [2.0, 1.25], [3.0, 1.2]]) == "narrow_gap"
        assert classify_route(w, [[0.5, 1.2], [1.0, 2.5], [2.0, 2.5]]) == "wide_gap"
        assert classify_route(w, [[0.5, 1.2]]) is None


class TestCorridor:
    def test_degenerate_ranges_deterministic(self):
        t = CorridorTemplate(width_range=(1.0, 1.0), center_range=(0.9, 0.9))
        a = randomize_map(np.random.default_rng(0), t)
        b = randomize_map(np.random.default_rng(99), t)
        assert a == b

    def test_min_gap_always_left(self):
        t = CorridorTemplate()
        g = np.random.default_rng(5)
        for _ in range(100):
            w = randomize_map(g, t)
            lo, hi = gaps(w)
            assert max(lo, hi) >= t.min_gap - 1e-12
            o = w.obstacles[0]
            assert t.width_range[0] - 1e-12 <= o.max_corner[1] - o.min_corner[1] <= t.width_range[1] + 1e-12

    def test_reproducible_sequence(self):
        t = CorridorTemplate()
        a, b = np.random.default_rng(3), np.random.default_rng(3)
        assert [randomize_map(a, t) for _ in range(5)] == [randomize_map(b, t) for _ in range(5)]

    def test_infeasible_template(self):
        with pytest.raises(ConfigError):
            CorridorTemplate(width_range=(2.2, 2.4), min_gap=0.6)

    def test_corridor_size(self):
        w = corridor_map(CorridorTemplate(), 1.0, 1.25)
        assert w.bounds.as_list() == [0.0, 0.0, 5.0, 2.5]
        assert w.clear_x == 2.7
