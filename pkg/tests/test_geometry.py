import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cstep.errors import ContractViolation
from cstep.geometry import (ConvexPolygon, convex_hull, dbscan, polygon_area,
                            union_area_of_cluster_hulls, union_of_cluster_hulls)

SQUARE = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
points = st.lists(st.tuples(st.floats(-10, 10), st.floats(-10, 10)), min_size=0, max_size=40)


def box_poly(x0, y0, x1, y1):
    return ConvexPolygon([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])


class TestHull:
    def test_square_plus_center(self):
        h = convex_hull(np.vstack([SQUARE, [[0.5, 0.5]]]))
        assert len(h) == 4 and polygon_area(h) == 1.0

    def test_collinear_degenerate(self):
        h = convex_hull([[0, 0], [1, 1], [2, 2]])
        assert h.degenerate and polygon_area(h) == 0.0

    def test_disk_area(self, rng):
        r = np.sqrt(rng.random(10_000))
        t = 2 * np.pi * rng.random(10_000)
        a = polygon_area(convex_hull(np.c_[r * np.cos(t), r * np.sin(t)]))
        assert math.pi * 0.97 <= a <= math.pi

    def test_disk_area_dense_reference(self, rng):
        r = np.sqrt(rng.random(1_000_000))
        t = 2 * np.pi * rng.random(1_000_000)
        a = polygon_area(convex_hull(np.c_[r * np.cos(t), r * np.sin(t)]))
        assert math.pi * 0.999 <= a <= math.pi

    def test_ccw_no_repeats(self, rng):
        h = convex_hull(rng.normal(size=(200, 2)))
        v = h.vertices
        e1 = np.roll(v, -1, axis=0) - v
        e2 = np.roll(v, -2, axis=0) - np.roll(v, -1, axis=0)
        assert np.all(e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] > 0)
        assert len({tuple(p) for p in v}) == len(v)

    def test_duplicates(self):
        assert len(convex_hull([[1, 1]] * 5)) == 1
        assert convex_hull(np.empty((0, 2))).degenerate

    @settings(max_examples=100, deadline=None)
    @given(points)
    def test_idempotent(self, pts):
        h = convex_hull(pts)
        assert abs(polygon_area(convex_hull(h.vertices)) - polygon_area(h)) < 1e-12

    @settings(max_examples=100, deadline=None)
    @given(points, st.tuples(st.floats(-10, 10), st.floats(-10, 10)))
    def test_adding_points_never_shrinks(self, pts, extra):
        a = polygon_area(convex_hull(pts))
        b = polygon_area(convex_hull(list(pts) + [extra]))
        assert b >= a - 1e-9 * max(1.0, a)

    @settings(max_examples=100, deadline=None)
    @given(points, st.floats(0, 2 * math.pi))
    def test_rotation_invariant(self, pts, theta):
        p = np.asarray(pts, dtype=float).reshape(-1, 2)
        R = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
        a = polygon_area(convex_hull(p))
        b = polygon_area(convex_hull(p @ R.T))
        assert abs(a - b) <= 1e-9 * max(a, 1e-3) + 1e-12


class TestArea:
    def test_empty(self):
        assert polygon_area(ConvexPolygon()) == 0.0

    def test_unit_square(self):
        assert polygon_area(ConvexPolygon(SQUARE)) == 1.0

    def test_triangle(self):
        assert polygon_area(ConvexPolygon([[0, 0], [1, 0], [0, 1]])) == 0.5


class TestDbscan:
    def test_two_groups(self, rng):
        eps = 0.1
        a = rng.uniform(0, eps / 2, (10, 2))
        labels = dbscan(np.vstack([a, a + 10 * eps]), eps, 3)
        assert set(labels) == {0, 1}
        assert len(set(labels[:10])) == 1 and len(set(labels[10:])) == 1

    def test_identical_points(self):
        assert np.all(dbscan(np.ones((7, 2)), 0.1, 3) == 0)

    def test_isolated_noise(self):
        pts = np.vstack([np.zeros((5, 2)), [[5.0, 5.0]]])
        assert dbscan(pts, 0.5, 3)[-1] == -1

    def test_contiguous_ids(self, rng):
        labels = dbscan(rng.uniform(0, 10, (300, 2)), 0.6, 3)
        ids = sorted(set(labels) - {-1})
        assert ids == list(range(len(ids)))

    def test_preconditions(self):
        with pytest.raises(ContractViolation):
            dbscan(np.zeros((3, 2)), 0.0, 3)
        with pytest.raises(ContractViolation):
            dbscan(np.zeros((3, 2)), 0.1, 0)

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.tuples(st.integers(0, 40), st.integers(0, 40)), min_size=1, max_size=60),
           st.integers(-100, 100), st.integers(-100, 100))
    def test_translation_invariant(self, pts, dx, dy):
        # integer lattice coordinates keep distances exact under translation
        p = np.asarray(pts, dtype=float) * 0.25
        a = dbscan(p, 0.6, 3)
        b = dbscan(p + [dx, dy], 0.6, 3)
        assert np.array_equal(a, b)


class TestUnion:
    def test_no_terminal_points(self, rng):
        assert union_area_of_cluster_hulls(np.empty((0, 2)), 0.1, 3, box_poly(0, 0, 4, 4), 1000, rng) == 0.0

    def test_full_overlap_exact(self, rng):
        g = np.random.default_rng(1)
        pts = np.vstack([SQUARE, g.random((40, 2))])
        clip = convex_hull(pts)
        u = union_of_cluster_hulls(pts, 2.0, 3, clip, 10_000, rng)
        assert u.area == polygon_area(clip)

    def test_full_overlap_by_sampling(self, rng):
        # hull equals clip but the cover check is bypassed by a tiny shrink of
        # the clip polygon's bounding box: estimate must stay within 3 sigma
        clip = box_poly(0, 0, 1, 1)
        pts = np.vstack([SQUARE * 1.0000001 - 5e-8, rng.random((30, 2))])
        u = union_of_cluster_hulls(pts, 2.0, 3, clip, 20_000, rng)
        assert abs(u.area - 1.0) <= 3 * math.sqrt(0.25 / 20_000) + 1e-9

    def test_two_disjoint_unit_squares(self, rng):
        g = np.random.default_rng(2)
        a = np.vstack([SQUARE, g.random((20, 2))]) + [0.5, 0.5]
        b = np.vstack([SQUARE, g.random((20, 2))]) + [2.5, 2.5]
        area = union_area_of_cluster_hulls(np.vstack([a, b]), 0.6, 3, box_poly(0, 0, 4, 4), 100_000, rng)
        assert abs(area - 2.0) < 0.05

    def test_overlapping_counted_once(self, rng):
        # 2x2 lattices offset by 1 m merge into one 3x2 cluster; area 6 either way
        g = np.linspace(0, 2, 11)
        a = np.stack(np.meshgrid(g, g), -1).reshape(-1, 2)
        b = a + [1.0, 0.0]
        area = union_area_of_cluster_hulls(np.vstack([a, b]), 0.3, 3, box_poly(-1, -1, 5, 5), 100_000, rng)
        assert abs(area - 6.0) < 0.15

    @settings(max_examples=40, deadline=None)
    @given(st.lists(st.tuples(st.floats(-1, 3), st.floats(-1, 3)), min_size=3, max_size=30), st.integers(0, 2**32))
    def test_clamped_to_clip(self, pts, seed):
        clip = box_poly(0, 0, 2, 2)
        area = union_area_of_cluster_hulls(pts, 0.8, 3, clip, 2000, np.random.default_rng(seed))
        assert 0.0 <= area <= polygon_area(clip)

    def test_seeded(self):
        pts = np.random.default_rng(0).random((50, 2)) * 2
        clip = box_poly(0, 0, 3, 3)
        a = union_area_of_cluster_hulls(pts, 0.5, 3, clip, 5000, np.random.default_rng(9))
        b = union_area_of_cluster_hulls(pts, 0.5, 3, clip, 5000, np.random.default_rng(9))
        assert a == b
