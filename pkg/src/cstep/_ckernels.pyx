# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Mirrors ``_pykernels`` operation for operation."""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, isfinite, INFINITY

cnp.import_array()

DEF KIND_SINGLE_INTEGRATOR = 2


cdef inline Py_ssize_t _segment_index(Py_ssize_t i, double dt, double seg_dt, Py_ssize_t n_seg) noexcept nogil:
    cdef Py_ssize_t seg = <Py_ssize_t>(((i + 0.5) * dt) / seg_dt)
    if seg >= n_seg:
        return n_seg - 1
    return seg


cdef inline void _rk4_step(double* s, double ux, double uy, double dt, int kind,
                           double inv_mass, double damping, double v_max) noexcept nogil:
    cdef double px = s[0], py = s[1], vx = s[2], vy = s[3]
    cdef double npx, npy, nvx, nvy, ax, ay, h, c, speed, scale
    cdef double k1px, k1py, k1vx, k1vy, k2px, k2py, k2vx, k2vy
    cdef double k3px, k3py, k3vx, k3vy, k4px, k4py, k4vx, k4vy
    if kind == KIND_SINGLE_INTEGRATOR:
        npx = px + dt / 6.0 * (ux + 2.0 * ux + 2.0 * ux + ux)
        npy = py + dt / 6.0 * (uy + 2.0 * uy + 2.0 * uy + uy)
        nvx = ux + 0.0 * vx
        nvy = uy + 0.0 * vy
    else:
        ax = ux * inv_mass
        ay = uy * inv_mass
        h = 0.5 * dt
        k1px = vx
        k1py = vy
        k1vx = ax - damping * vx
        k1vy = ay - damping * vy
        k2px = vx + h * k1vx
        k2py = vy + h * k1vy
        k2vx = ax - damping * k2px
        k2vy = ay - damping * k2py
        k3px = vx + h * k2vx
        k3py = vy + h * k2vy
        k3vx = ax - damping * k3px
        k3vy = ay - damping * k3py
        k4px = vx + dt * k3vx
        k4py = vy + dt * k3vy
        k4vx = ax - damping * k4px
        k4vy = ay - damping * k4py
        c = dt / 6.0
        npx = px + c * (k1px + 2.0 * k2px + 2.0 * k3px + k4px)
        npy = py + c * (k1py + 2.0 * k2py + 2.0 * k3py + k4py)
        nvx = vx + c * (k1vx + 2.0 * k2vx + 2.0 * k3vx + k4vx)
        nvy = vy + c * (k1vy + 2.0 * k2vy + 2.0 * k3vy + k4vy)
    speed = nvx * nvx + nvy * nvy
    scale = 1.0
    if speed > v_max * v_max:
        speed = sqrt(speed)
        if speed > v_max:
            scale = v_max / speed
    s[0] = npx
    s[1] = npy
    s[2] = nvx * scale
    s[3] = nvy * scale


cdef inline bint _collides(double px, double py, const double* boxes, Py_ssize_t nb,
                           const double* bounds, double radius) noexcept nogil:
    cdef Py_ssize_t b
    cdef const double* bb
    cdef double dx, dy, r2 = radius * radius
    if (px <= bounds[0] + radius or px >= bounds[2] - radius
            or py <= bounds[1] + radius or py >= bounds[3] - radius):
        return True
    for b in range(nb):
        bb = boxes + 4 * b
        dx = bb[0] - px
        if dx < 0.0:
            dx = 0.0
        if px - bb[2] > dx:
            dx = px - bb[2]
        dy = bb[1] - py
        if dy < 0.0:
            dy = 0.0
        if py - bb[3] > dy:
            dy = py - bb[3]
        if dx * dx + dy * dy <= r2:
            return True
    return False


cdef inline const double* _box_ptr(const double[:, ::1] bx) noexcept:
    if bx.shape[0] == 0:
        return NULL
    return &bx[0, 0]


def integrate_states(x0, controls, double seg_dt, double dt, int steps, int kind,
                     double inv_mass, double damping, double v_max):
    cdef const double[::1] x = np.ascontiguousarray(x0, dtype=np.float64)
    cdef const double[:, ::1] u = np.ascontiguousarray(controls, dtype=np.float64)
    cdef Py_ssize_t n_seg = u.shape[0], i, sg
    out_arr = np.empty((steps + 1, 4))
    cdef double[:, ::1] out = out_arr
    cdef double s[4]
    s[0] = x[0]; s[1] = x[1]; s[2] = x[2]; s[3] = x[3]
    out[0, 0] = s[0]; out[0, 1] = s[1]; out[0, 2] = s[2]; out[0, 3] = s[3]
    for i in range(steps):
        sg = _segment_index(i, dt, seg_dt, n_seg)
        _rk4_step(s, u[sg, 0], u[sg, 1], dt, kind, inv_mass, damping, v_max)
        out[i + 1, 0] = s[0]; out[i + 1, 1] = s[1]; out[i + 1, 2] = s[2]; out[i + 1, 3] = s[3]
        if not (isfinite(s[0]) and isfinite(s[1]) and isfinite(s[2]) and isfinite(s[3])):
            return out_arr[: i + 2]
    return out_arr


def collides(px, py, boxes, bounds, double radius):
    cdef const double[:, ::1] bx = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    cdef const double[::1] bd = np.ascontiguousarray(bounds, dtype=np.float64)
    xs = np.atleast_1d(np.asarray(px, dtype=np.float64))
    ys = np.atleast_1d(np.asarray(py, dtype=np.float64))
    cdef const double[::1] xv = np.ascontiguousarray(xs.ravel())
    cdef const double[::1] yv = np.ascontiguousarray(ys.ravel())
    out = np.empty(xv.shape[0], dtype=bool)
    cdef cnp.npy_bool[::1] o = out
    cdef Py_ssize_t k
    cdef const double* bp = _box_ptr(bx)
    for k in range(xv.shape[0]):
        o[k] = _collides(xv[k], yv[k], bp, bx.shape[0], &bd[0], radius)
    if np.ndim(px) == 0:
        return bool(out[0])
    return out.reshape(np.shape(px))


def rollout_batch(x0, controls, double seg_dt, double dt, int steps, int kind,
                  double inv_mass, double damping, double v_max, boxes, bounds, double radius):
    cdef const double[::1] x = np.ascontiguousarray(x0, dtype=np.float64)
    cdef const double[:, :, ::1] u = np.ascontiguousarray(controls, dtype=np.float64)
    cdef const double[:, ::1] bx = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    cdef const double[::1] bd = np.ascontiguousarray(bounds, dtype=np.float64)
    cdef Py_ssize_t n = u.shape[0], n_seg = u.shape[1], j, i, k, sg, a, n_alive
    end_arr = np.empty((n, 2))
    coll_arr = np.full(n, -1, dtype=np.int64)
    state_arr = np.empty((n, 4))
    alive_arr = np.arange(n, dtype=np.intp)
    cdef double[:, ::1] end = end_arr
    cdef long long[::1] coll = coll_arr
    cdef double[:, ::1] st = state_arr
    cdef Py_ssize_t[::1] alive = alive_arr
    cdef const double* bp = _box_ptr(bx)
    cdef const double* bdp = &bd[0]
    cdef Py_ssize_t nb = bx.shape[0]
    with nogil:
        for j in range(n):
            st[j, 0] = x[0]; st[j, 1] = x[1]; st[j, 2] = x[2]; st[j, 3] = x[3]
        n_alive = n
        # steps outer, trajectories inner: independent updates pipeline well
        for i in range(steps):
            sg = _segment_index(i, dt, seg_dt, n_seg)
            a = 0
            for k in range(n_alive):
                j = alive[k]
                _rk4_step(&st[j, 0], u[j, sg, 0], u[j, sg, 1], dt, kind, inv_mass, damping, v_max)
                if _collides(st[j, 0], st[j, 1], bp, nb, bdp, radius):
                    coll[j] = i + 1
                else:
                    alive[a] = j
                    a += 1
            n_alive = a
            if n_alive == 0:
                break
        for j in range(n):
            end[j, 0] = st[j, 0]
            end[j, 1] = st[j, 1]
    return end_arr, coll_arr


def lidar_scan(double px, double py, cos_a, sin_a, boxes, bounds, double max_range):
    cdef const double[::1] ca = np.ascontiguousarray(cos_a, dtype=np.float64)
    cdef const double[::1] sa = np.ascontiguousarray(sin_a, dtype=np.float64)
    cdef const double[:, ::1] bx = np.ascontiguousarray(np.asarray(boxes, dtype=np.float64).reshape(-1, 4))
    cdef const double[::1] bd = np.ascontiguousarray(bounds, dtype=np.float64)
    cdef Py_ssize_t k, b, m = ca.shape[0]
    out_arr = np.empty(m)
    cdef double[::1] out = out_arr
    cdef double dx, dy, t, t1, t2, tx0, tx1, ty0, ty1, t_in, t_out, hit
    with nogil:
        for k in range(m):
            dx = ca[k]
            dy = sa[k]
            t = max_range
            if dx > 0.0:
                t = min(t, (bd[2] - px) / dx)
            elif dx < 0.0:
                t = min(t, (bd[0] - px) / dx)
            if dy > 0.0:
                t = min(t, (bd[3] - py) / dy)
            elif dy < 0.0:
                t = min(t, (bd[1] - py) / dy)
            for b in range(bx.shape[0]):
                if dx != 0.0:
                    t1 = (bx[b, 0] - px) / dx
                    t2 = (bx[b, 2] - px) / dx
                    if t1 < t2:
                        tx0 = t1; tx1 = t2
                    else:
                        tx0 = t2; tx1 = t1
                elif bx[b, 0] <= px and px <= bx[b, 2]:
                    tx0 = -INFINITY; tx1 = INFINITY
                else:
                    continue
                if dy != 0.0:
                    t1 = (bx[b, 1] - py) / dy
                    t2 = (bx[b, 3] - py) / dy
                    if t1 < t2:
                        ty0 = t1; ty1 = t2
                    else:
                        ty0 = t2; ty1 = t1
                elif bx[b, 1] <= py and py <= bx[b, 3]:
                    ty0 = -INFINITY; ty1 = INFINITY
                else:
                    continue
                t_in = tx0 if tx0 > ty0 else ty0
                t_out = tx1 if tx1 < ty1 else ty1
                if t_in <= t_out and t_out >= 0.0:
                    hit = t_in if t_in > 0.0 else 0.0
                    if hit < t:
                        t = hit
            out[k] = t if t > 0.0 else 0.0
    return out_arr


cdef inline double _cross(const double[:, ::1] p, Py_ssize_t a, Py_ssize_t b, Py_ssize_t i) noexcept nogil:
    return ((p[b, 0] - p[a, 0]) * (p[i, 1] - p[a, 1])
            - (p[b, 1] - p[a, 1]) * (p[i, 0] - p[a, 0]))


def hull_sorted(pts_in):
    cdef const double[:, ::1] p = np.ascontiguousarray(pts_in, dtype=np.float64)
    cdef Py_ssize_t n = p.shape[0], i, k = 0, lower_len
    if n < 3:
        arr = np.asarray(pts_in, dtype=np.float64)
        if n == 2 and p[0, 0] == p[1, 0] and p[0, 1] == p[1, 1]:
            return arr[:1].copy()
        return arr.copy()
    idx_arr = np.empty(2 * n, dtype=np.intp)
    cdef Py_ssize_t[::1] idx = idx_arr
    for i in range(n):
        while k >= 2 and _cross(p, idx[k - 2], idx[k - 1], i) <= 0.0:
            k -= 1
        idx[k] = i
        k += 1
    lower_len = k + 1
    for i in range(n - 2, -1, -1):
        while k >= lower_len and _cross(p, idx[k - 2], idx[k - 1], i) <= 0.0:
            k -= 1
        idx[k] = i
        k += 1
    k -= 1
    return np.asarray(pts_in, dtype=np.float64)[idx_arr[:k]].copy()


cdef inline bint _near(const double[:, ::1] p, Py_ssize_t i, Py_ssize_t j, double e2) noexcept nogil:
    cdef double dx = p[i, 0] - p[j, 0]
    cdef double dy = p[i, 1] - p[j, 1]
    return dx * dx + dy * dy <= e2


def dbscan(points, double eps, Py_ssize_t min_pts):
    cdef const double[:, ::1] p = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t n = p.shape[0], i, j, k, head, tail, cluster = 0
    labels_arr = np.full(n, -2, dtype=np.int64)
    cdef long long[::1] labels = labels_arr
    if n == 0:
        return labels_arr
    cdef double e2 = eps * eps
    counts_arr = np.zeros(n, dtype=np.intp)
    queued_arr = np.zeros(n, dtype=np.uint8)
    queue_arr = np.empty(n, dtype=np.intp)
    cdef Py_ssize_t[::1] counts = counts_arr
    cdef unsigned char[::1] queued = queued_arr
    cdef Py_ssize_t[::1] queue = queue_arr
    with nogil:
        for i in range(n):
            for j in range(n):
                if _near(p, i, j, e2):
                    counts[i] += 1
        for i in range(n):
            if labels[i] != -2:
                continue
            if counts[i] < min_pts:
                labels[i] = -1
                continue
            labels[i] = cluster
            queued[i] = 1
            head = 0
            tail = 0
            for j in range(n):
                if not queued[j] and _near(p, i, j, e2):
                    queued[j] = 1
                    queue[tail] = j
                    tail += 1
            while head < tail:
                j = queue[head]
                head += 1
                if labels[j] == -1:
                    labels[j] = cluster
                if labels[j] != -2:
                    continue
                labels[j] = cluster
                if counts[j] >= min_pts:
                    for k in range(n):
                        if labels[k] < 0 and not queued[k] and _near(p, j, k, e2):
                            queued[k] = 1
                            queue[tail] = k
                            tail += 1
            cluster += 1
    return labels_arr


cdef inline bint _inside(double x, double y, const double* v, Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t k, nxt
    if n < 3:
        return False
    for k in range(n):
        nxt = k + 1 if k + 1 < n else 0
        if (v[2 * nxt] - v[2 * k]) * (y - v[2 * k + 1]) - (v[2 * nxt + 1] - v[2 * k + 1]) * (x - v[2 * k]) < 0.0:
            return False
    return True


cdef inline unsigned long long _splitmix64(unsigned long long z) noexcept nogil:
    z = z + 0x9E3779B97F4A7C15ULL
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


def mc_union_count(unsigned long long seed, Py_ssize_t n_samples, lo, hi, clip, hull_verts, hull_offsets):
    """Count stream samples in the box ``[lo, hi]`` that fall inside ``clip`` and any hull."""
    cdef const double[:, ::1] c = np.ascontiguousarray(clip, dtype=np.float64).reshape(-1, 2)
    cdef const double[:, ::1] hv = np.ascontiguousarray(hull_verts, dtype=np.float64).reshape(-1, 2)
    cdef const Py_ssize_t[::1] off = np.ascontiguousarray(hull_offsets, dtype=np.intp)
    cdef double lx = lo[0], ly = lo[1], wx = hi[0] - lo[0], wy = hi[1] - lo[1]
    cdef Py_ssize_t k, h, nh = off.shape[0] - 1, n_both = 0
    cdef double x, y
    cdef double inv = 1.0 / 9007199254740992.0
    bb_arr = np.empty((max(nh, 1), 4))
    cdef double[:, ::1] bb = bb_arr
    for h in range(nh):
        seg = np.asarray(hv[off[h]:off[h + 1]])
        bb[h, 0] = seg[:, 0].min(); bb[h, 1] = seg[:, 1].min()
        bb[h, 2] = seg[:, 0].max(); bb[h, 3] = seg[:, 1].max()
    cdef const double* cp = &c[0, 0]
    cdef const double* hp = &hv[0, 0]
    cdef Py_ssize_t nc = c.shape[0]
    with nogil:
        for k in range(n_samples):
            x = lx + wx * (<double>(_splitmix64(seed + 2 * <unsigned long long>k) >> 11) * inv)
            y = ly + wy * (<double>(_splitmix64(seed + 2 * <unsigned long long>k + 1) >> 11) * inv)
            for h in range(nh):
                if x < bb[h, 0] or x > bb[h, 2] or y < bb[h, 1] or y > bb[h, 3]:
                    continue
                if _inside(x, y, hp + 2 * off[h], off[h + 1] - off[h]):
                    if _inside(x, y, cp, nc):
                        n_both += 1
                    break
    return int(n_both)
