"""Numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and the same floating-point operation order, so both backends agree to the
last bit on IEEE hardware without FMA contraction.
"""
import numpy as np

KIND_POINT_MASS = 0
KIND_PLANAR_DRONE = 1
KIND_SINGLE_INTEGRATOR = 2


def _segment_index(i, dt, seg_dt, n_seg):
    seg = int(((i + 0.5) * dt) / seg_dt)
    return n_seg - 1 if seg >= n_seg else seg


def _rk4_step(px, py, vx, vy, ux, uy, dt, kind, inv_mass, damping, v_max):
    """One RK4 step for arrays (or scalars) of states under constant control."""
    if kind == KIND_SINGLE_INTEGRATOR:
        # position rate is the control itself; RK4 reduces to an Euler step
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
    sq = nvx * nvx + nvy * nvy
    speed = np.sqrt(sq)
    clamp = (sq > v_max * v_max) & (speed > v_max)
    scale = np.where(clamp, v_max / np.where(clamp, speed, 1.0), 1.0)
    return npx, npy, nvx * scale, nvy * scale


def integrate_states(x0, controls, seg_dt, dt, steps, kind, inv_mass, damping, v_max):
    """Integrate one trajectory; returns a (steps + 1, 4) state array."""
    x0 = np.asarray(x0, dtype=np.float64)
    controls = np.asarray(controls, dtype=np.float64)
    n_seg = controls.shape[0]
    out = np.empty((steps + 1, 4))
    out[0] = x0
    px, py, vx, vy = (np.float64(v) for v in x0)
    for i in range(steps):
        s = _segment_index(i, dt, seg_dt, n_seg)
        px, py, vx, vy = _rk4_step(px, py, vx, vy, controls[s, 0], controls[s, 1],
                                   dt, kind, inv_mass, damping, v_max)
        if not (np.isfinite(px) and np.isfinite(py) and np.isfinite(vx) and np.isfinite(vy)):
            out[i + 1] = (px, py, vx, vy)
            return out[: i + 2]
        out[i + 1] = (px, py, vx, vy)
    return out


def collides(px, py, boxes, bounds, radius):
    """Vectorised disk-vs-(box set, outer bounds) test; touching counts."""
    px = np.asarray(px, dtype=np.float64)
    py = np.asarray(py, dtype=np.float64)
    hit = ((px <= bounds[0] + radius) | (px >= bounds[2] - radius)
           | (py <= bounds[1] + radius) | (py >= bounds[3] - radius))
    r2 = radius * radius
    for b in boxes:
        dx = np.maximum(np.maximum(b[0] - px, 0.0), px - b[2])
        dy = np.maximum(np.maximum(b[1] - py, 0.0), py - b[3])
        hit |= dx * dx + dy * dy <= r2
    return hit


def rollout_batch(x0, controls, seg_dt, dt, steps, kind, inv_mass, damping, v_max,
                  boxes, bounds, radius):
    """Integrate N trajectories and stop each at its first colliding sample.

    Returns ``(endpoints, collision_index)`` where ``endpoints[i]`` is the final
    position of a free trajectory or the position at the first colliding sample,
    and ``collision_index[i]`` is that sample index (``-1`` when free).
    """
    controls = np.asarray(controls, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    bounds = np.asarray(bounds, dtype=np.float64)
    n, n_seg = controls.shape[0], controls.shape[1]
    px = np.full(n, float(x0[0]))
    py = np.full(n, float(x0[1]))
    vx = np.full(n, float(x0[2]))
    vy = np.full(n, float(x0[3]))
    coll = np.full(n, -1, dtype=np.int64)
    end = np.empty((n, 2))
    alive = np.ones(n, dtype=bool)
    for i in range(steps):
        s = _segment_index(i, dt, seg_dt, n_seg)
        px, py, vx, vy = _rk4_step(px, py, vx, vy, controls[:, s, 0], controls[:, s, 1],
                                   dt, kind, inv_mass, damping, v_max)
        hit = alive & collides(px, py, boxes, bounds, radius)
        if hit.any():
            coll[hit] = i + 1
            end[hit, 0] = px[hit]
            end[hit, 1] = py[hit]
            alive &= ~hit
    end[alive, 0] = px[alive]
    end[alive, 1] = py[alive]
    return end, coll


def lidar_scan(px, py, cos_a, sin_a, boxes, bounds, max_range):
    """Ray-cast every beam against the outer walls and all boxes."""
    cos_a = np.asarray(cos_a, dtype=np.float64)
    sin_a = np.asarray(sin_a, dtype=np.float64)
    boxes = np.asarray(boxes, dtype=np.float64).reshape(-1, 4)
    out = np.empty(cos_a.shape[0])
    for k in range(cos_a.shape[0]):
        dx = cos_a[k]
        dy = sin_a[k]
        t = max_range
        if dx > 0.0:
            t = min(t, (bounds[2] - px) / dx)
        elif dx < 0.0:
            t = min(t, (bounds[0] - px) / dx)
        if dy > 0.0:
            t = min(t, (bounds[3] - py) / dy)
        elif dy < 0.0:
            t = min(t, (bounds[1] - py) / dy)
        for b in boxes:
            if dx != 0.0:
                t1 = (b[0] - px) / dx
                t2 = (b[2] - px) / dx
                tx0, tx1 = (t1, t2) if t1 < t2 else (t2, t1)
            elif b[0] <= px <= b[2]:
                tx0, tx1 = -np.inf, np.inf
            else:
                continue
            if dy != 0.0:
                t1 = (b[1] - py) / dy
                t2 = (b[3] - py) / dy
                ty0, ty1 = (t1, t2) if t1 < t2 else (t2, t1)
            elif b[1] <= py <= b[3]:
                ty0, ty1 = -np.inf, np.inf
            else:
                continue
            t_in = tx0 if tx0 > ty0 else ty0
            t_out = tx1 if tx1 < ty1 else ty1
            if t_in <= t_out and t_out >= 0.0:
                hit = t_in if t_in > 0.0 else 0.0
                if hit < t:
                    t = hit
        out[k] = t if t > 0.0 else 0.0
    return out


def hull_sorted(pts):
    """Monotone chain over lexicographically sorted points, CCW, no collinear vertices."""
    n = pts.shape[0]
    if n < 3:
        if n == 2 and pts[0, 0] == pts[1, 0] and pts[0, 1] == pts[1, 1]:
            return pts[:1].copy()
        return pts.copy()
    idx = []
    for i in range(n):
        while len(idx) >= 2:
            a, b = idx[-2], idx[-1]
            cross = ((pts[b, 0] - pts[a, 0]) * (pts[i, 1] - pts[a, 1])
                     - (pts[b, 1] - pts[a, 1]) * (pts[i, 0] - pts[a, 0]))
            if cross <= 0.0:
                idx.pop()
            else:
                break
        idx.append(i)
    lower_len = len(idx) + 1
    for i in range(n - 2, -1, -1):
        while len(idx) >= lower_len:
            a, b = idx[-2], idx[-1]
            cross = ((pts[b, 0] - pts[a, 0]) * (pts[i, 1] - pts[a, 1])
                     - (pts[b, 1] - pts[a, 1]) * (pts[i, 0] - pts[a, 0]))
            if cross <= 0.0:
                idx.pop()
            else:
                break
        idx.append(i)
    idx.pop()
    return pts[idx].copy()


def dbscan(points, eps, min_pts):
    """DBSCAN with Euclidean metric, scanning points in index order."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = points.shape[0]
    labels = np.full(n, -2, dtype=np.int64)  # -2 unvisited
    e2 = eps * eps
    neigh = []
    for i in range(n):
        dx = points[i, 0] - points[:, 0]
        dy = points[i, 1] - points[:, 1]
        neigh.append(np.flatnonzero(dx * dx + dy * dy <= e2))
    queued = np.zeros(n, dtype=bool)
    cluster = 0
    for i in range(n):
        if labels[i] != -2:
            continue
        if neigh[i].shape[0] < min_pts:
            labels[i] = -1
            continue
        labels[i] = cluster
        queued[i] = True
        queue = []
        for j in neigh[i]:
            if not queued[j]:
                queued[j] = True
                queue.append(int(j))
        head = 0
        while head < len(queue):
            j = queue[head]
            head += 1
            if labels[j] == -1:
                labels[j] = cluster
            if labels[j] != -2:
                continue
            labels[j] = cluster
            if neigh[j].shape[0] >= min_pts:
                for k in neigh[j]:
                    if labels[k] < 0 and not queued[k]:
                        queued[k] = True
                        queue.append(int(k))
        cluster += 1
    return labels


def _inside_convex(x, y, verts):
    n = verts.shape[0]
    if n < 3:
        return np.zeros(np.shape(x), dtype=bool)
    inside = np.ones(np.shape(x), dtype=bool)
    for k in range(n):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % n]
        inside &= (bx - ax) * (y - ay) - (by - ay) * (x - ax) >= 0.0
    return inside


def splitmix_uniform(seed, start, count):
    """Uniforms in [0, 1) from the splitmix64 stream at indices start..start+count-1."""
    with np.errstate(over="ignore"):
        z = np.uint64(seed) + np.arange(start, start + count, dtype=np.uint64)
        z = z + np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return (z >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def mc_union_count(seed, n_samples, lo, hi, clip, hull_verts, hull_offsets):
    """Count stream samples in the box ``[lo, hi]`` that fall inside ``clip`` and any hull."""
    u = splitmix_uniform(seed, 0, 2 * n_samples)
    x = lo[0] + (hi[0] - lo[0]) * u[0::2]
    y = lo[1] + (hi[1] - lo[1]) * u[1::2]
    hull_verts = np.asarray(hull_verts, dtype=np.float64).reshape(-1, 2)
    in_any = np.zeros(x.shape[0], dtype=bool)
    for h in range(len(hull_offsets) - 1):
        verts = hull_verts[hull_offsets[h]:hull_offsets[h + 1]]
        in_any |= _inside_convex(x, y, verts)
    in_clip = _inside_convex(x, y, np.asarray(clip, dtype=np.float64).reshape(-1, 2))
    return int((in_any & in_clip).sum())
