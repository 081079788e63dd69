"""Backend selection for the hot kernels.

The compiled extension is used when it imports; otherwise the numpy twin.
Set ``CSTEP_PURE_PYTHON=1`` to force the fallback.
"""
import os

from . import _pykernels

if os.environ.get("CSTEP_PURE_PYTHON", "") not in ("", "0"):
    impl = _pykernels
else:
    try:
        from . import _ckernels as impl
    except ImportError:  # extension not built
        impl = _pykernels

BACKEND = "python" if impl is _pykernels else "compiled"

integrate_states = impl.integrate_states
rollout_batch = impl.rollout_batch
collides = impl.collides
lidar_scan = impl.lidar_scan
hull_sorted = impl.hull_sorted
dbscan = impl.dbscan
mc_union_count = impl.mc_union_count

KIND_CODES = {"point_mass_2d": 0, "planar_drone": 1, "single_integrator": 2}
