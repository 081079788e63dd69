import numpy as np
import pytest

from cstep import kernels
from cstep import _pykernels

try:
    from cstep import _ckernels
except ImportError:  # pure-Python install
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="compiled"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def compiled():
    if _ckernels is None:
        pytest.skip("compiled extension not built")
    return _ckernels


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
