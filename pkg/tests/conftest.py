import numpy as np
import pytest

from lpmri import _pykernels

try:
    from lpmri import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python"),
            pytest.param(_ckernels, id="cython",
                         marks=pytest.mark.skipif(_ckernels is None,
                                                  reason="extension not built"))]


@pytest.fixture(params=BACKENDS)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def crandn(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
