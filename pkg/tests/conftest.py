import numpy as np
import pytest

from jacobi_spectra import kernels


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    with kernels.using_backend(request.param):
        yield request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def report(capsys):
    """Print one line to the terminal even when output is captured."""
    def emit(line):
        with capsys.disabled():
            print(f"\n{line}")
    return emit
