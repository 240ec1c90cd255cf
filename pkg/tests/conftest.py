import numpy as np
import pytest

from ueks import _kernels


@pytest.fixture(params=sorted(_kernels._IMPLS))
def each_backend(request):
    """Run a test once per available kernel backend."""
    prev = _kernels.set_backend(request.param)
    yield request.param
    _kernels.set_backend(prev)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(RESULTS):
        terminalreporter.write_line(RESULTS[k])
