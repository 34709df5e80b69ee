import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from vlcnoise import _pykernels  # noqa: E402

try:
    from vlcnoise import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = [pytest.param(_pykernels, id="python")]
if _ckernels is not None:
    BACKENDS.append(pytest.param(_ckernels, id="cython"))


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


@pytest.fixture
def use_backend(backend, monkeypatch):
    """Route the package's kernel calls through ``backend``."""
    from vlcnoise import kernels

    for name in ("avar_direct", "avar_sliding", "autocorr_numerators", "causal_convolve"):
        monkeypatch.setattr(kernels, name, getattr(backend, name))
    return backend


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
