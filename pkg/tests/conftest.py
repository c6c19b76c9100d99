import sys

import numpy as np
import pytest

from fracpg import _kernels

BACKENDS = [_kernels.numpy_kernels] + ([_kernels.numba_kernels] if _kernels.numba_kernels else [])


@pytest.fixture(params=BACKENDS, ids=lambda k: k.name)
def kernels(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def pytest_terminal_summary(terminalreporter):
    mods = [m for name, m in sys.modules.items() if name.rsplit(".", 1)[-1] == "test_acceptance"]
    RESULTS = next((m.RESULTS for m in mods if getattr(m, "RESULTS", None)), None)
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        title, passed, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n} {'PASS' if passed else 'FAIL'}: {title} ({detail})")
