import os
import subprocess
import sys

import numpy as np
import pytest

from fracpg import _kernels
from fracpg.problem import builtin, random_problem
from fracpg.solver import _sweep_inputs


def test_convolve_trunc(kernels, rng):
    a, b = rng.standard_normal(40), rng.standard_normal(40)
    np.testing.assert_allclose(kernels.convolve_trunc(a, b, 40), np.convolve(a, b)[:40], atol=1e-13)


def test_horner(kernels, rng):
    c, u = rng.standard_normal(30), rng.uniform(0, 1, 50)
    np.testing.assert_allclose(kernels.horner(c, u), np.polynomial.polynomial.polyval(u, c), atol=1e-13)


def test_jacobi_table_backends_agree(kernels):
    s = np.linspace(-1, 1, 33)
    np.testing.assert_allclose(kernels.jacobi_table(25, 0.0, 5.0, s),
                               _kernels.numpy_kernels.jacobi_table(25, 0.0, 5.0, s), rtol=1e-13, atol=1e-13)


@pytest.mark.parametrize("make", [lambda: builtin("example1", order=48), lambda: random_problem(9)])
def test_recurrence_backends_agree(kernels, make):
    spec = make()
    args = _sweep_inputs(spec, 40, mp=False)
    np.testing.assert_allclose(kernels.recurrence_sweep(**args), _kernels.numpy_kernels.recurrence_sweep(**args),
                               rtol=1e-13, atol=1e-15)


def test_object_arrays_take_numpy_path():
    obj = np.array([1.0, 2.0], dtype=object)
    assert _kernels.pick(obj) is _kernels.numpy_kernels
    assert _kernels.pick(np.zeros(2)) is _kernels.active()


@pytest.mark.parametrize("value,expect", [("1", "numpy"), ("", None)])
def test_env_flag_selects_backend(value, expect):
    env = {**os.environ, _kernels.DISABLE_ENV: value}
    code = "from fracpg import _kernels; print(_kernels.active().name)"
    name = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True,
                          check=True).stdout.strip()
    if expect is None:
        expect = "numba" if _kernels.HAVE_NUMBA else "numpy"
    assert name == expect
