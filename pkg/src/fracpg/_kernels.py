"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Set ``FRACPG_DISABLE_NUMBA=1`` before import to force the numpy versions.
Arrays of ``dtype=object`` (mpmath coefficients) always take the numpy path,
which is written so that it never assumes float64.

Both implementations are importable directly as :data:`numpy_kernels` and
:data:`numba_kernels` so tests and ``benchmarks/bench_kernels.py`` can pit
them against each other.
"""

from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

DISABLE_ENV = "FRACPG_DISABLE_NUMBA"

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is an optional extra
    numba = None
    HAVE_NUMBA = False


def _env_disabled() -> bool:
    return os.environ.get(DISABLE_ENV, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAVE_NUMBA and not _env_disabled()


# ---------------------------------------------------------------- numpy path


def np_convolve_trunc(a, b, n):
    """First ``n`` coefficients of the Cauchy product of ``a`` and ``b``."""
    if n <= 0:
        return np.zeros(0, dtype=np.result_type(a, b))
    out = np.convolve(a[:n], b[:n])[:n]
    if out.shape[0] < n:
        out = np.concatenate([out, np.zeros(n - out.shape[0], dtype=out.dtype)])
    return out


def np_horner(coef, u):
    """Evaluate sum coef[k] u^k for an array of points ``u``."""
    u = np.asarray(u)
    acc = np.zeros(u.shape, dtype=np.result_type(coef, u))
    for c in coef[::-1]:
        acc = acc * u + c
    return acc


def np_jacobi_table(n, a, b, s):
    """Rows P_0..P_n of the Jacobi family (a, b) evaluated at points ``s``."""
    s = np.asarray(s, dtype=float)
    out = np.empty((n + 1, s.shape[0]))
    out[0] = 1.0
    if n == 0:
        return out
    out[1] = 0.5 * ((a - b) + (a + b + 2.0) * s)
    for k in range(1, n):
        c = 2.0 * k + a + b
        d1 = 2.0 * (k + 1) * (k + a + b + 1) * c
        d2 = (c + 1.0) * ((c + 2.0) * c * s + a * a - b * b)
        d3 = 2.0 * (k + a) * (k + b) * (c + 2.0)
        out[k + 1] = (d2 * out[k] - d3 * out[k - 1]) / d1
    return out


def np_recurrence_sweep(base, chi, ab, f_off, f_theta, f_val, g_shift, g_nu, g_theta, g_val, A, n_theta):
    """Strictly triangular coefficient recurrence (see :mod:`fracpg.solver`).

    ``base[j]`` holds f_{j,0} + lambda K_j, ``chi`` the diagonal of the
    Caputo matrix. f entries contribute ``f_val * P[theta, j - f_off]``;
    g entries contribute ``g_val * A[nu + i] * P[theta, i - theta*ab]`` with
    ``i = j - g_shift``. ``P[theta]`` is the running coefficient row of
    (y_N / t^alpha)^theta, extended by one index after each new coefficient.
    """
    n = base.shape[0]
    dtype = base.dtype
    cc = np.zeros(n, dtype=dtype)
    P = np.zeros((n_theta + 1, n), dtype=dtype)
    for j in range(n):
        acc = base[j]
        if f_off.shape[0]:
            idx = j - f_off
            m = idx >= 0
            if m.any():
                acc = acc + np.sum(f_val[m] * P[f_theta[m], idx[m]])
        if g_shift.shape[0]:
            i = j - g_shift
            pidx = i - g_theta * ab
            m = pidx >= 0
            if m.any():
                acc = acc + np.sum(g_val[m] * A[g_nu[m] + i[m]] * P[g_theta[m], pidx[m]])
        cc[j] = acc / chi[j]
        if n_theta >= 1:
            P[1, j] = cc[j]
        for th in range(2, n_theta + 1):
            P[th, j] = np.dot(cc[: j + 1], P[th - 1, j::-1])
    return cc


# ---------------------------------------------------------------- numba path


def _loop_convolve_trunc(a, b, n):
    out = np.zeros(n)
    na = min(a.shape[0], n)
    nb = b.shape[0]
    for i in range(na):
        ai = a[i]
        if ai == 0.0:
            continue
        for k in range(min(nb, n - i)):
            out[i + k] += ai * b[k]
    return out


def _loop_horner(coef, u):
    out = np.empty(u.shape[0])
    m = coef.shape[0]
    for p in range(u.shape[0]):
        acc = 0.0
        x = u[p]
        for k in range(m - 1, -1, -1):
            acc = acc * x + coef[k]
        out[p] = acc
    return out


def _loop_jacobi_table(n, a, b, s):
    m = s.shape[0]
    out = np.empty((n + 1, m))
    for p in range(m):
        out[0, p] = 1.0
        if n >= 1:
            out[1, p] = 0.5 * ((a - b) + (a + b + 2.0) * s[p])
    for k in range(1, n):
        c = 2.0 * k + a + b
        d1 = 2.0 * (k + 1) * (k + a + b + 1) * c
        d3 = 2.0 * (k + a) * (k + b) * (c + 2.0)
        for p in range(m):
            d2 = (c + 1.0) * ((c + 2.0) * c * s[p] + a * a - b * b)
            out[k + 1, p] = (d2 * out[k, p] - d3 * out[k - 1, p]) / d1
    return out


def _loop_recurrence_sweep(base, chi, ab, f_off, f_theta, f_val, g_shift, g_nu, g_theta, g_val, A, n_theta):
    n = base.shape[0]
    cc = np.zeros(n)
    P = np.zeros((n_theta + 1, n))
    for j in range(n):
        acc = base[j]
        for e in range(f_off.shape[0]):
            idx = j - f_off[e]
            if idx >= 0:
                acc += f_val[e] * P[f_theta[e], idx]
        for e in range(g_shift.shape[0]):
            i = j - g_shift[e]
            pidx = i - g_theta[e] * ab
            if pidx >= 0:
                acc += g_val[e] * A[g_nu[e] + i] * P[g_theta[e], pidx]
        cc[j] = acc / chi[j]
        if n_theta >= 1:
            P[1, j] = cc[j]
        for th in range(2, n_theta + 1):
            s = 0.0
            for k in range(j + 1):
                s += cc[k] * P[th - 1, j - k]
            P[th, j] = s
    return cc


numpy_kernels = SimpleNamespace(
    name="numpy",
    convolve_trunc=np_convolve_trunc,
    horner=np_horner,
    jacobi_table=np_jacobi_table,
    recurrence_sweep=np_recurrence_sweep,
)

if HAVE_NUMBA:
    _jit = numba.njit(cache=True)
    numba_kernels = SimpleNamespace(
        name="numba",
        convolve_trunc=_jit(_loop_convolve_trunc),
        horner=_jit(_loop_horner),
        jacobi_table=_jit(_loop_jacobi_table),
        recurrence_sweep=_jit(_loop_recurrence_sweep),
    )
else:  # pragma: no cover
    numba_kernels = None


def active():
    """Kernel namespace selected by the environment at import time."""
    return numba_kernels if USE_NUMBA else numpy_kernels


def pick(*arrays):
    """Kernels suited to ``arrays``: numpy for object dtype, else the active set."""
    for arr in arrays:
        if isinstance(arr, np.ndarray) and arr.dtype == object:
            return numpy_kernels
    return active()
