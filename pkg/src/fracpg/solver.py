"""Coefficient recurrence, solution evaluation, error norms and convergence studies.

The discrete system is lower-triangular in the monomial coefficients
cc_k of y_N = sum cc_k t^(alpha + k gamma): the equation for index j reads

    chi_j cc_j = f[j, 0] + lambda K_j + Z_j(cc_0 .. cc_{j - alpha*b}),

so every coefficient is an explicit function of earlier ones. ``method="fast"``
runs this as a sparse sweep over running powers of y_N / t^alpha;
``method="reference"`` forms the Pi matrices explicitly and is only meant
for cross-checking at small N.
"""

from __future__ import annotations

import contextlib
import math
import time
from dataclasses import dataclass, field
from functools import cached_property

import mpmath
import numpy as np
from scipy.linalg import solve_triangular
from scipy.stats import linregress

from . import _kernels
from .basis import FGJFBasis, fgjf_monomial_matrix, gauss_jacobi_rule, jacobi_norm, jacobi_table
from .errors import DomainError, NumericError
from .fracseries import FracSeries, caputo_on_series, source_series
from .operators import OperationalSet, assemble, build_chi, build_K, build_Q, coeff_A_table, matrix_power
from .problem import ProblemSpec, shift_initial_data
from .specfun import to_mpf

ERROR_FLOOR = 1e-16


def _precision(dps):
    return mpmath.workdps(dps) if dps else contextlib.nullcontext()


@dataclass(frozen=True, eq=False)
class PGSolution:
    """Solved coefficients for one truncation N.

    ``cbarbar`` is over {t^(alpha + k gamma)}; ``psi`` is the initial
    polynomial added back after the homogeneous solve. ``cbar`` (FGJF
    coefficients) is computed on first access.
    """

    problem: ProblemSpec
    N: int
    cbarbar: np.ndarray
    basis: FGJFBasis
    psi: FracSeries
    shifted: ProblemSpec
    runtime_seconds: float
    dps: int | None = None
    method: str = "fast"

    @property
    def N_hat(self) -> int:
        return self.N - self.problem.ab

    @property
    def is_mp(self) -> bool:
        return self.cbarbar.dtype == object

    @cached_property
    def cbar(self) -> np.ndarray:
        return fgjf_coefficients(self)

    def monomial_series(self) -> FracSeries:
        """y_N (including the initial polynomial) as a series on the problem grid, M = N."""
        ab = self.problem.ab
        with _precision(self.dps):
            c = np.zeros(self.N + 1, dtype=self.cbarbar.dtype)
            if self.is_mp:
                c[:] = mpmath.mpf(0)
            c[ab:] = self.cbarbar
            psi = self.psi.to_mp() if self.is_mp else self.psi
            return FracSeries(self.problem.b, c) + psi.truncate(self.N)

    def __call__(self, t):
        return evaluate(self, t)


# ---------------------------------------------------------------- recurrence


def _sweep_inputs(spec: ProblemSpec, N_hat: int, mp: bool):
    conv = to_mpf if mp else float
    dtype = object if mp else float
    ab, bb = spec.ab, spec.bb
    lam = conv(spec.lam)
    base = build_K(spec, N_hat, mp) * lam
    for mu, th, v in spec.fcoef:
        if th == 0 and mu <= N_hat:
            base[mu] = base[mu] + conv(v)
    f = [(mu + th * ab, th, conv(v)) for mu, th, v in spec.fcoef if th >= 1 and mu + th * ab <= N_hat]
    g = [(mu + nu + bb, nu, th, conv(v) * lam) for mu, nu, th, v in spec.gcoef
         if th >= 1 and mu + nu + bb + th * ab <= N_hat]
    n_A = max([nu for _, nu, _, _ in g] + [0]) + N_hat + 1
    A = coeff_A_table(n_A, spec.beta, spec.gamma, mp)
    n_theta = max([th for _, th, _ in f] + [th for _, _, th, _ in g] + [0])
    ints = lambda xs: np.array(xs, dtype=np.int64)  # noqa: E731
    return dict(
        base=np.asarray(base, dtype=dtype),
        chi=np.asarray(build_chi(N_hat, spec.alpha, spec.gamma, mp), dtype=dtype),
        ab=ab,
        f_off=ints([e[0] for e in f]),
        f_theta=ints([e[1] for e in f]),
        f_val=np.array([e[2] for e in f], dtype=dtype),
        g_shift=ints([e[0] for e in g]),
        g_nu=ints([e[1] for e in g]),
        g_theta=ints([e[2] for e in g]),
        g_val=np.array([e[3] for e in g], dtype=dtype),
        A=np.asarray(A, dtype=dtype),
        n_theta=n_theta,
    )


def _fast(spec: ProblemSpec, N_hat: int, mp: bool, kernels=None) -> np.ndarray:
    args = _sweep_inputs(spec, N_hat, mp)
    k = _kernels.numpy_kernels if mp else (kernels or _kernels.active())
    return k.recurrence_sweep(**args)


def reference_step(spec: ProblemSpec, ops: OperationalSet, cc: np.ndarray, j: int) -> object:
    """cc_j from the explicit matrices, reading whatever ``cc`` holds elsewhere.

    Z_j = sum_theta (cc Psi Q(cc)^(theta-1) B_theta)_j. Only cc_0..cc_{j-ab}
    can influence the result; the triangularity tests rely on that.
    """
    lam = to_mpf(spec.lam) if ops.chi.dtype == object else float(spec.lam)
    acc = lam * ops.K[j]
    for mu, th, v in spec.fcoef:
        if th == 0 and mu == j:
            acc = acc + (to_mpf(v) if ops.chi.dtype == object else float(v))
    if ops.theta_support:
        Q = build_Q(cc, ops.N_hat, ops.ab)
        psi_cc = cc @ ops.psi
        for th in ops.theta_support:
            col = ops.F[th][:, j] + lam * ops.H[th][:, j]
            acc = acc + psi_cc @ (matrix_power(Q, th - 1) @ col)
    return acc / ops.chi[j]


def _reference(spec: ProblemSpec, N_hat: int, mp: bool) -> np.ndarray:
    ops = assemble(spec, N_hat, mp)
    cc = np.zeros(N_hat + 1, dtype=object if mp else float)
    if mp:
        cc[:] = mpmath.mpf(0)
    for j in range(N_hat + 1):
        cc[j] = reference_step(spec, ops, cc, j)
    return cc


def solve_recurrence(problem: ProblemSpec, N: int, method: str = "fast", dps: int | None = None,
                     kernels=None) -> PGSolution:
    """Solve for the monomial coefficients of y_N, N >= alpha*b.

    ``dps`` switches to mpmath arithmetic at that many digits; ``kernels``
    overrides the numba/numpy selection for the float sweep.
    """
    ab = problem.ab
    if N < ab:
        raise DomainError(f"N={N} is below alpha*b={ab}")
    if method not in ("fast", "reference"):
        raise ValueError(f"unknown method {method!r}")
    N_hat = N - ab
    mp = dps is not None
    with _precision(dps):
        shifted, psi = shift_initial_data(problem, N)
        start = time.perf_counter()
        cc = _fast(shifted, N_hat, mp, kernels) if method == "fast" else _reference(shifted, N_hat, mp)
        elapsed = time.perf_counter() - start
    if not mp and not np.all(np.isfinite(cc)):
        raise NumericError(f"non-finite coefficient in the recurrence at N={N}")
    return PGSolution(
        problem=problem,
        N=N,
        cbarbar=cc,
        basis=FGJFBasis(problem.alpha, problem.b, float(problem.T), N),
        psi=psi,
        shifted=shifted,
        runtime_seconds=elapsed,
        dps=dps,
        method=method,
    )


# ---------------------------------------------------------------- evaluation


def _check_t(sol: PGSolution, t):
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(t > sol.problem.T * (1 + 1e-14)):
        raise ValueError(f"evaluation points must lie in [0, {sol.problem.T}]")
    return t


def evaluate(sol: PGSolution, t):
    """y_N(t) from the monomial coefficients (Horner in u = t^gamma)."""
    scalar = np.ndim(t) == 0
    tt = _check_t(sol, t)
    b = sol.problem.b
    alpha = sol.problem.alpha
    if sol.is_mp:
        with _precision(sol.dps):
            inv_b = mpmath.mpf(1) / b
            a = to_mpf(alpha)
            out = np.empty(tt.shape[0])
            for p, x in enumerate(tt):
                if x == 0:
                    out[p] = 0.0
                    continue
                xm = mpmath.mpf(x)
                u = xm**inv_b
                acc = mpmath.mpf(0)
                for c in sol.cbarbar[::-1]:
                    acc = acc * u + c
                out[p] = float(acc * xm**a)
    else:
        u = tt ** (1.0 / b)
        out = tt ** float(alpha) * _kernels.active().horner(sol.cbarbar, u)
    if any(sol.problem.init):
        out = out + np.asarray(sol.psi.to_float()(tt), dtype=float)
    return float(out[0]) if scalar else out


def evaluate_fgjf(sol: PGSolution, t):
    """y_N(t) from the FGJF coefficients: prefactor t^alpha sum c_n P_n^{(0, ab)}(s)."""
    scalar = np.ndim(t) == 0
    tt = _check_t(sol, t)
    basis = sol.basis
    s = 2.0 * (tt / basis.T) ** (1.0 / basis.b) - 1.0
    P = jacobi_table(basis.N_hat, 0.0, float(basis.ab), s)
    out = basis.prefactor() * tt ** float(basis.alpha) * (sol.cbar @ P)
    if any(sol.problem.init):
        out = out + np.asarray(sol.psi.to_float()(tt), dtype=float)
    return float(out[0]) if scalar else out


def fgjf_coefficients(sol: PGSolution, method: str = "projection") -> np.ndarray:
    """FGJF coefficients cbar with cbarbar = cbar J.

    ``projection`` expands y_N / (2^ab u^ab) in P_n^{(0, ab)} with an exact
    Gauss-Jacobi rule; it stays accurate for any N. ``triangular`` solves
    the lower-triangular system against J directly; in binary64 this loses
    digits quickly because the entries of J grow like 4^N_hat.
    """
    basis = sol.basis
    n = basis.N_hat + 1
    T = float(basis.T)
    if method == "triangular":
        with _precision(sol.dps):
            J = fgjf_monomial_matrix(basis, mp=sol.is_mp)
            if sol.is_mp:
                c = [mpmath.mpf(0)] * n
                for k in range(n - 1, -1, -1):
                    acc = sol.cbarbar[k] - sum(c[m] * J[m, k] for m in range(k + 1, n))
                    c[k] = acc / J[k, k]
                return np.array([float(x) for x in c])
            return solve_triangular(J.T, sol.cbarbar, lower=False)
    if method != "projection":
        raise ValueError(f"unknown method {method!r}")
    x, w = gauss_jacobi_rule(n, 0.0, float(basis.ab))
    u = (x + 1.0) / 2.0
    with _precision(sol.dps):
        if sol.is_mp:
            scale = to_mpf(T) ** to_mpf(basis.alpha) / mpmath.mpf(2) ** basis.ab
            step = to_mpf(T) ** (mpmath.mpf(1) / basis.b)
            d = [c * scale * step**j for j, c in enumerate(sol.cbarbar)]
            q = np.empty(n)
            for p, up in enumerate(u):
                acc = mpmath.mpf(0)
                um = mpmath.mpf(up)
                for c in d[::-1]:
                    acc = acc * um + c
                q[p] = float(acc)
        else:
            d = sol.cbarbar * (T ** float(basis.alpha) / 2.0**basis.ab) * T ** (np.arange(n) / basis.b)
            q = _kernels.active().horner(d, u)
    P = jacobi_table(n - 1, 0.0, float(basis.ab), x)
    norms = np.array([jacobi_norm(k, 0.0, float(basis.ab)) for k in range(n)])
    return (P * (w * q)).sum(axis=1) / norms


# ---------------------------------------------------------------- errors


@dataclass(frozen=True)
class ErrorReport:
    l2: float
    linf_grid: float
    weighted_l2: float
    grid: np.ndarray = field(repr=False)
    runtime_seconds: float

    def as_dict(self) -> dict:
        return {"e_L2": self.l2, "e_Linf": self.linf_grid, "e_wL2": self.weighted_l2,
                "runtime_seconds": self.runtime_seconds}


def default_quad_points(sol: PGSolution) -> int:
    return max(sol.N + sol.problem.b + 32, 64)


def error_report(sol: PGSolution, exact=None, quad_points: int | None = None,
                 grid_points: int = 1000) -> ErrorReport:
    """L2, graded-grid max and (0, ab)-weighted L2 norms of y_N - exact on [0, T].

    Quadrature runs in u = (t/T)^gamma, where both y_N and the typical exact
    solutions are smooth.
    """
    exact = exact or sol.problem.exact_value
    T = float(sol.problem.T)
    b = sol.problem.b
    ab = sol.problem.ab
    n = quad_points or default_quad_points(sol)

    def err(t):
        return evaluate(sol, t) - np.asarray(exact(t), dtype=float)

    x, w = gauss_jacobi_rule(n, 0.0, 0.0)
    u = (x + 1.0) / 2.0
    t = np.minimum(T * u**b, T)
    l2 = math.sqrt(max(0.0, 0.5 * float(np.sum(w * err(t) ** 2 * T * b * u ** (b - 1)))))

    xw, ww = gauss_jacobi_rule(n, 0.0, float(ab))
    tw = np.minimum(T * ((xw + 1.0) / 2.0) ** b, T)
    wl2 = math.sqrt(max(0.0, T * 2.0 ** (-ab - 1) * float(np.sum(ww * err(tw) ** 2))))

    grid = T * (np.arange(grid_points) / (grid_points - 1)) ** b
    linf = float(np.max(np.abs(err(grid))))
    return ErrorReport(l2, linf, wl2, grid, sol.runtime_seconds)


# ---------------------------------------------------------------- convergence


@dataclass(frozen=True)
class ConvergenceTable:
    rows: list
    slope: float | None
    intercept: float | None
    correlation: float | None

    @property
    def rate(self) -> float | None:
        """Decay constant c in log10 e(N) ~ a - c N."""
        return None if self.slope is None else -self.slope

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows])


def fit_semilog(N_list, errors, floor: float = ERROR_FLOOR):
    """Least-squares fit of log10 max(e, floor) against N: (slope, intercept, r)."""
    N_arr = np.asarray(N_list, dtype=float)
    y = np.log10(np.maximum(np.asarray(errors, dtype=float), floor))
    if N_arr.size < 2:
        return None, None, None
    if np.ptp(y) == 0:
        return 0.0, float(y[0]), None
    fit = linregress(N_arr, y)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue)


def convergence_study(problem, N_list, exact=None, dps: int | None = None,
                      quad_points: int | None = None) -> ConvergenceTable:
    """Solve and measure at every N of an ascending list; fit the semi-log decay of e_L2.

    ``problem`` is a spec or a callable ``N -> spec`` for data truncated per N.
    """
    N_list = list(N_list)
    if any(b <= a for a, b in zip(N_list, N_list[1:])):
        raise ValueError("N list must be strictly ascending")
    rows = []
    for N in N_list:
        spec = problem(N) if callable(problem) else problem
        sol = solve_recurrence(spec, N, dps=dps)
        rep = error_report(sol, exact, quad_points)
        rows.append({"N": N, "e_L2": rep.l2, "e_Linf": rep.linf_grid, "e_wL2": rep.weighted_l2,
                     "cpu_seconds": sol.runtime_seconds})
    slope, intercept, r = fit_semilog(N_list, [r["e_L2"] for r in rows])
    return ConvergenceTable(rows, slope, intercept, r)


# ---------------------------------------------------------------- residual


def residual_check(sol: PGSolution) -> float:
    """Max |D^alpha y_N - f - lambda I_g| over grid indices <= N_hat - beta*b.

    Computed in series arithmetic on the shifted problem, independently of the
    operational matrices.
    """
    spec = sol.shifted
    ab = spec.ab
    with _precision(sol.dps):
        c = np.zeros(sol.N + 1, dtype=sol.cbarbar.dtype)
        if sol.is_mp:
            c[:] = mpmath.mpf(0)
        c[ab:] = sol.cbarbar
        y = FracSeries(spec.b, c)
        lhs = caputo_on_series(y, spec.alpha)
        rhs = source_series(spec, y).truncate(lhs.M)
        top = sol.N_hat - spec.bb
        if top < 0:
            return 0.0
        diff = (lhs.coef - rhs.coef)[: top + 1]
        return float(max(abs(x) for x in diff))

