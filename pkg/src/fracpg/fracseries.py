"""Truncated fractional power series on the grid {t^(mu/b) : mu = 0..M}.

A :class:`FracSeries` is the shared currency of the package: exact solutions,
manufactured sources and the independent series oracle
(:func:`series_solution`) are all expressed with it.

Coefficients are either float64 or, for the high-precision path, ``mpf``
objects held in an ``object`` array. Every operation preserves the
coefficient kind of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath
import numpy as np

from . import _kernels
from .errors import GridMismatchError
from .specfun import gamma_ratio, mp_gamma_ratio, to_mpf


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    return Fraction(x).limit_denominator(10_000)


def grid_shift(order, b: int) -> int:
    """Number of grid steps covered by the power t^order on a grid of denominator b."""
    steps = _as_fraction(order) * b
    if steps.denominator != 1:
        raise GridMismatchError(f"order {order} is not a multiple of 1/{b}")
    return int(steps)


@dataclass(frozen=True, eq=False)
class FracSeries:
    """Truncated series sum coef[mu] t^(mu/b), mu = 0..M."""

    b: int
    coef: np.ndarray

    def __post_init__(self):
        if int(self.b) != self.b or self.b < 1:
            raise GridMismatchError(f"grid denominator must be a positive integer, got {self.b}")
        c = np.asarray(self.coef)
        if c.ndim != 1 or c.shape[0] == 0:
            raise ValueError("coefficient array must be one-dimensional and non-empty")
        if c.dtype != object:
            c = c.astype(float)
            if not np.all(np.isfinite(c)):
                raise ValueError("series coefficients must be finite")
        c = c.copy()
        c.flags.writeable = False
        object.__setattr__(self, "b", int(self.b))
        object.__setattr__(self, "coef", c)

    # -- construction -------------------------------------------------------

    @classmethod
    def zeros(cls, b: int, M: int, mp: bool = False) -> "FracSeries":
        if mp:
            return cls(b, np.array([mpmath.mpf(0)] * (M + 1), dtype=object))
        return cls(b, np.zeros(M + 1))

    @classmethod
    def from_pairs(cls, b: int, M: int, pairs: Iterable, mp: bool = False) -> "FracSeries":
        """Build from ``(mu, value)`` pairs; indices above ``M`` are dropped."""
        c = _zero_array(M + 1, mp)
        for mu, val in pairs:
            if mu < 0:
                raise GridMismatchError(f"negative grid index {mu}")
            if mu <= M:
                c[mu] = c[mu] + (to_mpf(val) if mp else float(val))
        return cls(b, c)

    @classmethod
    def monomial(cls, b: int, M: int, mu: int, value=1.0, mp: bool = False) -> "FracSeries":
        return cls.from_pairs(b, M, [(mu, value)], mp=mp)

    # -- properties ---------------------------------------------------------

    @property
    def M(self) -> int:
        return self.coef.shape[0] - 1

    @property
    def is_mp(self) -> bool:
        return self.coef.dtype == object

    def pairs(self) -> list[tuple[int, object]]:
        """Non-zero ``(mu, coefficient)`` pairs."""
        return [(mu, c) for mu, c in enumerate(self.coef) if c != 0]

    def leading_index(self) -> int | None:
        for mu, c in enumerate(self.coef):
            if c != 0:
                return mu
        return None

    # -- reshaping ----------------------------------------------------------

    def truncate(self, M: int) -> "FracSeries":
        if M >= self.M:
            c = np.concatenate([self.coef, _zero_array(M - self.M, self.is_mp)])
            return FracSeries(self.b, c)
        return FracSeries(self.b, self.coef[: M + 1])

    def regrid(self, b_new: int) -> "FracSeries":
        """Re-express on a finer grid ``b_new`` (a multiple of ``b``) by index dilation."""
        if b_new % self.b:
            raise GridMismatchError(f"cannot regrid from 1/{self.b} to 1/{b_new}")
        k = b_new // self.b
        c = _zero_array(self.M * k + 1, self.is_mp)
        c[::k] = self.coef
        return FracSeries(b_new, c)

    def to_mp(self) -> "FracSeries":
        if self.is_mp:
            return self
        return FracSeries(self.b, np.array([mpmath.mpf(float(x)) for x in self.coef], dtype=object))

    def to_float(self) -> "FracSeries":
        return FracSeries(self.b, np.array([float(x) for x in self.coef]))

    def shift(self, steps: int) -> "FracSeries":
        """Multiply by t^(steps/b), keeping the truncation index."""
        if steps < 0:
            raise GridMismatchError("negative shift")
        c = _zero_array(self.M + 1, self.is_mp)
        if steps <= self.M:
            c[steps:] = self.coef[: self.M + 1 - steps]
        return FracSeries(self.b, c)

    # -- operators ----------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, FracSeries):
            return series_add(self, other)
        c = self.coef.copy()
        c[0] = c[0] + other
        return FracSeries(self.b, c)

    __radd__ = __add__

    def __neg__(self):
        return FracSeries(self.b, -self.coef)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FracSeries):
            return series_mul(self, other)
        return FracSeries(self.b, self.coef * other)

    __rmul__ = __mul__

    def __pow__(self, theta: int):
        return series_pow(self, theta)

    def __call__(self, t):
        return series_eval(self, t)

    def __repr__(self) -> str:
        nz = ", ".join(f"{mu}:{_fmt(c)}" for mu, c in self.pairs()[:6])
        more = "" if len(self.pairs()) <= 6 else ", ..."
        return f"FracSeries(b={self.b}, M={self.M}, {{{nz}{more}}})"


def _fmt(c) -> str:
    return mpmath.nstr(c, 6) if isinstance(c, mpmath.mpf) else f"{c:.6g}"


def _zero_array(n: int, mp: bool) -> np.ndarray:
    if mp:
        return np.array([mpmath.mpf(0)] * n, dtype=object)
    return np.zeros(n)


def _check_grid(p: FracSeries, q: FracSeries) -> None:
    if p.b != q.b:
        raise GridMismatchError(f"grid mismatch: 1/{p.b} vs 1/{q.b}; regrid first")


def _promote(p: FracSeries, q: FracSeries) -> tuple[FracSeries, FracSeries]:
    if p.is_mp != q.is_mp:
        return p.to_mp(), q.to_mp()
    return p, q


def _ratio(a, b, mp: bool):
    return mp_gamma_ratio(a, b) if mp else gamma_ratio(float(a), float(b))


# ---------------------------------------------------------------- arithmetic


def series_add(p: FracSeries, q: FracSeries) -> FracSeries:
    _check_grid(p, q)
    p, q = _promote(p, q)
    M = min(p.M, q.M)
    return FracSeries(p.b, p.coef[: M + 1] + q.coef[: M + 1])


def series_mul(p: FracSeries, q: FracSeries) -> FracSeries:
    """Cauchy product on the grid index, truncated at min(M_p, M_q)."""
    _check_grid(p, q)
    p, q = _promote(p, q)
    n = min(p.M, q.M) + 1
    k = _kernels.pick(p.coef, q.coef)
    return FracSeries(p.b, k.convolve_trunc(p.coef, q.coef, n))


def series_pow(p: FracSeries, theta: int) -> FracSeries:
    """p**theta by repeated multiplication; p**0 is the constant series 1."""
    if theta < 0 or int(theta) != theta:
        raise ValueError("series power must be a non-negative integer")
    if theta == 0:
        one = _zero_array(p.M + 1, p.is_mp)
        one[0] = one[0] + 1
        return FracSeries(p.b, one)
    out = p
    for _ in range(int(theta) - 1):
        out = series_mul(out, p)
    return out


def compose_analytic(outer: Sequence, p: FracSeries) -> FracSeries:
    """Substitute ``p`` (zero constant term) into sum outer[k] x^k."""
    if p.coef[0] != 0:
        raise GridMismatchError("compose_analytic needs a series with zero constant term")
    mp = p.is_mp
    conv = to_mpf if mp else float
    out = _zero_array(p.M + 1, mp)
    if len(outer):
        out[0] = out[0] + conv(outer[0])
    power = p
    lead = p.leading_index()
    for theta in range(1, min(len(outer), p.M + 1)):
        if lead is None or lead * theta > p.M:
            break
        d = outer[theta]
        if d != 0:
            out = out + power.coef * conv(d)
        power = series_mul(power, p)
    return FracSeries(p.b, out)


# ---------------------------------------------------------------- calculus


def caputo_on_series(p: FracSeries, alpha) -> FracSeries:
    """Caputo derivative of order ``alpha``; result truncated at M - alpha*b.

    Terms t^k with integer k <= ceil(alpha) - 1 are annihilated; every other
    term uses D t^tau = Gamma(tau+1)/Gamma(tau-alpha+1) t^(tau-alpha).
    """
    alpha = _as_fraction(alpha)
    shift = grid_shift(alpha, p.b)
    mp = p.is_mp
    kmax = math.ceil(alpha) - 1
    M_out = p.M - shift
    if M_out < 0:
        raise GridMismatchError("series too short for this derivative order")
    out = _zero_array(M_out + 1, mp)
    for mu, c in enumerate(p.coef):
        if c == 0:
            continue
        if mu % p.b == 0 and mu // p.b <= kmax:
            continue
        tau = Fraction(mu, p.b)
        if mu < shift:
            low = tau - alpha + 1
            if low <= 0 and low.denominator == 1:
                continue
            raise GridMismatchError(f"t^{tau} maps below the grid under D^{alpha}")
        if mu - shift > M_out:
            continue
        out[mu - shift] = c * _ratio(tau + 1, tau - alpha + 1, mp)
    return FracSeries(p.b, out)


def rl_integral_on_series(p: FracSeries, alpha) -> FracSeries:
    """Riemann-Liouville integral I^alpha; overflowing terms are dropped."""
    alpha = _as_fraction(alpha)
    shift = grid_shift(alpha, p.b)
    mp = p.is_mp
    out = _zero_array(p.M + 1, mp)
    for mu in range(0, p.M + 1 - shift):
        c = p.coef[mu]
        if c == 0:
            continue
        tau = Fraction(mu, p.b)
        out[mu + shift] = c * _ratio(tau + 1, tau + alpha + 1, mp)
    return FracSeries(p.b, out)


def abel_integral_on_series(p: FracSeries, beta) -> FracSeries:
    """Map s^tau to int_0^t (t-s)^(beta-1) s^tau ds = B(beta, tau+1) t^(tau+beta)."""
    beta = _as_fraction(beta)
    shift = grid_shift(beta, p.b)
    mp = p.is_mp
    g_beta = mpmath.gamma(to_mpf(beta)) if mp else math.gamma(float(beta))
    out = _zero_array(p.M + 1, mp)
    for mu in range(0, p.M + 1 - shift):
        c = p.coef[mu]
        if c == 0:
            continue
        tau = Fraction(mu, p.b)
        out[mu + shift] = c * g_beta * _ratio(tau + 1, tau + beta + 1, mp)
    return FracSeries(p.b, out)


# ---------------------------------------------------------------- evaluation


def series_eval(p: FracSeries, t):
    """Evaluate at t >= 0 (scalar or array) via Horner in u = t^(1/b)."""
    scalar = np.ndim(t) == 0
    if p.is_mp:
        inv_b = mpmath.mpf(1) / p.b
        tt = np.atleast_1d(np.asarray(t, dtype=object))
        u = np.array([to_mpf(x) ** inv_b if x != 0 else mpmath.mpf(0) for x in tt], dtype=object)
        vals = _kernels.numpy_kernels.horner(p.coef, u)
    else:
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(tt < 0):
            raise ValueError("series evaluation needs t >= 0")
        u = tt ** (1.0 / p.b)
        vals = _kernels.active().horner(p.coef, u)
    return vals[0] if scalar else vals


# ---------------------------------------------------------------- the oracle


def _problem_polys(problem, M: int, mp: bool):
    """Group the sparse f and g tensors into t-polynomials.

    f entries are keyed by theta, g entries by (nu, theta) so that each
    distinct s-factor s^(nu/b) y^theta goes through the Abel integral once.
    """
    b = problem.b
    f_by_theta: dict[int, list] = {}
    for mu, theta, val in problem.fcoef:
        f_by_theta.setdefault(theta, []).append((mu, val))
    g_by_key: dict[tuple[int, int], list] = {}
    for mu, nu, theta, val in problem.gcoef:
        g_by_key.setdefault((nu, theta), []).append((mu, val))
    fpolys = {th: FracSeries.from_pairs(b, M, pr, mp=mp) for th, pr in f_by_theta.items()}
    gpolys = {key: FracSeries.from_pairs(b, M, pr, mp=mp) for key, pr in g_by_key.items()}
    return fpolys, gpolys


def source_series(problem, y: FracSeries, fpolys=None, gpolys=None) -> FracSeries:
    """f(t, y) + lambda int_0^t (t-s)^(beta-1) g(t, s, y(s)) ds as a series in t."""
    M = y.M
    if fpolys is None or gpolys is None:
        fpolys, gpolys = _problem_polys(problem, M, y.is_mp)
    thetas = sorted(set(fpolys) | {th for (_, th) in gpolys})
    powers = {0: series_pow(y, 0)}
    for th in range(1, (max(thetas) if thetas else 0) + 1):
        powers[th] = series_mul(powers[th - 1], y)
    total = FracSeries.zeros(problem.b, M, mp=y.is_mp)
    for th, poly in fpolys.items():
        total = total + series_mul(poly, powers[th])
    lam = to_mpf(problem.lam) if y.is_mp else float(problem.lam)
    for (nu, th), poly in gpolys.items():
        inner = abel_integral_on_series(powers[th].shift(nu), problem.beta)
        total = total + series_mul(poly, inner) * lam
    return total


def volterra_rhs(problem, y: FracSeries, fpolys=None, gpolys=None) -> FracSeries:
    """I^alpha applied to :func:`source_series`: the Volterra form minus the initial polynomial.

    Index mu of the result depends only on coefficients of ``y`` with index
    <= mu - alpha*b.
    """
    return rl_integral_on_series(source_series(problem, y, fpolys, gpolys), problem.alpha)


def initial_polynomial(problem, M: int, mp: bool = False) -> FracSeries:
    """psi(t) = sum_k y0^(k) t^k / k! on the problem grid."""
    pairs = [(k * problem.b, v / math.factorial(k)) for k, v in enumerate(problem.init)]
    return FracSeries.from_pairs(problem.b, M, pairs, mp=mp)


def series_solution(problem, M: int, mp: bool = False) -> FracSeries:
    """Formal series solution sum ybar_mu t^(mu/b), mu <= M, by forward sweep.

    Coefficients below alpha*b come from the initial data; above it they are
    fixed in blocks of alpha*b indices, each block read off a re-expansion of
    the Volterra right-hand side that only touches already-final coefficients.
    """
    ab = problem.ab
    if M < ab:
        raise ValueError(f"truncation M={M} must be at least alpha*b={ab}")
    psi = initial_polynomial(problem, M, mp=mp)
    fpolys, gpolys = _problem_polys(problem, M, mp)
    coef = psi.coef.copy()
    known = ab - 1
    while known < M:
        rhs = volterra_rhs(problem, FracSeries(problem.b, coef), fpolys, gpolys)
        hi = min(known + ab, M)
        coef[known + 1 : hi + 1] = psi.coef[known + 1 : hi + 1] + rhs.coef[known + 1 : hi + 1]
        known = hi
    return FracSeries(problem.b, coef)
