"""Jacobi polynomials, fractional generalized Jacobi functions and quadrature.

The trial family is J̄_k(t) = (2^{ab} / T^alpha) t^alpha P_{k-ab}^{(0, ab)}(2 (t/T)^gamma - 1)
for k = ab..N, with ab = alpha*b and gamma = 1/b. Storage is 0-based: row
``i`` of every matrix here describes the function of basis index ``i + ab``
(see :attr:`FGJFBasis.offset`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import mpmath
import numpy as np
from scipy.linalg import eigh_tridiagonal

from . import _kernels
from .errors import DomainError, NumericError
from .specfun import gamma_ratio, to_mpf


@dataclass(frozen=True)
class JacobiParams:
    """Jacobi indices with the generalized-index bookkeeping for rho, eta <= -1."""

    rho: float
    eta: float

    @staticmethod
    def _hat(x):
        return -x if x <= -1 else 0

    @staticmethod
    def _tilde(x):
        return -x if x <= -1 else x

    @property
    def rho_hat(self):
        return self._hat(self.rho)

    @property
    def eta_hat(self):
        return self._hat(self.eta)

    @property
    def rho_tilde(self):
        return self._tilde(self.rho)

    @property
    def eta_tilde(self):
        return self._tilde(self.eta)

    @property
    def kappa(self):
        return self.rho_hat + self.eta_hat


def _check_classical(rho, eta):
    if rho <= -1 or eta <= -1:
        raise DomainError(f"classical Jacobi parameters need rho, eta > -1 (got {rho}, {eta})")


def jacobi_table(n: int, rho: float, eta: float, s) -> np.ndarray:
    """Values of P_0..P_n^{(rho, eta)} at the points ``s``; shape (n+1, len(s))."""
    _check_classical(rho, eta)
    s = np.atleast_1d(np.asarray(s, dtype=float))
    return _kernels.active().jacobi_table(int(n), float(rho), float(eta), s)


def jacobi_eval(n: int, rho: float, eta: float, s):
    """P_n^{(rho, eta)}(s) by the three-term recurrence."""
    scalar = np.ndim(s) == 0
    vals = jacobi_table(n, rho, eta, s)[n]
    return float(vals[0]) if scalar else vals


def jacobi_deriv(n: int, rho: float, eta: float, s):
    """d/ds P_n^{(rho, eta)}(s) = (n + rho + eta + 1)/2 P_{n-1}^{(rho+1, eta+1)}(s)."""
    if n == 0:
        return np.zeros_like(np.asarray(s, dtype=float))
    return 0.5 * (n + rho + eta + 1) * jacobi_eval(n - 1, rho + 1, eta + 1, s)


def jacobi_norm(n: int, rho: float, eta: float) -> float:
    """Squared weighted norm of P_n^{(rho, eta)} on [-1, 1]."""
    _check_classical(rho, eta)
    if n == 0:
        return 2.0 ** (rho + eta + 1) * gamma_ratio(rho + 1, rho + eta + 2) * math.gamma(eta + 1)
    return (
        2.0 ** (rho + eta + 1)
        / (2 * n + rho + eta + 1)
        * gamma_ratio(n + rho + 1, n + 1)
        * gamma_ratio(n + eta + 1, n + rho + eta + 1)
    )


def upsilon(j: int, rho_t: float, eta_t: float, n_t: int) -> float:
    """Coefficient of u^j in P_{n_t}^{(rho_t, eta_t)}(2u - 1)."""
    if not 0 <= j <= n_t:
        raise ValueError("upsilon needs 0 <= j <= n")
    sign = -1.0 if (n_t - j) % 2 else 1.0
    return (
        sign
        * gamma_ratio(n_t + eta_t + 1, eta_t + j + 1)
        * gamma_ratio(n_t + rho_t + eta_t + j + 1, n_t + rho_t + eta_t + 1)
        / (math.factorial(j) * math.factorial(n_t - j))
    )


def upsilon_row(n_t: int, rho_t, eta_t, mp: bool = False) -> np.ndarray:
    """All coefficients j = 0..n_t of P_{n_t}(2u - 1), via the term ratio recurrence."""
    if mp:
        rho_t, eta_t = to_mpf(rho_t), to_mpf(eta_t)
        row = np.empty(n_t + 1, dtype=object)
        first = mpmath.binomial(n_t + eta_t, n_t)
    else:
        rho_t, eta_t = float(rho_t), float(eta_t)
        row = np.empty(n_t + 1)
        first = gamma_ratio(n_t + eta_t + 1, eta_t + 1) / math.factorial(n_t) if n_t < 171 else math.exp(
            math.lgamma(n_t + eta_t + 1) - math.lgamma(eta_t + 1) - math.lgamma(n_t + 1)
        )
    row[0] = first if n_t % 2 == 0 else -first
    for j in range(n_t):
        row[j + 1] = row[j] * (-(n_t - j) * (n_t + rho_t + eta_t + j + 1)) / ((eta_t + j + 1) * (j + 1))
    return row


@dataclass(frozen=True)
class FGJFBasis:
    """Trial space span{J̄_k : k = ab..N} for a rational order alpha on [0, T]."""

    alpha: Fraction
    b: int
    T: float
    N: int

    def __post_init__(self):
        ab = self.alpha * self.b
        if ab.denominator != 1:
            raise DomainError(f"alpha*b must be an integer (alpha={self.alpha}, b={self.b})")
        if self.N < ab:
            raise DomainError(f"N={self.N} is below alpha*b={int(ab)}")
        if self.T <= 0:
            raise DomainError("T must be positive")

    @property
    def gamma(self) -> Fraction:
        return Fraction(1, self.b)

    @property
    def ab(self) -> int:
        return int(self.alpha * self.b)

    @property
    def offset(self) -> int:
        """Basis index of storage row 0."""
        return self.ab

    @property
    def N_hat(self) -> int:
        return self.N - self.ab

    def prefactor(self, mp: bool = False):
        if mp:
            return mpmath.mpf(2) ** self.ab / to_mpf(self.T) ** to_mpf(self.alpha)
        return 2.0**self.ab / float(self.T) ** float(self.alpha)


def fgjf_monomial_matrix(basis: FGJFBasis, mp: bool = False) -> np.ndarray:
    """Lower-triangular J with J̄_{k+ab}(t) = sum_j J[k, j] t^(alpha + j gamma).

    In binary64 the entries overflow once N_hat passes roughly 500; callers
    that need larger orders pass ``mp=True``.
    """
    n = basis.N_hat + 1
    ab = basis.ab
    if mp:
        J = np.array([[mpmath.mpf(0)] * n for _ in range(n)], dtype=object)
        scale = [basis.prefactor(True) / to_mpf(basis.T) ** (mpmath.mpf(j) / basis.b) for j in range(n)]
    else:
        J = np.zeros((n, n))
        with np.errstate(over="ignore"):
            scale = basis.prefactor() * float(basis.T) ** (-np.arange(n) / basis.b)
    for k in range(n):
        row = upsilon_row(k, 0, ab, mp=mp)
        with np.errstate(over="ignore", invalid="ignore"):
            J[k, : k + 1] = row * np.asarray(scale[: k + 1], dtype=row.dtype)
    return J


def fgjf_eval(k: int, basis: FGJFBasis, t):
    """J̄_k(t) for basis index k >= ab."""
    if k < basis.ab or k > basis.N:
        raise ValueError(f"index {k} outside {basis.ab}..{basis.N}")
    scalar = np.ndim(t) == 0
    vals = fgjf_table(basis, t)[k - basis.ab]
    return float(vals[0]) if scalar else vals


def fgjf_table(basis: FGJFBasis, t) -> np.ndarray:
    """Rows J̄_{ab}..J̄_N at the points ``t``; shape (N_hat+1, len(t))."""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t < 0) or np.any(t > basis.T * (1 + 1e-14)):
        raise ValueError("FGJF evaluation needs 0 <= t <= T")
    s = 2.0 * (t / basis.T) ** (1.0 / basis.b) - 1.0
    P = jacobi_table(basis.N_hat, 0.0, float(basis.ab), s)
    return basis.prefactor() * t ** float(basis.alpha) * P


def _recurrence_coefficients(n: int, rho: float, eta: float):
    a, b = rho, eta
    k = np.arange(n, dtype=float)
    c = 2 * k + a + b
    diag = np.empty(n)
    diag[0] = (b - a) / (a + b + 2)
    if n > 1:
        diag[1:] = (b * b - a * a) / (c[1:] * (c[1:] + 2))
    off = np.empty(max(n - 1, 0))
    if n > 1:
        off[0] = 4 * (1 + a) * (1 + b) / ((2 + a + b) ** 2 * (3 + a + b))
        kk = k[2:]
        cc = c[2:]
        off[1:] = 4 * kk * (kk + a) * (kk + b) * (kk + a + b) / (cc**2 * (cc + 1) * (cc - 1))
    return diag, np.sqrt(off)


def gauss_jacobi_rule(n: int, rho: float, eta: float, newton_steps: int = 3):
    """n-point Gauss rule for the weight (1-s)^rho (1+s)^eta on [-1, 1].

    Nodes come from the symmetric tridiagonal (Golub-Welsch) eigenproblem and
    are polished by Newton steps on P_n; weights use the closed form in P_n'.
    """
    _check_classical(rho, eta)
    if n < 1:
        raise ValueError("need at least one node")
    diag, off = _recurrence_coefficients(n, rho, eta)
    try:
        x = eigh_tridiagonal(diag, off, eigvals_only=True)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise NumericError(f"Gauss-Jacobi eigenproblem failed: {exc}") from exc
    x = np.sort(x)
    for _ in range(newton_steps):
        p = jacobi_eval(n, rho, eta, x)
        dp = jacobi_deriv(n, rho, eta, x)
        x = x - p / dp
    dp = jacobi_deriv(n, rho, eta, x)
    const = 2.0 ** (rho + eta + 1) * gamma_ratio(n + rho + 1, n + 1) * gamma_ratio(n + eta + 1, n + rho + eta + 1)
    w = const / ((1 - x * x) * dp * dp)
    if not (np.all(np.isfinite(w)) and np.all(w > 0) and np.all(np.abs(x) < 1)):
        raise NumericError(f"Gauss-Jacobi rule degenerated (n={n}, rho={rho}, eta={eta})")
    return x, w


def gauss_legendre(n: int):
    return gauss_jacobi_rule(n, 0.0, 0.0)
