"""Truncated operational matrices acting on coefficient rows over {t^(j/b)}.

All objects have order N_hat + 1 and use 0-based indices; index ``j`` stands
for the monomial t^(j gamma). The solution row ``cc`` is over
{t^(alpha + k gamma)}, which is why Psi (shift by alpha*b) appears wherever it
meets a matrix on the plain grid.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import mpmath
import numpy as np

from .specfun import gamma_ratio, mp_gamma_ratio, to_mpf


def _zeros(shape, mp: bool):
    if mp:
        out = np.empty(shape, dtype=object)
        out.fill(mpmath.mpf(0))
        return out
    return np.zeros(shape)


def build_psi(N_hat: int, ab: int) -> np.ndarray:
    """0/1 matrix with ones exactly at (i, i + ab)."""
    if ab < 0:
        raise ValueError("shift must be non-negative")
    return np.eye(N_hat + 1, k=ab)


def build_chi(N_hat: int, alpha, gamma, mp: bool = False) -> np.ndarray:
    """chi[i] = Gamma(alpha + i gamma + 1) / Gamma(i gamma + 1), the Caputo image of t^(alpha + i gamma)."""
    alpha = Fraction(alpha)
    gamma = Fraction(gamma)
    if mp:
        return np.array([mp_gamma_ratio(alpha + i * gamma + 1, i * gamma + 1) for i in range(N_hat + 1)], dtype=object)
    return np.array([gamma_ratio(float(alpha + i * gamma + 1), float(i * gamma + 1)) for i in range(N_hat + 1)])


def coeff_A(nu: int, m: int, beta, gamma, mp: bool = False):
    """Beta integral Gamma(beta) Gamma(tau + 1) / Gamma(tau + beta + 1) with tau = (nu + m) gamma."""
    beta = Fraction(beta)
    tau = (nu + m) * Fraction(gamma)
    if mp:
        return mpmath.gamma(to_mpf(beta)) * mp_gamma_ratio(tau + 1, tau + beta + 1)
    return math.gamma(float(beta)) * gamma_ratio(float(tau + 1), float(tau + beta + 1))


def coeff_A_table(n: int, beta, gamma, mp: bool = False) -> np.ndarray:
    """coeff_A(k, 0) for k = 0..n-1."""
    vals = [coeff_A(k, 0, beta, gamma, mp) for k in range(n)]
    return np.array(vals, dtype=object if mp else float)


def _conv(mp):
    return to_mpf if mp else float


def build_K(problem, N_hat: int, mp: bool = False) -> np.ndarray:
    """Kernel image of the theta = 0 part of g: entry (mu, nu) lands at mu + nu + beta*b."""
    K = _zeros(N_hat + 1, mp)
    bb = problem.bb
    entries = [(mu, nu, v) for mu, nu, th, v in problem.gcoef if th == 0 and mu + nu + bb <= N_hat]
    if not entries:
        return K
    A = coeff_A_table(max(nu for _, nu, _ in entries) + 1, problem.beta, problem.gamma, mp)
    c = _conv(mp)
    for mu, nu, v in entries:
        K[mu + nu + bb] += c(v) * A[nu]
    return K


def build_F(problem, theta: int, N_hat: int, mp: bool = False) -> np.ndarray:
    """Upper-triangular Toeplitz F[i, j] = f[j - i, theta]."""
    F = _zeros((N_hat + 1, N_hat + 1), mp)
    c = _conv(mp)
    for mu, th, v in problem.fcoef:
        if th != theta or mu > N_hat:
            continue
        idx = np.arange(N_hat + 1 - mu)
        F[idx, idx + mu] += c(v)
    return F


def build_H(problem, theta: int, N_hat: int, mp: bool = False) -> np.ndarray:
    """H[i, i + mu + nu + beta*b] += g[mu, nu, theta] A[nu + i].

    Row i carries the image of s^(i gamma) times the s-factor of each entry,
    so the Beta coefficient depends on the row.
    """
    H = _zeros((N_hat + 1, N_hat + 1), mp)
    bb = problem.bb
    entries = [(mu, nu, v) for mu, nu, th, v in problem.gcoef if th == theta]
    if not entries:
        return H
    A = coeff_A_table(max(nu for _, nu, _ in entries) + N_hat + 1, problem.beta, problem.gamma, mp)
    c = _conv(mp)
    for mu, nu, v in entries:
        shift = mu + nu + bb
        for i in range(N_hat + 1 - shift):
            H[i, i + shift] += c(v) * A[nu + i]
    return H


def build_Q(cbar: np.ndarray, N_hat: int, ab: int) -> np.ndarray:
    """Q[m, r] = cbar[r - m - ab] for r - m >= ab: multiplication by y_N / t^alpha, shifted."""
    cbar = np.asarray(cbar)
    Q = _zeros((N_hat + 1, N_hat + 1), cbar.dtype == object)
    for m in range(N_hat + 1):
        for r in range(m + ab, N_hat + 1):
            Q[m, r] = cbar[r - m - ab]
    return Q


def matrix_power(Q: np.ndarray, p: int) -> np.ndarray:
    """Q**p by repeated multiplication (Q**0 is the identity)."""
    n = Q.shape[0]
    out = np.eye(n) if Q.dtype != object else np.array(
        [[mpmath.mpf(int(i == j)) for j in range(n)] for i in range(n)], dtype=object)
    for _ in range(p):
        out = out @ Q
    return out


def build_Pi(theta: int, Q: np.ndarray, B: np.ndarray, ab: int) -> np.ndarray:
    """Pi = Psi Q^(theta-1) B through its components.

    Q^(theta-1) is upper-triangular Toeplitz, so row i of Psi Q^(theta-1) is
    its first row shifted by i + ab, which gives
    Pi[i, j] = sum_r Q^(theta-1)[0, r] B[i + r + ab, j].
    """
    n = B.shape[0]
    row = matrix_power(Q, theta - 1)[0]
    Pi = _zeros((n, n), B.dtype == object)
    for i in range(n):
        for r in range(n - i - ab):
            if row[r] != 0:
                Pi[i] = Pi[i] + row[r] * B[i + r + ab]
    return Pi


def build_Pi_dense(theta: int, Q: np.ndarray, B: np.ndarray, ab: int) -> np.ndarray:
    """Reference product Psi @ Q^(theta-1) @ B with explicit matrices."""
    return build_psi(B.shape[0] - 1, ab) @ matrix_power(Q, theta - 1) @ B


@dataclass(frozen=True)
class OperationalSet:
    N_hat: int
    ab: int
    psi: np.ndarray
    chi: np.ndarray
    K: np.ndarray
    F: dict
    H: dict
    theta_support: tuple


def assemble(problem, N_hat: int, mp: bool = False) -> OperationalSet:
    thetas = tuple(th for th in problem.theta_support if th >= 1)
    return OperationalSet(
        N_hat=N_hat,
        ab=problem.ab,
        psi=build_psi(N_hat, problem.ab),
        chi=build_chi(N_hat, problem.alpha, problem.gamma, mp),
        K=build_K(problem, N_hat, mp),
        F={th: build_F(problem, th, N_hat, mp) for th in thetas},
        H={th: build_H(problem, th, N_hat, mp) for th in thetas},
        theta_support=thetas,
    )


def dump_matrices(ops: OperationalSet, directory, lam: float = 1.0) -> list[Path]:
    """Write every assembled object as row-major CSV with round-trip precision."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    items = {"psi": ops.psi, "chi": ops.chi, "K": ops.K}
    for th in ops.theta_support:
        items[f"F_{th}"] = ops.F[th]
        items[f"H_{th}"] = ops.H[th]
        items[f"B_{th}"] = ops.F[th] + lam * ops.H[th]
    written = []
    for name, arr in items.items():
        arr = np.atleast_2d(np.asarray(arr, dtype=float))
        path = directory / f"{name}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            for row in arr:
                w.writerow(["%.17g" % x for x in row])
        written.append(path)
    return written
