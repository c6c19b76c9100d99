"""Self-check suite bundled with the CLI ``validate`` command.

Each check returns ``(passed, detail)``; :func:`run_suite` times them and
collects the results. Random cases are drawn from ``numpy.random.default_rng(seed)``
so a given seed always reproduces the same inputs.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.integrate import quad

from .basis import FGJFBasis, fgjf_table, gauss_jacobi_rule, jacobi_norm, jacobi_table
from .fracseries import FracSeries, caputo_on_series, rl_integral_on_series, series_pow, series_solution
from .operators import build_psi, build_Q, coeff_A, matrix_power
from .problem import builtin, random_problem
from .solver import residual_check, solve_recurrence


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def jacobi_orthogonality(max_n: int = 12, params=((0, 0), (0, 3), (2, 1))) -> float:
    """Largest deviation of the Gram matrix from diag(norms)."""
    worst = 0.0
    for rho, eta in params:
        x, w = gauss_jacobi_rule(2 * max_n + 2, rho, eta)
        P = jacobi_table(max_n, rho, eta, x)
        G = (P * w) @ P.T
        norms = np.array([jacobi_norm(n, rho, eta) for n in range(max_n + 1)])
        worst = max(worst, float(np.max(np.abs(G - np.diag(norms)) / norms[:, None])))
    return worst


def fgjf_orthogonality(alpha=Fraction(3, 2), b: int = 4, T: float = 1.0, max_n: int = 10) -> float:
    """Relative Gram-matrix defect of the FGJFs in the weight that makes them orthogonal.

    With u = (t/T)^gamma the trial functions become 2^ab u^ab P_n^{(0, ab)}(2u - 1)
    and dt carries T b u^(b-1); dividing by u^ab leaves the classical (0, ab) weight.
    """
    basis = FGJFBasis(Fraction(alpha), b, T, int(Fraction(alpha) * b) + max_n)
    ab = basis.ab
    x, w = gauss_jacobi_rule(2 * max_n + 2, 0.0, float(ab))
    u = (x + 1) / 2
    t = T * u**b
    vals = fgjf_table(basis, t) / (2.0**ab * u**ab)
    G = (vals * w) @ vals.T
    norms = np.array([jacobi_norm(n, 0.0, float(ab)) for n in range(max_n + 1)])
    return float(np.max(np.abs(G - np.diag(norms)) / norms[:, None]))


def beta_identity_cases(rng, n: int = 20):
    """(beta, tau) pairs; the first is the anchored (1/2, 3) whose value is 32/35."""
    cases = [(Fraction(1, 2), Fraction(3))]
    while len(cases) < n:
        b = int(rng.integers(2, 7))
        beta = Fraction(int(rng.integers(1, b + 1)), b)
        tau = Fraction(int(rng.integers(0, 4 * b)), b)
        cases.append((beta, tau))
    return cases


def beta_identity_error(beta, tau) -> float:
    gamma = Fraction(1, tau.denominator) if tau else Fraction(1)
    m = int(tau / gamma)
    closed = coeff_A(m, 0, beta, gamma)
    b_, t_ = float(beta), float(tau)
    if b_ < 1:
        num, _ = quad(lambda s: s**t_, 0, 1, weight="alg", wvar=(0, b_ - 1), epsabs=1e-14, epsrel=1e-13)
    else:
        num, _ = quad(lambda s: s**t_, 0, 1, epsabs=1e-14, epsrel=1e-13)
    return abs(closed - num)


def power_matrix_error(rng, max_theta: int = 4, max_nhat: int = 12) -> float:
    """cc Psi Q^(theta-1) against brute-force powering of y_N, on one random case."""
    b = int(rng.integers(1, 7))
    ab = int(rng.integers(1, 2 * b + 1))
    N_hat = int(rng.integers(ab, max_nhat + 1))
    theta = int(rng.integers(1, max_theta + 1))
    cc = rng.uniform(-1, 1, N_hat + 1)
    row = cc @ build_psi(N_hat, ab) @ matrix_power(build_Q(cc, N_hat, ab), theta - 1)
    y = FracSeries(b, np.concatenate([np.zeros(ab), cc]))
    direct = series_pow(y, theta).truncate(N_hat).coef
    return float(np.max(np.abs(row - direct)))


def caputo_rl_roundtrip(rng) -> float:
    """D^alpha I^alpha p = p on a random series (terms within the shifted range)."""
    b = int(rng.integers(1, 7))
    alpha = Fraction(int(rng.integers(1, 2 * b + 1)), b)
    M = 30
    p = FracSeries(b, rng.uniform(-1, 1, M + 1))
    back = caputo_on_series(rl_integral_on_series(p, alpha), alpha)
    n = back.M + 1
    return float(np.max(np.abs(back.coef[:n] - p.coef[:n])))


def oracle_difference(spec, N: int) -> float:
    """Max |solver cc - series-oracle coefficient| over grid indices ab..N."""
    sol = solve_recurrence(spec, N)
    oracle = series_solution(spec, N).coef[spec.ab:]
    return float(np.max(np.abs(sol.cbarbar - oracle)))


def _timed(name, fn):
    start = time.perf_counter()
    try:
        passed, detail = fn()
    except Exception as exc:  # noqa: BLE001 - a crashing check is a failed check
        passed, detail = False, f"{type(exc).__name__}: {exc}"
    return CheckResult(name, bool(passed), detail, time.perf_counter() - start)


def run_suite(seed: int = 0, quick: bool = False) -> list[CheckResult]:
    rng = np.random.default_rng(seed)
    n_rand = 5 if quick else 50

    def jac():
        e = jacobi_orthogonality(8 if quick else 12)
        return e <= 1e-11, f"max rel defect {e:.2e}"

    def fgjf():
        e = fgjf_orthogonality()
        return e <= 1e-10, f"max rel defect {e:.2e}"

    def beta():
        cases = beta_identity_cases(rng, 5 if quick else 20)
        e = max(beta_identity_error(b, t) for b, t in cases)
        anchor = coeff_A(3, 0, Fraction(1, 2), Fraction(1))
        return e <= 1e-8 and abs(anchor - 32 / 35) < 1e-14, f"max error {e:.2e}, A(1/2, 3) = {anchor!r}"

    def power():
        e = max(power_matrix_error(rng) for _ in range(n_rand))
        return e <= 1e-10, f"max error {e:.2e} over {n_rand} cases"

    def roundtrip():
        e = max(caputo_rl_roundtrip(rng) for _ in range(n_rand))
        return e <= 1e-12, f"max error {e:.2e}"

    def residual3():
        r = residual_check(solve_recurrence(builtin("example3"), 9))
        return r < 1e-13, f"residual {r:.2e}"

    def residual1():
        r = residual_check(solve_recurrence(builtin("example1", order=24), 16))
        return r < 1e-12, f"residual {r:.2e}"

    def oracle():
        seeds = rng.integers(0, 2**31, 4 if quick else 20)
        worst = max(oracle_difference(random_problem(int(s)), 16) for s in seeds)
        return worst <= 1e-10, f"max diff {worst:.2e} over {len(seeds)} random problems"

    checks = [
        ("jacobi orthogonality", jac),
        ("beta identity", beta),
        ("power matrix brute force", power),
        ("caputo / RL round trip", roundtrip),
        ("residual example3 N=9", residual3),
        ("oracle random problems", oracle),
    ]
    if not quick:
        checks += [
            ("fgjf orthogonality", fgjf),
            ("residual example1 N=16", residual1),
        ]
    return [_timed(name, fn) for name, fn in checks]


def format_table(results) -> str:
    width = max(len(r.name) for r in results)
    lines = [f"{'check':<{width}}  status  seconds  detail"]
    for r in results:
        lines.append(f"{r.name:<{width}}  {'PASS' if r.passed else 'FAIL':<6}  {r.seconds:7.3f}  {r.detail}")
    return "\n".join(lines)

