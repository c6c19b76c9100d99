import math
from dataclasses import replace
from fractions import Fraction

import mpmath
import numpy as np
import pytest

from fracpg.basis import fgjf_monomial_matrix
from fracpg.errors import DomainError
from fracpg.fracseries import series_solution
from fracpg.operators import assemble
from fracpg.problem import ProblemSpec, builtin, random_problem, zero_problem
from fracpg.solver import (
    convergence_study,
    error_report,
    evaluate,
    evaluate_fgjf,
    fgjf_coefficients,
    fit_semilog,
    reference_step,
    residual_check,
    solve_recurrence,
)
from fracpg.specfun import mittag_leffler

# mpmath: E_{3/2}(1) - 1
ML_AT_ONE = 0.93948726143374897


@pytest.fixture(scope="module")
def ex1():
    return builtin("example1", order=72)


def test_example3_is_exact():
    sol = solve_recurrence(builtin("example3"), 9)
    expect = np.zeros(6)
    expect[5] = 1.0
    np.testing.assert_allclose(sol.cbarbar, expect, atol=1e-14)
    assert evaluate(sol, 0.49) == pytest.approx(0.343, rel=1e-14)
    rep = error_report(sol)
    assert max(rep.l2, rep.linf_grid, rep.weighted_l2) < 1e-13
    assert residual_check(sol) < 1e-13


def test_zero_problem_gives_zero():
    sol = solve_recurrence(zero_problem(), 8)
    assert not np.any(sol.cbarbar)
    assert evaluate(sol, 0.0) == 0.0


def test_rejects_small_N():
    with pytest.raises(DomainError):
        solve_recurrence(builtin("example3"), 3)


@pytest.mark.parametrize("seed", range(6))
def test_first_coefficient_formula(seed):
    spec = random_problem(seed)
    sol = solve_recurrence(spec, spec.ab + 4)
    f00 = sum(v for mu, th, v in spec.fcoef if mu == 0 and th == 0)
    K0 = assemble(spec, 0).K[0]
    assert sol.cbarbar[0] == pytest.approx((f00 + spec.lam * K0) / math.gamma(float(spec.alpha) + 1), abs=1e-15)


def test_triangularity(ex1, rng):
    spec = builtin("example3")
    for problem, N in ((ex1, 20), (spec, 14), (random_problem(11), 16)):
        ops = assemble(problem, N - problem.ab)
        cc = solve_recurrence(problem, N, method="reference").cbarbar
        for k in range(len(cc)):
            perturbed = cc.copy()
            perturbed[k + 1:] += rng.uniform(-5, 5, len(cc) - k - 1)
            # look-ahead coefficients may hold anything; cc_k must not move
            assert reference_step(problem, ops, perturbed, k) == cc[k]


@pytest.mark.parametrize("seed", [0, 3, 5, 8])
def test_reference_matches_fast(seed, kernels):
    spec = random_problem(seed)
    N = spec.ab + 16
    fast = solve_recurrence(spec, N, kernels=kernels).cbarbar
    ref = solve_recurrence(spec, N, method="reference").cbarbar
    np.testing.assert_allclose(fast, ref, atol=1e-12, rtol=1e-12)


def test_oracle_equivalence(ex1):
    for spec, N in ((ex1, 16), (ex1, 24), (builtin("example3"), 12)):
        sol = solve_recurrence(spec, N)
        oracle = series_solution(spec, N).coef[spec.ab:]
        assert np.max(np.abs(sol.cbarbar - oracle)) <= 1e-12


@pytest.mark.parametrize("seed", range(20))
def test_oracle_equivalence_random(seed):
    spec = random_problem(seed)
    assert spec.b <= 6 and max(spec.theta_support) <= 3
    N = min(24, spec.ab + 20)
    sol = solve_recurrence(spec, N)
    oracle = series_solution(spec, N).coef[spec.ab:]
    assert np.max(np.abs(sol.cbarbar - oracle)) <= 1e-11


@pytest.mark.parametrize("N", [8, 16, 32, 64])
def test_basis_paths_agree(ex1, N):
    sol = solve_recurrence(ex1, N)
    t = np.linspace(0, 1, 201)
    np.testing.assert_allclose(evaluate_fgjf(sol, t), evaluate(sol, t), atol=1e-11, rtol=0)


def test_cbar_reproduces_cbarbar():
    spec = builtin("example1", order=30)
    sol = solve_recurrence(spec, 14)
    J = fgjf_monomial_matrix(sol.basis)
    # entries of J grow like 4^N_hat and amplify the ulp-level error in cbar
    scale = np.max(np.abs(sol.cbar)) * np.abs(J).sum(axis=0)
    assert np.all(np.abs(sol.cbar @ J - sol.cbarbar) <= 1e-14 * scale)


def test_projection_matches_triangular_in_high_precision():
    spec = builtin("example1", order=40)
    sol = solve_recurrence(spec, 30, dps=60)
    proj = fgjf_coefficients(sol, "projection")
    tri = fgjf_coefficients(sol, "triangular")
    np.testing.assert_allclose(proj, tri, atol=1e-13)
    flt = solve_recurrence(spec, 30)
    np.testing.assert_allclose(fgjf_coefficients(flt), proj, atol=1e-13)


def test_lambda_scaling(rng):
    spec = random_problem(4)
    while not spec.gcoef:
        spec = random_problem(int(rng.integers(100, 10_000)))
    s = 3.7
    scaled = replace(spec, lam=spec.lam * s, gcoef=tuple((m, n, t, v / s) for m, n, t, v in spec.gcoef))
    N = spec.ab + 18
    np.testing.assert_allclose(solve_recurrence(scaled, N).cbarbar, solve_recurrence(spec, N).cbarbar, atol=1e-12)


def test_residuals():
    assert residual_check(solve_recurrence(builtin("example1", order=24), 16)) < 1e-12
    assert residual_check(solve_recurrence(random_problem(2), 12 + random_problem(2).ab)) < 1e-11


def test_nonzero_initial_data_is_shifted():
    # D^(3/2) y = y with y(0) = 1, y'(0) = 0 has y = E_{3/2}(t^(3/2))
    spec = ProblemSpec(alpha=Fraction(3, 2), beta=Fraction(1, 2), init=(1.0, 0.0), fcoef=((0, 1, 1.0),))
    sol = solve_recurrence(spec, 60)
    assert evaluate(sol, 1.0) == pytest.approx(mittag_leffler(1.5, 1.0), abs=1e-12)
    assert evaluate(sol, 0.0) == pytest.approx(1.0)
    assert evaluate_fgjf(sol, 0.5) == pytest.approx(evaluate(sol, 0.5), abs=1e-12)
    assert residual_check(sol) < 1e-12


def test_truncated_theta_rejects_initial_data(ex1):
    with pytest.raises(DomainError):
        solve_recurrence(replace(ex1, init=(1.0, 0.0)), 16)


def test_evaluate_rejects_points_outside_interval():
    sol = solve_recurrence(builtin("example3"), 9)
    with pytest.raises(ValueError):
        evaluate(sol, 1.5)


def test_example1_N32_at_one(ex1):
    # y_32 keeps the series terms t^(3k/2) / Gamma(3k/2 + 1) for k <= 5, so the
    # pointwise error at t = 1 is exactly the dropped tail
    sol = solve_recurrence(ex1, 32)
    tail = sum(1 / math.gamma(1.5 * k + 1) for k in range(6, 30))
    assert ML_AT_ONE - evaluate(sol, 1.0) == pytest.approx(tail, rel=1e-9)
    assert error_report(sol).l2 < 1e-6


def test_error_report_self_is_zero(ex1):
    sol = solve_recurrence(ex1, 16)
    rep = error_report(sol, exact=lambda t: evaluate(sol, t))
    assert rep.l2 == rep.linf_grid == rep.weighted_l2 == 0.0
    assert np.all(np.diff(rep.grid) >= 0) and rep.grid[-1] == 1.0


def test_convergence_on_example1(ex1):
    table = convergence_study(ex1, [8, 16, 32])
    e = table.column("e_L2")
    assert np.all(e[1:] * 10 <= e[:-1])
    assert table.rate > 0
    assert abs(e[0] - 6.93e-2) < 6.93e-1


def test_fit_semilog_edge_cases():
    assert fit_semilog([8], [1e-3]) == (None, None, None)
    slope, _, r = fit_semilog([4, 6, 9], [0.0, 1e-18, 0.0])
    assert slope == 0.0 and r is None
    slope, intercept, r = fit_semilog([1, 2, 3], [1e-1, 1e-2, 1e-3])
    assert slope == pytest.approx(-1.0) and intercept == pytest.approx(0.0, abs=1e-12)
    assert r == pytest.approx(-1.0)


def test_convergence_rejects_unsorted():
    with pytest.raises(ValueError):
        convergence_study(builtin("example3"), [9, 6])


def test_mp_solve_matches_float():
    spec = builtin("example1", order=30)
    a = solve_recurrence(spec, 24).cbarbar
    with mpmath.workdps(50):
        b = solve_recurrence(spec, 24, dps=50)
    assert b.is_mp
    np.testing.assert_allclose(np.array(b.cbarbar, dtype=float), a, atol=1e-15)
    assert evaluate(b, 0.7) == pytest.approx(evaluate(solve_recurrence(spec, 24), 0.7), abs=1e-14)
