import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from fracpg.basis import (
    FGJFBasis,
    JacobiParams,
    fgjf_eval,
    fgjf_monomial_matrix,
    fgjf_table,
    gauss_jacobi_rule,
    gauss_legendre,
    jacobi_deriv,
    jacobi_eval,
    jacobi_norm,
    jacobi_table,
    upsilon,
    upsilon_row,
)
from fracpg.errors import DomainError
from fracpg.validate import fgjf_orthogonality, jacobi_orthogonality

# Rodrigues' formula evaluated symbolically: P_5^{(0,3)}(0.3)
P5_03_AT_03 = 0.0121534375


def test_jacobi_small_cases():
    s = np.linspace(-1, 1, 7)
    np.testing.assert_array_equal(jacobi_eval(0, 0.3, 1.7, s), np.ones(7))
    np.testing.assert_allclose(jacobi_eval(1, 0.0, 4.0, s), 3 * s - 2, atol=1e-15)
    assert jacobi_eval(5, 0.0, 3.0, 0.3) == pytest.approx(P5_03_AT_03, rel=1e-13)


@pytest.mark.parametrize("rho,eta", [(0, 0), (0, 3), (0.5, -0.5), (2, 7)])
def test_jacobi_matches_scipy(rho, eta):
    s = np.linspace(-1, 1, 41)
    T = jacobi_table(20, rho, eta, s)
    for n in (0, 1, 7, 20):
        np.testing.assert_allclose(T[n], special.eval_jacobi(n, rho, eta, s), rtol=1e-12, atol=1e-12)


def test_jacobi_deriv_by_finite_difference():
    s, h = 0.37, 1e-6
    fd = (jacobi_eval(6, 0.0, 2.0, s + h) - jacobi_eval(6, 0.0, 2.0, s - h)) / (2 * h)
    assert jacobi_deriv(6, 0.0, 2.0, s) == pytest.approx(fd, rel=1e-8)


def test_jacobi_rejects_generalized_indices():
    with pytest.raises(DomainError):
        jacobi_table(3, 0.0, -1.0, [0.0])


def test_norms():
    assert jacobi_norm(0, 0, 0) == pytest.approx(2.0)
    assert jacobi_norm(1, 0, 0) == pytest.approx(2 / 3)
    x, w = gauss_jacobi_rule(8, 0.0, 4.0)
    quad = float(np.sum(w * jacobi_eval(3, 0.0, 4.0, x) ** 2))
    assert jacobi_norm(3, 0.0, 4.0) == pytest.approx(quad, rel=1e-12)


def test_params_bookkeeping():
    p = JacobiParams(0, -4)
    assert (p.rho_hat, p.eta_hat, p.rho_tilde, p.eta_tilde, p.kappa) == (0, 4, 0, 4, 4)
    q = JacobiParams(1.5, 2)
    assert (q.rho_hat, q.eta_hat, q.kappa) == (0, 0, 0)


def test_upsilon_against_polynomial_coefficients():
    assert upsilon(0, 0.0, 0.0, 0) == 1.0
    for n, rho, eta in [(3, 0.0, 4.0), (5, 1.0, 2.0), (8, 0.0, 6.0)]:
        # coefficients of P_n(2u - 1) in u, from scipy's monomial expansion in s
        poly_s = np.poly1d(special.jacobi(n, rho, eta).coeffs)
        poly_u = poly_s(np.poly1d([2.0, -1.0]))
        ref = poly_u.coeffs[::-1]
        closed = [upsilon(j, rho, eta, n) for j in range(n + 1)]
        np.testing.assert_allclose(closed, ref, rtol=1e-9)
        np.testing.assert_allclose(upsilon_row(n, rho, eta), closed, rtol=1e-13)


def test_upsilon_row_mp_matches_float():
    with mpmath.workdps(30):
        row_mp = upsilon_row(12, 0, 6, mp=True)
    np.testing.assert_allclose([float(x) for x in row_mp], upsilon_row(12, 0, 6), rtol=1e-14)


def test_fgjf_values():
    basis = FGJFBasis(Fraction(3, 2), 4, 2.0, 14)
    assert np.all(fgjf_table(basis, [0.0]) == 0.0)
    # P_n^{(0, ab)}(1) = 1, so every function equals the prefactor times T^alpha at t = T
    np.testing.assert_allclose(fgjf_table(basis, [2.0])[:, 0], 2.0**basis.ab, rtol=1e-14)
    t = np.linspace(0, 2, 9)
    lead = basis.prefactor() * t**1.5
    np.testing.assert_allclose(fgjf_eval(basis.ab, basis, t), lead, rtol=1e-15)
    with pytest.raises(ValueError):
        fgjf_eval(basis.ab - 1, basis, 1.0)


def test_fgjf_monomial_matrix_reproduces_table():
    basis = FGJFBasis(Fraction(2, 3), 6, 1.5, 16)
    J = fgjf_monomial_matrix(basis)
    assert np.all(np.triu(J, 1) == 0)
    t = np.linspace(0, 1.5, 13)
    powers = t[None, :] ** (float(basis.alpha) + np.arange(basis.N_hat + 1)[:, None] / basis.b)
    # the monomial sum cancels heavily; measure error against the summed magnitudes
    scale = np.abs(J) @ np.abs(powers)
    assert np.all(np.abs(J @ powers - fgjf_table(basis, t)) <= 1e-14 * scale + 1e-14)


def test_fgjf_monomial_matrix_mp_agrees():
    basis = FGJFBasis(Fraction(1, 2), 2, 2 * math.pi, 10)
    with mpmath.workdps(40):
        Jmp = fgjf_monomial_matrix(basis, mp=True)
    Jf = fgjf_monomial_matrix(basis)
    np.testing.assert_allclose(np.array(Jmp, dtype=float), Jf, rtol=1e-12)


def test_basis_validation():
    with pytest.raises(DomainError):
        FGJFBasis(Fraction(1, 3), 2, 1.0, 4)
    with pytest.raises(DomainError):
        FGJFBasis(Fraction(3, 2), 4, 1.0, 5)


def test_orthogonality_suites():
    assert jacobi_orthogonality(10) <= 1e-10
    assert fgjf_orthogonality(max_n=10) <= 1e-10


def test_gauss_rule_examples():
    x, w = gauss_legendre(1)
    assert x[0] == pytest.approx(0.0, abs=1e-16) and w[0] == pytest.approx(2.0)
    # int_{-1}^{1} (1+s)^4 s^2 ds, integrated exactly term by term
    coeffs = [Fraction(math.comb(4, k)) for k in range(5)]
    exact = sum(c * Fraction(1 - (-1) ** (k + 3), k + 3) for k, c in enumerate(coeffs))
    x, w = gauss_jacobi_rule(3, 0.0, 4.0)
    assert float(np.sum(w * x**2)) == pytest.approx(float(exact), rel=1e-14)
    assert exact == Fraction(352, 105)


@pytest.mark.parametrize("n,rho,eta", [(5, 0, 0), (40, 0, 6), (120, 0.0, 3.0), (300, 0.0, 1.0)])
def test_gauss_rule_matches_scipy(n, rho, eta):
    x, w = gauss_jacobi_rule(n, rho, eta)
    xs, ws = special.roots_jacobi(n, rho, eta)
    np.testing.assert_allclose(x, xs, atol=2e-15)
    np.testing.assert_allclose(w, ws, rtol=1e-9)
    total = 2.0 ** (rho + eta + 1) * special.beta(rho + 1, eta + 1)
    assert np.sum(w) == pytest.approx(total, rel=1e-13)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 30), st.sampled_from([0.0, 1.0, 2.0, 4.0, 6.0]), st.integers(0, 59))
def test_gauss_rule_exact_on_polynomials(n, eta, deg):
    deg = min(deg, 2 * n - 1)
    x, w = gauss_jacobi_rule(n, 0.0, eta)
    # moments of (1+s)^eta s^deg via the Beta function on u = (1+s)/2
    e = int(eta)
    ref = sum(Fraction(math.comb(deg, k) * (-1) ** (deg - k) * 2 ** (e + k + 1), e + k + 1) for k in range(deg + 1))
    assert float(np.sum(w * x**deg)) == pytest.approx(float(ref), rel=1e-11, abs=1e-13 * 2.0**e)
