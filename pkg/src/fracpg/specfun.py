"""Special functions: Gamma and Gamma ratios, Mittag-Leffler, Bessel J_d, pFq.

Gamma itself is delegated to :func:`math.gamma`. Ratios are computed with a
shifted Stirling difference so that arguments in the hundreds (operational
matrices at large truncation) keep ~1e-14 relative accuracy instead of the
~1e-12 obtained by subtracting two ``lgamma`` values.

Every ``mp_*`` twin evaluates the same quantity in :mod:`mpmath` at the
current working precision; the high-precision solve path uses them.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import AccuracyError, DomainError

POLE_TOL = 1e-12
SERIES_RTOL = 1e-17
SERIES_CAP = 100_000

# B_{2k} / (2k (2k-1)) numerators of the Stirling correction, k = 1..8
_STIRLING = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)
_STIRLING_SHIFT = 20.0


def _check_pole(x: float) -> None:
    if not math.isfinite(x):
        raise DomainError(f"non-finite Gamma argument {x!r}")
    if x <= 0 and abs(x - round(x)) <= POLE_TOL:
        raise DomainError(f"Gamma pole at {x!r}")


def gamma_fn(x: float) -> float:
    """Gamma function; raises :class:`DomainError` near 0, -1, -2, ..."""
    x = float(x)
    _check_pole(x)
    return math.gamma(x)


def _stirling_tail(x: float) -> float:
    s = 0.0
    p = x
    x2 = x * x
    for k, bk in enumerate(_STIRLING, 1):
        s += bk / (2 * k * (2 * k - 1) * p)
        p *= x2
    return s


def _positive_ratio(a: float, b: float) -> float:
    scale = 1.0
    while min(a, b) < _STIRLING_SHIFT:
        scale *= b / a
        a += 1.0
        b += 1.0
    d = a - b
    log_r = (
        d * math.log(a)
        + (b - 0.5) * math.log1p(d / b)
        - d
        + (_stirling_tail(a) - _stirling_tail(b))
    )
    if abs(log_r) < 700:
        return scale * math.exp(log_r)
    try:
        return math.exp(log_r + math.log(scale))
    except OverflowError:
        return math.inf


def gamma_ratio(a: float, b: float) -> float:
    """Return Gamma(a) / Gamma(b) without intermediate overflow."""
    a = float(a)
    b = float(b)
    _check_pole(a)
    _check_pole(b)
    if a == b:
        return 1.0
    if a > 0 and b > 0:
        if max(a, b) < _STIRLING_SHIFT:
            return math.gamma(a) / math.gamma(b)
        return _positive_ratio(a, b)
    if max(abs(a), abs(b)) < 170:
        return math.gamma(a) / math.gamma(b)
    sign = _gamma_sign(a) * _gamma_sign(b)
    return sign * math.exp(math.lgamma(a) - math.lgamma(b))


def _gamma_sign(x: float) -> float:
    if x > 0:
        return 1.0
    return -1.0 if math.floor(x) % 2 else 1.0


def to_mpf(x):
    """Convert a float, int or :class:`Fraction` to an exact ``mpf``."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    return mpmath.mpf(x)


def mp_gamma_ratio(a, b):
    """High-precision Gamma(a)/Gamma(b); ``a`` and ``b`` may be Fractions."""
    a = to_mpf(a)
    b = to_mpf(b)
    for x in (a, b):
        if x <= 0 and mpmath.isint(x):
            raise DomainError(f"Gamma pole at {mpmath.nstr(x, 8)}")
    return mpmath.gammaprod([a], [b])


def mittag_leffler(c: float, t: float) -> float:
    """One-parameter Mittag-Leffler function E_c(t) = sum t^k / Gamma(c k + 1).

    Meant for moderate arguments (|t| <= 10); the plain power series is used.
    """
    if c <= 0:
        raise DomainError("Mittag-Leffler order must be positive")
    if t == 0:
        return 1.0
    total = 1.0
    prev = math.inf
    for k in range(1, SERIES_CAP):
        arg = c * k + 1.0
        if arg < 170:
            term = t**k / math.gamma(arg)
        else:
            term = math.copysign(1.0, t) ** k * math.exp(k * math.log(abs(t)) - math.lgamma(arg))
        total += term
        if abs(term) <= SERIES_RTOL * abs(total) and abs(term) <= prev:
            return total
        prev = abs(term)
    raise AccuracyError(f"Mittag-Leffler series did not converge for c={c}, t={t}")


def bessel_j(d: int, t: float) -> float:
    """Bessel function of the first kind, integer order ``d >= 0``, ascending series."""
    if d < 0 or int(d) != d:
        raise DomainError("bessel_j supports non-negative integer orders only")
    d = int(d)
    half = 0.5 * t
    term = half**d / math.factorial(d)
    total = term
    if term == 0.0:
        return 0.0
    h2 = -half * half
    for k in range(1, SERIES_CAP):
        term *= h2 / (k * (k + d))
        total += term
        if abs(term) <= SERIES_RTOL * abs(total):
            return total
    raise AccuracyError(f"Bessel series did not converge for d={d}, t={t}")


def pfq(a: Sequence[float], b: Sequence[float], t: float) -> float:
    """Generalized hypergeometric function pFq(a; b; t) by its Pochhammer series."""
    a = [float(x) for x in a]
    b = [float(x) for x in b]
    for x in b:
        if x <= 0 and abs(x - round(x)) <= POLE_TOL:
            raise DomainError(f"pFq lower parameter {x} is a non-positive integer")
    if len(a) > len(b) + 1 or (len(a) == len(b) + 1 and abs(t) >= 1):
        raise DomainError("pFq series diverges for this parameter configuration")
    term = 1.0
    total = 1.0
    prev = math.inf
    for k in range(SERIES_CAP):
        num = t
        for x in a:
            num *= x + k
        den = float(k + 1)
        for x in b:
            den *= x + k
        term *= num / den
        total += term
        if term == 0.0:
            return total
        if abs(term) <= SERIES_RTOL * abs(total) and abs(term) <= prev:
            return total
        prev = abs(term)
    raise AccuracyError("pFq series hit the term cap")


def pfq_coefficients(a: Sequence, b: Sequence, n: int, mp: bool = False) -> list:
    """Taylor coefficients q_k of pFq(a; b; x) = sum q_k x^k for k = 0..n."""
    one = mpmath.mpf(1) if mp else 1.0
    conv = to_mpf if mp else float
    a = [conv(x) for x in a]
    b = [conv(x) for x in b]
    out = [one]
    q = one
    for k in range(n):
        num = one
        for x in a:
            num *= x + k
        den = one * (k + 1)
        for x in b:
            den *= x + k
        q = q * num / den
        out.append(q)
    return out
