"""Problem specification, JSON I/O, builtin examples and well-posedness diagnostics.

A problem is

    D^alpha y = f(t, y) + lambda int_0^t (t-s)^(beta-1) g(t, s, y(s)) ds,  t in [0, T],

with f = sum f[mu, theta] t^(mu/b) y^theta and
g = sum g[mu, nu, theta] t^(mu/b) s^(nu/b) y^theta held as sparse lists.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from types import SimpleNamespace
from typing import Callable, Sequence

import mpmath
import numpy as np
from scipy.optimize import brentq

from .errors import DomainError, ProblemValidationError
from .fracseries import FracSeries, caputo_on_series, series_pow, source_series
from .specfun import mittag_leffler, pfq_coefficients, to_mpf

BUILTINS = ("example1", "example2", "example3")
# The example 2 recurrence amplifies rounding by ~1e760 up to index 710 (measured
# against a 1200-digit run); 900 digits leave ~1e-138 absolute error at t = 2 pi.
EXAMPLE2_DPS = 900


@dataclass(frozen=True)
class ProblemSpec:
    alpha: Fraction
    beta: Fraction
    T: float = 1.0
    lam: float = 1.0
    init: tuple = ()
    fcoef: tuple = ()
    gcoef: tuple = ()
    exact_series: FracSeries | None = None
    exact_fn: Callable | None = field(default=None, compare=False)
    exact_ref: dict | None = None
    name: str = "custom"
    # set when the theta support is a truncation of an infinite expansion (e.g. sin y)
    truncated_theta: bool = False
    # recommended mpmath precision; None means binary64 is adequate
    dps: int | None = None
    gating: bool = True

    @property
    def b(self) -> int:
        return math.lcm(self.alpha.denominator, self.beta.denominator)

    @property
    def gamma(self) -> Fraction:
        return Fraction(1, self.b)

    @property
    def ab(self) -> int:
        return int(self.alpha * self.b)

    @property
    def bb(self) -> int:
        return int(self.beta * self.b)

    @property
    def n_init(self) -> int:
        return math.ceil(self.alpha)

    @property
    def has_exact(self) -> bool:
        return self.exact_fn is not None or self.exact_series is not None

    @property
    def theta_support(self) -> list[int]:
        return sorted({th for _, th, _ in self.fcoef} | {th for _, _, th, _ in self.gcoef})

    def exact_value(self, t):
        """Exact solution at ``t``; closed form when known, else the stored series."""
        if self.exact_fn is not None:
            return self.exact_fn(np.asarray(t, dtype=float))
        if self.exact_series is not None:
            vals = self.exact_series(t)
            return np.asarray(vals, dtype=float) if self.exact_series.is_mp else vals
        raise DomainError(f"problem {self.name!r} has no exact solution")


# ---------------------------------------------------------------- validation


def _order(raw, path: str, issues: list, upper: Fraction | None = None):
    try:
        a, b = raw
        if int(a) != a or int(b) != b:
            raise TypeError
        a, b = int(a), int(b)
    except (TypeError, ValueError):
        issues.append((path, "expected a pair of integers [a, b]"))
        return None
    if a < 1 or b < 1:
        issues.append((path, f"need a >= 1 and b >= 1, got [{a}, {b}]"))
        return None
    g = math.gcd(a, b)
    if g != 1:
        warnings.warn(f"{path}: {a}/{b} is not in lowest terms, using {a // g}/{b // g}", stacklevel=3)
    value = Fraction(a, b)
    if upper is not None and value > upper:
        issues.append((path, f"order {value} outside 0 < order <= {upper}"))
        return None
    return value


def _finite(v, path, issues):
    try:
        x = float(v)
    except (TypeError, ValueError):
        issues.append((path, f"not a number: {v!r}"))
        return None
    if not math.isfinite(x):
        issues.append((path, "value must be finite"))
        return None
    return x


def _index(v, path, issues):
    if isinstance(v, bool) or not isinstance(v, (int, float)) or int(v) != v or v < 0:
        issues.append((path, f"expected a non-negative integer, got {v!r}"))
        return None
    return int(v)


def _check_tensor(raw, width: int, key: str, issues: list) -> list:
    if raw is None:
        return []
    if not isinstance(raw, list):
        issues.append((key, "expected a list"))
        return []
    out = []
    for i, entry in enumerate(raw):
        path = f"{key}[{i}]"
        if not isinstance(entry, (list, tuple)) or len(entry) != width:
            issues.append((path, f"expected {width} fields"))
            continue
        idx = [_index(v, f"{path}[{k}]", issues) for k, v in enumerate(entry[:-1])]
        val = _finite(entry[-1], f"{path}[{width - 1}]", issues)
        if None not in idx and val is not None:
            out.append((*idx, val))
    return out


def load_problem(document) -> ProblemSpec:
    """Validate a problem document (dict, JSON text or path) into a :class:`ProblemSpec`.

    All violations are collected and raised together as a
    :class:`ProblemValidationError` with field paths.
    """
    if isinstance(document, Path) or (isinstance(document, str) and not document.lstrip().startswith("{")):
        document = Path(document).read_text()
    if isinstance(document, str):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProblemValidationError([("$", f"invalid JSON: {exc}")]) from exc
    if not isinstance(document, dict):
        raise ProblemValidationError([("$", "expected a JSON object")])

    issues: list = []
    for key in ("alpha", "beta"):
        if key not in document:
            issues.append((key, "missing"))
    alpha = _order(document["alpha"], "alpha", issues) if "alpha" in document else None
    beta = _order(document["beta"], "beta", issues, upper=Fraction(1)) if "beta" in document else None
    T = _finite(document.get("T", 1.0), "T", issues)
    if T is not None and T <= 0:
        issues.append(("T", "must be positive"))
    lam = _finite(document.get("lambda", 1.0), "lambda", issues)
    init_raw = document.get("init", [])
    if not isinstance(init_raw, list):
        issues.append(("init", "expected a list"))
        init_raw = []
    init = [_finite(v, f"init[{i}]", issues) for i, v in enumerate(init_raw)]
    if alpha is not None and len(init) > math.ceil(alpha):
        issues.append(("init", f"at most ceil(alpha) = {math.ceil(alpha)} values allowed"))
    fcoef = _check_tensor(document.get("f", []), 3, "f", issues)
    gcoef = _check_tensor(document.get("g", []), 4, "g", issues)

    exact_series = None
    exact_fn = None
    exact_ref = document.get("exact")
    builtin_exact = None
    if exact_ref is not None:
        if not isinstance(exact_ref, dict):
            issues.append(("exact", "expected an object or null"))
        elif "builtin" in exact_ref:
            if exact_ref["builtin"] not in BUILTINS:
                issues.append(("exact.builtin", f"unknown builtin {exact_ref['builtin']!r}"))
            else:
                builtin_exact = exact_ref["builtin"]
        elif "series" in exact_ref:
            ser = exact_ref["series"]
            sb = ser.get("b") if isinstance(ser, dict) else None
            if not isinstance(sb, int) or sb < 1:
                issues.append(("exact.series.b", "expected a positive integer"))
            else:
                pairs = _check_tensor(ser.get("coef", []), 2, "exact.series.coef", issues)
                if pairs:
                    exact_series = FracSeries.from_pairs(sb, max(mu for mu, _ in pairs), pairs)
                else:
                    exact_series = FracSeries.zeros(sb, 0)
        else:
            issues.append(("exact", "expected {builtin: name} or {series: {...}}"))

    if issues:
        raise ProblemValidationError(issues)

    spec = ProblemSpec(
        alpha=alpha,
        beta=beta,
        T=T,
        lam=lam,
        init=tuple(init),
        fcoef=tuple(fcoef),
        gcoef=tuple(gcoef),
        exact_series=exact_series,
        exact_ref=exact_ref,
        name=str(document.get("name", "custom")),
    )
    if exact_series is not None and spec.b % exact_series.b:
        raise ProblemValidationError([("exact.series.b", f"grid 1/{exact_series.b} does not divide 1/{spec.b}")])
    if builtin_exact is not None:
        exact_fn = _EXACT_FNS[builtin_exact]
        spec = replace(spec, exact_fn=exact_fn)
    return spec


def dump_problem(spec: ProblemSpec) -> dict:
    """Serialize to the document format read by :func:`load_problem`."""
    doc = {
        "name": spec.name,
        "alpha": [spec.alpha.numerator, spec.alpha.denominator],
        "beta": [spec.beta.numerator, spec.beta.denominator],
        "T": float(spec.T),
        "lambda": float(spec.lam),
        "init": [float(v) for v in spec.init],
        "f": [[mu, th, float(v)] for mu, th, v in spec.fcoef],
        "g": [[mu, nu, th, float(v)] for mu, nu, th, v in spec.gcoef],
    }
    if spec.exact_ref is not None:
        doc["exact"] = spec.exact_ref
    elif spec.exact_series is not None:
        s = spec.exact_series
        doc["exact"] = {"series": {"b": s.b, "coef": [[mu, float(c)] for mu, c in s.pairs()]}}
    else:
        doc["exact"] = None
    return doc


def dumps_problem(spec: ProblemSpec) -> str:
    return json.dumps(dump_problem(spec), indent=2)


# ---------------------------------------------------------------- transformations


def initial_shift_series(spec: ProblemSpec, M: int, mp: bool = False) -> FracSeries:
    """psi(t) = sum y0^(k) t^k / k! on the problem grid."""
    pairs = [(k * spec.b, v / math.factorial(k)) for k, v in enumerate(spec.init)]
    return FracSeries.from_pairs(spec.b, M, pairs, mp=mp)


def shift_initial_data(spec: ProblemSpec, M: int) -> tuple[ProblemSpec, FracSeries]:
    """Rewrite the problem for z = y - psi, which has homogeneous initial data.

    Every y^theta term is redistributed binomially over psi^(theta-k) z^k. This
    is exact only when the theta support is the true (finite) nonlinearity.
    """
    psi = initial_shift_series(spec, M)
    if not any(spec.init):
        return spec, psi
    if spec.truncated_theta:
        raise DomainError(
            f"problem {spec.name!r} has a truncated transcendental nonlinearity; "
            "nonzero initial data cannot be shifted out exactly"
        )
    max_theta = max(spec.theta_support, default=0)
    psi_pow = [series_pow(psi, k).pairs() for k in range(max_theta + 1)]
    fnew: dict = {}
    for mu, th, v in spec.fcoef:
        for k in range(th + 1):
            for p, c in psi_pow[th - k]:
                key = (mu + p, k)
                fnew[key] = fnew.get(key, 0.0) + v * math.comb(th, k) * c
    gnew: dict = {}
    for mu, nu, th, v in spec.gcoef:
        for k in range(th + 1):
            for p, c in psi_pow[th - k]:
                key = (mu, nu + p, k)
                gnew[key] = gnew.get(key, 0.0) + v * math.comb(th, k) * c
    shifted = replace(
        spec,
        init=(),
        fcoef=tuple((mu, th, v) for (mu, th), v in sorted(fnew.items()) if v != 0),
        gcoef=tuple((mu, nu, th, v) for (mu, nu, th), v in sorted(gnew.items()) if v != 0),
        exact_series=None,
        exact_fn=None,
        exact_ref=None,
    )
    return shifted, psi


def manufacture_source(
    exact: FracSeries,
    gcoef: Sequence,
    lam,
    beta,
    alpha,
    extra_f: Sequence = (),
) -> list[tuple[int, int, object]]:
    """theta = 0 source entries f[mu, 0] that make ``exact`` solve the problem.

    f0 = D^alpha y - lambda int (t-s)^(beta-1) g(t, s, y) ds - sum extra_f(t, y),
    evaluated on the series ``exact``; valid up to index exact.M - alpha*b.
    """
    lhs = caputo_on_series(exact, alpha)
    y = exact.truncate(lhs.M)
    terms = SimpleNamespace(b=exact.b, beta=beta, lam=lam, fcoef=tuple(extra_f), gcoef=tuple(gcoef))
    total = lhs - source_series(terms, y)
    return [(mu, 0, c) for mu, c in enumerate(total.coef) if c != 0]


# ---------------------------------------------------------------- well-posedness


@dataclass(frozen=True)
class WellPosednessReport:
    zeta: float
    delta_star: float
    contraction_margin: float


def wellposedness(spec: ProblemSpec, L1: float, L2: float, sup_f: float, sup_g: float,
                  target: float = 0.99) -> WellPosednessReport:
    """Existence constants from user-supplied Lipschitz and sup bounds.

    delta_star is where the contraction margin L1/d^alpha + L2|lambda|Gamma(beta)/d^(alpha+beta)
    equals ``target``; the margin decreases strictly in d, so bisection finds it.
    """
    a = float(spec.alpha)
    bt = float(spec.beta)
    lam = abs(float(spec.lam))
    T = float(spec.T)
    gb = math.gamma(bt)
    zeta = sup_f * T**a / math.gamma(a + 1) + sup_g * lam * gb * T ** (a + bt) / math.gamma(1 + a + bt)
    c1 = L1
    c2 = L2 * lam * gb
    if c1 == 0 and c2 == 0:
        return WellPosednessReport(zeta, 0.0, 0.0)

    def margin(d):
        return c1 / d**a + c2 / d ** (a + bt)

    hi = 1.0
    while margin(hi) >= target:
        hi *= 2.0
    lo = hi / 2.0
    while margin(lo) < target:
        lo /= 2.0
    d = brentq(lambda x: margin(x) - target, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    if margin(d) >= 1.0:  # pragma: no cover - guarded by target < 1
        d = hi
    return WellPosednessReport(zeta, d, margin(d))


# ---------------------------------------------------------------- random problems

_DENOMS = ((2, 2), (2, 3), (3, 2), (3, 3), (2, 6), (6, 2), (3, 6), (6, 3), (6, 6), (3, 1), (2, 1))


def random_problem(seed: int, max_theta: int = 3, n_f: int = 3, n_g: int = 3) -> ProblemSpec:
    """Seeded sparse problem on a grid with b <= 6, homogeneous initial data."""
    rng = np.random.default_rng(seed)
    b1, b2 = _DENOMS[rng.integers(len(_DENOMS))]
    while True:
        a1 = int(rng.integers(1, 2 * b1 + 1))
        if math.gcd(a1, b1) == 1:
            break
    if b2 == 1:
        beta = Fraction(1)
    else:
        while True:
            a2 = int(rng.integers(1, b2))
            if math.gcd(a2, b2) == 1:
                break
        beta = Fraction(a2, b2)
    alpha = Fraction(a1, b1)
    f = {}
    for _ in range(int(rng.integers(1, n_f + 1))):
        f[(int(rng.integers(0, 9)), int(rng.integers(0, max_theta + 1)))] = float(rng.uniform(-1, 1))
    g = {}
    for _ in range(int(rng.integers(0, n_g + 1))):
        key = (int(rng.integers(0, 7)), int(rng.integers(0, 7)), int(rng.integers(0, max_theta + 1)))
        g[key] = float(rng.uniform(-1, 1))
    return ProblemSpec(
        alpha=alpha,
        beta=beta,
        T=1.0,
        lam=float(rng.uniform(-1, 1)),
        fcoef=tuple((mu, th, v) for (mu, th), v in sorted(f.items())),
        gcoef=tuple((mu, nu, th, v) for (mu, nu, th), v in sorted(g.items())),
        name=f"random-{seed}",
    )


# ---------------------------------------------------------------- builtins


def _example1_exact_fn(t):
    t = np.asarray(t, dtype=float)
    return np.vectorize(lambda x: mittag_leffler(1.5, x**1.5) - 1.0, otypes=[float])(t)


def _example2_exact_fn(t):
    t = np.asarray(t, dtype=float)
    return t * np.sin(100.0 * np.sqrt(t))


def _example3_exact_fn(t):
    return np.asarray(t, dtype=float) ** 1.5


_EXACT_FNS = {"example1": _example1_exact_fn, "example2": _example2_exact_fn, "example3": _example3_exact_fn}


def _example1(order: int, mp: bool) -> ProblemSpec:
    alpha, beta, b = Fraction(3, 2), Fraction(1, 4), 4
    conv = to_mpf if mp else float
    M = order
    # E_{3/2}(t^{3/2}) - 1 = sum_{k>=1} t^{3k/2} / Gamma(3k/2 + 1), grid index 6k
    if mp:
        pairs = [(6 * k, 1 / mpmath.gamma(mpmath.mpf(3 * k) / 2 + 1)) for k in range(1, M // 6 + 1)]
    else:
        pairs = [(6 * k, 1 / math.gamma(1.5 * k + 1)) for k in range(1, M // 6 + 1)]
    exact = FracSeries.from_pairs(b, M, pairs, mp=mp)
    # 1/2 s J0(t^{7/4}) sin(y) with J0(x) = sum (-1)^k (x/2)^{2k} / k!^2 and y = O(t^{3/2})
    g = []
    for k in range(M // 14 + 1):
        jk = conv((-1) ** k) / (conv(4) ** k * math.factorial(k) ** 2)
        for j in range(M // 6 + 1):
            th = 2 * j + 1
            if 6 * th > M:
                break
            g.append((14 * k, 4, th, conv(0.5) * jk * conv((-1) ** j) / math.factorial(th)))
    g.append((0, 10, 4, conv(1)))
    g.append((2, 1, 0, conv(1)))
    f = manufacture_source(exact, g, 1, beta, alpha)
    return ProblemSpec(
        alpha=alpha, beta=beta, T=1.0, lam=1.0,
        fcoef=tuple(f), gcoef=tuple(g),
        exact_series=exact, exact_fn=_example1_exact_fn, exact_ref={"builtin": "example1"},
        name="example1", truncated_theta=True,
    )


def _example2(order: int, mp: bool) -> ProblemSpec:
    alpha = beta = Fraction(1, 2)
    b = 2
    conv = to_mpf if mp else float
    M = order
    # t sin(100 sqrt t) = sum (-1)^k 100^{2k+1} t^{(2k+3)/2} / (2k+1)!
    pairs = []
    for k in range((M - 3) // 2 + 1):
        if mp:
            c = (-1) ** k * mpmath.mpf(100) ** (2 * k + 1) / mpmath.factorial(2 * k + 1)
        else:
            c = (-1) ** k * math.exp((2 * k + 1) * math.log(100.0) - math.lgamma(2 * k + 2))
        pairs.append((2 * k + 3, c))
    exact = FracSeries.from_pairs(b, M, pairs, mp=mp)
    q = pfq_coefficients([Fraction(1, 4), Fraction(3, 4)], [Fraction(1, 5), Fraction(2, 5)], M, mp=mp)
    g = [(4, 3, 2, conv(1))]
    half = conv(-0.5)
    g += [(k, 0, 0, 5 * q[k] * half**k) for k in range(M + 1)]
    f = manufacture_source(exact, g, 1, beta, alpha)
    return ProblemSpec(
        alpha=alpha, beta=beta, T=2 * math.pi, lam=1.0,
        fcoef=tuple(f), gcoef=tuple(g),
        exact_series=exact, exact_fn=_example2_exact_fn, exact_ref={"builtin": "example2"},
        name="example2", dps=EXAMPLE2_DPS, gating=False,
    )


def _example3() -> ProblemSpec:
    c5 = 3 * math.gamma(0.5) / (4 * math.gamma(11 / 6))
    return ProblemSpec(
        alpha=Fraction(2, 3), beta=Fraction(1, 2), T=1.0, lam=1.0,
        fcoef=((5, 0, c5), (15, 0, -1.0), (21, 0, -32 / 35), (6, 1, 1.0)),
        gcoef=((0, 0, 2, 1.0),),
        exact_series=FracSeries.monomial(6, 9, 9),
        exact_fn=_example3_exact_fn, exact_ref={"builtin": "example3"},
        name="example3",
    )


def builtin(name: str, order: int = 72, mp: bool | None = None) -> ProblemSpec:
    """Problem registry. ``order`` is the grid truncation for expanded data.

    Expansions of transcendental data are cut at grid index ``order``; solves
    up to N = order are then exact representations of the truncated problem.
    ``mp=None`` picks high precision only where binary64 cannot work.
    """
    if name == "example1":
        return _example1(order, bool(mp))
    if name == "example2":
        with mpmath.workdps(EXAMPLE2_DPS):
            return _example2(order, True if mp is None else mp)
    if name == "example3":
        return _example3()
    raise KeyError(f"unknown builtin {name!r}; choose from {', '.join(BUILTINS)}")


def zero_problem(alpha=Fraction(1, 2), beta=Fraction(1, 2)) -> ProblemSpec:
    return ProblemSpec(alpha=alpha, beta=beta, name="zero", exact_series=FracSeries.zeros(
        math.lcm(alpha.denominator, beta.denominator), 0))
