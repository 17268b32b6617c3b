"""Biorthogonal polynomials P_n, dual functions Q_k and their recurrences.

Scalars follow the parameters: when every nu_j is rational (int or
Fraction) all coefficients, moments and recurrence coefficients are exact
``Fraction``s; otherwise they are ``mpmath.mpf`` at ``WORKING_DPS`` digits.
Moments are reported relative to prod_j Gamma(1 + nu_j) where that keeps
them rational.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy import special as sp

from .errors import ParameterError, PrecisionError
from .quadrature import EvalResult, integrate_vertical, stirling_decay_bound
from .specfun import ParamSet, mellin_abscissa

__all__ = [
    "MonicPoly",
    "DualFunctionSpec",
    "MOPReport",
    "p_coeffs",
    "p_eval",
    "p_eval_exact",
    "q_eval",
    "q_eval_scaled",
    "qk_moment_exact",
    "biorth_pairing",
    "mop_orthogonality_check",
    "b_coeff",
    "a_coeff",
    "recurrence_residual",
    "dual_recurrence_residual",
    "a_leading_order",
]

WORKING_DPS = 40


def _working_precision(fn):
    """Run fn with mpmath at WORKING_DPS (matters only on the non-rational path)."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        with mpmath.workdps(WORKING_DPS):
            return fn(*args, **kwargs)
    return wrapper


def is_exact(params: ParamSet) -> bool:
    return all(isinstance(v, (int, Fraction)) for v in params.nu)


def _scalar(params: ParamSet, v):
    if is_exact(params):
        return Fraction(v)
    with mpmath.workdps(WORKING_DPS):
        return mpmath.mpf(v)


def _poch(a, k: int):
    """Rising factorial (a)_k = a (a+1) ... (a+k-1)."""
    out = 1
    for i in range(k):
        out = out * (a + i)
    return out


def _nus(params: ParamSet):
    return [_scalar(params, v) for v in params.nu]


# ---------------------------------------------------------------------------
# polynomials


@dataclass(frozen=True)
class MonicPoly:
    """P_n as its coefficient list, lowest degree first."""

    degree: int
    coeffs: tuple
    exact: bool = True

    def __post_init__(self):
        if len(self.coeffs) != self.degree + 1:
            raise ParameterError("coefficient count does not match degree")
        if self.coeffs[-1] != 1:
            raise ParameterError("MonicPoly must have leading coefficient 1")

    def __call__(self, x):
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc


@_working_precision
def p_coeffs(params: ParamSet, n: int) -> MonicPoly:
    """Coefficients of the monic P_n.

    coeff of x**l is (-1)**(n-l)/(n-l)! * prod_{j=0}^M Gamma(n+nu_j+1)/Gamma(l+nu_j+1)
    = (-1)**(n-l) * binom(n, l) * prod_{j=1}^M (l+nu_j+1)_{n-l}.
    """
    if n < 0:
        raise ParameterError("n must be nonnegative")
    nus = _nus(params)
    coeffs = []
    with mpmath.workdps(WORKING_DPS):
        for l in range(n + 1):
            c = (-1) ** (n - l) * math.comb(n, l)
            for v in nus:
                c = c * _poch(v + l + 1, n - l)
            coeffs.append(c if is_exact(params) else mpmath.mpf(c))
    return MonicPoly(n, tuple(coeffs), is_exact(params))


def p_eval_exact(params: ParamSet, n: int, x):
    """P_n(x) with the float x converted exactly to a rational (or mpf)."""
    poly = p_coeffs(params, n)
    if poly.exact:
        return poly(Fraction(x))
    with mpmath.workdps(WORKING_DPS):
        return poly(mpmath.mpf(x))


def _two_sum(a, b):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


_SPLIT = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    return p, al * bl - (((p - ah * bh) - al * bh) - ah * bl)


_U = 2.0 ** -53


def _gamma_n(n):
    return n * _U / (1 - n * _U)


def _comp_horner(hi: np.ndarray, lo: np.ndarray, x: np.ndarray):
    """Compensated Horner on double-double coefficients, with an error bound."""
    s = np.full_like(x, hi[-1])
    c = np.full_like(x, lo[-1])
    absx = np.abs(x)
    mag = np.full_like(x, abs(hi[-1]))
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(len(hi) - 2, -1, -1):
            p, pi_ = _two_prod(s, x)
            s, sig = _two_sum(p, hi[i])
            c = c * x + (pi_ + sig + lo[i])
            mag = mag * absx + abs(hi[i])
        res = s + c
        n = len(hi) - 1
        bound = _U * np.abs(res) + (_gamma_n(2 * n) ** 2 + 4 * _U * _U) * mag * 1.01
    return res, bound


def p_eval(params: ParamSet, n: int, x, method: str = "auto", rel_guard: float = 1e-6):
    """P_n(x) in floating point.

    ``method="horner"`` runs compensated Horner on double-double coefficients
    and raises PrecisionError if its running error bound exceeds
    ``rel_guard`` relative (or anything overflows).  ``"exact"`` evaluates in
    exact rational arithmetic and rounds once.  ``"auto"`` (default) tries
    Horner and falls back to the exact path point-by-point.
    """
    if method not in ("auto", "horner", "exact"):
        raise ParameterError(f"unknown method {method!r}")
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xs = np.atleast_1d(xa).ravel()
    if method == "exact":
        out = np.array([float(p_eval_exact(params, n, xi)) for xi in xs])
    else:
        poly = p_coeffs(params, n)
        with np.errstate(over="ignore"):
            hi = np.array([float(c) for c in poly.coeffs])
            lo = np.array([float(c - (Fraction(h) if poly.exact else mpmath.mpf(h)))
                           if math.isfinite(h) else 0.0
                           for c, h in zip(poly.coeffs, hi)])
        if not np.all(np.isfinite(hi)):
            bad = np.ones(xs.shape, dtype=bool)
            out = np.zeros_like(xs)
        else:
            out, bound = _comp_horner(hi, lo, xs)
            bad = ~np.isfinite(out) | ~(bound <= rel_guard * np.abs(out))
        if np.any(bad):
            if method == "horner":
                raise PrecisionError(
                    f"compensated Horner error bound exceeds {rel_guard:g} relative for "
                    f"P_{n} at x={xs[bad][0]!r}", "numeric.precision.horner")
            out = out.copy()
            for i in np.flatnonzero(bad):
                out[i] = float(p_eval_exact(params, n, xs[i]))
    if not np.all(np.isfinite(out)):
        raise PrecisionError(f"P_{n}(x) overflows double precision", "numeric.precision.overflow")
    return float(out[0]) if scalar else out.reshape(xa.shape)


# ---------------------------------------------------------------------------
# dual functions


@dataclass(frozen=True)
class DualFunctionSpec:
    """Q_k and its normalisation prod_{j=0}^M Gamma(k+1+nu_j) (kept as a log)."""

    k: int
    params: ParamSet
    log_normalization: float = field(init=False)

    def __post_init__(self):
        if self.k < 0:
            raise ParameterError("k must be nonnegative")
        val = float(sum(sp.gammaln(self.k + 1.0 + float(v)) for v in self.params.all_nu))
        object.__setattr__(self, "log_normalization", val)


def q_eval_scaled(params: ParamSet, k: int, y, tol: float = 1e-14):
    """Q_k(y) as (EvalResult, log_scale) with Q_k = value * exp(log_scale).

    Mellin-Barnes integral of prod_{j=0}^M Gamma(s+nu_j) / Gamma(s-k) * y**(-s)
    on Re s = c, divided by prod_j Gamma(k+1+nu_j).  The integrand is
    normalised by its size at s = c so that huge k neither overflows nor
    underflows; ``tol`` is relative to that size.  ``log_scale`` has the
    shape of ``y``.
    """
    spec = DualFunctionSpec(k, params)
    ya = np.asarray(y, dtype=float)
    if np.any(~(ya > 0)):
        raise ParameterError("q_eval needs y > 0")
    ys = np.atleast_1d(ya).ravel()
    logy = np.log(ys)
    shifts = [float(v) for v in params.all_nu]
    c = mellin_abscissa(shifts)

    def log_core(s):
        lg = -sp.loggamma(s - k) - spec.log_normalization
        for v in shifts:
            lg = lg + sp.loggamma(s + v)
        return lg

    ref = float(np.real(log_core(np.array([complex(c, 0.0)])))[0])
    # the real point can sit near a zero of 1/Gamma(s-k); probe a few heights
    probe = np.real(log_core(c + 1j * np.linspace(0.0, 2.0 + k, 16)))
    ref = max(ref, float(np.max(probe)))

    def integrand(s):
        s = np.asarray(s, dtype=complex)
        base = log_core(s) - ref
        return np.exp(base[:, None] - (s[:, None] - c) * logy[None, :])

    bound = stirling_decay_bound(shifts, [-float(k)], c, log_scale=-ref,
                                 extra_power=0.0)
    width = min(1.0, 10.0 / max(1.0, float(np.max(np.abs(logy)))))
    res = integrate_vertical(integrand, c, tol, bound, panel_width=width,
                             start_height=max(4.0, float(k) / 2), symmetric=True)
    value = np.real(np.asarray(res.value)).reshape(ya.shape)
    log_scale = (ref - c * logy).reshape(ya.shape)
    return EvalResult(value if value.ndim else float(value), res.err_estimate,
                      res.panels_used), log_scale


def q_eval(params: ParamSet, k: int, y, tol: float = 1e-14) -> EvalResult:
    """Dual function Q_k(y) (a G^{M+1,0}_{1,M+1} Meijer function), y > 0."""
    res, log_scale = q_eval_scaled(params, k, y, tol)
    scale = np.exp(log_scale)
    value = res.value * scale
    err = res.err_estimate * float(np.max(scale))
    if np.ndim(value) == 0:
        value = float(value)
    return EvalResult(value, err, res.panels_used)


# ---------------------------------------------------------------------------
# exact moments


@_working_precision
def qk_moment_exact(params: ParamSet, l: int, k: int):
    """int_0^inf x**l Q_k(x) dx = prod_{j=0}^M Gamma(l+1+nu_j)/Gamma(k+1+nu_j) / (l-k)!."""
    if l < 0 or k < 0:
        raise ParameterError("l and k must be nonnegative")
    if l < k:
        return _scalar(params, 0)
    out = _scalar(params, math.comb(l, k))
    for v in _nus(params):
        out = out * _poch(v + k + 1, l - k)
    return out


@_working_precision
def biorth_pairing(params: ParamSet, j: int, k: int):
    """int P_j Q_k dx, assembled from exact coefficients and moments."""
    poly = p_coeffs(params, j)
    total = _scalar(params, 0)
    for l, c in enumerate(poly.coeffs):
        if l >= k:
            total = total + c * qk_moment_exact(params, l, k)
    return total


@dataclass
class MOPReport:
    n: int
    checks: list = field(default_factory=list)  # (label, residual)

    @property
    def passed(self) -> bool:
        return all(r == 0 for _, r in self.checks)

    @property
    def max_residual(self):
        return max((abs(r) for _, r in self.checks), default=0)

    def __bool__(self):
        return self.passed


def mop_orthogonality_check(params: ParamSet, n: int, tilde: bool = True) -> MOPReport:
    """Type II multiple orthogonality of P_n against w_0..w_{M-1}, exactly.

    Checks int P_n(x) x**j w_k(x) dx = 0 for k < M, j < ceil((n-k)/M), using
    the Gamma-product moments of w_k normalised by Gamma(1+nu_1+k) *
    prod_{i>=2} Gamma(1+nu_i); with ``tilde`` also int P_n w~_k = 0, k < n.
    """
    if not is_exact(params):
        raise ParameterError("mop_orthogonality_check needs rational nu (exact path)")
    poly = p_coeffs(params, n)
    nus = _nus(params)
    report = MOPReport(n)
    M = params.M
    for k in range(M):
        shifts = [nus[0] + k] + nus[1:]
        n_cond = -(-(n - k) // M) if n > k else 0
        for j in range(n_cond):
            total = Fraction(0)
            for l, c in enumerate(poly.coeffs):
                m = c
                for a in shifts:
                    m = m * _poch(a + 1, l + j)
                total += m
            report.checks.append((f"w_{k} x^{j}", total))
    if tilde:
        for k in range(n):
            total = Fraction(0)
            for l, c in enumerate(poly.coeffs):
                m = c * Fraction(l + 1) ** k
                for a in nus:
                    m = m * _poch(a + 1, l)
                total += m
            report.checks.append((f"w~_{k}", total))
    return report


# ---------------------------------------------------------------------------
# recurrence coefficients


def _check_k(params: ParamSet, k: int):
    if not 0 <= k <= params.M:
        raise ParameterError(f"recurrence index k must be in [0, {params.M}], got {k}",
                             "param.k.range")


@_working_precision
def b_coeff(params: ParamSet, k: int, n: int):
    """b_{k,n} of the dual recurrence x Q_n = Q_{n-1} + sum_k b_{k,n} Q_{n+k}."""
    _check_k(params, k)
    nus = [_scalar(params, 0)] + _nus(params)
    pref = 1
    for v in nus:
        pref = pref * _poch(n + v + 1, k)
    total = _scalar(params, 0)
    for j in range(k + 2):
        term = _scalar(params, (-1) ** (k + 1 - j)) / (math.factorial(j) * math.factorial(k + 1 - j))
        for v in nus:
            term = term * (n + j + v)
        total = total + term
    return pref * total


def _a_forward(params, k, n):
    nus = [_scalar(params, 0)] + _nus(params)
    pref = 1
    for v in nus:
        pref = pref * _poch(n - k + v + 1, k)
    total = _scalar(params, 0)
    for j in range(k + 2):
        term = _scalar(params, (-1) ** (k + 1 - j)) / (math.factorial(j) * math.factorial(k + 1 - j))
        for v in nus:
            term = term * (n - k + j + v)
        total = total + term
    return pref * total


def _a_reversed(params, k, n):
    nus = [_scalar(params, 0)] + _nus(params)
    pref = 1
    for v in nus:
        pref = pref * _poch(n - k + v + 1, k)
    total = _scalar(params, 0)
    for j in range(k + 2):
        term = _scalar(params, (-1) ** j) / (math.factorial(j) * math.factorial(k + 1 - j))
        for v in nus:
            term = term * (n + 1 - j + v)
        total = total + term
    return pref * total


@_working_precision
def a_coeff(params: ParamSet, k: int, n: int):
    """a_{k,n} of x P_n = P_{n+1} + sum_{k=0}^M a_{k,n} P_{n-k}.

    Both summation orders are evaluated; they must agree (exactly on the
    rational path).  As a polynomial in n the formula is valid for every n,
    and it vanishes for n < k.
    """
    _check_k(params, k)
    fwd = _a_forward(params, k, n)
    rev = _a_reversed(params, k, n)
    if is_exact(params):
        if fwd != rev:
            raise ArithmeticError(f"a_{{{k},{n}}}: summation orders disagree")
    else:
        with mpmath.workdps(WORKING_DPS):
            if abs(fwd - rev) > mpmath.mpf(10) ** (8 - WORKING_DPS) * (1 + abs(fwd)):
                raise ArithmeticError(f"a_{{{k},{n}}}: summation orders disagree")
    return fwd


def _padd(p, q):
    n = max(len(p), len(q))
    return [(p[i] if i < len(p) else 0) + (q[i] if i < len(q) else 0) for i in range(n)]


def _pscale(p, c):
    return [c * v for v in p]


def _pmul(p, q):
    out = [0] * (len(p) + len(q) - 1)
    for i, a in enumerate(p):
        if a == 0:
            continue
        for j, b in enumerate(q):
            out[i + j] += a * b
    return out


def _ptrim(p):
    p = list(p)
    while len(p) > 1 and p[-1] == 0:
        p.pop()
    return p


@_working_precision
def recurrence_residual(params: ParamSet, n: int, a_offset=None) -> list:
    """x P_n - P_{n+1} - sum_{k=0}^{min(M,n)} a_{k,n} P_{n-k}, coefficients low->high.

    Identically zero when the closed-form coefficients are right.
    ``a_offset`` (a callable (k, n) -> number) perturbs a_{k,n}; it exists
    only for mutation testing.
    """
    xp = [_scalar(params, 0)] + list(p_coeffs(params, n).coeffs)
    res = _padd(xp, _pscale(list(p_coeffs(params, n + 1).coeffs), -1))
    for k in range(min(params.M, n) + 1):
        a = a_coeff(params, k, n)
        if a_offset is not None:
            a = a + a_offset(k, n)
        res = _padd(res, _pscale(list(p_coeffs(params, n - k).coeffs), -a))
    return _ptrim(res)


def _q_poly(params: ParamSet, k: int):
    """(s-k)_k / prod_{j=1}^M (1+nu_j)_k as coefficients in s (low->high).

    This is q_k(s) times the k-independent constant prod_{j>=1} Gamma(1+nu_j)
    (the nu_0 factor Gamma(k+1) is kept as k!).
    """
    poly = [_scalar(params, 1)]
    for i in range(k):
        poly = _pmul(poly, [_scalar(params, -(k - i)), _scalar(params, 1)])
    denom = _scalar(params, math.factorial(k))
    for v in _nus(params):
        denom = denom * _poch(v + 1, k)
    return _pscale(poly, 1 / denom)


@_working_precision
def dual_recurrence_residual(params: ParamSet, n: int) -> list:
    """q_n(s+1) prod_{j=1}^M (s+nu_j) - q_{n-1}(s) - sum_k b_{k,n} q_{n+k}(s)."""
    if n < 1:
        raise ParameterError("dual recurrence needs n >= 1")
    qn = _q_poly(params, n)
    # substitute s -> s+1 via Horner on polynomials
    shifted = [_scalar(params, 0)]
    for c in reversed(qn):
        shifted = _padd(_pmul(shifted, [_scalar(params, 1), _scalar(params, 1)]), [c])
    lhs = shifted
    for v in _nus(params):
        lhs = _pmul(lhs, [v, _scalar(params, 1)])
    res = _padd(lhs, _pscale(_q_poly(params, n - 1), -1))
    for k in range(params.M + 1):
        res = _padd(res, _pscale(_q_poly(params, n + k), -b_coeff(params, k, n)))
    return _ptrim(res)


@_working_precision
def a_leading_order(params: ParamSet, k: int):
    """(degree, leading coefficient) of n -> a_{k,n}, by exact finite differences."""
    _check_k(params, k)
    npts = (k + 1) * (params.M + 1) + 2
    vals = [_a_forward(params, k, n) for n in range(npts)]
    diffs = [vals]
    while len(diffs[-1]) > 1:
        prev = diffs[-1]
        diffs.append([prev[i + 1] - prev[i] for i in range(len(prev) - 1)])
    degree = 0
    for d, row in enumerate(diffs):
        if any(v != 0 for v in row):
            degree = d
    lead = diffs[degree][0] / math.factorial(degree)
    return degree, lead
