"""Special functions for Ginibre product ensembles.

Everything here is a Meijer G-function of type G^{m,0}_{0,q} (or an
elementary special case of one).  Functions that accept ``x`` / ``y`` are
vectorized over that argument: a scalar in gives a scalar ``value`` out, an
array in gives an array out.

Contour choices:

* weights w_k, w~_k, g and (Delta_y)^i g for M >= 2 use the vertical line
  Re s = 1/2 (moved right only when some nu_j <= -1/2 would put a pole on it);
* g for M = 1 has no exponential decay on a vertical line, so it is
  evaluated on a loop that starts and ends at -infinity and encloses the
  poles of Gamma(u + nu_1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Real
from typing import Sequence

import numpy as np
from scipy import special as sp

from .errors import ConvergenceError, DomainError, ParameterError
from .quadrature import (
    ContourSpec,
    EvalResult,
    integrate_adaptive,
    integrate_loop,
    integrate_vertical,
    stirling_decay_bound,
)

__all__ = [
    "ParamSet",
    "SeriesBudget",
    "log_gamma",
    "bessel_j",
    "macdonald_k",
    "weight_w",
    "weight_w_tilde",
    "small_f",
    "big_g",
    "delta_g",
    "meijer_g0",
    "mellin_abscissa",
    "mellin_moment",
]

DEFAULT_C = 0.5


@dataclass(frozen=True)
class ParamSet:
    """Number of factors M and the exponents nu_1..nu_M (nu_0 = 0 is implicit)."""

    M: int
    nu: tuple

    def __init__(self, M: int, nu: Sequence[Real] = None):
        if nu is None:
            nu = (0,) * int(M)
        if isinstance(M, bool) or not isinstance(M, (int, np.integer)) or M < 1:
            raise ParameterError(f"M must be a positive integer, got {M!r}", "param.M.range")
        nu = tuple(_as_number(v) for v in nu)
        if len(nu) != M:
            raise ParameterError(f"expected {M} values of nu, got {len(nu)}", "param.nu.length")
        for v in nu:
            if not v > -1:
                raise ParameterError(f"every nu_j must exceed -1, got {v}", "param.nu.range")
        object.__setattr__(self, "M", int(M))
        object.__setattr__(self, "nu", nu)

    @property
    def nu0(self) -> int:
        return 0

    @property
    def all_nu(self) -> tuple:
        """(nu_0, nu_1, ..., nu_M) with nu_0 = 0."""
        return (0,) + self.nu

    @property
    def alpha(self):
        return min(self.nu)

    @property
    def r(self) -> int:
        return sum(1 for v in self.nu if v == self.alpha)

    @property
    def integer_nu(self) -> bool:
        """True when every nu_j is a nonnegative integer (exact-arithmetic path)."""
        return all(isinstance(v, int) and v >= 0 for v in self.nu)

    def floats(self) -> np.ndarray:
        return np.array([float(v) for v in self.nu])

    def permuted(self, order: Sequence[int]) -> "ParamSet":
        return ParamSet(self.M, [self.nu[i] for i in order])


def _as_number(v):
    if isinstance(v, bool):
        raise ParameterError(f"nu entries must be numbers, got {v!r}", "param.nu.type")
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, Fraction):
        return int(v) if v.denominator == 1 else v
    if isinstance(v, (float, np.floating)):
        fv = float(v)
        if not math.isfinite(fv):
            raise ParameterError(f"nu entries must be finite, got {v!r}", "param.nu.range")
        return int(fv) if fv.is_integer() else fv
    raise ParameterError(f"nu entries must be numbers, got {v!r}", "param.nu.type")


@dataclass(frozen=True)
class SeriesBudget:
    max_terms: int = 2000
    tol: float = 1e-17

    def __post_init__(self):
        if self.max_terms < 1:
            raise ParameterError("max_terms must be >= 1")
        if not self.tol > 0:
            raise ParameterError("series tol must be positive")


# ---------------------------------------------------------------------------
# elementary special functions


def log_gamma(z):
    """Principal branch of log Gamma(z) (continuous off the negative real axis)."""
    za = np.asarray(z, dtype=complex)
    bad = (za.imag == 0) & (za.real <= 0) & (za.real == np.round(za.real))
    if np.any(bad):
        raise DomainError(f"Gamma has a pole at {za[bad].ravel()[0].real:g}", "domain.gamma.pole")
    out = sp.loggamma(za)
    # the real routine is a few ulps more accurate on the positive axis
    pos = (za.imag == 0) & (za.real > 0)
    if np.any(pos):
        out = np.where(pos, sp.gammaln(np.where(pos, za.real, 1.0)), out)
    if not np.iscomplexobj(z) and np.all(pos):
        out = out.real
    return out.item() if out.ndim == 0 else out


def bessel_j(nu: float, x):
    """Bessel function of the first kind J_nu(x) for nu > -1, x >= 0."""
    if not nu > -1:
        raise ParameterError(f"bessel_j needs nu > -1, got {nu}")
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise DomainError("bessel_j needs x >= 0")
    out = sp.jv(nu, xa)
    return out.item() if out.ndim == 0 else out


def macdonald_k(nu: float, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise DomainError("macdonald_k needs x > 0", "domain.macdonald.x")
    out = sp.kv(nu, xa)
    return out.item() if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# Mellin-Barnes machinery


def mellin_abscissa(shifts: Sequence[float], preferred: float = DEFAULT_C) -> float:
    """Abscissa c with every pole of Gamma(s + shift) strictly to its left."""
    lo = max(-float(a) for a in shifts)
    if preferred > lo + 0.1:
        return preferred
    return lo + 0.25


def _prepare_arg(x, name="x"):
    xa = np.asarray(x, dtype=float)
    if np.any(~(xa > 0)) or not np.all(np.isfinite(xa)):
        raise DomainError(f"{name} must be positive and finite", f"domain.{name}")
    return xa, xa.ndim == 0


def _panel_width(logs: np.ndarray) -> float:
    w = float(np.max(np.abs(logs))) if logs.size else 0.0
    return min(1.0, 10.0 / w) if w > 0 else 1.0


def _finish(res: EvalResult, scalar: bool) -> EvalResult:
    value = np.real(res.value)
    if scalar:
        value = float(np.ravel(value)[0])
    return EvalResult(value, res.err_estimate, res.panels_used)


def meijer_g0(m: int, b: Sequence[float], z, tol: float = 1e-14, power: int = 0,
              poly=None, poly_degree: int = 0) -> EvalResult:
    """G^{m,0}_{0,q}(b_1..b_q | z) for z > 0 by Mellin-Barnes quadrature.

    The integrand is prod_{j<=m} Gamma(b_j+u) / prod_{j>m} Gamma(1-b_j-u)
    * z**(-u), optionally multiplied by (-u)**power (this yields
    (z d/dz)**power of the function) or by ``poly(u)``.  Requires m >= 1.

    Uses the vertical line when the integrand decays exponentially on it
    (2m > q), else a loop around the poles opening to -infinity.  On the
    vertical line, large arguments move the abscissa to the saddle point
    near z**(1/q) so that exponentially small values keep relative accuracy;
    ``tol`` is measured against the size of the integrand at the real point.
    """
    q = len(b)
    if not 1 <= m <= q:
        raise ParameterError(f"need 1 <= m <= q, got m={m}, q={q}")
    za, scalar = _prepare_arg(z, "z")
    zf = np.atleast_1d(za).ravel()
    logz = np.log(zf)
    top = np.array([float(v) for v in b[:m]])
    bot = np.array([float(v) for v in b[m:]])

    def make_integrand(lz):
        def integrand(u):
            u = np.asarray(u, dtype=complex)
            lg = np.zeros_like(u)
            for bj in top:
                lg += sp.loggamma(u + bj)
            for bj in bot:
                lg -= sp.loggamma(1.0 - bj - u)
            vals = np.exp(lg[:, None] - u[:, None] * lz[None, :])
            if power:
                vals *= ((-u) ** power)[:, None]
            if poly is not None:
                vals *= poly(u)[:, None]
            return vals
        return integrand

    if 2 * m > q:
        if len(bot):
            # 1/Gamma(1-b-u) grows along the real axis: no useful real saddle
            saddle = np.full(zf.shape, DEFAULT_C)
        else:
            saddle = np.maximum(DEFAULT_C, np.round(2.0 * np.exp(logz / q)) / 2.0)
        value = np.empty(zf.shape)
        err, panels = 0.0, 0
        for c0 in np.unique(saddle):
            sel = saddle == c0
            lz = logz[sel]
            c = mellin_abscissa(top, preferred=float(c0))
            f = make_integrand(lz)
            at_c = np.abs(f(np.array([complex(c, 0.0)])))[0]
            log_ref = math.log(max(float(np.min(at_c)), 1e-300)) if not len(bot) else 0.0
            bound = stirling_decay_bound(list(top), [(-1.0, 1.0 - bj) for bj in bot], c,
                                         log_scale=float(np.max(-c * lz)) - log_ref,
                                         extra_power=power + poly_degree)
            res = integrate_vertical(f, c, tol, bound, panel_width=_panel_width(lz),
                                     symmetric=True)
            value[sel] = np.real(res.value)
            err = max(err, res.err_estimate * (float(np.max(at_c)) if not len(bot) else 1.0))
            panels += res.panels_used
        return _finish(EvalResult(value, err, panels), scalar)
    c = mellin_abscissa(top)
    return _finish(_left_loop(make_integrand(logz), c, tol, logz), scalar)


def _left_loop(integrand, right: float, tol: float, logz: np.ndarray,
               half_height: float = 1.0) -> EvalResult:
    """Integrate along a hairpin opening to -infinity, truncated adaptively."""
    L = -8.0
    while True:
        probe = np.abs(integrand(np.array([L + 1j * half_height, L - 1j * half_height])))
        if np.max(probe) < tol * 1e-3:
            break
        L *= 2.0
        if L < -4096:
            raise ConvergenceError("left loop truncation did not converge")
    length = (right - L)
    contour = ContourSpec("left-hairpin", L, right, half_height,
                          panel_length=min(1.0, _panel_width(logz)))
    res = integrate_loop(integrand, contour, tail_bound=float(np.max(probe)))
    return EvalResult(res.value, res.err_estimate, res.panels_used + int(length))


# ---------------------------------------------------------------------------
# weights of the joint density


def weight_w(params: ParamSet, k: int, x, tol: float = 1e-14) -> EvalResult:
    """w_k(x) = G^{M,0}_{0,M}(nu_M, ..., nu_2, nu_1 + k | x)."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    b = [params.nu[0] + k] + list(params.nu[1:])
    return meijer_g0(params.M, b, x, tol)


def weight_w_tilde(params: ParamSet, k: int, x, tol: float = 1e-14) -> EvalResult:
    """(1/2 pi i) int s**k prod Gamma(s + nu_j) x**(-s) ds = (-x d/dx)**k w_0."""
    if k < 0:
        raise ParameterError("k must be nonnegative")
    return meijer_g0(params.M, list(params.nu), x, tol,
                     poly=(lambda u: u ** k) if k else None, poly_degree=k)


# ---------------------------------------------------------------------------
# hard-edge factors f and g


def _neumaier_add(s, comp, term):
    t = s + term
    big = np.abs(s) >= np.abs(term)
    comp = comp + np.where(big, (s - t) + term, (term - t) + s)
    return t, comp


def small_f(params: ParamSet, x, budget: SeriesBudget = SeriesBudget(), derivative: int = 0):
    """f(x) = sum_k (-x)**k / (k! prod_j Gamma(nu_j + k + 1)), the G^{1,0}_{0,M+1} factor.

    ``derivative`` = j returns (x d/dx)**j f(x) by term-wise differentiation.
    Summation is compensated; stops once three consecutive terms are below
    ``budget.tol`` relative to the partial sum (after the terms peak).
    """
    xa = np.asarray(x, dtype=float)
    scalar = xa.ndim == 0
    xs = np.atleast_1d(xa).ravel()
    if np.any(xs < 0):
        raise DomainError("small_f needs x >= 0")
    nu = params.floats()
    term = np.full_like(xs, math.exp(-float(np.sum(sp.gammaln(nu + 1.0)))))
    for v in nu:
        if v + 1 <= 0:
            raise ParameterError("nu_j + 1 must be positive")
    s = term.copy() if derivative == 0 else np.zeros_like(xs)
    comp = np.zeros_like(xs)
    small_run = np.zeros(xs.shape, dtype=int)
    for k in range(1, budget.max_terms + 1):
        term = term * (-xs) / (k * np.prod(nu + k))
        contrib = term * float(k) ** derivative
        s, comp = _neumaier_add(s, comp, contrib)
        total = s + comp
        tiny = np.abs(contrib) <= budget.tol * np.maximum(np.abs(total), 1e-300)
        past_peak = k > xs ** (1.0 / (params.M + 1)) + 1
        small_run = np.where(tiny & past_peak, small_run + 1, 0)
        if np.all(small_run >= 3) or np.all(xs == 0):
            out = s + comp
            return float(out[0]) if scalar else out.reshape(xa.shape)
    raise ConvergenceError(f"small_f series did not converge in {budget.max_terms} terms",
                           best=s + comp)


def big_g(params: ParamSet, y, tol: float = 1e-14) -> EvalResult:
    """g(y) = G^{M,0}_{0,M+1}(nu_1, ..., nu_M, 0 | y)."""
    return meijer_g0(params.M, list(params.nu) + [0], y, tol)


def delta_g(params: ParamSet, i: int, y, tol: float = 1e-14) -> EvalResult:
    """(y d/dy)**i g(y), from the factor (-u)**i in the Mellin-Barnes integrand."""
    if not 0 <= i <= params.M:
        raise ParameterError(f"delta_g needs 0 <= i <= M, got {i}")
    return meijer_g0(params.M, list(params.nu) + [0], y, tol, power=i)


def mellin_moment(params: ParamSet, k: int, s: float, tol: float = 1e-10) -> float:
    """int_0^inf w_k(x) x**(s-1) dx by adaptive quadrature (x = e**t substitution).

    The exact value is Gamma(s + nu_1 + k) prod_{j>=2} Gamma(s + nu_j); this
    routine exists to check that identity independently.
    """
    lo = -40.0 / max(s + min(float(v) for v in params.nu), 0.05)
    hi = math.log((60.0 / params.M) ** params.M + 10.0)

    def f(t):
        t = np.asarray(t, dtype=float)
        return weight_w(params, k, np.exp(t), tol=1e-15).value * np.exp(s * t)

    return integrate_adaptive(f, lo, hi, tol).value
