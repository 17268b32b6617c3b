"""Correlation kernels: finite n, the hard-edge limit, and special cases.

K_n(x, y) = sum_{k<n} P_k(x) Q_k(y) is available as that sum, as a single
u-integral and as a double contour integral.  The limiting kernel K^M_nu is
available as a u-integral of f and g, as a double contour integral and in
integrable form B(f, g)/(x - y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import mpmath
import numpy as np
from scipy import special as sp

from .biorth import (
    WORKING_DPS,
    is_exact,
    p_coeffs,
    p_eval,
    p_eval_exact,
    q_eval,
    q_eval_scaled,
    qk_moment_exact,
)
from .errors import ConvergenceError, DiagonalGuardError, GeometryError, ParameterError
from .quadrature import (
    ContourSpec,
    EvalResult,
    integrate_adaptive,
    integrate_loop,
    integrate_vertical,
    stirling_decay_bound,
)
from .specfun import ParamSet, big_g, delta_g, meijer_g0, mellin_abscissa, small_f, weight_w

__all__ = [
    "KernelConfig",
    "HardEdgeConfig",
    "ConcomitantCoeffs",
    "CauchyReport",
    "kn_sum",
    "kn_sum_grid",
    "kn_u_integral",
    "kn_contour",
    "hard_edge_u",
    "hard_edge_contour",
    "concomitant_coeffs",
    "bilinear_concomitant",
    "hard_edge_integrable",
    "bessel_kernel",
    "bessel_hard_edge",
    "cauchy_identity_check",
    "trace_moment",
    "scaling_limit_error",
    "log_normalization",
    "joint_density",
    "density_normalization",
]

# abscissa of the s-line and left edge of the t-loop in the double integrals
S_ABSCISSA = -0.5
T_LEFT = -0.4
# panels this short keep the 1/(s-t) near-singularity (distance 0.1) resolved
_CONTOUR_PANEL = 0.25


@dataclass(frozen=True)
class KernelConfig:
    params: ParamSet
    n: int
    tol: float = 1e-12

    def __post_init__(self):
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise ParameterError(f"n must be a positive integer, got {self.n!r}", "param.n.range")
        if not self.tol > 0:
            raise ParameterError("tol must be positive", "param.tol.range")


@dataclass(frozen=True)
class HardEdgeConfig:
    params: ParamSet
    tol: float = 1e-12
    diagonal_guard: float = 1e-3

    def __post_init__(self):
        if not self.tol > 0:
            raise ParameterError("tol must be positive", "param.tol.range")
        if not self.diagonal_guard > 0:
            raise ParameterError("diagonal_guard must be positive", "param.delta.range")


def _check_xy(x, y):
    for name, v in (("x", x), ("y", y)):
        if not (math.isfinite(v) and v > 0):
            raise ParameterError(f"{name} must be positive and finite, got {v!r}", f"domain.{name}")


def _prod_nu_shift(params: ParamSet, n: int) -> float:
    return float(np.prod([n + float(v) for v in params.all_nu]))


# ---------------------------------------------------------------------------
# finite-n kernel


def _to_mpf(v):
    if isinstance(v, Fraction):
        return mpmath.mpf(v.numerator) / v.denominator
    return mpmath.mpf(v)


def kn_sum_grid(cfg: KernelConfig, xs: Sequence[float], ys: Sequence[float]) -> np.ndarray:
    """Matrix K_n(xs[i], ys[j]) from the defining sum.

    P_k(x) is evaluated exactly (rational x) and Q_k(y) is carried with a
    separate log scale, so the products stay representable for n in the
    hundreds where P_k and Q_k individually leave double range.
    """
    params, n = cfg.params, cfg.n
    xs = [float(x) for x in np.atleast_1d(xs)]
    ys = np.asarray(np.atleast_1d(ys), dtype=float)
    for x in xs:
        _check_xy(x, 1.0)
    if np.any(~(ys > 0)):
        raise ParameterError("y must be positive", "domain.y")
    with mpmath.workdps(WORKING_DPS):
        acc = [[mpmath.mpf(0)] * len(ys) for _ in xs]
        for k in range(n):
            res, log_scale = q_eval_scaled(params, k, ys, tol=min(cfg.tol, 1e-14))
            qv = np.atleast_1d(res.value)
            ls = np.atleast_1d(log_scale)
            qs = [mpmath.mpf(float(qv[j])) * mpmath.exp(mpmath.mpf(float(ls[j])))
                  for j in range(len(ys))]
            poly = p_coeffs(params, k)
            for i, x in enumerate(xs):
                xr = Fraction(x) if poly.exact else mpmath.mpf(x)
                pk = _to_mpf(poly(xr))
                for j in range(len(ys)):
                    acc[i][j] += pk * qs[j]
        return np.array([[float(v) for v in row] for row in acc])


def kn_sum(cfg: KernelConfig, x: float, y: float) -> float:
    """K_n(x, y) = sum_{k=0}^{n-1} P_k(x) Q_k(y)."""
    _check_xy(x, y)
    if cfg.n <= 40:
        total = 0.0
        for k in range(cfg.n):
            total += p_eval(cfg.params, k, x) * q_eval(cfg.params, k, y, min(cfg.tol, 1e-14)).value
        return float(total)
    return float(kn_sum_grid(cfg, [x], [y])[0, 0])


def kn_u_integral(cfg: KernelConfig, x: float, y: float) -> EvalResult:
    """K_n(x, y) = -prod_{j=0}^M (n + nu_j) int_0^1 P_{n-1}(ux) Q_n(uy) du."""
    _check_xy(x, y)
    params, n = cfg.params, cfg.n
    pref = -_prod_nu_shift(params, n)

    def f(u):
        u = np.asarray(u, dtype=float)
        q, log_scale = q_eval_scaled(params, n, u * y, tol=1e-15)
        scale = np.exp(log_scale)
        p = p_eval(params, n - 1, u * x)
        # second component: pointwise bound on the error of Q_n, integrated alongside
        return np.stack([p * q.value * scale, np.abs(p) * q.err_estimate * scale], axis=-1)

    res = integrate_adaptive(f, 0.0, 1.0, cfg.tol, singular_at_a=True)
    value, q_err = res.value
    err = abs(pref) * (res.err_estimate + abs(q_err))
    return EvalResult(pref * value, err, res.panels_used)


def _t_rectangle(n: int) -> ContourSpec:
    return ContourSpec("rectangle", T_LEFT, n + 0.5, 1.0, panel_length=_CONTOUR_PANEL)


def _inner_sum(s: np.ndarray, t: np.ndarray, a_w: np.ndarray) -> np.ndarray:
    """sum_j a_w[j] / (s_i - t_j) for every s_i."""
    return (1.0 / (s[:, None] - t[None, :])) @ a_w


def kn_contour(cfg: KernelConfig, x: float, y: float, full_line: bool = False) -> EvalResult:
    """K_n from the double contour integral.

    (2 pi i)**-2 int ds oint dt prod_{j=0}^M Gamma(s+nu_j+1)/Gamma(t+nu_j+1)
    * Gamma(t-n+1)/Gamma(s-n+1) * x**t y**(-s-1) / (s-t), with s on
    Re s = -1/2 and t on a rectangle around 0..n with left edge -0.4.

    The t-integral is done once on fixed nodes; the s-line then integrates
    a closed-form function.  With ``full_line`` both halves of the s-line are
    sampled and the complex value is returned (its imaginary part measures
    how well conjugate symmetry holds numerically).
    """
    _check_xy(x, y)
    params, n = cfg.params, cfg.n
    nus = [float(v) for v in params.all_nu]
    if not S_ABSCISSA < T_LEFT:
        raise GeometryError("s-line must lie left of the t-contour")
    contour = _t_rectangle(n)
    t, wt = contour.nodes(contour.order)
    t_lo, wt_lo = contour.nodes(contour.order // 2)

    def t_part(t):
        lg = sp.loggamma(t - n + 1) + t * math.log(x)
        for v in nus:
            lg = lg - sp.loggamma(t + v + 1)
        return np.exp(lg)

    a_w = t_part(t) * wt / (2j * math.pi)
    a_w_lo = t_part(t_lo) * wt_lo / (2j * math.pi)
    weight_sum = float(np.sum(np.abs(a_w)))
    logy = math.log(y)

    def s_part(s):
        lg = -sp.loggamma(s - n + 1) - (s + 1) * logy
        for v in nus:
            lg = lg + sp.loggamma(s + v + 1)
        return np.exp(lg)

    def integrand(s):
        s = np.asarray(s, dtype=complex)
        return s_part(s) * _inner_sum(s, t, a_w)

    base = stirling_decay_bound([v + 1 for v in nus], [1.0 - n], S_ABSCISSA,
                                log_scale=-(S_ABSCISSA + 1) * logy)

    def bound(T):
        return base(T) * weight_sum / max(T - contour.half_height, 1e-3)

    res = integrate_vertical(integrand, S_ABSCISSA, cfg.tol, bound,
                             panel_width=_CONTOUR_PANEL, symmetric=not full_line)
    # t-rule error, propagated through the same s-integral
    check = integrate_vertical(lambda s: s_part(np.asarray(s, dtype=complex))
                               * _inner_sum(np.asarray(s, dtype=complex), t_lo, a_w_lo),
                               S_ABSCISSA, cfg.tol, bound, panel_width=_CONTOUR_PANEL,
                               symmetric=True)
    err = res.err_estimate + abs(float(np.real(res.value)) - float(check.value))
    return EvalResult(res.value, err, res.panels_used + check.panels_used)


# ---------------------------------------------------------------------------
# hard-edge kernel


def hard_edge_u(hcfg: HardEdgeConfig, x: float, y: float) -> EvalResult:
    """K^M_nu(x, y) = int_0^1 f(ux) g(uy) du."""
    _check_xy(x, y)
    params = hcfg.params
    c = mellin_abscissa([float(v) for v in params.nu])

    def integrand(u):
        u = np.asarray(u, dtype=float)
        fv = small_f(params, u * x)
        g = big_g(params, u * y, tol=1e-15)
        # the reported error is a max over the batch, attained at the smallest
        # argument; the line integrand scales like (uy)**(-c) across the batch
        g_err = g.err_estimate * (np.min(u) / u) ** c
        return np.stack([fv * g.value, np.abs(fv) * g_err], axis=-1)

    res = integrate_adaptive(integrand, 0.0, 1.0, hcfg.tol, singular_at_a=True)
    value, g_err = res.value
    return EvalResult(value, res.err_estimate + abs(g_err), res.panels_used)


def _hairpin_truncation(nus, x, tol, start=8.0):
    """Right end T of the t-hairpin: |x**t / prod Gamma(t+nu_j+1)| / sinh(pi/2) < tol/e."""
    T = start
    sinh_h = math.sinh(0.5 * math.pi)
    while True:
        t = complex(T, 0.5)
        lg = T * math.log(x) - sum(sp.loggamma(t + v + 1).real for v in nus)
        if math.exp(min(lg, 700.0)) / sinh_h < tol * math.exp(-1.0):
            return T
        T *= 2.0
        if T > 1e5:
            raise ConvergenceError("t-hairpin truncation did not converge")


def hard_edge_contour(hcfg: HardEdgeConfig, x: float, y: float,
                      full_line: bool = False) -> EvalResult:
    """K^M_nu from its double contour integral.

    (2 pi i)**-2 int ds int dt prod_{j=0}^M Gamma(s+nu_j+1)/Gamma(t+nu_j+1)
    * sin(pi s)/sin(pi t) * x**t y**(-s-1) / (s-t), t on a hairpin around
    the positive axis (left edge -0.4, half-height 1/2).  For M >= 2, s runs
    on Re s = -1/2.  For M = 1 the s-integrand does not decay on that line
    (Gamma(s+1) sin(pi s) = -pi / Gamma(-s)); the line is then closed to the
    left into a hairpin around the poles of Gamma(s+nu_1+1), which is the
    usual Mellin-Barnes convention.
    """
    _check_xy(x, y)
    params = hcfg.params
    nus = [float(v) for v in params.all_nu]
    tol = hcfg.tol
    T = _hairpin_truncation(nus, x, tol * 1e-2)
    contour = ContourSpec("hairpin", T_LEFT, T, 0.5, panel_length=_CONTOUR_PANEL)
    t, wt = contour.nodes(contour.order)
    t_lo, wt_lo = contour.nodes(contour.order // 2)
    logx, logy = math.log(x), math.log(y)

    def t_part(t):
        lg = t * logx
        for v in nus:
            lg = lg - sp.loggamma(t + v + 1)
        return np.exp(lg) / np.sin(math.pi * t)

    a_w = t_part(t) * wt / (2j * math.pi)
    a_w_lo = t_part(t_lo) * wt_lo / (2j * math.pi)
    weight_sum = float(np.sum(np.abs(a_w)))

    def s_part(s):
        lg = -(s + 1) * logy
        if params.M == 1:
            # Gamma(s+1) sin(pi s) = -pi / Gamma(-s)
            lg = lg + sp.loggamma(s + nus[1] + 1) - sp.loggamma(-s)
            return -math.pi * np.exp(lg)
        for v in nus:
            lg = lg + sp.loggamma(s + v + 1)
        return np.exp(lg) * np.sin(math.pi * s)

    def make(tn, aw):
        def integrand(s):
            s = np.asarray(s, dtype=complex)
            return s_part(s) * _inner_sum(s, tn, aw)
        return integrand

    if params.M == 1:
        L = -8.0
        while True:
            probe = np.abs(s_part(np.array([L + 0.5j, L - 0.5j]))) * weight_sum
            if np.max(probe) < tol * 1e-3:
                break
            L *= 2.0
            if L < -1e5:
                raise ConvergenceError("s-hairpin truncation did not converge")
        s_contour = ContourSpec("left-hairpin", L, S_ABSCISSA, 0.5, panel_length=_CONTOUR_PANEL)
        res = integrate_loop(make(t, a_w), s_contour, tail_bound=float(np.max(probe)))
        check = integrate_loop(make(t_lo, a_w_lo), s_contour)
        value = res.value if full_line else float(np.real(res.value))
        err = res.err_estimate + abs(res.value - check.value)
        if not full_line:
            err += abs(float(np.imag(res.value)))
        return EvalResult(value, err, res.panels_used)

    # pi / sin(pi s) = Gamma(s) Gamma(1 - s)
    base = stirling_decay_bound([v + 1 for v in nus], [0.0, (-1.0, 1.0)], S_ABSCISSA,
                                log_scale=math.log(math.pi) - (S_ABSCISSA + 1) * logy)

    def bound(Tv):
        return base(Tv) * weight_sum / max(Tv - 0.5, 1e-3)

    res = integrate_vertical(make(t, a_w), S_ABSCISSA, tol, bound,
                             panel_width=_CONTOUR_PANEL, symmetric=not full_line)
    check = integrate_vertical(make(t_lo, a_w_lo), S_ABSCISSA, tol, bound,
                               panel_width=_CONTOUR_PANEL, symmetric=True)
    err = res.err_estimate + abs(float(np.real(res.value)) - float(check.value))
    return EvalResult(res.value, err, res.panels_used + check.panels_used)


@dataclass(frozen=True)
class ConcomitantCoeffs:
    """a_0..a_M with sum_i a_i x**i = prod_{i=1}^M (x - nu_i)."""

    params: ParamSet
    a: tuple = field(init=False)

    def __post_init__(self):
        poly = [Fraction(1)] if is_exact(self.params) else [1.0]
        for v in self.params.nu:
            shifted = [0] + poly
            scaled = [-v * c for c in poly] + [0]
            poly = [p + q for p, q in zip(shifted, scaled)]
        object.__setattr__(self, "a", tuple(poly))
        # the expansion must reproduce the product at M+1 points
        for z in range(self.params.M + 1):
            lhs = sum(c * z ** i for i, c in enumerate(self.a))
            rhs = 1
            for v in self.params.nu:
                rhs = rhs * (z - v)
            if abs(lhs - rhs) > 1e-9 * (1 + abs(rhs)):
                raise ArithmeticError("concomitant coefficients do not reproduce the product")

    def __getitem__(self, i: int):
        return self.a[i]

    def __len__(self):
        return len(self.a)


def concomitant_coeffs(params: ParamSet) -> ConcomitantCoeffs:
    return ConcomitantCoeffs(params)


def bilinear_concomitant(params: ParamSet, x: float, y: float, tol: float = 1e-15) -> EvalResult:
    """B(f(x), g(y)) = (-1)**(M+1) sum_j (-1)**j D_x**j f(x) sum_i a_{i+j} D_y**i g(y), D = z d/dz."""
    M = params.M
    a = [float(c) for c in concomitant_coeffs(params).a]
    df = [small_f(params, x, derivative=j) for j in range(M + 1)]
    dg = [delta_g(params, i, y, tol) for i in range(M + 1)]
    total, err = 0.0, 0.0
    for j in range(M + 1):
        inner = sum(a[i + j] * dg[i].value for i in range(M - j + 1))
        inner_err = sum(abs(a[i + j]) * dg[i].err_estimate for i in range(M - j + 1))
        total += (-1) ** j * df[j] * inner
        err += abs(df[j]) * inner_err
    return EvalResult((-1) ** (M + 1) * total, err)


def hard_edge_integrable(hcfg: HardEdgeConfig, x: float, y: float) -> EvalResult:
    """K^M_nu(x, y) = B(f(x), g(y)) / (x - y), off the diagonal only."""
    _check_xy(x, y)
    if abs(x - y) < hcfg.diagonal_guard:
        raise DiagonalGuardError(
            f"|x - y| = {abs(x - y):.3g} is below the guard {hcfg.diagonal_guard:g}; "
            "use hard_edge_u on or near the diagonal")
    b = bilinear_concomitant(hcfg.params, x, y)
    return b.scaled(1.0 / (x - y))


# ---------------------------------------------------------------------------
# special cases


def _jprime(nu: float, z: float) -> float:
    return 0.5 * (sp.jv(nu - 1, z) - sp.jv(nu + 1, z))


def bessel_kernel(nu: float, x: float, y: float) -> float:
    """Bessel kernel of order nu.

    (J(sqrt x) sqrt y J'(sqrt y) - sqrt x J'(sqrt x) J(sqrt y)) / (2 (x - y)).
    At x = y the confluent value (J_nu**2 - J_{nu+1} J_{nu-1}) / 4 at sqrt x
    is used; very close to the diagonal, where the difference quotient
    cancels, the kernel is integrated as (1/4) int_0^1 J(sqrt(ux)) J(sqrt(uy)) du.
    """
    if not nu > -1:
        raise ParameterError("Bessel kernel needs nu > -1", "param.nu.range")
    _check_xy(x, y)
    if x == y:
        r = math.sqrt(x)
        return 0.25 * (sp.jv(nu, r) ** 2 - sp.jv(nu + 1, r) * sp.jv(nu - 1, r))
    if abs(x - y) < 1e-4 * (x + y):
        res = integrate_adaptive(
            lambda u: sp.jv(nu, np.sqrt(u * x)) * sp.jv(nu, np.sqrt(u * y)),
            0.0, 1.0, 1e-15, singular_at_a=True)
        return 0.25 * res.value
    rx, ry = math.sqrt(x), math.sqrt(y)
    num = sp.jv(nu, rx) * ry * _jprime(nu, ry) - rx * _jprime(nu, rx) * sp.jv(nu, ry)
    return float(num / (2.0 * (x - y)))


def bessel_hard_edge(nu: float, x: float, y: float) -> float:
    """The M = 1 limit kernel in Bessel form: 4 (y/x)**(nu/2) K^Bes(4x, 4y)."""
    return 4.0 * (y / x) ** (0.5 * nu) * bessel_kernel(nu, 4.0 * x, 4.0 * y)


@dataclass
class CauchyReport:
    a: float
    b: float
    x: float
    y: float
    lhs: float
    rhs: float
    tol: float

    @property
    def rel_deviation(self) -> float:
        return abs(self.lhs - self.rhs) / max(abs(self.rhs), 1e-300)

    @property
    def passed(self) -> bool:
        return self.rel_deviation <= self.tol

    def __bool__(self):
        return self.passed


def cauchy_identity_check(a: float, b: float, x: float, y: float, tol: float = 1e-7) -> CauchyReport:
    """Compare the Cauchy two-matrix hard-edge kernel with (x/y)**a K_{a+b, a}(x, y).

    The left side int_0^1 G^{1,0}_{0,3}(a, 0, -b | ux) G^{2,0}_{0,3}(b, 0, -a | uy) du
    is evaluated with the general Mellin-Barnes routine on its own
    parameters; the right side uses the M = 2 kernel with nu = (a+b, a).
    """
    if not (a > -1 and b > -1 and a + b > -1):
        raise ParameterError("need a, b > -1 and a + b > -1", "param.cauchy.range")
    _check_xy(x, y)

    def integrand(u):
        u = np.asarray(u, dtype=float)
        left = meijer_g0(1, [a, 0.0, -b], u * x, tol=1e-15).value
        right = meijer_g0(2, [b, 0.0, -a], u * y, tol=1e-15).value
        return left * right

    lhs = integrate_adaptive(integrand, 0.0, 1.0, 1e-13, singular_at_a=True).value
    rhs = (x / y) ** a * hard_edge_u(HardEdgeConfig(ParamSet(2, [a + b, a]), 1e-13), x, y).value
    return CauchyReport(a, b, x, y, float(lhs), float(rhs), tol)


# ---------------------------------------------------------------------------
# exact moments and the scaling limit


def trace_moment(cfg: KernelConfig, p: int):
    """int x**p K_n(x, x) dx = E[sum_i x_i**p], exact on the rational path."""
    if p < 0:
        raise ParameterError("p must be nonnegative")
    params = cfg.params
    with mpmath.workdps(WORKING_DPS):
        total = Fraction(0) if is_exact(params) else mpmath.mpf(0)
        for k in range(cfg.n):
            for l, c in enumerate(p_coeffs(params, k).coeffs):
                if l + p >= k:
                    total = total + c * qk_moment_exact(params, l + p, k)
        return total


def scaling_limit_error(params: ParamSet, n: int, grid: Sequence[tuple], tol: float = 1e-12,
                        limit_values: dict | None = None) -> float:
    """sup over grid of |K_n(x/n, y/n)/n - K^M_nu(x, y)|.

    K_n comes from the exact-coefficient sum (no quadrature in x); the limit
    kernel from hard_edge_u.  ``limit_values`` may carry precomputed limits
    keyed by (x, y).
    """
    pts = [(float(x), float(y)) for x, y in grid]
    xs = sorted({x for x, _ in pts})
    ys = sorted({y for _, y in pts})
    mat = kn_sum_grid(KernelConfig(params, n, tol), [x / n for x in xs],
                      np.array([y / n for y in ys]))
    hcfg = HardEdgeConfig(params, tol)
    worst = 0.0
    for x, y in pts:
        if limit_values is not None and (x, y) in limit_values:
            lim = limit_values[(x, y)]
        else:
            lim = hard_edge_u(hcfg, x, y).value
        val = mat[xs.index(x), ys.index(y)] / n
        worst = max(worst, abs(val - lim))
    return worst


# ---------------------------------------------------------------------------
# joint density


def log_normalization(params: ParamSet, n: int) -> float:
    """log Z_n with Z_n = n! prod_{i=1}^n prod_{j=0}^M Gamma(i + nu_j)."""
    total = math.lgamma(n + 1)
    for i in range(1, n + 1):
        for v in params.all_nu:
            total += math.lgamma(i + float(v))
    return total


def joint_density(params: ParamSet, points: Sequence[float], tol: float = 1e-13) -> float:
    """Joint density of the n = len(points) squared singular values."""
    xs = np.asarray(points, dtype=float)
    n = len(xs)
    if n < 1 or np.any(~(xs > 0)):
        raise ParameterError("points must be a nonempty list of positive numbers")
    vander = 1.0
    for j in range(n):
        for k in range(j + 1, n):
            vander *= xs[k] - xs[j]
    W = np.array([np.atleast_1d(weight_w(params, k, xs, tol).value) for k in range(n)]).T
    return float(vander * np.linalg.det(W) * math.exp(-log_normalization(params, n)))


def _weight_cutoff(params: ParamSet) -> float:
    """X with w_k(x) below exp(-70) relative beyond it (w_0 ~ exp(-M x**(1/M)))."""
    return (70.0 / params.M) ** params.M


def density_normalization(params: ParamSet, n: int, nodes: int = 400) -> float:
    """Integral of the joint density over (0, inf)**n for n in {1, 2}.

    The half-line is cut at X = (70/M)**M where the weights are negligible.
    n = 1 uses adaptive quadrature; n = 2 a tensor product Gauss rule on a
    mesh graded toward 0, where the determinant factorizes into
    one-dimensional weight moments.
    """
    X = _weight_cutoff(params)
    if n == 1:
        Z = math.exp(log_normalization(params, 1))
        f = lambda x: weight_w(params, 0, np.asarray(x, dtype=float), 1e-15).value
        a = integrate_adaptive(f, 0.0, 1.0, 1e-13, singular_at_a=True).value
        b = integrate_adaptive(f, 1.0, X, 1e-13).value
        return float((a + b) / Z)
    if n == 2:
        edges = np.concatenate([[0.0], np.geomspace(1e-12, X, 60)])
        t, wt = np.polynomial.legendre.leggauss(max(8, nodes // 60))
        mid, half = 0.5 * (edges[1:] + edges[:-1]), 0.5 * (edges[1:] - edges[:-1])
        x = (mid[:, None] + half[:, None] * t[None, :]).ravel()
        w = (half[:, None] * wt[None, :]).ravel()
        w0 = weight_w(params, 0, x, 1e-13).value
        w1 = weight_w(params, 1, x, 1e-13).value
        # int int (x2 - x1)(w0(x1) w1(x2) - w1(x1) w0(x2)) dx1 dx2
        m = lambda wk, p: float(np.sum(w * wk * x ** p))
        total = 2.0 * (m(w0, 0) * m(w1, 1) - m(w0, 1) * m(w1, 0))
        return total * math.exp(-log_normalization(params, 2))
    raise ParameterError("density_normalization supports n = 1 and n = 2")
