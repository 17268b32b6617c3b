"""Gauss-Legendre rules, adaptive real quadrature and complex contour quadrature.

All integrands are *vectorized*: they receive a 1-D array of abscissae and
return an array whose first axis has the same length.  Trailing axes are
allowed, which lets a caller integrate a whole grid of parameter values in
one sweep (the error estimate is then the max over trailing entries).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ConvergenceError, GeometryError, ParameterError, TruncationError

__all__ = [
    "GaussRule",
    "EvalResult",
    "ContourSpec",
    "gauss_legendre_rule",
    "integrate_adaptive",
    "integrate_vertical",
    "integrate_loop",
    "stirling_decay_bound",
]

MAX_ORDER = 512
_EPS = float(np.finfo(float).eps)


@dataclass(frozen=True)
class GaussRule:
    order: int
    nodes: np.ndarray
    weights: np.ndarray


@dataclass(frozen=True)
class EvalResult:
    """A quadrature value with a nonnegative error estimate."""

    value: complex | float | np.ndarray
    err_estimate: float
    panels_used: int = 0

    def __post_init__(self):
        if not np.all(np.isfinite(self.value)):
            raise ConvergenceError("non-finite quadrature value", best=self.value)
        if not (self.err_estimate >= 0.0 and math.isfinite(self.err_estimate)):
            raise ConvergenceError(f"invalid error estimate {self.err_estimate!r}",
                                   best=self.value)

    @property
    def real(self) -> "EvalResult":
        return EvalResult(np.real(self.value), self.err_estimate, self.panels_used)

    def scaled(self, factor) -> "EvalResult":
        return EvalResult(self.value * factor, self.err_estimate * float(np.max(np.abs(factor))),
                          self.panels_used)


@lru_cache(maxsize=None)
def _gauss_arrays(order: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # enforce exact symmetry; leggauss is symmetric only to rounding
    x = 0.5 * (x - x[::-1])
    w = 0.5 * (w + w[::-1])
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def gauss_legendre_rule(order: int) -> GaussRule:
    """Gauss-Legendre rule on [-1, 1] with ``order`` nodes."""
    if isinstance(order, bool) or not isinstance(order, (int, np.integer)):
        raise ParameterError(f"order must be an integer, got {order!r}")
    if not 1 <= order <= MAX_ORDER:
        raise ParameterError(f"order must be in [1, {MAX_ORDER}], got {order}")
    x, w = _gauss_arrays(int(order))
    return GaussRule(int(order), x, w)


def _maxabs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


# ---------------------------------------------------------------------------
# adaptive integration on a real interval

_LOW_ORDER, _HIGH_ORDER = 15, 31


def _panel_values(f, lo: np.ndarray, hi: np.ndarray):
    """Evaluate the 15- and 31-point rules on many panels with one call of f."""
    x15, w15 = _gauss_arrays(_LOW_ORDER)
    x31, w31 = _gauss_arrays(_HIGH_ORDER)
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = np.concatenate([x15, x31])
    pts = mid[:, None] + half[:, None] * xs[None, :]
    vals = np.asarray(f(pts.ravel()))
    vals = vals.reshape((len(lo), len(xs)) + vals.shape[1:])
    extra = (None,) * (vals.ndim - 2)
    h = half[(slice(None),) + extra]
    low = h * np.tensordot(vals[:, :_LOW_ORDER], w15, axes=([1], [0]))
    high = h * np.tensordot(vals[:, _LOW_ORDER:], w31, axes=([1], [0]))
    if vals.ndim > 2:
        err = np.abs(high - low).reshape(len(lo), -1).max(axis=1)
    else:
        err = np.abs(high - low)
    return high, err


def _graded_mesh(a: float, b: float, ratio: float = 0.25, smallest: float = 1e-14):
    pts = [b]
    width = b - a
    d = width
    while d * ratio > smallest * max(width, 1.0):
        d *= ratio
        pts.append(a + d)
    pts.append(a)
    return np.array(pts[::-1])


def integrate_adaptive(
    f: Callable[[np.ndarray], np.ndarray],
    a: float,
    b: float,
    tol: float = 1e-12,
    *,
    singular_at_a: bool = False,
    singular_at_b: bool = False,
    breakpoints: Sequence[float] = (),
    max_panels: int = 100_000,
) -> EvalResult:
    """Adaptive bisection with a 15/31-point Gauss pair on each panel.

    ``singular_at_a`` (resp. ``_b``) starts from a mesh graded geometrically
    toward that endpoint, which restores fast convergence for integrable
    x**alpha * log(x)**r behaviour.  Raises ConvergenceError (carrying the best
    estimate) when ``max_panels`` is exhausted.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or not a < b:
        raise ParameterError(f"need finite a < b, got a={a}, b={b}")
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")

    mesh = np.array([a, b], dtype=float)
    if singular_at_a and singular_at_b:
        m = 0.5 * (a + b)
        left = _graded_mesh(a, m)
        right = (a + b) - _graded_mesh(a, m)[::-1]
        mesh = np.concatenate([left, right[1:]])
    elif singular_at_a:
        mesh = _graded_mesh(a, b)
    elif singular_at_b:
        mesh = (a + b) - _graded_mesh(a, b)[::-1]
    if len(breakpoints):
        mesh = np.unique(np.concatenate([mesh, [p for p in breakpoints if a < p < b]]))

    lo, hi = mesh[:-1], mesh[1:]
    vals, errs = _panel_values(f, lo, hi)
    panels = list(zip(lo.tolist(), hi.tolist()))
    values = list(vals)
    errors = list(errs.tolist())
    evaluated = len(panels)

    while True:
        total_err = float(sum(errors))
        if total_err <= tol:
            break
        if evaluated >= max_panels:
            best = np.sum(values, axis=0)
            raise ConvergenceError(
                f"adaptive quadrature hit panel budget ({max_panels}); "
                f"estimated error {total_err:.3e} > tol {tol:.3e}", best=best)
        # split every panel whose error exceeds its fair share of the budget
        share = tol / len(panels)
        idx = [i for i, e in enumerate(errors) if e > share]
        if not idx:
            idx = [int(np.argmax(errors))]
        idx = sorted(idx, key=lambda i: -errors[i])[: max(1, (max_panels - evaluated) // 2)]
        new_lo, new_hi = [], []
        for i in idx:
            p, q = panels[i]
            m = 0.5 * (p + q)
            if not p < m < q:
                raise ConvergenceError("panel width underflow in adaptive quadrature",
                                       best=np.sum(values, axis=0))
            new_lo += [p, m]
            new_hi += [m, q]
        cv, ce = _panel_values(f, np.array(new_lo), np.array(new_hi))
        evaluated += len(new_lo)
        keep = sorted(set(range(len(panels))) - set(idx))
        panels = [panels[i] for i in keep] + list(zip(new_lo, new_hi))
        values = [values[i] for i in keep] + list(cv)
        errors = [errors[i] for i in keep] + ce.tolist()

    value = np.sum(values, axis=0)
    if np.ndim(value) == 0:
        value = value.item()
    return EvalResult(value, float(sum(errors)), evaluated)


# ---------------------------------------------------------------------------
# Mellin-Barnes style integrals along vertical lines


def _gamma_terms(spec):
    out = []
    for item in spec:
        if isinstance(item, tuple):
            out.append((float(item[0]), complex(item[1])))
        else:
            out.append((1.0, complex(item)))
    return out


def stirling_decay_bound(num, den=(), c: float = 0.5, log_scale: float = 0.0,
                         extra_power: float = 0.0):
    """Tail bound for (1/2 pi) int_{|t|>T} |f(c+it)| dt, f a ratio of Gammas.

    f(s) = prod Gamma(sigma*s + a) / prod Gamma(sigma*s + b) * s**extra_power
    * exp(log_scale) * (unimodular factor).  Entries of ``num``/``den`` are
    shifts a (sigma = 1) or pairs (sigma, a) with sigma = +-1.

    |f(c+iT)| is evaluated exactly; beyond T it decays like
    |t|**beta * exp(-kappa |t|) with kappa = (pi/2)(#num - #den), from
    |Gamma(x+iy)| ~ sqrt(2 pi) |y|**(x-1/2) exp(-pi|y|/2).  The returned
    function gives +inf until T is large enough for that decay to dominate.
    """
    from scipy.special import loggamma

    nt, dt = _gamma_terms(num), _gamma_terms(den)
    kappa = 0.5 * math.pi * (len(nt) - len(dt))
    beta = (sum((sg * c + a).real - 0.5 for sg, a in nt)
            - sum((sg * c + a).real - 0.5 for sg, a in dt) + extra_power)

    def log_abs_f(T: float) -> float:
        s = complex(c, T)
        v = log_scale + extra_power * math.log(abs(s))
        v += sum(loggamma(sg * s + a).real for sg, a in nt)
        v -= sum(loggamma(sg * s + a).real for sg, a in dt)
        return v

    def bound(T: float) -> float:
        if kappa <= 0:
            return math.inf
        rate = kappa - max(beta, 0.0) / T
        if rate < 0.5 * kappa:
            return math.inf
        return math.exp(min(log_abs_f(T), 700.0)) / (math.pi * rate)

    bound.kappa = kappa
    bound.beta = beta
    bound.log_abs_f = log_abs_f
    return bound


def _composite_nodes(a: float, b: float, n_panels: int, order: int):
    x, w = _gauss_arrays(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * (edges[1:] - edges[:-1])
    pts = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wts = (half[:, None] * w[None, :]).ravel()
    return pts, wts


def _contract(vals: np.ndarray, wts: np.ndarray):
    return np.tensordot(wts, vals, axes=([0], [0]))


def integrate_vertical(
    f: Callable[[np.ndarray], np.ndarray],
    c: float,
    tol: float = 1e-13,
    decay_bound: Optional[Callable[[float], float]] = None,
    *,
    panel_width: float = 1.0,
    order: int = 32,
    start_height: float = 4.0,
    max_height: float = 4096.0,
    symmetric: bool = False,
) -> EvalResult:
    """(1/(2 pi i)) * integral of f over the upward line Re s = c.

    The line is truncated at the smallest T = start_height * 2**j with
    ``decay_bound(T) < tol``.  With ``symmetric=True`` the integrand is
    assumed to satisfy f(conj s) = conj f(s) and only the upper half is
    sampled (the result is then exactly real).
    """
    if not tol > 0:
        raise ParameterError(f"tol must be positive, got {tol}")
    if decay_bound is None:
        raise ParameterError("integrate_vertical needs a decay_bound")
    T = float(start_height)
    while decay_bound(T) >= tol:
        T *= 2.0
        if T > max_height:
            raise TruncationError(
                f"decay bound {decay_bound(T / 2):.3e} not below tol {tol:.3e} "
                f"for heights up to {max_height}")
    tail = decay_bound(T)

    lo = 0.0 if symmetric else -T
    n_panels = max(1, int(math.ceil((T - lo) / panel_width)))
    t_hi, w_hi = _composite_nodes(lo, T, n_panels, order)
    t_lo, w_lo = _composite_nodes(lo, T, n_panels, order // 2)
    n_hi = len(t_hi)
    vals = np.asarray(f(c + 1j * np.concatenate([t_hi, t_lo])))
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("integrand is not finite on the vertical line")
    hi = _contract(vals[:n_hi], w_hi)
    lo_val = _contract(vals[n_hi:], w_lo)
    roundoff = _EPS * _maxabs(_contract(np.abs(vals[:n_hi]), w_hi)) / math.pi
    if symmetric:
        hi, lo_val = np.real(hi) / math.pi, np.real(lo_val) / math.pi
    else:
        hi, lo_val = hi / (2 * math.pi), lo_val / (2 * math.pi)
    err = _maxabs(hi - lo_val) + tail + roundoff
    if np.ndim(hi) == 0:
        hi = hi.item()
    return EvalResult(hi, err, 2 * n_panels)


# ---------------------------------------------------------------------------
# closed loops and hairpins


@dataclass(frozen=True)
class ContourSpec:
    """A piecewise-linear contour.

    kind = "vertical": Re s = ``left``, |Im s| <= ``half_height`` (upward).
    kind = "rectangle": positively oriented rectangle [left, right] x [-h, h].
    kind = "hairpin": opens toward +infinity; runs from right+ih to left+ih,
        down to left-ih and back to right-ih (positive orientation about the
        enclosed part of the real axis).  ``right`` is the truncation.
    kind = "left-hairpin": mirror image opening toward -infinity; runs from
        left-ih to right-ih, up to right+ih and back to left+ih.
    """

    kind: str
    left: float
    right: float = 0.0
    half_height: float = 1.0
    panel_length: float = 1.0
    order: int = 32

    KINDS = ("vertical", "rectangle", "hairpin", "left-hairpin")

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ParameterError(f"unknown contour kind {self.kind!r}")
        if not self.half_height > 0:
            raise ParameterError("half_height must be positive")
        if self.kind != "vertical" and not self.left < self.right:
            raise ParameterError("need left < right")

    @classmethod
    def vertical_line(cls, c: float, half_height: float) -> "ContourSpec":
        return cls("vertical", c, c, half_height)

    @classmethod
    def rectangle(cls, left: float, right: float, half_height: float = 1.0) -> "ContourSpec":
        return cls("rectangle", left, right, half_height)

    @classmethod
    def hairpin(cls, left: float, half_height: float, truncation: float) -> "ContourSpec":
        return cls("hairpin", left, truncation, half_height)

    @classmethod
    def left_hairpin(cls, right: float, half_height: float, truncation: float) -> "ContourSpec":
        return cls("left-hairpin", truncation, right, half_height)

    def vertices(self) -> list[complex]:
        l, r, h = self.left, self.right, self.half_height
        if self.kind == "vertical":
            return [complex(l, -h), complex(l, h)]
        if self.kind == "rectangle":
            return [complex(l, -h), complex(r, -h), complex(r, h), complex(l, h), complex(l, -h)]
        if self.kind == "hairpin":
            return [complex(r, h), complex(l, h), complex(l, -h), complex(r, -h)]
        return [complex(l, -h), complex(r, -h), complex(r, h), complex(l, h)]

    def nodes(self, order: Optional[int] = None):
        """Quadrature nodes z_k and complex weights dz_k along the contour."""
        order = order or self.order
        x, w = _gauss_arrays(order)
        zs, ws = [], []
        verts = self.vertices()
        for z0, z1 in zip(verts[:-1], verts[1:]):
            n = max(1, int(math.ceil(abs(z1 - z0) / self.panel_length)))
            edges = z0 + (z1 - z0) * np.linspace(0.0, 1.0, n + 1)
            mid = 0.5 * (edges[:-1] + edges[1:])
            half = 0.5 * (edges[1:] - edges[:-1])
            zs.append((mid[:, None] + half[:, None] * x[None, :]).ravel())
            ws.append((half[:, None] * w[None, :]).ravel())
        return np.concatenate(zs), np.concatenate(ws)

    def distance_to(self, p: complex) -> float:
        verts = self.vertices()
        best = math.inf
        for z0, z1 in zip(verts[:-1], verts[1:]):
            d = z1 - z0
            tpar = ((p - z0) * d.conjugate()).real / abs(d) ** 2
            tpar = min(1.0, max(0.0, tpar))
            best = min(best, abs(p - (z0 + tpar * d)))
        return best


def integrate_loop(
    f: Callable[[np.ndarray], np.ndarray],
    contour: ContourSpec,
    *,
    poles: Sequence[complex] = (),
    min_distance: float = 0.1,
    tail_bound: float = 0.0,
) -> EvalResult:
    """(1/(2 pi i)) * integral of f along ``contour``.

    ``poles`` lists singularities the caller knows about; a contour passing
    within ``min_distance`` of one raises GeometryError.  For open hairpins
    the caller supplies ``tail_bound`` for the truncated part.
    """
    for p in poles:
        if contour.distance_to(complex(p)) < min_distance:
            raise GeometryError(f"contour passes within {min_distance} of pole {p}")
    z_hi, w_hi = contour.nodes(contour.order)
    z_lo, w_lo = contour.nodes(max(2, contour.order // 2))
    vals = np.asarray(f(np.concatenate([z_hi, z_lo])))
    if not np.all(np.isfinite(vals)):
        raise ConvergenceError("integrand is not finite on the contour")
    n = len(z_hi)
    hi = _contract(vals[:n], w_hi) / (2j * math.pi)
    lo = _contract(vals[n:], w_lo) / (2j * math.pi)
    roundoff = _EPS * _maxabs(_contract(np.abs(vals[:n]), np.abs(w_hi))) / (2 * math.pi)
    err = _maxabs(hi - lo) + tail_bound + roundoff
    if np.ndim(hi) == 0:
        hi = hi.item()
    return EvalResult(hi, err, len(z_hi) // contour.order)
