import math

import numpy as np
import pytest
from scipy import special as sp

from ginprod.errors import ConvergenceError, GeometryError, ParameterError
from ginprod.quadrature import (
    ContourSpec,
    EvalResult,
    gauss_legendre_rule,
    integrate_adaptive,
    integrate_loop,
    integrate_vertical,
    stirling_decay_bound,
)


def test_gauss_rule_exact_for_polynomials():
    rule = gauss_legendre_rule(10)
    for deg in range(20):
        exact = 0.0 if deg % 2 else 2.0 / (deg + 1)
        assert abs(np.sum(rule.weights * rule.nodes ** deg) - exact) < 1e-14


def test_gauss_rule_symmetric_and_validated():
    rule = gauss_legendre_rule(7)
    assert np.allclose(rule.nodes, -rule.nodes[::-1], atol=0, rtol=0)
    assert abs(np.sum(rule.weights) - 2.0) < 1e-15
    with pytest.raises(ParameterError):
        gauss_legendre_rule(0)
    with pytest.raises(ParameterError):
        gauss_legendre_rule(10_000)


def test_eval_result_rejects_nan():
    with pytest.raises(ConvergenceError):
        EvalResult(float("nan"), 0.0)
    with pytest.raises(ConvergenceError):
        EvalResult(1.0, -1.0)


def test_adaptive_smooth():
    res = integrate_adaptive(np.sin, 0.0, math.pi, 1e-13)
    assert abs(res.value - 2.0) < 1e-13
    assert res.err_estimate < 1e-12


def test_adaptive_endpoint_singularity():
    res = integrate_adaptive(lambda u: np.log(u) / np.sqrt(u), 0.0, 1.0, 1e-12, singular_at_a=True)
    assert abs(res.value + 4.0) < 1e-11


def test_adaptive_bessel_square():
    res = integrate_adaptive(lambda u: sp.j0(2 * np.sqrt(u)) ** 2, 0.0, 1.0, 1e-14)
    assert abs(res.value - (sp.j0(2) ** 2 + sp.j1(2) ** 2)) < 1e-14


def test_adaptive_vector_valued():
    res = integrate_adaptive(lambda u: np.stack([u, u ** 2], axis=-1), 0.0, 1.0, 1e-14)
    assert np.allclose(res.value, [0.5, 1 / 3], atol=1e-15)


def test_adaptive_budget_exhausted_reports_best():
    with pytest.raises(ConvergenceError) as info:
        integrate_adaptive(lambda u: np.sin(1 / u), 1e-9, 1.0, 1e-15, max_panels=40)
    assert info.value.best is not None


def test_vertical_line_exponential():
    # (1/2 pi i) int Gamma(s) x**(-s) ds = exp(-x)
    for x in (0.5, 1.0, 2.0):
        f = lambda s, x=x: np.exp(sp.loggamma(s) - s * math.log(x))
        bound = stirling_decay_bound([0.0], c=0.5, log_scale=-0.5 * math.log(x))
        res = integrate_vertical(f, 0.5, 1e-14, bound, symmetric=True)
        assert abs(res.value - math.exp(-x)) < 1e-14
        full = integrate_vertical(f, 0.5, 1e-14, bound)
        assert abs(full.value.real - math.exp(-x)) < 1e-14
        assert abs(full.value.imag) < 1e-14


def test_vertical_macdonald_oracle():
    # K_0(2 sqrt x) = (1/2)(1/2 pi i) int Gamma(s)**2 x**(-s) ds
    f = lambda s: 0.5 * np.exp(2 * sp.loggamma(s))
    res = integrate_vertical(f, 0.5, 1e-14, stirling_decay_bound([0.0, 0.0], c=0.5), symmetric=True)
    assert abs(res.value - sp.k0(2.0)) < 1e-10


def test_vertical_requires_decay():
    f = lambda s: np.exp(sp.loggamma(s))
    with pytest.raises(ParameterError):
        integrate_vertical(f, 0.5, 1e-12, None)
    no_decay = stirling_decay_bound([0.0], [(-1.0, 1.0)], c=0.5)
    assert no_decay(100.0) == math.inf


def test_rectangle_residues():
    # oint Gamma(t - 2)/Gamma(t + 1) around 0, 1, 2 vanishes; around 0 alone it gives the residue
    f = lambda t: np.exp(sp.loggamma(t - 2) - sp.loggamma(t + 1))
    res = integrate_loop(f, ContourSpec.rectangle(-0.4, 2.5, 1.0))
    assert abs(res.value) < 1e-13
    res0 = integrate_loop(lambda t: 1.0 / (t * (t - 1.0)), ContourSpec.rectangle(-0.4, 0.5, 1.0))
    assert abs(res0.value + 1.0) < 1e-13


def test_contour_geometry_guard():
    with pytest.raises(GeometryError):
        integrate_loop(lambda t: 1 / t, ContourSpec.rectangle(-0.05, 1.0, 1.0), poles=[0.0])


def test_hairpin_orientation():
    # 1/sin(pi t) has residue (-1)**k / pi at t = k; the hairpin around 0, 1, 2 sums them
    f = lambda t: 1.0 / (np.sin(math.pi * t) * np.exp(sp.loggamma(t + 1)))
    res = integrate_loop(f, ContourSpec.hairpin(-0.4, 0.5, 30.0))
    expect = sum((-1) ** k / (math.pi * math.factorial(k)) for k in range(30))
    assert abs(res.value - expect) < 1e-13


def test_contour_spec_validation():
    with pytest.raises(ParameterError):
        ContourSpec("spiral", 0.0)
    with pytest.raises(ParameterError):
        ContourSpec.rectangle(1.0, 0.0)
    assert ContourSpec.rectangle(0, 1, 1).distance_to(0.5) == pytest.approx(0.5)
