import math

import numpy as np
import pytest

from ginprod.errors import ParameterError
from ginprod.sampler import (
    Histogram,
    MatrixChainSpec,
    SampleBatch,
    batched_eigvalsh,
    draw_product,
    empirical_vs_exact_moments,
    hard_edge_histogram,
    hard_edge_mass,
    hermitian_eigh,
    run_batch,
    squared_singular_values,
    trial_rng,
)
from ginprod.specfun import ParamSet


def test_spec_validation():
    spec = MatrixChainSpec((3, 5, 4))
    assert spec.M == 2 and spec.n == 3 and spec.nu == (2, 1)
    assert spec.params == ParamSet(2, [2, 1])
    with pytest.raises(ParameterError) as info:
        MatrixChainSpec((4, 3))
    assert info.value.code == "spec.n0.min"
    with pytest.raises(ParameterError):
        MatrixChainSpec((3,))
    with pytest.raises(ParameterError):
        MatrixChainSpec((3, 2.5))


def test_draw_determinism_and_shape():
    spec = MatrixChainSpec((2, 3, 4))
    a = draw_product(spec, 7, 11)
    b = draw_product(spec, 7, 11)
    assert a.shape == (4, 2)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, draw_product(spec, 7, 12))
    with pytest.raises(ParameterError):
        trial_rng(-1, 0)


def test_entry_variance():
    spec = MatrixChainSpec((200, 200))
    Y = draw_product(spec, 3, 0)
    assert abs(np.mean(np.abs(Y) ** 2) - 1.0) < 0.02
    assert abs(np.var(Y.real) - 0.5) < 0.02


def test_hermitian_eigh_small():
    assert np.allclose(squared_singular_values(np.eye(4)), 1.0, atol=1e-15)
    assert np.allclose(squared_singular_values(np.array([[2.0]])), [4.0])
    with pytest.raises(ParameterError):
        hermitian_eigh(np.ones((2, 3)))


def test_eigensolvers_match_numpy():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((5, 7, 7)) + 1j * rng.standard_normal((5, 7, 7))
    A = X @ np.swapaxes(X.conj(), -1, -2)
    ref = np.linalg.eigvalsh(A)
    assert np.allclose(batched_eigvalsh(A), ref, rtol=1e-12, atol=1e-12)
    lam, V = hermitian_eigh(A[0])
    assert np.allclose(lam, ref[0], rtol=1e-12)
    assert np.allclose(A[0] @ V, V * lam, atol=1e-10)
    assert np.allclose(V.conj().T @ V, np.eye(7), atol=1e-12)


def test_eigensolver_degenerate():
    A = np.diag([1.0, 1.0, 3.0, 3.0]).astype(complex)
    assert np.allclose(batched_eigvalsh(A[None])[0], [1, 1, 3, 3], atol=1e-14)
    lam, _ = hermitian_eigh(A)
    assert np.allclose(lam, [1, 1, 3, 3], atol=1e-14)


def test_run_batch_determinism_and_threads():
    spec = MatrixChainSpec((3, 3, 4))
    a = run_batch(spec, 5, 3000, threads=1)
    b = run_batch(spec, 5, 3000, threads=4)
    assert np.array_equal(a.values, b.values)
    assert a.values.shape == (3000, 3)
    assert np.all(np.diff(a.values, axis=1) >= 0)
    with pytest.raises(ParameterError):
        run_batch(spec, 5, 0)


def test_batch_rows_match_single_draw():
    spec = MatrixChainSpec((2, 3))
    batch = run_batch(spec, 9, 4)
    ref = squared_singular_values(draw_product(spec, 9, 2))
    assert np.allclose(batch.values[2], ref, rtol=1e-13)


def test_batch_validation():
    spec = MatrixChainSpec((2, 2))
    with pytest.raises(ParameterError):
        SampleBatch(spec, 0, 1, np.array([[2.0, 1.0]]))


def test_moments_p0_and_small_run():
    spec = MatrixChainSpec((2, 2, 3))
    batch = run_batch(spec, 1, 4000)
    rep = empirical_vs_exact_moments(batch, [0, 1, 2])
    assert rep.rows[0]["z"] == 0 and rep.rows[0]["exact"] == 2
    assert rep.passed, rep.rows


def test_n1_variance_lock():
    # n = 1, M = 1: x = |z|**2 with E x = 1, Var x = 1
    batch = run_batch(MatrixChainSpec((1, 1)), 0, 20000)
    x = batch.values[:, 0]
    assert abs(np.mean(x) - 1) < 4 * np.std(x) / math.sqrt(len(x))
    assert abs(np.var(x) - 1) < 0.1


def test_histogram_and_hard_edge():
    spec = MatrixChainSpec((6, 6))
    batch = run_batch(spec, 2, 2000)
    comp = hard_edge_histogram(batch, bins=10, cutoff=2.0)
    assert comp.histogram.counts.sum() > 0
    assert len(comp.predicted) == 10
    assert abs(comp.histogram.total_mass - comp.predicted_mass) < 0.2
    empty = hard_edge_histogram(batch, bins=np.array([1e6, 2e6]))
    assert empty.histogram.total_mass == 0
    with pytest.raises(ParameterError):
        Histogram(np.array([1.0, 0.0]), np.array([1]), 1)


def test_hard_edge_mass_bessel():
    # M = 1, nu = 0: int_0^X 4 K^Bes(4x, 4x) dx, cross-checked with direct quadrature
    from ginprod.kernel import bessel_hard_edge
    from ginprod.quadrature import integrate_adaptive
    ref = integrate_adaptive(lambda x: np.array([bessel_hard_edge(0, v, v) for v in np.atleast_1d(x)]),
                             0.0, 1.5, 1e-11).value
    assert abs(hard_edge_mass(ParamSet(1, [0]), 1.5) - ref) < 1e-9
