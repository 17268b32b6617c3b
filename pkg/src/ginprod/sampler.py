"""Monte Carlo for squared singular values of products of Ginibre matrices.

Each trial draws from its own stream derived from (seed, trial_index), and
trials are processed in fixed-size chunks, so results do not depend on the
number of worker threads.  Eigenvalues of Y*Y come from a Householder
reduction to real tridiagonal form followed by implicit QL (single matrix,
with eigenvectors) or Sturm bisection (batched).
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConvergenceError, ParameterError, PrecisionError
from .kernel import HardEdgeConfig, KernelConfig, bessel_hard_edge, hard_edge_u, trace_moment
from .quadrature import integrate_adaptive
from .specfun import ParamSet, big_g, small_f

__all__ = [
    "MatrixChainSpec",
    "SampleBatch",
    "Histogram",
    "MomentReport",
    "HardEdgeComparison",
    "trial_rng",
    "draw_product",
    "hermitian_eigh",
    "squared_singular_values",
    "batched_eigvalsh",
    "run_batch",
    "empirical_vs_exact_moments",
    "hard_edge_histogram",
    "hard_edge_mass",
]

CHUNK = 2048


@dataclass(frozen=True)
class MatrixChainSpec:
    """Dimensions N_0..N_M; X_j is N_j x N_{j-1} and N_0 must be the smallest."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(self.dims)
        if len(dims) < 2:
            raise ParameterError("need at least two dimensions (M >= 1)", "spec.dims.length")
        for d in dims:
            if not isinstance(d, (int, np.integer)) or isinstance(d, bool) or d < 1:
                raise ParameterError(f"dimensions must be positive integers, got {d!r}",
                                     "spec.dims.type")
        if dims[0] != min(dims):
            raise ParameterError(f"N_0 = {dims[0]} is not the smallest dimension",
                                 "spec.n0.min")
        object.__setattr__(self, "dims", tuple(int(d) for d in dims))

    @property
    def M(self) -> int:
        return len(self.dims) - 1

    @property
    def n(self) -> int:
        return self.dims[0]

    @property
    def nu(self) -> tuple:
        return tuple(d - self.dims[0] for d in self.dims[1:])

    @property
    def params(self) -> ParamSet:
        return ParamSet(self.M, list(self.nu))


def trial_rng(seed: int, trial_index: int) -> np.random.Generator:
    """Independent stream for one trial, a pure function of (seed, trial_index)."""
    if seed < 0 or trial_index < 0:
        raise ParameterError("seed and trial_index must be nonnegative")
    return np.random.default_rng(np.random.SeedSequence(entropy=int(seed),
                                                        spawn_key=(int(trial_index),)))


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    # real and imaginary parts N(0, 1/2), so E|entry|**2 = 1
    z = rng.standard_normal((rows, cols, 2)) * math.sqrt(0.5)
    return z[..., 0] + 1j * z[..., 1]


def draw_product(spec: MatrixChainSpec, seed: int, trial_index: int) -> np.ndarray:
    """Y_M = X_M ... X_1, an N_M x N_0 complex matrix."""
    rng = trial_rng(seed, trial_index)
    Y = _ginibre(rng, spec.dims[1], spec.dims[0])
    for j in range(2, spec.M + 1):
        Y = _ginibre(rng, spec.dims[j], spec.dims[j - 1]) @ Y
    return Y


# ---------------------------------------------------------------------------
# eigensolvers


def _householder_tridiag(A: np.ndarray):
    """A = Q T Q^H with T real symmetric tridiagonal; returns (d, e, Q).

    Works on a stack of matrices (leading axes are batch axes).  The
    complex subdiagonal left by the reflections is made real by a diagonal
    unitary, which is folded into Q.
    """
    A = np.array(A, dtype=complex)
    n = A.shape[-1]
    batch = A.shape[:-2]
    Q = np.broadcast_to(np.eye(n, dtype=complex), A.shape).copy()
    for k in range(n - 2):
        x = A[..., k + 1:, k]
        alpha = np.sqrt(np.sum(np.abs(x) ** 2, axis=-1))
        x0 = x[..., 0]
        phase = np.where(np.abs(x0) > 0, x0 / np.where(np.abs(x0) > 0, np.abs(x0), 1), 1.0)
        v = x.copy()
        v[..., 0] += phase * alpha
        vnorm = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1))
        active = vnorm > 0
        v = v / np.where(active, vnorm, 1.0)[..., None]
        v = v * active[..., None]
        # A <- H A H with H = I - 2 v v^H acting on rows/cols k+1..n-1
        sub = A[..., k + 1:, :]
        A[..., k + 1:, :] = sub - 2.0 * v[..., :, None] * np.einsum("...i,...ij->...j", v.conj(), sub)[..., None, :]
        sub = A[..., :, k + 1:]
        A[..., :, k + 1:] = sub - 2.0 * np.einsum("...ij,...j->...i", sub, v)[..., :, None] * v.conj()[..., None, :]
        sub = Q[..., :, k + 1:]
        Q[..., :, k + 1:] = sub - 2.0 * np.einsum("...ij,...j->...i", sub, v)[..., :, None] * v.conj()[..., None, :]
    d = np.real(np.einsum("...ii->...i", A)).copy()
    e_c = np.array([A[..., k + 1, k] for k in range(n - 1)]).reshape((n - 1,) + batch)
    e_c = np.moveaxis(e_c, 0, -1) if n > 1 else np.zeros(batch + (0,), dtype=complex)
    e = np.abs(e_c)
    ph = np.ones(batch + (n,), dtype=complex)
    for k in range(n - 1):
        u = np.where(e[..., k] > 0, e_c[..., k] / np.where(e[..., k] > 0, e[..., k], 1), 1.0)
        ph[..., k + 1] = ph[..., k] * u
    Q = Q * ph[..., None, :]
    return d, e, Q


def _tql_implicit(d: np.ndarray, e: np.ndarray, Z: np.ndarray, max_iter: int = 60):
    """Implicit-shift QL on a real symmetric tridiagonal matrix, eigenvectors into Z."""
    d = d.astype(float).copy()
    n = len(d)
    ee = np.zeros(n)
    ee[: n - 1] = e
    Z = Z.copy()
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= np.finfo(float).eps * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError("implicit QL did not converge")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * ee[i]
                b = c * ee[i]
                r = math.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi1 = Z[:, i + 1].copy()
                Z[:, i + 1] = s * Z[:, i] + c * zi1
                Z[:, i] = c * Z[:, i] - s * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            ee[l] = g
            ee[m] = 0.0
    return d, Z


def hermitian_eigh(A: np.ndarray):
    """Eigenvalues (ascending) and eigenvectors of a Hermitian matrix."""
    A = np.asarray(A, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ParameterError("need a square matrix")
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix has non-finite entries")
    n = A.shape[0]
    A = 0.5 * (A + A.conj().T)
    d, e, Q = _householder_tridiag(A)
    lam, Z = _tql_implicit(d, e, np.eye(n))
    order = np.argsort(lam, kind="stable")
    return lam[order], (Q @ Z)[:, order]


def squared_singular_values(Y: np.ndarray) -> np.ndarray:
    """Eigenvalues of Y^H Y, ascending."""
    Y = np.asarray(Y, dtype=complex)
    if not np.all(np.isfinite(Y)):
        raise ParameterError("matrix has non-finite entries")
    lam, _ = hermitian_eigh(Y.conj().T @ Y)
    return lam


def _sturm_bisection(d: np.ndarray, e: np.ndarray, iterations: int = 80) -> np.ndarray:
    """All eigenvalues of a stack of real symmetric tridiagonals, ascending."""
    n = d.shape[-1]
    e2 = e ** 2
    radius = np.zeros_like(d)
    radius[..., :-1] += e
    radius[..., 1:] += e
    lo = np.min(d - radius, axis=-1)
    hi = np.max(d + radius, axis=-1)
    pad = 1e-14 * np.maximum(np.abs(lo), np.abs(hi)) + 1e-300
    lo, hi = lo - pad, hi + pad
    k = np.arange(n)
    lo = np.broadcast_to(lo[..., None], d.shape).copy()
    hi = np.broadcast_to(hi[..., None], d.shape).copy()
    tiny = np.finfo(float).tiny
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        # number of eigenvalues below mid (LDL^T inertia)
        q = d[..., 0:1] - mid
        count = (q < 0).astype(int)
        for i in range(1, n):
            q = np.where(q == 0, -tiny, q)
            q = d[..., i:i + 1] - mid - e2[..., i - 1:i] / q
            count += q < 0
        below = count > k
        hi = np.where(below, mid, hi)
        lo = np.where(below, lo, mid)
        if np.all(hi - lo <= 2 * np.finfo(float).eps * np.maximum(np.abs(lo), np.abs(hi))):
            break
    return 0.5 * (lo + hi)


def batched_eigvalsh(A: np.ndarray) -> np.ndarray:
    """Eigenvalues of a stack of Hermitian matrices, shape (..., n), ascending."""
    A = np.asarray(A, dtype=complex)
    A = 0.5 * (A + np.swapaxes(A.conj(), -1, -2))
    d, e, _ = _householder_tridiag(A)
    return _sturm_bisection(d, e)


# ---------------------------------------------------------------------------
# batches


@dataclass(frozen=True)
class SampleBatch:
    spec: MatrixChainSpec
    seed: int
    trials: int
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.shape != (self.trials, self.spec.n):
            raise ParameterError("values must be trials x N_0")
        if not np.all(v > 0):
            raise PrecisionError("non-positive squared singular value in batch",
                                 "sampler.nonpositive")
        if np.any(np.diff(v, axis=1) < 0):
            raise ParameterError("rows must be sorted ascending")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _worker_count() -> int:
    env = os.environ.get("GINPROD_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ParameterError(f"GINPROD_THREADS must be an integer, got {env!r}",
                                 "env.threads")
    return max(1, min(8, os.cpu_count() or 1))


def _run_chunk(spec: MatrixChainSpec, seed: int, start: int, stop: int) -> np.ndarray:
    A = np.empty((stop - start, spec.n, spec.n), dtype=complex)
    for i, t in enumerate(range(start, stop)):
        Y = draw_product(spec, seed, t)
        A[i] = Y.conj().T @ Y
    return batched_eigvalsh(A)


def run_batch(spec: MatrixChainSpec, seed: int, trials: int,
              threads: int | None = None) -> SampleBatch:
    """Squared singular values for trials 0..trials-1, deterministic in (seed, trials)."""
    if not isinstance(trials, (int, np.integer)) or trials < 1:
        raise ParameterError("trials must be a positive integer", "param.trials.range")
    if not 0 <= int(seed) < 2 ** 64:
        raise ParameterError("seed must be an unsigned 64-bit integer", "param.seed.range")
    bounds = [(s, min(s + CHUNK, trials)) for s in range(0, trials, CHUNK)]
    workers = threads or _worker_count()
    if workers == 1 or len(bounds) == 1:
        parts = [_run_chunk(spec, seed, a, b) for a, b in bounds]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda ab: _run_chunk(spec, seed, *ab), bounds))
    return SampleBatch(spec, int(seed), int(trials), np.concatenate(parts, axis=0))


# ---------------------------------------------------------------------------
# comparisons with exact predictions


@dataclass
class MomentReport:
    trials: int
    rows: list  # dicts: p, empirical, stderr, exact, z
    z_limit: float = 4.0

    @property
    def passed(self) -> bool:
        return all(abs(r["z"]) <= self.z_limit for r in self.rows)

    def __bool__(self):
        return self.passed


def empirical_vs_exact_moments(batch: SampleBatch, p_list: Sequence[int],
                               z_limit: float = 4.0) -> MomentReport:
    """Compare the mean of sum_i x_i**p with the exact trace moment."""
    cfg = KernelConfig(batch.spec.params, batch.spec.n)
    rows = []
    for p in p_list:
        per_trial = np.sum(batch.values ** p, axis=1)
        mean = float(np.mean(per_trial))
        se = float(np.std(per_trial, ddof=1) / math.sqrt(batch.trials)) if batch.trials > 1 else math.inf
        exact = float(trace_moment(cfg, p))
        diff = mean - exact
        if se > 0 and math.isfinite(se):
            z = diff / se
        else:
            z = 0.0 if abs(diff) <= 1e-12 * max(1.0, abs(exact)) else math.inf
        rows.append({"p": int(p), "empirical": mean, "stderr": se, "exact": exact, "z": z})
    return MomentReport(batch.trials, rows, z_limit)


@dataclass(frozen=True)
class Histogram:
    edges: np.ndarray
    counts: np.ndarray
    trials: int

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ParameterError("bin edges must be strictly increasing")
        if len(self.counts) != len(edges) - 1:
            raise ParameterError("need one count per bin")

    @property
    def total_mass(self) -> float:
        """Points per trial falling in the histogram range."""
        return float(np.sum(self.counts)) / self.trials

    @property
    def density(self) -> np.ndarray:
        return np.asarray(self.counts, dtype=float) / (self.trials * np.diff(self.edges))

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[1:] + self.edges[:-1])


@dataclass
class HardEdgeComparison:
    histogram: Histogram
    predicted: np.ndarray
    sup_discrepancy: float
    predicted_mass: float


def hard_edge_mass(params: ParamSet, cutoff: float) -> float:
    """int_0^cutoff K^M_nu(x, x) dx = int_0^cutoff f(z) g(z) log(cutoff / z) dz."""
    def integrand(z):
        z = np.asarray(z, dtype=float)
        return small_f(params, z) * big_g(params, z, tol=1e-14).value * np.log(cutoff / z)

    return integrate_adaptive(integrand, 0.0, cutoff, 1e-10, singular_at_a=True).value


def hard_edge_histogram(batch: SampleBatch, bins=20, scale: float | None = None,
                        cutoff: float = 2.0) -> HardEdgeComparison:
    """Histogram of scale * x_i (default scale n) on [0, cutoff] against K^M_nu(x, x)."""
    n = batch.spec.n
    scale = float(n if scale is None else scale)
    edges = (np.linspace(0.0, cutoff, int(bins) + 1) if np.isscalar(bins)
             else np.asarray(bins, dtype=float))
    scaled = batch.values.ravel() * scale
    scaled = scaled[scaled <= edges[-1]]
    counts, _ = np.histogram(scaled, bins=edges)
    hist = Histogram(edges, counts, batch.trials)
    params = batch.spec.params
    hcfg = HardEdgeConfig(params, 1e-10)
    if params.M == 1:
        predicted = np.array([bessel_hard_edge(float(params.nu[0]), c, c) for c in hist.centers])
    else:
        predicted = np.array([hard_edge_u(hcfg, c, c).value for c in hist.centers])
    sup = float(np.max(np.abs(hist.density - predicted))) if len(predicted) else 0.0
    mass = hard_edge_mass(params, float(edges[-1])) if edges[0] == 0.0 else math.nan
    return HardEdgeComparison(hist, predicted, sup, mass)
