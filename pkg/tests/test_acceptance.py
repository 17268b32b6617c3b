"""Acceptance suite: one PASS/FAIL line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python3 tests/test_acceptance.py``.
"""

import itertools
import math
import time

import numpy as np
import pytest
from scipy import special as sp

from ginprod.biorth import (
    a_coeff,
    a_leading_order,
    b_coeff,
    biorth_pairing,
    recurrence_residual,
)
from ginprod.kernel import (
    HardEdgeConfig,
    KernelConfig,
    bessel_hard_edge,
    cauchy_identity_check,
    density_normalization,
    hard_edge_contour,
    hard_edge_integrable,
    hard_edge_u,
    kn_contour,
    kn_sum,
    kn_u_integral,
    scaling_limit_error,
)
from ginprod.sampler import MatrixChainSpec, empirical_vs_exact_moments, run_batch
from ginprod.specfun import ParamSet, mellin_moment, weight_w

pytestmark = pytest.mark.slow

GRID = (0.5, 1.0, 2.0, 5.0)
GRID2 = [(x, y) for x in GRID for y in GRID]
KERNEL_PARAMS = [ParamSet(1, [1]), ParamSet(2, [0, 1]), ParamSet(3, [0, 1, 2])]


def integer_sweep():
    """M in {1, 2, 3}, every nu_j in {0, 1, 2, 3}."""
    return [ParamSet(M, list(nu)) for M in (1, 2, 3) for nu in itertools.product(range(4), repeat=M)]


# ---------------------------------------------------------------------------
# criteria; each returns (passed, detail)


def criterion_1():
    bad = 0
    sweep = integer_sweep()
    for p in sweep:
        for j in range(13):
            for k in range(13):
                if biorth_pairing(p, j, k) != (1 if j == k else 0):
                    bad += 1
    return bad == 0, f"{len(sweep)} parameter sets x 169 pairs, {bad} nonzero residuals (exact)"


def criterion_2():
    bad_rec, bad_dual, sweep = 0, 0, integer_sweep()
    for p in sweep:
        bad_rec += sum(recurrence_residual(p, n) != [0] for n in range(16))
        for n in range(21):
            for k in range(min(p.M, n) + 1):
                bad_dual += a_coeff(p, k, n) != b_coeff(p, k, n - k)
    ok = bad_rec == 0 and bad_dual == 0
    return ok, f"recurrence n<=15: {bad_rec} failures; duality n<=20: {bad_dual} failures (exact)"


def criterion_3():
    bad = 0
    for nu in range(4):
        p = ParamSet(1, [nu])
        for n in range(21):
            bad += a_coeff(p, 0, n) != 2 * n + nu + 1
            bad += a_coeff(p, 1, n) != n * (n + nu)
    for n1, n2 in itertools.product(range(4), repeat=2):
        p = ParamSet(2, [n1, n2])
        for n in range(21):
            bad += a_coeff(p, 0, n) != 3 * n * n + (3 + 2 * n1 + 2 * n2) * n + (1 + n1 + n2 + n1 * n2)
            bad += a_coeff(p, 1, n) != n * (n + n1) * (n + n2) * (3 * n + n1 + n2)
            bad += a_coeff(p, 2, n) != n * (n - 1) * (n + n1) * (n + n1 - 1) * (n + n2) * (n + n2 - 1)
    lead_bad = 0
    for p in integer_sweep():
        for k in range(p.M + 1):
            if a_leading_order(p, k) != ((k + 1) * p.M, math.comb(p.M + 1, k + 1)):
                lead_bad += 1
    ok = bad == 0 and lead_bad == 0
    return ok, f"worked-case mismatches {bad}, leading-order mismatches {lead_bad} (exact)"


def criterion_4():
    worst_u = worst_c = 0.0
    count = 0
    for p in KERNEL_PARAMS:
        for n in (1, 3, 6, 10):
            cfg = KernelConfig(p, n)
            for x, y in GRID2:
                ref = kn_sum(cfg, x, y)
                worst_u = max(worst_u, abs(kn_u_integral(cfg, x, y).value - ref) / (1 + abs(ref)))
                worst_c = max(worst_c, abs(kn_contour(cfg, x, y).value - ref) / (1 + abs(ref)))
                count += 1
    ok = worst_u <= 1e-8 and worst_c <= 1e-6
    return ok, (f"{count} points, n in {{1,3,6,10}}, M<=3: max |sum-u|/(1+|K|)={worst_u:.2e} (<=1e-8), "
                f"max |sum-contour|/(1+|K|)={worst_c:.2e} (<=1e-6)")


def criterion_5():
    worst = 0.0
    params = [ParamSet(1, [0]), ParamSet(2, [0, 1]), ParamSet(3, [0, 1, 2])]
    for p in params:
        h = HardEdgeConfig(p)
        for x, y in GRID2:
            u = hard_edge_u(h, x, y).value
            c = hard_edge_contour(h, x, y).value
            devs = [abs(u - c) / abs(u)]
            if x != y:
                i = hard_edge_integrable(h, x, y).value
                devs += [abs(u - i) / abs(u), abs(c - i) / abs(c)]
            worst = max(worst, *devs)
    return worst <= 1e-7, f"M in {{1,2,3}}, 16-point grid: max pairwise relative deviation {worst:.2e} (<=1e-7)"


def criterion_6():
    worst = 0.0
    for nu in (0, 1, 2):
        h = HardEdgeConfig(ParamSet(1, [nu]))
        for x, y in GRID2:
            worst = max(worst, abs(hard_edge_u(h, x, y).value - bessel_hard_edge(nu, x, y)))
    return worst <= 1e-10, f"nu in {{0,1,2}}, 16-point grid: max |K - 4(y/x)^(nu/2)K_Bes| = {worst:.2e} (<=1e-10)"


def criterion_7():
    worst = 0.0
    points = [(0.5, 2.0), (1.0, 1.0), (2.0, 5.0), (5.0, 0.5)]
    for a, b in ((0, 0), (1, 0), (1, 1), (0.5, 0.5)):
        for x, y in points:
            worst = max(worst, cauchy_identity_check(a, b, x, y).rel_deviation)
    return worst <= 1e-7, f"4 (a,b) pairs x 4 points: max relative deviation {worst:.2e} (<=1e-7)"


def criterion_8():
    p = ParamSet(2, [0, 1])
    grid = [(x, y) for x in (0.5, 1.0, 2.0) for y in (0.5, 1.0, 2.0)]
    h = HardEdgeConfig(p)
    limit = {(x, y): hard_edge_u(h, x, y).value for x, y in grid}
    ns = (25, 50, 100, 200)
    errs = [scaling_limit_error(p, n, grid, limit_values=limit) for n in ns]
    decreasing = all(a > b for a, b in zip(errs, errs[1:]))
    ratio = errs[-1] / errs[-2]
    ok = decreasing and 0.3 <= ratio <= 0.7
    shown = ", ".join(f"e_{n}={e:.3e}" for n, e in zip(ns, errs))
    return ok, f"{shown}; e_200/e_100={ratio:.3f} (in [0.3, 0.7])"


def criterion_9():
    batch = run_batch(MatrixChainSpec((8, 8, 8)), 20240601, 100_000)
    rep = empirical_vs_exact_moments(batch, [1, 2])
    lock_reports = [empirical_vs_exact_moments(run_batch(MatrixChainSpec(d), 7, 100_000), [1, 2])
                    for d in ((1, 1), (1, 1, 1))]
    ok = rep.passed and all(r.passed for r in lock_reports)
    zs = ", ".join(f"z(p={r['p']})={r['z']:+.2f}" for r in rep.rows)
    lock = ", ".join(f"{r['z']:+.2f}" for lr in lock_reports for r in lr.rows)
    return ok, f"dims (8,8,8), 1e5 trials: {zs}; n=1 lock z-scores {lock} (all |z|<=4)"


def criterion_10():
    xs = np.geomspace(0.01, 30.0, 25)
    m1 = 0.0
    for nu in (0, 1, 2):
        ref = xs ** nu * np.exp(-xs)
        m1 = max(m1, float(np.max(np.abs(weight_w(ParamSet(1, [nu]), 0, xs).value - ref))))
    m2 = 0.0
    for a, b in ((0, 0), (0, 1), (1, 2), (2, 2)):
        ref = 2 * xs ** ((a + b) / 2) * sp.kv(a - b, 2 * np.sqrt(xs))
        val = weight_w(ParamSet(2, [a, b]), 0, xs).value
        m2 = max(m2, float(np.max(np.abs(val - ref) / ref)))
    mm = 0.0
    for p, k, s in ((ParamSet(1, [1]), 0, 1.5), (ParamSet(2, [0, 1]), 1, 2.0),
                    (ParamSet(3, [0, 1, 2]), 2, 1.0), (ParamSet(2, [0, 0]), 0, 3.0)):
        nus = [float(v) for v in p.nu]
        exact = math.exp(math.lgamma(s + nus[0] + k) + sum(math.lgamma(s + v) for v in nus[1:]))
        mm = max(mm, abs(mellin_moment(p, k, s) - exact) / exact)
    ok = m1 <= 1e-10 and m2 <= 1e-8 and mm <= 1e-6
    return ok, (f"M=1 max abs err {m1:.2e} (<=1e-10); M=2 Macdonald max rel err {m2:.2e} (<=1e-8); "
                f"Mellin moments max rel err {mm:.2e} (<=1e-6)")


def criterion_11():
    params = [ParamSet(1, [0]), ParamSet(1, [2]), ParamSet(2, [0, 1]), ParamSet(3, [0, 1, 2])]
    d1 = max(abs(density_normalization(p, 1) - 1) for p in params)
    d2 = max(abs(density_normalization(p, 2) - 1) for p in params)
    ok = d1 <= 1e-8 and d2 <= 1e-3
    return ok, f"n=1 max |mass-1| {d1:.2e} (<=1e-8); n=2 max |mass-1| {d2:.2e} (<=1e-3)"


TITLES = {
    1: "exact biorthogonality",
    2: "recurrence and duality",
    3: "worked cases and leading order",
    4: "finite-n kernel representations agree",
    5: "hard-edge three-way agreement",
    6: "M=1 Bessel identity",
    7: "M=2 Cauchy identity",
    8: "scaling limit rate",
    9: "Monte Carlo consistency",
    10: "weight closed forms and Mellin moments",
    11: "density normalization",
}
CRITERIA = {i: globals()[f"criterion_{i}"] for i in TITLES}


def _check(i, record):
    start = time.perf_counter()
    passed, detail = CRITERIA[i]()
    record(i, TITLES[i], passed, f"{detail} [{time.perf_counter() - start:.1f}s]")
    assert passed, detail


def test_criterion_01(acceptance_record):
    _check(1, acceptance_record)


def test_criterion_02(acceptance_record):
    _check(2, acceptance_record)


def test_criterion_03(acceptance_record):
    _check(3, acceptance_record)


def test_criterion_04(acceptance_record):
    _check(4, acceptance_record)


def test_criterion_05(acceptance_record):
    _check(5, acceptance_record)


def test_criterion_06(acceptance_record):
    _check(6, acceptance_record)


def test_criterion_07(acceptance_record):
    _check(7, acceptance_record)


def test_criterion_08(acceptance_record):
    _check(8, acceptance_record)


def test_criterion_09(acceptance_record):
    _check(9, acceptance_record)


def test_criterion_10(acceptance_record):
    _check(10, acceptance_record)


def test_criterion_11(acceptance_record):
    _check(11, acceptance_record)


if __name__ == "__main__":
    import sys

    failures = 0
    for i in CRITERIA:
        start = time.perf_counter()
        try:
            passed, detail = CRITERIA[i]()
        except Exception as exc:  # report and keep going
            passed, detail = False, f"raised {type(exc).__name__}: {exc}"
        failures += not passed
        print(f"[{'PASS' if passed else 'FAIL'}] criterion {i:>2}: {TITLES[i]} -- {detail} "
              f"[{time.perf_counter() - start:.1f}s]", flush=True)
    sys.exit(1 if failures else 0)
