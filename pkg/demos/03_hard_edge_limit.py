"""Near the origin the rescaled kernel K_n(x/n, y/n)/n has a limit.

For M = 1 the limit is the Bessel kernel; for M = 2 it also appears in the
Cauchy two-matrix model.  The convergence rate is O(1/n): doubling n should
roughly halve the error.
"""

from ginprod.kernel import (
    HardEdgeConfig,
    bessel_hard_edge,
    cauchy_identity_check,
    hard_edge_contour,
    hard_edge_integrable,
    hard_edge_u,
    scaling_limit_error,
)
from ginprod.specfun import ParamSet

params = ParamSet(2, [0, 1])
h = HardEdgeConfig(params)
print("limit kernel, M = 2, nu = (0, 1)")
for x, y in [(0.5, 2.0), (1.0, 5.0), (2.0, 1.0)]:
    u = hard_edge_u(h, x, y).value
    c = hard_edge_contour(h, x, y).value
    i = hard_edge_integrable(h, x, y).value
    print(f"  K({x}, {y}) = {u:.15f}   contour rel dev {abs(c - u) / abs(u):.1e}"
          f"   integrable-form rel dev {abs(i - u) / abs(u):.1e}")

print("\nM = 1 against the Bessel kernel")
h1 = HardEdgeConfig(ParamSet(1, [1]))
for x, y in [(0.5, 0.5), (1.0, 2.0)]:
    print(f"  K({x}, {y}) = {hard_edge_u(h1, x, y).value:.15f}  Bessel {bessel_hard_edge(1, x, y):.15f}")

print("\nCauchy two-matrix kernel, (a, b) = (1, 1/2)")
rep = cauchy_identity_check(1.0, 0.5, 1.0, 2.0)
print(f"  lhs {rep.lhs:.15f}  rhs {rep.rhs:.15f}  rel dev {rep.rel_deviation:.1e}")

print("\nscaling limit error on {0.5, 1, 2}^2")
grid = [(x, y) for x in (0.5, 1.0, 2.0) for y in (0.5, 1.0, 2.0)]
limit = {pt: hard_edge_u(h, *pt).value for pt in grid}
prev = None
for n in (10, 20, 40, 80):
    err = scaling_limit_error(params, n, grid, limit_values=limit)
    ratio = "" if prev is None else f"  ratio {err / prev:.3f}"
    print(f"  n = {n:3d}: {err:.3e}{ratio}")
    prev = err
