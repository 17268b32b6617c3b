"""The correlation kernel K_n three ways.

The finite sum over biorthogonal pairs, the single integral over u in
(0, 1), and the double contour integral should agree to quadrature
accuracy.  The diagonal K_n(x, x) is the one-point density; its integral
is n and its first moment is the exact trace moment.
"""

import time

from ginprod.kernel import KernelConfig, kn_contour, kn_sum, kn_u_integral, trace_moment
from ginprod.specfun import ParamSet

cfg = KernelConfig(ParamSet(2, [0, 1]), 6)
print(f"M = 2, nu = (0, 1), n = {cfg.n}\n")
print(f"{'x':>5} {'y':>5} {'sum':>22} {'u-integral - sum':>18} {'contour - sum':>15}")
start = time.perf_counter()
for x, y in [(0.5, 0.5), (0.5, 2.0), (2.0, 0.5), (1.0, 5.0)]:
    ref = kn_sum(cfg, x, y)
    du = kn_u_integral(cfg, x, y).value - ref
    dc = kn_contour(cfg, x, y).value - ref
    print(f"{x:5.1f} {y:5.1f} {ref:22.15e} {du:18.2e} {dc:15.2e}")
print(f"({time.perf_counter() - start:.1f}s)\n")

for p in range(3):
    print(f"int x^{p} K_n(x, x) dx = {trace_moment(cfg, p)}")
