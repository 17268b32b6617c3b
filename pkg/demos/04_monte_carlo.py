"""Sample products of Ginibre matrices and compare with exact predictions.

Each trial draws from its own seeded stream, so the batch does not depend
on how many threads did the work.
"""

import time

from ginprod.sampler import MatrixChainSpec, empirical_vs_exact_moments, hard_edge_histogram, run_batch

spec = MatrixChainSpec((6, 6, 7))
start = time.perf_counter()
batch = run_batch(spec, seed=2024, trials=20_000)
print(f"dims {spec.dims}: {batch.trials} trials in {time.perf_counter() - start:.1f}s\n")

report = empirical_vs_exact_moments(batch, [1, 2, 3])
for row in report.rows:
    print(f"  E sum x^{row['p']}: empirical {row['empirical']:12.4f} +- {row['stderr']:.4f}"
          f"   exact {row['exact']:12.4f}   z = {row['z']:+.2f}")

# histogram of n * x near the origin against the limiting density
comp = hard_edge_histogram(batch, bins=8, cutoff=2.0)
print("\n  n*x bin center   histogram   limit density")
for c, d, p in zip(comp.histogram.centers, comp.histogram.density, comp.predicted):
    print(f"  {c:14.3f} {d:11.4f} {p:15.4f}")
print(f"\n  mass below 2: histogram {comp.histogram.total_mass:.4f}, limit {comp.predicted_mass:.4f}")
