"""
Multiplicative bias reduction in a small simulation
===================================================

Compare the MISE of the direct estimator with its bias-reduced variant
H_h^(4/3) H_2h^(-1/3) on a scaled beta model. The first run uses the
asymptotic bandwidth rule (h, h^(5/9)); the second scans a bandwidth grid
to find each estimator's best MISE. Keep `replications` small for a quick
look; the improvement rate is noisy below a few thousand.
"""

import numpy as np

from kernhazard import EstimatorSpec, ScaledBeta, asymptotics, epanechnikov
from kernhazard.montecarlo import SimulationSpec, simulate

model = ScaledBeta(2.0, 5.0, 1.0)
n, reps = 100, 500

h = asymptotics.mise_optimal_bandwidth("direct", model, n)
h_ts = asymptotics.ts_optimal_bandwidth(model, n, base_bandwidth=h)
spec = SimulationSpec(model, n, reps, (EstimatorSpec("direct", epanechnikov, h),
                                       EstimatorSpec("terrell-scott", epanechnikov, h_ts)), grid=41)
res = simulate(spec, workers=4)
print(f"rule bandwidths h={h:.4f}, h^(5/9)={h_ts:.4f}")
print(f"  MISE direct {res.mise[0]:.4g}  bias-reduced {res.mise[1]:.4g}  rate {res.improvement_rate:+.1f}%")

grid = np.geomspace(0.003, 0.1, 10)
ests = tuple(EstimatorSpec(k, epanechnikov, float(b)) for b in grid for k in ("direct", "terrell-scott"))
scan = simulate(SimulationSpec(model, n, reps, ests, grid=41), workers=4).mise.reshape(-1, 2)
best = scan.min(axis=0)
print("bandwidth scan:")
for b, (d, t) in zip(grid, scan):
    print(f"  h={b:.4f}  direct {d:8.4g}  bias-reduced {t:8.4g}")
print(f"best MISE: direct {best[0]:.4g}, bias-reduced {best[1]:.4g}, rate {100 * (1 - best[1] / best[0]):+.1f}%")
