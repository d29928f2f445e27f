"""
Exact checks of the supporting lemmas
=====================================

In one dimension the laws involved are finite lattices or Gaussian
mixtures, so transport costs and posterior means are computed exactly
rather than sampled.
"""

import math

import numpy as np

from langevin_lab import cltlab, targets

print("Gaussian-smoothed CLT, Rademacher summands, beta^2 = 0.1")
for B in (4, 16, 64):
    cfg = cltlab.CltExperimentConfig(beta=math.sqrt(0.1), B=B)
    measured, bound = cltlab.wass_clt_experiment(cfg)
    print(f"  B={B:>3}  W2^2={measured:.3e}  bound={bound:.3e}")

print("unsmoothed CLT, beta = 1")
for B in (1, 4, 16, 64):
    measured, bound = cltlab.zhai_clt_experiment(cltlab.CltExperimentConfig(beta=1.0, B=B))
    print(f"  B={B:>3}  W2^2={measured:.3e}  bound={bound:.3e}  ratio={bound / measured:.1f}")

_, oracle = targets.make_finite_sum_quadratic([[-1.0], [1.0]], 1.0)
print("conditional noise energy (bound 576 h u^4 / B^2)")
for B in (1, 2, 4):
    for h in (0.01, 0.02):
        e, b = cltlab.conditional_noise_energy(oracle, [0.0], B, h)
        print(f"  B={B} h={h:<5} energy={e:.3e}  bound={b:.3e}")

print("fresh-pair covariance estimator, B = 2")
for Be in (1, 4):
    rep = cltlab.cov_estimator_check(oracle, [0.0], 2, Be, 10**5, np.random.default_rng(Be))
    print(f"  B_est={Be}  bias/se={rep.max_bias_in_se:.2f}  excess={rep.second_moment_excess:.4f}"
          f" <= {rep.excess_bound:.4f}  trace ratio={rep.max_trace_ratio:.3f}  passed={rep.passed}")
