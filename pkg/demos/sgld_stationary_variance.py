"""
Minibatch noise inflates the stationary spread
==============================================

The two-component quadratic F(x) = mean_i (x - a_i)^2 / 2 with a = (-1, 1)
has target N(0, 1). The discretized chains settle at

    LMC:   2 / (2 - eta)
    SGLD:  (2 + eta / B) / (2 - eta)

so the minibatch noise costs an extra eta / B on top of the step bias. The
covariance-corrected chain shrinks its Gaussian input by (1 - eta S / 4),
which cancels that extra term to leading order and brings it back to LMC.
"""

from langevin_lab import samplers, targets

target, oracle = targets.make_finite_sum_quadratic([[-1.0], [1.0]], 1.0)
eta, K = 0.15, 100_000

# every chain shares seed 1, so their Monte-Carlo errors (about 0.02 at
# this length) move together and the differences between rows are sharper
print(f"{'chain':<10}{'B':>4}{'empirical':>12}{'predicted':>12}")
for variant, B in [("LMC", 1), ("SGLD", 1), ("SGLD", 4), ("CCSGLD", 1), ("CCSGLD", 4)]:
    cfg = samplers.ChainConfig(eta=eta, B=B, K=K, seed=1, variant=variant)
    traj = samplers.run_chain(target, oracle, cfg, [0.0])
    var = traj.iterates[K // 10:, 0].var()
    if variant == "SGLD":
        pred = (2 + eta / B) / (2 - eta)
    else:
        pred = 2 / (2 - eta)  # exact for LMC, leading order for CC-SGLD
    print(f"{variant:<10}{B:>4}{var:>12.4f}{pred:>12.4f}")
