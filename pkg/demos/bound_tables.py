"""
Evaluating the convergence and indistinguishability bounds
==========================================================

Every evaluator returns a report of labelled terms, each with the
expression it came from, so the tables can be pasted into a notebook or
re-evaluated symbolically.
"""

from langevin_lab.metrics import bounds

lsi = dict(eta=0.001, K=1000, B=10, M=1.0, G=0.0, L=1.0, d=2, lambda_lsi=1.0, kl0=1.0)
print(bounds.bound_sgld_lsi(lsi).to_table())
print()

# M = G = 0 leaves the transient and the discretization term: plain LMC
print(bounds.bound_sgld_lsi(lsi, M=0.0, G=0.0).to_table())
print()

# trajectory KL to LMC: the corrected chain gains a factor 4/B on the leading term
traj = dict(eta=0.01, K=100, M=1.0, G=0.0, d=1)
print(f"{'B':>4}{'SGLD':>14}{'CC-SGLD':>14}")
for B in (2, 8, 32, 128):
    a = bounds.bound_sgld_traj_kl(traj, B=B).total
    b = bounds.bound_ccsgld_traj_kl(traj, B=B).total
    print(f"{B:>4}{a:>14.4e}{b:>14.4e}")
print()

print(bounds.bound_ccrbm_traj_kl(eta=0.01, K=100, B=4, B_prime=3, M=1.0, n=50, d=2, sigma=1.0).to_table())
print()
print(bounds.bound_sgld_fd_pi(eta=0.01, K=500, B=8, M=0.5, G=0.5, L=1.0, d=2, kl0=1.0, lambda_pi=0.5).to_csv())
