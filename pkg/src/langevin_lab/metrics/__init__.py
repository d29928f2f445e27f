"""Divergences between laws and evaluators for the convergence bounds."""

from .bounds import (
    EVALUATORS,
    BoundReport,
    BoundTerm,
    bound_absgld_lsi,
    bound_ccrbm_traj_kl,
    bound_ccsgld_traj_kl,
    bound_rbm_traj_kl,
    bound_sgld_fd_pi,
    bound_sgld_lsi,
    bound_sgld_traj_kl,
)
from .divergences import (
    GaussianLaw,
    covariance_mismatch_w2sq,
    gaussian_chi_square,
    gaussian_kl,
    gaussian_w2,
    kl_quadrature_1d,
    knn_kl_estimate,
    psd_sqrt,
    w2_1d_exact,
)

__all__ = [
    "EVALUATORS",
    "BoundReport",
    "BoundTerm",
    "GaussianLaw",
    "bound_absgld_lsi",
    "bound_ccrbm_traj_kl",
    "bound_ccsgld_traj_kl",
    "bound_rbm_traj_kl",
    "bound_sgld_fd_pi",
    "bound_sgld_lsi",
    "bound_sgld_traj_kl",
    "covariance_mismatch_w2sq",
    "gaussian_chi_square",
    "gaussian_kl",
    "gaussian_w2",
    "kl_quadrature_1d",
    "knn_kl_estimate",
    "psd_sqrt",
    "w2_1d_exact",
]
