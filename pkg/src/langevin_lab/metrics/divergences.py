"""Closed-form Gaussian divergences and exact or empirical estimators."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.spatial import cKDTree

from ..errors import DomainError, ParameterError

_SYM_TOL = 1e-12
_EIG_TOL = 1e-12


@dataclass(frozen=True)
class GaussianLaw:
    """N(mean, cov) with a symmetric PSD covariance."""

    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=float))
        cov = np.atleast_2d(np.asarray(self.cov, dtype=float))
        d = mean.size
        if cov.shape == (1, 1) and d > 1:
            cov = cov[0, 0] * np.eye(d)
        if cov.shape != (d, d):
            raise ParameterError(f"covariance must be {d}x{d}, got {cov.shape}")
        if np.max(np.abs(cov - cov.T), initial=0.0) > _SYM_TOL * max(1.0, np.max(np.abs(cov))):
            raise DomainError("covariance is not symmetric")
        if np.linalg.eigvalsh(cov).min() < -_EIG_TOL * max(1.0, np.max(np.abs(cov))):
            raise DomainError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", 0.5 * (cov + cov.T))

    @property
    def dim(self):
        return self.mean.size


def psd_sqrt(S):
    """Symmetric square root via eigendecomposition, eigenvalues clipped at 0."""
    S = np.atleast_2d(np.asarray(S, dtype=float))
    w, V = np.linalg.eigh(0.5 * (S + S.T))
    if w.min() < -1e-10 * max(1.0, np.abs(w).max()):
        raise DomainError("matrix is not positive semidefinite")
    return (V * np.sqrt(np.clip(w, 0.0, None))) @ V.T


def gaussian_kl(p, q):
    """KL(p || q) between Gaussian laws."""
    d = p.dim
    if q.dim != d:
        raise ParameterError("laws have different dimensions")
    wq = np.linalg.eigvalsh(q.cov)
    if wq.min() <= _EIG_TOL * max(1.0, wq.max()):
        raise DomainError("q has a singular covariance")
    wp = np.linalg.eigvalsh(p.cov)
    if wp.min() <= 0.0:
        return float("inf")
    diff = q.mean - p.mean
    sol = np.linalg.solve(q.cov, np.column_stack([p.cov, diff]))
    tr = float(np.trace(sol[:, :d]))
    quad = float(diff @ sol[:, d])
    logdet = float(np.sum(np.log(wq)) - np.sum(np.log(wp)))
    return max(0.5 * (tr + quad - d + logdet), 0.0)


def gaussian_chi_square(mu1, mu2, sigma2):
    """chi^2(N(mu1, sigma2 I) || N(mu2, sigma2 I)) = exp(||mu1 - mu2||^2 / sigma2) - 1."""
    if not sigma2 > 0:
        raise ParameterError("variance must be positive")
    diff = np.atleast_1d(np.asarray(mu1, dtype=float) - np.asarray(mu2, dtype=float))
    return float(np.expm1(float(diff @ diff) / sigma2))


def gaussian_w2(p, q):
    """2-Wasserstein distance between Gaussians (Bures formula)."""
    rq = psd_sqrt(q.cov)
    cross = psd_sqrt(rq @ p.cov @ rq)
    dm = p.mean - q.mean
    val = float(dm @ dm) + float(np.trace(p.cov) + np.trace(q.cov) - 2.0 * np.trace(cross))
    return float(np.sqrt(max(val, 0.0)))


def covariance_mismatch_w2sq(S):
    """W2^2 between N(0, I + S) and N(0, I): Tr(2I + S - 2 sqrt(I + S)).

    Evaluated eigenvalue-wise as (sqrt(1 + s) - 1)^2 = (s / (sqrt(1 + s) + 1))^2,
    which avoids cancellation for small s. The result never exceeds Tr(S)^2 / 4.
    """
    S = np.atleast_2d(np.asarray(S, dtype=float))
    if S.shape[0] != S.shape[1]:
        raise ParameterError("matrix must be square")
    if np.max(np.abs(S - S.T), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(S))):
        raise DomainError("matrix is not symmetric")
    w = np.linalg.eigvalsh(0.5 * (S + S.T))
    if w.min() < -1e-10 * max(1.0, np.abs(w).max()):
        raise DomainError("matrix is not positive semidefinite")
    w = np.clip(w, 0.0, None)
    val = float(np.sum((w / (np.sqrt(1.0 + w) + 1.0)) ** 2))
    tr = float(w.sum())
    if val > tr * tr / 4.0 * (1.0 + 1e-12) + 1e-300:
        raise DomainError("covariance mismatch exceeded Tr(S)^2/4; eigensolver failure")
    return val


def w2_1d_exact(samples_a, samples_b):
    """W2 between two equal-size empirical measures on the line (order statistics)."""
    a = np.sort(np.asarray(samples_a, dtype=float).ravel())
    b = np.sort(np.asarray(samples_b, dtype=float).ravel())
    if a.size != b.size:
        raise ParameterError(f"sample sizes differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ParameterError("need at least one sample")
    return float(np.sqrt(np.mean((a - b) ** 2)))


def kl_quadrature_1d(density_p, density_q, grid):
    """Simpson-rule estimate of the integral of p log(p / q) over ``grid = (lo, hi, points)``."""
    lo, hi, points = grid
    if not hi > lo or int(points) < 3:
        raise ParameterError("grid needs hi > lo and at least 3 points")
    x = np.linspace(lo, hi, int(points))
    p = np.asarray(_vectorised(density_p, x), dtype=float)
    q = np.asarray(_vectorised(density_q, x), dtype=float)
    if np.any(~(p > 0)) or np.any(~(q > 0)):
        raise DomainError("densities must be positive on the whole grid")
    return float(simpson(p * np.log(p / q), x=x))


def _vectorised(f, x):
    try:
        out = f(x)
        if np.shape(out) == x.shape:
            return out
    except (TypeError, ValueError):
        pass
    return np.array([f(float(t)) for t in x])


def knn_kl_estimate(samples_p, samples_q, k=1):
    """k-nearest-neighbour estimate of KL(p || q) from samples.

    D = (d / n) sum_i log(nu_k(i) / rho_k(i)) + log(m / (n - 1)), where
    rho_k is the distance from x_i to its k-th neighbour among the other
    p-samples and nu_k the distance to its k-th neighbour among the
    q-samples. Distances are floored at 1e-12. When p and q are the same
    array the self-match makes nu_k the (k-1)-th neighbour distance and the
    estimate is biased low.
    """
    P = np.asarray(samples_p, dtype=float)
    Q = np.asarray(samples_q, dtype=float)
    if P.ndim == 1:
        P = P[:, None]
    if Q.ndim == 1:
        Q = Q[:, None]
    n, d = P.shape
    m = Q.shape[0]
    if k < 1 or n < k + 1 or m < k:
        raise ParameterError("need at least k + 1 p-samples and k q-samples")
    rho = cKDTree(P).query(P, k=k + 1)[0][:, k]
    nu = cKDTree(Q).query(P, k=k)[0]
    nu = nu[:, k - 1] if k > 1 else nu
    rho = np.maximum(rho, 1e-12)
    nu = np.maximum(nu, 1e-12)
    return float(d * np.mean(np.log(nu / rho)) + np.log(m / (n - 1.0)))
