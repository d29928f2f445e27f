"""Interacting particle dynamics with bounded pairwise kernels.

Three synchronous steppers share one update

    x_i + eta * g_i(x_i) + eta * kbar_i + sqrt(eta) * sigma * z_i

and differ in how the interaction average ``kbar_i`` and the Gaussian input
``z_i`` are formed:

* IPD averages K(x_i, x_j) over all j (self term included), n^2 evaluations.
* RBM averages over B partners drawn uniformly with replacement, nB evaluations.
* CC-RBM is RBM with ``z_i = (I - eta / (2 sigma^2) S_i) eps_i`` where S_i is
  a rank-B' estimate of the RBM noise covariance, applied in factored form.

Kernels are vectorised: ``interact(k, i, j, xi, xj)`` takes index arrays of
length m and point arrays of shape (m, d) and returns an (m, d) array.
Confinement forces take ``(k, i, x)`` with i of length n and x of shape (n, d).
Particle indices are 0-based.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from . import _streams
from .errors import ParameterError, StepSizeWarning
from .lowrank import CovEstimate, OpCounter

PARTICLE_VARIANTS = ("IPD", "RBM", "CCRBM")


@dataclass(frozen=True)
class ParticleSystem:
    """n particles in R^d with their forces, diffusion and step parameters.

    ``interact`` must satisfy ||K|| <= M; ``B`` and ``B_prime`` are the
    drift and estimator batch sizes used by RBM and CC-RBM.
    """

    states: np.ndarray
    interact: Callable = field(repr=False)
    confine: Optional[Callable] = field(default=None, repr=False)
    M: float = 1.0
    sigma: float = 1.0
    eta: float = 0.1
    B: int = 1
    B_prime: int = 1

    def __post_init__(self):
        states = np.array(self.states, dtype=float)
        if states.ndim == 1:
            states = states[:, None]
        if states.ndim != 2 or states.shape[0] < 1:
            raise ParameterError("states must be an (n, d) array with n >= 1")
        object.__setattr__(self, "states", states)
        if not self.eta > 0:
            raise ParameterError("step size must be positive")
        if not self.sigma >= 0:
            raise ParameterError("diffusion must be nonnegative")
        if self.M < 0:
            raise ParameterError("kernel bound must be nonnegative")
        for name in ("B", "B_prime"):
            v = getattr(self, name)
            if int(v) != v or v < 1:
                raise ParameterError(f"{name} must be a positive integer")

    @property
    def n(self):
        return self.states.shape[0]

    @property
    def d(self):
        return self.states.shape[1]

    def with_states(self, states):
        return replace(self, states=states)

    def step_ceiling(self):
        """Largest eta allowed by the CC-RBM hypothesis eta <= B sigma^2 / (40 M^2 d)."""
        if self.M == 0:
            return math.inf
        return self.B * self.sigma**2 / (40.0 * self.M**2 * self.d)


class CountingKernel:
    """Wraps a vectorised kernel and counts pairwise evaluations."""

    def __init__(self, kernel):
        self.kernel = kernel
        self.count = 0

    def __call__(self, k, i, j, xi, xj):
        self.count += len(i)
        return self.kernel(k, i, j, xi, xj)


# -- built-in kernels and confinements ---------------------------------------


def _clip_rows(v, M):
    norms = np.linalg.norm(v, axis=1, keepdims=True)
    over = norms > M
    if np.any(over):
        v = np.where(over, v * (M / np.where(over, norms, 1.0)), v)
    return v


def sine_kernel(M=1.0):
    """K(x, y) = M sin(y - x) componentwise, norm-clipped at M (antisymmetric)."""

    def kernel(k, i, j, xi, xj):
        return _clip_rows(M * np.sin(xj - xi), M)

    return kernel


def clipped_potential_kernel(dpsi, M=1.0):
    """K(x, y) = -psi'(r) (x - y) / r with r = ||x - y||, norm-clipped at M; zero at r = 0."""

    def kernel(k, i, j, xi, xj):
        diff = xi - xj
        r = np.linalg.norm(diff, axis=1, keepdims=True)
        safe = np.where(r > 0, r, 1.0)
        out = np.where(r > 0, -dpsi(safe) * diff / safe, 0.0)
        return _clip_rows(out, M)

    return kernel


def zero_kernel(k, i, j, xi, xj):
    return np.zeros_like(xi)


def quadratic_confinement(strength=1.0):
    """g(x) = -strength * x."""

    def confine(k, i, x):
        return -strength * x

    return confine


# -- steppers ----------------------------------------------------------------


def _mean_rows(v):
    # v has shape (n, m, d); anchored at the first partner so m identical
    # rows average to that row exactly
    return v[:, 0, :] + (v - v[:, :1, :]).mean(axis=1)


def _drift(system, k):
    X = system.states
    if system.confine is None:
        return np.zeros_like(X)
    return system.confine(k, np.arange(system.n), X)


def _advance(system, g, kbar, z):
    eta = system.eta
    return system.states + eta * g + eta * kbar + math.sqrt(eta) * system.sigma * z


def _check_noises(system, noises):
    noises = np.asarray(noises, dtype=float)
    if noises.ndim == 1:
        noises = noises[:, None]
    if noises.shape != system.states.shape:
        raise ParameterError(f"noises must have shape {system.states.shape}, got {noises.shape}")
    return noises


def _check_indices(system, indices, width):
    idx = np.asarray(indices)
    if idx.ndim == 1:
        idx = idx[:, None]
    if idx.shape != (system.n, width):
        raise ParameterError(f"indices must have shape ({system.n}, {width}), got {idx.shape}")
    if not np.issubdtype(idx.dtype, np.integer):
        if np.any(idx != np.round(idx)):
            raise ParameterError("indices must be integers")
        idx = idx.astype(np.int64)
    if np.any(idx < 0) or np.any(idx >= system.n):
        raise ParameterError(f"particle index out of range [0, {system.n})")
    return idx


def _pairwise(system, k, rows, cols, kernel):
    X = system.states
    n, m = cols.shape
    flat = kernel(k, rows.ravel(), cols.ravel(), X[rows.ravel()], X[cols.ravel()])
    return np.asarray(flat, dtype=float).reshape(n, m, system.d)


def full_interaction(system, k=0, kernel=None):
    """(1/n) sum_j K(x_i, x_j) for every i, self term included.

    The sum runs over the values in sorted order, so relabelling the
    particles permutes the result exactly.
    """
    kernel = system.interact if kernel is None else kernel
    n = system.n
    rows = np.repeat(np.arange(n)[:, None], n, axis=1)
    cols = np.repeat(np.arange(n)[None, :], n, axis=0)
    return np.sort(_pairwise(system, k, rows, cols, kernel), axis=1).sum(axis=1) / n


def ipd_step(system, noises, k=0, kernel=None):
    """Exact synchronous step; every pair is evaluated on the pre-step snapshot."""
    noises = _check_noises(system, noises)
    kbar = full_interaction(system, k, kernel)
    return _advance(system, _drift(system, k), kbar, noises)


def rbm_step(system, indices, noises, k=0, diagnostics=False, kernel=None):
    """Random batch step: particle i averages K over partners ``indices[i]``.

    With ``diagnostics=True`` also returns the per-particle noise
    ``kbar_i - (1/n) sum_j K(x_i, x_j)`` (costs n^2 extra evaluations).
    """
    kernel = system.interact if kernel is None else kernel
    noises = _check_noises(system, noises)
    idx = _check_indices(system, indices, system.B)
    rows = np.repeat(np.arange(system.n)[:, None], idx.shape[1], axis=1)
    kbar = _mean_rows(_pairwise(system, k, rows, idx, kernel))
    new = _advance(system, _drift(system, k), kbar, noises)
    if diagnostics:
        return new, kbar - full_interaction(system, k, kernel)
    return new


def ccrbm_covariance_estimate(system, i, J, Jbar, k=0, kernel=None):
    """Rank-B' estimate (1/(2 B B')) sum_l delta_l delta_l^T for particle i.

    ``delta_l = K(x_i, x_{J_l}) - K(x_i, x_{Jbar_l})``.
    """
    kernel = system.interact if kernel is None else kernel
    J = np.atleast_1d(np.asarray(J))
    Jbar = np.atleast_1d(np.asarray(Jbar))
    if J.shape != Jbar.shape or J.ndim != 1:
        raise ParameterError("J and Jbar must be equal-length index vectors")
    for arr in (J, Jbar):
        if np.any(arr < 0) or np.any(arr >= system.n):
            raise ParameterError(f"particle index out of range [0, {system.n})")
    if not 0 <= i < system.n:
        raise ParameterError(f"particle index out of range [0, {system.n})")
    X = system.states
    m = len(J)
    ii = np.full(m, i)
    both = kernel(k, np.concatenate([ii, ii]), np.concatenate([J, Jbar]),
                  np.repeat(X[i][None, :], 2 * m, axis=0), X[np.concatenate([J, Jbar])])
    both = np.asarray(both, dtype=float)
    return CovEstimate(both[:m] - both[m:], 1.0 / (2.0 * system.B * m))


def ccrbm_correction(system, estimate, eps, counter=None):
    """(eta / (2 sigma^2)) S eps, the amount removed from the Gaussian input."""
    coeff = system.eta / (2.0 * system.sigma**2)
    out = coeff * estimate.matvec(eps, counter)
    if counter is not None:
        counter.add(system.d)
    return out


def ccrbm_step(system, indices, est_indices, noises, k=0, kernel=None, est_kernel=None, counter=None):
    """RBM drift with covariance-corrected diffusion.

    ``est_indices`` has shape (n, 2 B'); the first B' columns are J and the
    last B' are Jbar, drawn independently of the drift batch. ``est_kernel``
    lets the caller tally estimator evaluations apart from drift ones.
    """
    kernel = system.interact if kernel is None else kernel
    est_kernel = kernel if est_kernel is None else est_kernel
    noises = _check_noises(system, noises)
    idx = _check_indices(system, indices, system.B)
    est = _check_indices(system, est_indices, 2 * system.B_prime)
    if system.sigma == 0:
        raise ParameterError("covariance correction needs sigma > 0")
    rows = np.repeat(np.arange(system.n)[:, None], idx.shape[1], axis=1)
    kbar = _mean_rows(_pairwise(system, k, rows, idx, kernel))
    bp = system.B_prime
    z = np.empty_like(noises)
    for i in range(system.n):
        S = ccrbm_covariance_estimate(system, i, est[i, :bp], est[i, bp:], k, est_kernel)
        c = ccrbm_correction(system, S, noises[i], counter)
        z[i] = noises[i] - c
        if counter is not None:
            counter.add(system.d)
    return _advance(system, _drift(system, k), kbar, z)


@dataclass
class ParticleRun:
    """Snapshots of all particles at steps 0..K plus cost counters."""

    snapshots: np.ndarray
    variant: str
    drift_evaluations: int = 0
    estimator_evaluations: int = 0
    correction_flops: int = 0

    @property
    def kernel_evaluations(self):
        return self.drift_evaluations + self.estimator_evaluations

    def write_csv(self, path):
        K1, n, d = self.snapshots.shape
        lines = [",".join(["step", "particle"] + [f"x{j}" for j in range(d)])]
        for k in range(K1):
            for i in range(n):
                lines.append(",".join([str(k), str(i)] + [repr(float(v)) for v in self.snapshots[k, i]]))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def run_particles(system, variant, K, seed):
    """Evolve the system K steps with seeded noise, batch and estimator streams.

    Per step the streams are drawn in a fixed order before any particle is
    updated: Gaussian inputs (n, d), then drift partners (n, B) for RBM and
    CC-RBM, then estimator partners (n, 2B') for CC-RBM, each from its own
    substream of ``seed``.
    """
    if variant not in PARTICLE_VARIANTS:
        raise ParameterError(f"unknown variant {variant!r}; expected one of {PARTICLE_VARIANTS}")
    if int(K) != K or K < 0:
        raise ParameterError("horizon must be a nonnegative integer")
    if variant != "IPD" and system.eta > system.step_ceiling():
        warnings.warn(
            f"eta={system.eta} exceeds B sigma^2 / (40 M^2 d) = {system.step_ceiling():.6g}",
            StepSizeWarning,
            stacklevel=2,
        )
    noise_rng, batch_rng, est_rng = _streams.substreams(seed, 3)
    drift_kernel = CountingKernel(system.interact)
    est_kernel = CountingKernel(system.interact)
    counter = OpCounter()
    n, d = system.n, system.d
    snaps = np.empty((int(K) + 1, n, d))
    snaps[0] = system.states
    cur = system
    for k in range(int(K)):
        eps = noise_rng.standard_normal((n, d))
        if variant == "IPD":
            new = ipd_step(cur, eps, k, kernel=drift_kernel)
        else:
            idx = batch_rng.integers(0, n, size=(n, system.B))
            if variant == "RBM":
                new = rbm_step(cur, idx, eps, k, kernel=drift_kernel)
            else:
                est = est_rng.integers(0, n, size=(n, 2 * system.B_prime))
                new = ccrbm_step(cur, idx, est, eps, k, drift_kernel, est_kernel, counter)
        cur = cur.with_states(new)
        snaps[k + 1] = new
    return ParticleRun(snaps, variant, drift_kernel.count, est_kernel.count, counter.flops)

