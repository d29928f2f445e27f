"""Single-chain Langevin samplers: LMC, SGLD, AB-SGLD and CC-SGLD.

All four variants share one update, ``x - eta * g + sqrt(2 eta) * z``, and
differ only in how the drift g and the Gaussian input z are produced. Routing
every variant through the same arithmetic is what makes the reductions
between them (zero noise, zero correction, n = 1) hold bit for bit.

Randomness comes from per-purpose substreams of the chain seed: Gaussian
increments, batch indices, estimator pairs and the default initial point.
Within a substream the draws are taken step by step in order.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from . import _streams
from .errors import ConfigurationError, ParameterError, StepSizeWarning
from .lowrank import CovEstimate

VARIANTS = ("LMC", "SGLD", "ABSGLD", "CCSGLD")


@dataclass(frozen=True)
class ChainConfig:
    """Step size, batch, horizon, seed and variant of one chain.

    ``B_est`` is the number of fresh gradient pairs the CC-SGLD covariance
    estimate uses; it defaults to ``B``.
    """

    eta: float
    B: int = 1
    K: int = 1
    seed: int = 0
    variant: str = "SGLD"
    B_est: Optional[int] = None

    def __post_init__(self):
        if not (self.eta > 0 and math.isfinite(self.eta)):
            raise ParameterError(f"step size must be positive and finite, got {self.eta}")
        if int(self.B) != self.B or self.B < 1:
            raise ParameterError(f"batch size must be a positive integer, got {self.B}")
        if int(self.K) != self.K or self.K < 1:
            raise ParameterError(f"horizon must be a positive integer, got {self.K}")
        if self.variant not in VARIANTS:
            raise ParameterError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.B_est is None:
            object.__setattr__(self, "B_est", int(self.B))
        elif int(self.B_est) != self.B_est or self.B_est < 1:
            raise ParameterError("estimator batch must be a positive integer")


def lsi_step_ok(eta, lsi_constant, L):
    """Check eta <= lambda / (6 L^2); warn (never fail) when it does not hold."""
    if L <= 0:
        return True
    ceiling = lsi_constant / (6.0 * L * L)
    if eta > ceiling:
        warnings.warn(
            f"eta={eta} exceeds the LSI step ceiling {ceiling:.6g}; bounds do not apply",
            StepSizeWarning,
            stacklevel=2,
        )
        return False
    return True


def _update(x, g, eta, z):
    return x - eta * g + math.sqrt(2.0 * eta) * z


def _mean(grads):
    # Anchored at the first row: B identical rows give that row back exactly.
    return grads[0] + (grads - grads[0]).mean(axis=0)


def _as_batch(grads, x):
    grads = np.asarray(grads, dtype=float)
    if grads.size == 0:
        raise ParameterError("need at least one gradient estimate")
    if grads.ndim == 1:
        # a list of scalars in 1-D, or a single d-vector
        grads = grads[:, None] if np.size(x) == 1 else grads[None, :]
    return grads


def lmc_step(x, grad, eta, eps):
    """One Langevin step x - eta * grad + sqrt(2 eta) * eps."""
    if not eta > 0:
        raise ParameterError(f"step size must be positive, got {eta}")
    return _update(np.asarray(x, dtype=float), np.asarray(grad, dtype=float), eta, np.asarray(eps, dtype=float))


def sgld_step(x, grads, eta, eps):
    """One SGLD step driven by the mean of a minibatch of gradient estimates."""
    return lmc_step(x, _mean(_as_batch(grads, x)), eta, eps)


def absgld_batch_size(x, M, G, n):
    """Adaptive batch size min(n, 1 + ceil(M ||x|| + G))."""
    if int(n) != n or n < 1:
        raise ParameterError(f"component count must be a positive integer, got {n}")
    u = M * float(np.linalg.norm(np.atleast_1d(x))) + G
    if not math.isfinite(u):
        return int(n)
    return int(min(int(n), 1 + math.ceil(u)))


def ccsgld_threshold_exceeded(x, eta, B, M, G, d):
    u = M * float(np.linalg.norm(np.atleast_1d(x))) + G
    return u * u > B / (5.0 * eta * d)


def ccsgld_covariance_estimate(x, fresh_pairs, eta, B, M, G, d=None):
    """Estimate of the minibatch-mean noise covariance from fresh gradient pairs.

    ``fresh_pairs`` has shape (B_est, 2, d). The estimate is
    ``(1 / (2 B B_est)) sum_j d_j d_j^T`` with ``d_j`` the pair difference,
    returned in factored form; it is exactly zero when
    ``(M ||x|| + G)^2 > B / (5 eta d)``.
    """
    pairs = np.asarray(fresh_pairs, dtype=float)
    if pairs.ndim == 2:
        pairs = pairs[:, :, None]
    if pairs.ndim != 3 or pairs.shape[1] != 2:
        raise ParameterError("fresh pairs must have shape (B_est, 2, d)")
    B_est, _, dim = pairs.shape
    d = dim if d is None else d
    if B_est < 1:
        raise ParameterError("need at least one fresh pair")
    if ccsgld_threshold_exceeded(x, eta, B, M, G, d):
        return CovEstimate.zero(dim)
    return CovEstimate(pairs[:, 0, :] - pairs[:, 1, :], 1.0 / (2.0 * B * B_est))


def ccsgld_correction(estimate, eta, eps, counter=None):
    """The vector (eta / 4) * estimate @ eps subtracted from the Gaussian input."""
    return (eta / 4.0) * estimate.matvec(eps, counter)


def ccsgld_step(x, grads, eta, eps, estimate):
    """SGLD step with the Gaussian input shrunk to (I - eta * estimate / 4) eps."""
    eps = np.asarray(eps, dtype=float)
    z = eps - ccsgld_correction(estimate, eta, eps)
    return lmc_step(x, _mean(_as_batch(grads, x)), eta, z)


@dataclass(frozen=True)
class Trajectory:
    """Iterates x_0..x_K plus everything needed to replay them.

    Per step k: batch size ``batch_sizes[k]`` (0 for LMC), drift
    ``grads[k]``, Gaussian draw ``eps[k]``, noise ``noise[k] = grads[k] -
    grad F(x_k)`` and the CC-SGLD correction vector ``corrections[k]``
    (zero for the other variants).
    """

    iterates: np.ndarray
    batch_sizes: np.ndarray
    grads: np.ndarray
    eps: np.ndarray
    noise: np.ndarray
    corrections: np.ndarray
    eta: float
    variant: str

    def __len__(self):
        return len(self.iterates)

    @property
    def noise_norms(self):
        return np.linalg.norm(self.noise, axis=1)

    def replay(self):
        """Recompute the iterates from x_0 and the stored per-step records."""
        out = np.empty_like(self.iterates)
        out[0] = self.iterates[0]
        corrected = self.variant == "CCSGLD"
        for k in range(len(self.grads)):
            z = self.eps[k] - self.corrections[k] if corrected else self.eps[k]
            out[k + 1] = _update(out[k], self.grads[k], self.eta, z)
        return out

    def records(self):
        """Per-step records as a structured array (the sidecar log)."""
        K, d = self.grads.shape
        dtype = [
            ("B", np.int64),
            ("grad", np.float64, (d,)),
            ("eps", np.float64, (d,)),
            ("noise", np.float64, (d,)),
            ("correction", np.float64, (d,)),
        ]
        rec = np.empty(K, dtype=dtype)
        rec["B"] = self.batch_sizes
        rec["grad"] = self.grads
        rec["eps"] = self.eps
        rec["noise"] = self.noise
        rec["correction"] = self.corrections
        return rec

    @classmethod
    def from_records(cls, x0, records, eta, variant):
        """Rebuild a trajectory by replaying a sidecar log from x_0."""
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        K = len(records)
        traj = cls(
            iterates=np.vstack([x0, np.zeros((K, x0.size))]),
            batch_sizes=np.asarray(records["B"]),
            grads=np.asarray(records["grad"]).reshape(K, -1),
            eps=np.asarray(records["eps"]).reshape(K, -1),
            noise=np.asarray(records["noise"]).reshape(K, -1),
            corrections=np.asarray(records["correction"]).reshape(K, -1),
            eta=float(eta),
            variant=variant,
        )
        return replace(traj, iterates=traj.replay())

    def write_csv(self, path):
        """CSV with columns step, x[0..d), B_k, noise_norm; the last row has no step record."""
        K, d = self.grads.shape
        norms = self.noise_norms
        header = ["step"] + [f"x{j}" for j in range(d)] + ["B_k", "noise_norm"]
        lines = [",".join(header)]
        for k in range(K + 1):
            xs = [repr(float(v)) for v in self.iterates[k]]
            tail = [str(int(self.batch_sizes[k])), repr(float(norms[k]))] if k < K else ["", ""]
            lines.append(",".join([str(k)] + xs + tail))
        with open(path, "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")

    def save(self, csv_path, records_path):
        self.write_csv(csv_path)
        np.save(records_path, self.records(), allow_pickle=False)


def default_initial_point(d, L, rng):
    """Draw x_0 ~ N(0, I/L) when L > 0, otherwise N(0, I)."""
    scale = 1.0 / math.sqrt(L) if L and L > 0 else 1.0
    return scale * rng.standard_normal(d)


def _simulate(target, oracle, config, x0, steps):
    variant = config.variant
    if variant != "LMC" and oracle is None:
        raise ConfigurationError(f"variant {variant} needs a stochastic oracle")
    if variant == "ABSGLD" and (oracle.n is None):
        raise ConfigurationError("AB-SGLD needs a finite component count n")
    d = target.dim
    noise_rng, batch_rng, est_rng, init_rng = _streams.substreams(config.seed)
    if x0 is None:
        L = target.smoothness if target.smoothness is not None else (oracle.L if oracle else 0.0)
        x0 = default_initial_point(d, L, init_rng)
    x = np.array(np.atleast_1d(x0), dtype=float)
    if x.shape != (d,):
        raise ParameterError(f"initial point must have shape ({d},), got {x.shape}")

    eta = float(config.eta)
    s = math.sqrt(2.0 * eta)
    grad_F = target.gradient
    iterates = np.empty((steps + 1, d))
    grads = np.empty((steps, d))
    noise = np.empty((steps, d))
    corrections = np.zeros((steps, d))
    batch = np.zeros(steps, dtype=np.int64)
    eps = noise_rng.standard_normal((steps, d))
    iterates[0] = x

    if variant == "LMC":
        for k in range(steps):
            g = grad_F(x)
            grads[k] = g
            x = x - eta * g + s * eps[k]
            iterates[k + 1] = x
        noise[:] = 0.0
    else:
        B, M, G = int(config.B), oracle.M, oracle.G
        B_est = int(config.B_est)
        for k in range(steps):
            Bk = absgld_batch_size(x, M, G, oracle.n) if variant == "ABSGLD" else B
            g = _mean(oracle.draw(x, Bk, batch_rng))
            z = eps[k]
            if variant == "CCSGLD":
                pairs = oracle.draw(x, 2 * B_est, est_rng).reshape(B_est, 2, d)
                est = ccsgld_covariance_estimate(x, pairs, eta, B, M, G, d)
                c = ccsgld_correction(est, eta, z)
                corrections[k] = c
                z = z - c
            batch[k] = Bk
            grads[k] = g
            noise[k] = g - grad_F(x)
            x = x - eta * g + s * z
            iterates[k + 1] = x

    return Trajectory(iterates, batch, grads, eps, noise, corrections, eta, variant)


def run_chain(target, oracle, config, x0=None):
    """Run K steps of the configured variant and keep per-step records.

    The oracle is ignored for LMC. When ``x0`` is None it is drawn from the
    chain's initialisation substream.
    """
    L = oracle.L if oracle is not None and oracle.L else target.smoothness
    if target.lsi_constant is not None and L:
        lsi_step_ok(config.eta, target.lsi_constant, L)
    return _simulate(target, oracle, config, x0, int(config.K))


def sample_averaged_law(target, oracle, config, x0=None, rng=None, t_bar=None):
    """One draw from the time-averaged law of the interpolating process.

    Draws a chain seed and t in [0, K eta] from ``rng``, runs
    k = floor(t / eta) full steps, then returns
    x_k - (t - k eta) g + sqrt(2 (t - k eta)) z with a fresh drift g and a
    fresh standard normal z. ``t_bar`` pins t instead of sampling it.
    """
    rng = np.random.default_rng() if rng is None else rng
    seed = int(rng.integers(2**63))
    T = config.K * config.eta
    t = rng.uniform(0.0, T) if t_bar is None else float(t_bar)
    if not 0.0 <= t <= T * (1 + 1e-12):
        raise ParameterError(f"t_bar must lie in [0, {T}]")
    ratio = t / config.eta
    nearest = round(ratio)
    # a t that is a multiple of eta up to rounding lands exactly on that iterate
    k = nearest if abs(ratio - nearest) <= 1e-9 * max(1.0, ratio) else int(math.floor(ratio))
    k = min(k, config.K)
    h = max(t - k * config.eta, 0.0)
    traj = _simulate(target, oracle, replace(config, seed=seed), x0, k)
    x = traj.iterates[-1]
    if config.variant == "LMC":
        g = target.gradient(x)
    else:
        Bk = absgld_batch_size(x, oracle.M, oracle.G, oracle.n) if config.variant == "ABSGLD" else config.B
        g = _mean(oracle.draw(x, Bk, rng))
    z = rng.standard_normal(target.dim)
    return x - h * g + math.sqrt(2.0 * h) * z
