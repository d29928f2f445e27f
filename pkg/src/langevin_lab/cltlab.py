"""Exact, desk-scale checks of the lemma-level claims behind the bounds.

Everything here is one-dimensional (or a product of one-dimensional
pieces) so that the relevant laws are finite Gaussian mixtures or lattices
and divergences can be computed by quadrature or closed-form transport
instead of sampling.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.special import log_ndtr, logsumexp, ndtri
from scipy.stats import binom, linregress
from scipy.stats import t as student_t

from .errors import ConfigurationError, DomainError, ParameterError, SizeError

ENUMERATION_BUDGET = 10**6
GRID_POINTS = 20001
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


# -- exact noise laws --------------------------------------------------------


@dataclass(frozen=True)
class NoiseLawExact:
    """Finite law of the minibatch gradient noise at a frozen point."""

    atoms: np.ndarray  # (m, d)
    weights: np.ndarray  # (m,)

    @property
    def dim(self):
        return self.atoms.shape[1]

    @property
    def mean(self):
        return self.weights @ self.atoms

    @property
    def covariance(self):
        c = self.atoms - self.mean
        return (c * self.weights[:, None]).T @ c

    def validate(self, tol=1e-12):
        scale = max(1.0, float(np.abs(self.atoms).max(initial=0.0)))
        if abs(self.weights.sum() - 1.0) > tol:
            raise DomainError(f"weights sum to {self.weights.sum()!r}")
        if np.abs(self.mean).max() > tol * scale:
            raise DomainError(f"law has mean {self.mean!r}")
        return self


def _dedupe(values, weights, tol):
    keys = np.round(values / tol).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    w = np.bincount(inverse, weights=weights, minlength=len(uniq))
    # representative value: weighted mean of each group
    v = np.zeros((len(uniq), values.shape[1]))
    np.add.at(v, inverse, values * weights[:, None])
    v /= w[:, None]
    order = np.lexsort(v.T[::-1])
    return v[order], w[order]


def _sum_law(atoms, weights, B, tol):
    """Law of the sum of B i.i.d. draws from a finite law (convolution)."""
    vals, w = atoms.copy(), weights.copy()
    for _ in range(B - 1):
        vals = (vals[:, None, :] + atoms[None, :, :]).reshape(-1, atoms.shape[1])
        w = np.outer(w, weights).ravel()
        vals, w = _dedupe(vals, w, tol)
        if len(w) > ENUMERATION_BUDGET:
            raise SizeError("convolution support exceeds the enumeration budget")
    return vals, w


def enumerate_noise_law(oracle, x, B):
    """Exact law of (1/B) sum_j (grad f_{I_j}(x) - grad F(x)), I_j uniform i.i.d.

    Uses all n^B index tuples when that is at most 10^6, otherwise the
    B-fold convolution of the n-atom component law (1-D only). Atoms closer
    than 1e-12 (relative) are merged.
    """
    if int(B) != B or B < 1:
        raise ParameterError("batch size must be a positive integer")
    B = int(B)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    comps = oracle.component_gradients(x) - oracle.exact_gradient(x)
    n, d = comps.shape
    tol = 1e-12 * max(1.0, float(np.abs(comps).max()))
    w1 = np.full(n, 1.0 / n)
    if n == 1:
        law = NoiseLawExact(np.zeros((1, d)), np.ones(1))
    elif n**B <= ENUMERATION_BUDGET:
        idx = np.indices((n,) * B).reshape(B, -1).T
        vals = comps[idx].mean(axis=1)
        law = NoiseLawExact(*_dedupe(vals, np.full(len(vals), float(n) ** -B), tol))
    elif d == 1:
        vals, w = _sum_law(comps, w1, B, tol)
        law = NoiseLawExact(vals / B, w)
    else:
        raise SizeError(f"n^B = {n}^{B} exceeds {ENUMERATION_BUDGET} and d > 1")
    return law


# -- per-step KL of the injected noise --------------------------------------


def _kl_integrand(r):
    # rho log rho - rho + 1 with rho = exp(r); nonnegative, second order in r
    out = np.empty_like(r)
    small = np.abs(r) < 1e-3
    rs = r[small]
    out[small] = rs * rs * (0.5 + rs * (1.0 / 3.0 + rs * (0.125 + rs / 30.0)))
    rl = r[~small]
    out[~small] = rl * np.exp(rl) - np.expm1(rl)
    return out


def per_step_noise_kl(law, eta, corrected=False, sigma_hat=None, points=GRID_POINTS):
    """KL(z || N(0, 1)) for z = sqrt(eta/2) N + s * eps in one dimension.

    s = 1 without correction and s = 1 - eta * sigma_hat / 4 with it, where
    ``sigma_hat`` defaults to the exact variance of N. The density ratio is
    formed in log space from the mixture exponents, and the integral is
    written as the integral of q (rho log rho - rho + 1) so no cancellation
    occurs. Grid: +-(10 + max|atom| sqrt(eta/2)), Simpson's rule.
    """
    if law.dim != 1:
        raise DomainError("per-step noise KL is computed in one dimension only")
    if not eta >= 0:
        raise ParameterError("step size must be nonnegative")
    if eta == 0:
        return 0.0
    a = law.atoms[:, 0]
    logw = np.log(law.weights)
    m = math.sqrt(eta / 2.0) * a
    c = 0.0
    if corrected:
        sh = float(np.squeeze(law.covariance)) if sigma_hat is None else float(np.squeeze(sigma_hat))
        if not (sh >= 0 and eta * sh < 2):
            raise DomainError("corrected branch needs 0 <= eta * sigma_hat < 2")
        c = -eta * sh / 4.0
    s2 = (1.0 + c) ** 2
    half = 10.0 + float(np.abs(m).max())
    z = np.linspace(-half, half, int(points))[:, None]
    # z^2/2 - (z - m)^2 / (2 s^2), with s^2 - 1 = c (2 + c)
    expo = (z * z * (c * (2.0 + c)) + 2.0 * z * m - m * m) / (2.0 * s2)
    r = logsumexp(expo + logw, axis=1) - math.log1p(c)
    zz = z[:, 0]
    q = np.exp(-0.5 * zz * zz - _LOG_SQRT_2PI)
    val = float(simpson(q * _kl_integrand(r), x=zz))
    if not math.isfinite(val):
        raise DomainError("quadrature produced a non-finite value")
    return max(val, 0.0)


def fit_batch_scaling(B_values, kl_values):
    """Least-squares slope of log KL against log B."""
    return batch_scaling_fit(B_values, kl_values)[0]


def batch_scaling_fit(B_values, kl_values, level=0.95):
    """Slope of log KL against log B with the half-width of its confidence interval."""
    Bs = np.asarray(B_values, dtype=float)
    kl = np.asarray(kl_values, dtype=float)
    if Bs.shape != kl.shape or Bs.size < 4:
        raise ParameterError("need at least four batch sizes with one value each")
    if np.any(kl <= 0) or np.any(Bs <= 0):
        raise DomainError("batch sizes and KL values must be positive")
    res = linregress(np.log(Bs), np.log(kl))
    hw = float(student_t.ppf(0.5 + level / 2.0, Bs.size - 2) * res.stderr)
    return float(res.slope), hw


# -- CLT experiments ---------------------------------------------------------


@dataclass(frozen=True)
class CltExperimentConfig:
    """One CLT check.

    ``family`` is "rademacher" (each coordinate of Y_i is +-beta/sqrt(d), so
    ||Y_i|| = beta) or "finite_sum_noise" (1-D; ``atoms`` centred and scaled
    so that max |Y_i| = beta, drawn uniformly).
    """

    beta: float
    B: int
    d: int = 1
    family: str = "rademacher"
    atoms: Optional[Sequence[float]] = None
    grid_points: int = 100001
    seed: int = 0

    def __post_init__(self):
        if not self.beta > 0:
            raise ConfigurationError("beta must be positive")
        if int(self.B) != self.B or self.B < 1:
            raise ConfigurationError("B must be a positive integer")
        if int(self.d) != self.d or self.d < 1:
            raise ConfigurationError("d must be a positive integer")
        if self.family not in ("rademacher", "finite_sum_noise"):
            raise ConfigurationError(f"unknown summand family {self.family!r}")
        if self.family == "finite_sum_noise" and self.d != 1:
            raise ConfigurationError("finite_sum_noise summands are one-dimensional")

    def summand_law(self):
        """Per-coordinate atoms and weights of a single summand Y_i."""
        if self.family == "rademacher":
            b = self.beta / math.sqrt(self.d)
            return np.array([-b, b]), np.array([0.5, 0.5])
        a = np.asarray(self.atoms if self.atoms is not None else [-1.0, 1.0], dtype=float)
        a = a - a.mean()
        if not np.any(a):
            return np.zeros(1), np.ones(1)
        a = a * (self.beta / np.abs(a).max())
        return a, np.full(a.size, 1.0 / a.size)

    def summand_variance(self):
        a, w = self.summand_law()
        return float(w @ (a * a))

    def config_hash(self):
        return config_hash(asdict(self))


def config_hash(obj):
    """sha256 of the canonical JSON form, first 16 hex digits."""
    blob = json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    raise TypeError(f"not serialisable: {type(o)}")


def _normalized_sum_law(config):
    """Per-coordinate law of Y = B^(-1/2) sum_i Y_i."""
    a, w = config.summand_law()
    B = int(config.B)
    if config.family == "rademacher":
        k = np.arange(B + 1)
        return a[1] * (2.0 * k - B) / math.sqrt(B), binom.pmf(k, B, 0.5)
    vals, wts = _sum_law(a[:, None], w, B, 1e-12 * max(1.0, float(np.abs(a).max())))
    return vals[:, 0] / math.sqrt(B), wts


def _check_sharp_hypotheses(config):
    if config.beta**2 > 0.2 * (1 + 1e-12):
        raise ConfigurationError("beta^2 <= 1/5 is required")
    if config.summand_variance() > 1.0 / (5.0 * config.d) * (1 + 1e-12):
        raise ConfigurationError("||Sigma_Y|| <= 1/(5d) is required")


def _mixture_transport_w2sq(centers, weights, s, points):
    """W2^2 between sum_k w_k N(y_k, s^2) and N(0, 1) via the monotone map.

    Solves F(T(z)) = Phi(z) by Newton's method in log space (lower tail for
    z <= 0, upper tail for z > 0), then integrates (T(z) - z)^2 phi(z).
    """
    z = np.linspace(-10.0, 10.0, int(points))
    lw = np.log(weights)[None, :]
    y = centers[None, :]
    upper = z > 0
    target = np.where(upper, log_ndtr(-z), log_ndtr(z))
    sign = np.where(upper, -1.0, 1.0)[:, None]
    T = z.copy()
    for _ in range(100):
        u = (T[:, None] - y) / s
        lcdf = logsumexp(lw + log_ndtr(sign * u), axis=1)
        lpdf = logsumexp(lw - 0.5 * u * u, axis=1) - _LOG_SQRT_2PI - math.log(s)
        slope = np.exp(lpdf - lcdf) * sign[:, 0]
        step = (lcdf - target) / slope
        T = T - step
        if np.max(np.abs(step)) < 1e-13 * (1.0 + np.max(np.abs(T))):
            break
    else:
        raise DomainError("transport map did not converge")
    phi = np.exp(-0.5 * z * z - _LOG_SQRT_2PI)
    return float(simpson((T - z) ** 2 * phi, x=z))


def _lattice_vs_gaussian_w2sq(atoms, weights, sigma):
    """Exact W2^2 between a finite law on the line and N(0, sigma^2).

    The quantile coupling sends the Gaussian mass between consecutive
    cumulative levels to each atom; the cost on each slab is a truncated
    Gaussian moment computation.
    """
    order = np.argsort(atoms)
    y = atoms[order]
    w = weights[order]
    lower = np.concatenate([[0.0], np.cumsum(w)])
    upper_tail = np.concatenate([np.cumsum(w[::-1])[::-1], [0.0]])
    # level i: mass below is lower[i], mass above is upper_tail[i]
    cut = np.where(lower <= 0.5, ndtri(np.clip(lower, 0, 1)), -ndtri(np.clip(upper_tail, 0, 1)))
    a, b = cut[:-1], cut[1:]

    def phi(t):
        return np.where(np.isfinite(t), np.exp(-0.5 * np.where(np.isfinite(t), t, 0.0) ** 2 - _LOG_SQRT_2PI), 0.0)

    def tphi(t):
        return np.where(np.isfinite(t), np.where(np.isfinite(t), t, 0.0) * phi(t), 0.0)

    P = w
    E1 = phi(a) - phi(b)
    E2 = P + tphi(a) - tphi(b)
    total = np.sum(y * y * P - 2.0 * sigma * y * E1 + sigma * sigma * E2)
    return float(max(total, 0.0))


def wass_clt_experiment(config):
    """W2^2(sqrt(I - Sigma_Y) X + Y, Z) and the bound 25 beta^6 d (1 + log B)^2 / B.

    X, Z are standard Gaussians and Y the normalized sum of B i.i.d.
    summands. Coordinates are independent, so W2^2 is d times the exact
    one-dimensional value.
    """
    _check_sharp_hypotheses(config)
    y, w = _normalized_sum_law(config)
    var = config.summand_variance()
    measured = config.d * _mixture_transport_w2sq(y, w, math.sqrt(1.0 - var), config.grid_points)
    bound = 25.0 * config.beta**6 * config.d * (1.0 + math.log(config.B)) ** 2 / config.B
    return measured, bound


def zhai_clt_experiment(config):
    """W2^2(Y, N(0, Sigma_Y)) and the bound 25 beta^2 d (1 + log B)^2 / B."""
    y, w = _normalized_sum_law(config)
    sigma = math.sqrt(config.summand_variance())
    measured = config.d * _lattice_vs_gaussian_w2sq(y, w, sigma)
    bound = 25.0 * config.beta**2 * config.d * (1.0 + math.log(config.B)) ** 2 / config.B
    return measured, bound


def experiment_row(config, measured, bound, name):
    """CSV-ready record: config hash, measured, bound, pass flag."""
    return {
        "experiment": name,
        "config_hash": config.config_hash(),
        "seed": config.seed,
        "measured": repr(float(measured)),
        "bound": repr(float(bound)),
        "pass": int(measured <= bound),
    }


# -- conditional noise energy ------------------------------------------------


def conditional_noise_energy(oracle, x, B, h, points=GRID_POINTS):
    """E[(E[N | x_t])^2] for x_t = x - h (grad F(x) + N) + sqrt(2h) z, and its bound.

    The posterior mean is exact (Bayes over the finite law of N); the outer
    expectation is a quadrature over the standardized observation. The bound
    is 576 h u^4 / B^2 with u = M |x| + G.
    """
    law = enumerate_noise_law(oracle, x, B)
    if law.dim != 1:
        raise DomainError("conditional noise energy is computed in one dimension only")
    if not h >= 0:
        raise ParameterError("lookahead must be nonnegative")
    u = oracle.growth_bound(np.atleast_1d(x))
    bound = 576.0 * h * u**4 / B**2
    if h == 0:
        return 0.0, bound
    a = law.atoms[:, 0]
    c = math.sqrt(h / 2.0)
    half = 10.0 + c * float(np.abs(a).max())
    v = np.linspace(-half, half, int(points))[:, None]
    logl = np.log(law.weights) - 0.5 * (v + c * a) ** 2 - _LOG_SQRT_2PI
    lp = logsumexp(logl, axis=1)
    post = np.exp(logl - lp[:, None]) @ a
    energy = float(simpson(np.exp(lp) * post**2, x=v[:, 0]))
    return energy, bound


# -- covariance estimator ----------------------------------------------------


@dataclass(frozen=True)
class CovEstimatorReport:
    B: int
    B_est: int
    draws: int
    M: float
    max_bias_in_se: float
    unbiased: bool
    second_moment_excess: float
    excess_bound: float
    excess_se: float
    second_moment_ok: bool
    trace_power_ok: bool
    max_trace_ratio: float

    @property
    def passed(self):
        return self.unbiased and self.second_moment_ok and self.trace_power_ok


def cov_estimator_check(oracle, x, B, B_est, draws=10**5, rng=None):
    """Monte-Carlo check of the fresh-pair covariance estimator against exact enumeration.

    Sigma is the exact single-component noise covariance divided by B and M
    the largest component deviation. Checks: the mean estimate is within 3
    standard errors of Sigma entrywise; E Tr(S^2) - Tr(Sigma^2) is at most
    4 M^4 / (B^2 B_est) plus 3 standard errors; every draw has
    Tr(S^k) <= (2 M^2 / B)^k for k = 1, 2, 3.
    """
    if draws < 1:
        raise ParameterError("need at least one draw")
    rng = np.random.default_rng(0) if rng is None else rng
    x = np.atleast_1d(np.asarray(x, dtype=float))
    comps = oracle.component_gradients(x)
    noise = comps - oracle.exact_gradient(x)
    n, d = comps.shape
    M = float(np.linalg.norm(noise, axis=1).max())
    cov1 = (noise.T @ noise) / n
    Sigma = cov1 / B
    idx = rng.integers(0, n, size=(draws, B_est, 2))
    D = comps[idx[..., 0]] - comps[idx[..., 1]]
    S = np.einsum("nbi,nbj->nij", D, D) / (2.0 * B * B_est)

    mean = S.mean(axis=0)
    se = S.std(axis=0, ddof=1) / math.sqrt(draws) if draws > 1 else np.zeros_like(mean)
    err = np.abs(mean - Sigma)
    slack = 1e-12 * max(1.0, float(np.abs(Sigma).max()))
    unbiased = bool(np.all(err <= 3.0 * se + slack))
    ratio = np.where(se > 0, err / np.where(se > 0, se, 1.0), np.where(err > slack, np.inf, 0.0))

    t2 = np.einsum("nij,nji->n", S, S)
    excess = float(t2.mean() - np.trace(Sigma @ Sigma))
    excess_se = float(t2.std(ddof=1) / math.sqrt(draws)) if draws > 1 else 0.0
    excess_bound = 4.0 * M**4 / (B**2 * B_est)
    second_ok = excess <= excess_bound + 3.0 * excess_se + slack

    lam = np.clip(np.linalg.eigvalsh(S), 0.0, None)
    cap = 2.0 * M * M / B
    worst = 0.0
    power_ok = True
    for k in (1, 2, 3):
        tk = np.sum(lam**k, axis=1)
        limit = cap**k
        if limit > 0:
            worst = max(worst, float(tk.max() / limit))
        power_ok &= bool(np.all(tk <= limit * (1.0 + 1e-12) + 1e-300))
    return CovEstimatorReport(
        B=int(B), B_est=int(B_est), draws=int(draws), M=M,
        max_bias_in_se=float(ratio.max()), unbiased=unbiased,
        second_moment_excess=excess, excess_bound=excess_bound, excess_se=excess_se,
        second_moment_ok=bool(second_ok), trace_power_ok=power_ok, max_trace_ratio=worst,
    )
