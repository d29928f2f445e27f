"""Sampling targets pi ∝ exp(-F) and their gradient oracles.

A :class:`TargetSpec` carries the potential, its exact gradient and whatever
functional-inequality constants the caller knows. A :class:`StochasticOracle`
returns minibatches of unbiased gradient estimates. Finite-sum oracles also
expose every component gradient so that the exact noise law can be
enumerated.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np
from scipy.special import gammaln, logsumexp

from .errors import ParameterError


@dataclass(frozen=True)
class TargetSpec:
    """Target density pi(x) ∝ exp(-potential(x)) on R^dim.

    Attributes:
        dim: Ambient dimension d.
        potential: x -> F(x).
        gradient: x -> grad F(x).
        moments: Pairs (p, m_p) with m_p = (E||x||^p)^(1/p), where known.
        lsi_constant: Log-Sobolev constant, if known.
        pi_constant: Poincare constant, if known.
        lo_order: Latala-Oleszkiewicz order in [1, 2], if known.
        smoothness: Gradient Lipschitz constant L, if known.
    """

    dim: int
    potential: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    moments: tuple = ()
    lsi_constant: Optional[float] = None
    pi_constant: Optional[float] = None
    lo_order: Optional[float] = None
    smoothness: Optional[float] = None

    def __post_init__(self):
        if int(self.dim) != self.dim or self.dim < 1:
            raise ParameterError(f"dimension must be a positive integer, got {self.dim}")
        if self.lo_order is not None and not 1.0 <= self.lo_order <= 2.0:
            raise ParameterError("lo_order must lie in [1, 2]")
        for name in ("lsi_constant", "pi_constant"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ParameterError(f"{name} must be positive")

    def moment(self, p):
        for q, value in self.moments:
            if q == p:
                return value
        return None


@dataclass(frozen=True)
class StochasticOracle:
    """Minibatch gradient oracle with almost-sure linear noise growth.

    Every single-sample estimate g at x satisfies
    ``||g - grad F(x)|| <= M ||x|| + G``.

    ``n`` is the number of components for finite sums and ``None`` when the
    oracle has no finite index set. ``draw(x, B, rng)`` returns a (B, d)
    array of i.i.d. estimates drawn with replacement.
    """

    n: Optional[int]
    draw_fn: Callable = field(repr=False)
    exact_gradient: Callable = field(repr=False)
    M: float = 0.0
    G: float = 0.0
    L: float = 0.0
    s: float = 1.0
    components_fn: Optional[Callable] = field(default=None, repr=False)

    def __post_init__(self):
        if self.n is not None and (int(self.n) != self.n or self.n < 1):
            raise ParameterError("component count must be a positive integer")
        if self.M < 0 or self.G < 0 or self.L < 0:
            raise ParameterError("M, G and L must be nonnegative")
        if not 0.0 < self.s <= 1.0:
            raise ParameterError("Hölder exponent must lie in (0, 1]")

    def draw(self, x, B, rng):
        if B < 1:
            raise ParameterError(f"batch size must be positive, got {B}")
        return self.draw_fn(np.asarray(x, dtype=float), int(B), rng)

    @property
    def is_finite_sum(self):
        return self.components_fn is not None

    def component_gradients(self, x):
        """All n component gradients at x as an (n, d) array."""
        if self.components_fn is None:
            raise ParameterError("oracle has no enumerable components")
        return self.components_fn(np.asarray(x, dtype=float))

    def growth_bound(self, x):
        return self.M * float(np.linalg.norm(x)) + self.G

    def with_growth(self, M=None, G=None):
        """Copy with the advertised growth constants replaced."""
        return replace(
            self,
            M=self.M if M is None else float(M),
            G=self.G if G is None else float(G),
        )


@dataclass(frozen=True)
class MomentProfile:
    """Constants C_0..C_p with E||x_k||^q <= C_q d^(q/2)."""

    order: int
    constants: tuple

    def __post_init__(self):
        c = np.asarray(self.constants, dtype=float)
        if self.order < 1 or len(c) != self.order + 1:
            raise ParameterError("need one constant for each q in 0..order")
        if np.any(c < 0) or np.any(np.diff(c) < 0):
            raise ParameterError("moment constants must be nonnegative and nondecreasing")

    def C(self, q):
        return self.constants[q]


def _gaussian_norm_moment(d, v, p):
    # E||x||^p for x ~ N(0, v I_d)
    return float(np.exp(0.5 * p * np.log(2.0 * v) + gammaln((d + p) / 2.0) - gammaln(d / 2.0)))


def make_gaussian_target(d, v=1.0):
    """Isotropic Gaussian N(0, v I_d) with F(x) = ||x||^2 / (2v)."""
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension must be a positive integer, got {d}")
    if not v > 0:
        raise ParameterError(f"variance must be positive, got {v}")
    d = int(d)
    v = float(v)

    if v == 1.0:
        def gradient(x):
            return np.array(x, dtype=float)
    else:
        def gradient(x):
            return np.asarray(x, dtype=float) / v

    def potential(x):
        x = np.asarray(x, dtype=float)
        return float(x @ x) / (2.0 * v)

    return TargetSpec(
        dim=d,
        potential=potential,
        gradient=gradient,
        moments=((1, _gaussian_norm_moment(d, v, 1)), (2, float(np.sqrt(v * d)))),
        lsi_constant=1.0 / v,
        pi_constant=1.0 / v,
        lo_order=2.0,
        smoothness=1.0 / v,
    )


def make_finite_sum_quadratic(centers, A=1.0):
    """F(x) = (1/n) sum_i A ||x - a_i||^2 / 2, served by a minibatch oracle.

    The component noise grad f_i(x) - grad F(x) = A (abar - a_i) does not
    depend on x, so the oracle reports M = 0 and G = A max_i ||a_i - abar||.
    """
    centers = np.array(centers, dtype=float)
    if centers.size == 0:
        raise ParameterError("need at least one center")
    if centers.ndim == 1:
        centers = centers[:, None]
    if not np.all(np.isfinite(centers)):
        raise ParameterError("centers must be finite")
    if not A > 0:
        raise ParameterError("curvature must be positive")
    A = float(A)
    n, d = centers.shape
    abar = centers.mean(axis=0)
    centers.setflags(write=False)
    G = A * float(np.max(np.linalg.norm(centers - abar, axis=1)))

    def potential(x):
        r = np.asarray(x, dtype=float) - centers
        return 0.5 * A * float(np.mean(np.sum(r * r, axis=1)))

    def gradient(x):
        return A * (np.asarray(x, dtype=float) - abar)

    def components(x):
        return A * (x - centers)

    def draw(x, B, rng):
        idx = rng.integers(0, n, size=B)
        return A * (x - centers[idx])

    # pi is N(abar, I/A); E||x|| has a closed form only when abar = 0
    moments = [(2, float(np.sqrt(float(abar @ abar) + d / A)))]
    if not np.any(abar):
        moments.insert(0, (1, _gaussian_norm_moment(d, 1.0 / A, 1)))
    target = TargetSpec(
        dim=d,
        potential=potential,
        gradient=gradient,
        moments=tuple(moments),
        lsi_constant=A,
        pi_constant=A,
        lo_order=2.0,
        smoothness=A,
    )
    oracle = StochasticOracle(
        n=n, draw_fn=draw, exact_gradient=gradient, M=0.0, G=G, L=A, components_fn=components
    )
    return target, oracle


def make_exact_oracle(target, n=None):
    """Zero-noise oracle: every estimate equals grad F(x); M = G = 0.

    ``n`` may be given so that batch-adaptive samplers have a component
    count to clamp against. No randomness is consumed.
    """
    grad = target.gradient
    L = target.smoothness or 0.0

    def draw(x, B, rng):
        return np.tile(grad(x), (B, 1))

    return StochasticOracle(n=n, draw_fn=draw, exact_gradient=grad, M=0.0, G=0.0, L=L)


def make_mixture_target(modes):
    """Isotropic Gaussian mixture given as (weight, mean, variance) triples.

    Isoperimetry constants are left unset; the mixture is served with exact
    gradients only.
    """
    if len(modes) == 0:
        raise ParameterError("need at least one mode")
    w = np.array([m[0] for m in modes], dtype=float)
    mus = np.array([np.atleast_1d(np.asarray(m[1], dtype=float)) for m in modes])
    vs = np.array([m[2] for m in modes], dtype=float)
    if np.any(w <= 0) or np.any(vs <= 0):
        raise ParameterError("weights and variances must be positive")
    if abs(w.sum() - 1.0) > 1e-9:
        raise ParameterError(f"weights must sum to 1, got {w.sum()!r}")
    d = mus.shape[1]
    logw = np.log(w) - 0.5 * d * np.log(2 * np.pi * vs)

    def _log_terms(x):
        r = np.asarray(x, dtype=float) - mus
        return logw - 0.5 * np.sum(r * r, axis=1) / vs, r

    def potential(x):
        lt, _ = _log_terms(x)
        return -float(logsumexp(lt))

    def gradient(x):
        lt, r = _log_terms(x)
        resp = np.exp(lt - logsumexp(lt))
        return (resp / vs) @ r

    second = float(w @ (np.sum(mus * mus, axis=1) + d * vs))
    return TargetSpec(dim=d, potential=potential, gradient=gradient, moments=((2, float(np.sqrt(second))),))


def check_growth(oracle, points, draws, rng=None):
    """True iff every drawn estimate obeys ||g - grad F(x)|| <= M||x|| + G.

    A relative slack of 1e-12 absorbs rounding in the bound itself.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    for x in points:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g = oracle.draw(x, draws, rng)
        dev = np.linalg.norm(g - oracle.exact_gradient(x), axis=1)
        if np.any(dev > oracle.growth_bound(x) * (1.0 + 1e-12)):
            return False
    return True
