"""Evaluators for the quantitative convergence and indistinguishability bounds.

Each evaluator takes a mapping of named parameters (keyword arguments are
merged in) and returns a :class:`BoundReport` whose rows carry the term's
expression as a string. Expressions use Python/SymPy syntax with ``log`` the
natural logarithm, so they can be re-evaluated independently.

Parameter names: eta, B, K, M, G, L, d, n, sigma, B_prime, lambda_lsi,
lambda_pi, kl0, m1, m2, C2, C4, C6. The moment constants C2, C4, C6 default
to 1 and the report records whether the defaults were used.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from ..errors import ConfigurationError, ParameterError

ORDER_LEVEL = "order-level: universal constants set to 1"


@dataclass(frozen=True)
class BoundTerm:
    label: str
    expression: str
    value: float


@dataclass(frozen=True)
class BoundReport:
    name: str
    params: dict
    terms: tuple
    flags: tuple = ()
    related: dict = field(default_factory=dict)

    def __post_init__(self):
        for t in self.terms:
            if not t.value >= 0:
                raise ParameterError(f"term {t.label} evaluated to {t.value}")

    @property
    def total(self):
        return sum(t.value for t in self.terms)

    def term(self, label):
        for t in self.terms:
            if t.label == label:
                return t.value
        raise KeyError(label)

    def rows(self):
        """One dict per term plus a total row; flags are joined with ';'."""
        flags = ";".join(self.flags)
        out = [
            {"bound": self.name, "term": t.label, "expression": t.expression, "value": repr(float(t.value)), "flags": flags}
            for t in self.terms
        ]
        out.append({"bound": self.name, "term": "total", "expression": " + ".join(t.label for t in self.terms),
                    "value": repr(float(self.total)), "flags": flags})
        return out

    def to_csv(self, include_related=True):
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=["bound", "term", "expression", "value", "flags"], lineterminator="\n")
        w.writeheader()
        for rep in self.all_reports() if include_related else [self]:
            w.writerows(rep.rows())
        return buf.getvalue()

    def all_reports(self):
        return [self] + [r for _, r in sorted(self.related.items())]

    def to_table(self):
        lines = []
        for rep in self.all_reports():
            width = max(len(t.label) for t in rep.terms)
            lines.append(f"{rep.name}")
            for t in rep.terms:
                lines.append(f"  {t.label:<{width}}  {t.value:.6e}  {t.expression}")
            lines.append(f"  {'total':<{width}}  {rep.total:.6e}")
            for f in rep.flags:
                lines.append(f"  [{f}]")
        return "\n".join(lines)


# -- parameter handling ----------------------------------------------------

_INTEGER = {"B", "K", "d", "n", "B_prime"}
_POSITIVE = {"eta", "B", "K", "d", "n", "B_prime", "sigma", "lambda_lsi", "lambda_pi"}
_NONNEG = {"M", "G", "L", "kl0", "m1", "m2", "C2", "C4", "C6"}
_MOMENT_DEFAULTS = {"C2": 1.0, "C4": 1.0, "C6": 1.0}


def _collect(params, kwargs, required, moments=()):
    p = dict(params or {})
    p.update(kwargs)
    flags = []
    defaulted = [c for c in moments if c not in p]
    for c in defaulted:
        p[c] = _MOMENT_DEFAULTS[c]
    if defaulted:
        flags.append("moment constants " + ",".join(defaulted) + " default to 1")
    elif moments:
        flags.append("moment constants " + ",".join(moments) + " supplied")
    missing = [k for k in required if k not in p or p[k] is None]
    if missing:
        raise ConfigurationError(f"missing bound parameters: {', '.join(missing)}")
    out = {}
    for k in list(required) + list(moments):
        v = p[k]
        try:
            v = float(v)
        except (TypeError, ValueError):
            raise ParameterError(f"parameter {k} must be numeric, got {v!r}") from None
        if math.isnan(v):
            raise ParameterError(f"parameter {k} is NaN")
        if k in _INTEGER and v != int(v):
            raise ParameterError(f"parameter {k} must be an integer, got {v}")
        if k in _POSITIVE and not v > 0:
            raise ParameterError(f"parameter {k} must be positive, got {v}")
        if k in _NONNEG and not v >= 0:
            raise ParameterError(f"parameter {k} must be nonnegative, got {v}")
        out[k] = v
    return out, flags


def _report(name, p, entries, flags):
    terms = tuple(BoundTerm(label, expr, float(val)) for label, expr, val in entries)
    return BoundReport(name=name, params=dict(p), terms=terms, flags=tuple(flags))


# -- evaluators --------------------------------------------------------------


def bound_sgld_lsi(params=None, **kwargs):
    """KL(Law(x_K) || pi) for SGLD under a log-Sobolev inequality."""
    p, flags = _collect(params, kwargs, ("eta", "K", "B", "M", "G", "L", "d", "lambda_lsi", "kl0"), ("C2", "C4"))
    eta, K, B, M, G, L, d, lam, kl0 = (p[k] for k in ("eta", "K", "B", "M", "G", "L", "d", "lambda_lsi", "kl0"))
    C2, C4 = p["C2"], p["C4"]
    if L > 0 and eta > lam / (6 * L * L):
        flags.append("step ceiling eta <= lambda_lsi/(6*L**2) violated")
    entries = [
        ("transient", "exp(-lambda_lsi*eta*K/2)*kl0", math.exp(-lam * eta * K / 2) * kl0),
        ("discretization", "11*L**2*eta*d/lambda_lsi", 11 * L**2 * eta * d / lam),
        ("minibatch_variance", "7*L*eta*(M**2*C2*d + G**2)/(B*lambda_lsi)", 7 * L * eta * (M**2 * C2 * d + G**2) / (B * lam)),
        ("minibatch_fourth", "1210*eta*(M**4*C4*d**2 + G**4)/(lambda_lsi*B**2)",
         1210 * eta * (M**4 * C4 * d**2 + G**4) / (lam * B**2)),
    ]
    return _report("sgld_lsi", p, entries, flags)


def bound_absgld_lsi(params=None, **kwargs):
    """KL bound and amortized batch-size bound for batch-adaptive SGLD under LSI.

    The batch-size report is attached as ``related["amortized_batch"]``.
    """
    keys = ("eta", "K", "M", "G", "L", "d", "lambda_lsi", "kl0", "m1", "m2")
    p, flags = _collect(params, kwargs, keys)
    eta, K, M, G, L, d, lam, kl0, m1, m2 = (p[k] for k in keys)
    denom = 8 * L * (L * M + 128 * M * M)
    if denom > 0 and eta > lam * lam / denom:
        flags.append("step ceiling eta <= lambda_lsi**2/(8*L*(L*M + 128*M**2)) violated")
    kl = _report("absgld_lsi", p, [
        ("transient", "exp(-lambda_lsi*eta*K/4)*kl0", math.exp(-lam * eta * K / 4) * kl0),
        ("stationary", "256*eta*(L**2*d + 2*M**2*m2**2 + G**2)/lambda_lsi",
         256 * eta * (L**2 * d + 2 * M**2 * m2**2 + G**2) / lam),
        ("second_order", "64*L**2*eta**2*(M*m1 + M + G)/lambda_lsi", 64 * L**2 * eta**2 * (M * m1 + M + G) / lam),
    ], flags)
    batch = _report("absgld_amortized_batch", p, [
        ("base", "2", 2.0),
        ("offset", "G", G),
        ("transient", "50*M*sqrt(kl0)/(lambda_lsi**(3/2)*eta*K)", 50 * M * math.sqrt(kl0) / (lam**1.5 * eta * K)),
        ("stationary", "28*M*sqrt(eta)*(L*sqrt(d) + M*m2 + G)/lambda_lsi",
         28 * M * math.sqrt(eta) * (L * math.sqrt(d) + M * m2 + G) / lam),
        ("second_order", "8*L*eta*sqrt(2*M*m1 + 2*M + 2*G)/lambda_lsi",
         8 * L * eta * math.sqrt(2 * M * m1 + 2 * M + 2 * G) / lam),
    ], flags)
    return BoundReport(kl.name, kl.params, kl.terms, kl.flags, {"amortized_batch": batch})


def bound_sgld_fd_pi(params=None, **kwargs):
    """Fisher divergence of the time-averaged SGLD law; TV^2 under a Poincare inequality.

    The TV^2 report is attached as ``related["tv_squared"]`` when
    ``lambda_pi`` is supplied.
    """
    p_all = dict(params or {})
    p_all.update(kwargs)
    keys = ("eta", "K", "B", "M", "G", "L", "d", "kl0")
    if p_all.get("lambda_pi") is not None:
        keys = keys + ("lambda_pi",)
    p, flags = _collect(p_all, {}, keys, ("C2", "C4"))
    eta, K, B, M, G, L, d, kl0 = (p[k] for k in keys[:8])
    C2, C4 = p["C2"], p["C4"]
    if L > 0 and eta > 1 / (6 * L):
        flags.append("step ceiling eta <= 1/(6*L) violated")
    v2 = M**2 * C2 * d + G**2
    v4 = M**4 * C4 * d**2 + G**4
    fd = _report("sgld_fd", p, [
        ("transient", "4*kl0/(K*eta)", 4 * kl0 / (K * eta)),
        ("discretization", "20*L**2*eta*d", 20 * L**2 * eta * d),
        ("minibatch_variance", "12*L*eta*(M**2*C2*d + G**2)/B", 12 * L * eta * v2 / B),
        ("minibatch_fourth", "2304*eta*(M**4*C4*d**2 + G**4)/B**2", 2304 * eta * v4 / B**2),
    ], flags)
    related = {}
    if "lambda_pi" in p:
        lp = p["lambda_pi"]
        related["tv_squared"] = _report("sgld_tv_squared_pi", p, [
            ("transient", "16*kl0/(lambda_pi*K*eta)", 16 * kl0 / (lp * K * eta)),
            ("discretization", "80*L**2*eta*d/lambda_pi", 80 * L**2 * eta * d / lp),
            ("minibatch_variance", "48*L*eta*(M**2*C2*d + G**2)/(lambda_pi*B)", 48 * L * eta * v2 / (lp * B)),
            ("minibatch_fourth", "9216*eta*(M**4*C4*d**2 + G**4)/(lambda_pi*B**2)", 9216 * eta * v4 / (lp * B**2)),
        ], flags)
    return BoundReport(fd.name, fd.params, fd.terms, fd.flags, related)


def bound_sgld_traj_kl(params=None, **kwargs):
    """Path-space KL between SGLD and LMC iterates driven by the same Gaussians."""
    keys = ("eta", "K", "B", "M", "G", "d")
    p, flags = _collect(params, kwargs, keys, ("C4", "C6"))
    eta, K, B, M, G, d = (p[k] for k in keys)
    C4, C6 = p["C4"], p["C6"]
    lg = (1 + math.log(B)) ** 2
    return _report("sgld_traj_kl", p, [
        ("second_moment", "2*eta**2*K*(M**4*C4*d**2 + G**4)/B**2", 2 * eta**2 * K * (M**4 * C4 * d**2 + G**4) / B**2),
        ("clt_remainder", "3000*eta**3*K*(M**6*C6*d**6 + G**6*d**3)*(1 + log(B))**2/B**4",
         3000 * eta**3 * K * (M**6 * C6 * d**6 + G**6 * d**3) * lg / B**4),
    ], flags)


def bound_ccsgld_traj_kl(params=None, **kwargs):
    """Path-space KL between covariance-corrected SGLD and LMC."""
    keys = ("eta", "K", "B", "M", "G", "d")
    p, flags = _collect(params, kwargs, keys, ("C4", "C6"))
    eta, K, B, M, G, d = (p[k] for k in keys)
    C4, C6 = p["C4"], p["C6"]
    lg = (1 + math.log(B)) ** 2
    v6 = M**6 * C6 * d**6 + G**6 * d**3
    return _report("ccsgld_traj_kl", p, [
        ("estimator_variance", "8*eta**2*K*(M**4*C4*d**2 + G**4)/B**3", 8 * eta**2 * K * (M**4 * C4 * d**2 + G**4) / B**3),
        ("estimator_sixth", "96*eta**3*K*(M**6*C6*d**3 + G**6)/B**3", 96 * eta**3 * K * (M**6 * C6 * d**3 + G**6) / B**3),
        ("threshold_event", "3200*eta**5*K*(M**6*C6*d**6 + G**6*d**3)/B**3", 3200 * eta**5 * K * v6 / B**3),
        ("clt_remainder", "1875*eta**3*K*(M**6*C6*d**6 + G**6*d**3)*(1 + log(B))**2/B**4",
         1875 * eta**3 * K * v6 * lg / B**4),
    ], flags)


def _rbm_flags(p, flags):
    eta, B, M, d, sigma = p["eta"], p["B"], p["M"], p["d"], p["sigma"]
    flags.append(ORDER_LEVEL)
    if M > 0 and eta > B * sigma**2 / (40 * M**2 * d):
        flags.append("warning: step ceiling eta <= B*sigma**2/(40*M**2*d) violated")
    return flags


def bound_rbm_traj_kl(params=None, **kwargs):
    """Path-space KL between the random batch method and exact particle dynamics."""
    keys = ("eta", "K", "B", "M", "n", "d", "sigma")
    p, flags = _collect(params, kwargs, keys)
    eta, K, B, M, n, d, sigma = (p[k] for k in keys)
    flags = _rbm_flags(p, flags)
    return _report("rbm_traj_kl", p, [
        ("second_moment", "eta**2*M**4*n*K/(B**2*sigma**4)", eta**2 * M**4 * n * K / (B**2 * sigma**4)),
        ("clt_remainder", "d*eta**3*M**6*n*K*(1 + log(B))**2/(B**4*sigma**6)",
         d * eta**3 * M**6 * n * K * (1 + math.log(B)) ** 2 / (B**4 * sigma**6)),
    ], flags)


def bound_ccrbm_traj_kl(params=None, **kwargs):
    """Path-space KL between covariance-corrected RBM and exact particle dynamics."""
    keys = ("eta", "K", "B", "B_prime", "M", "n", "d", "sigma")
    p, flags = _collect(params, kwargs, keys)
    eta, K, B, Bp, M, n, d, sigma = (p[k] for k in keys)
    flags = _rbm_flags(p, flags)
    return _report("ccrbm_traj_kl", p, [
        ("estimator_variance", "eta**2*M**4*n*K/(B**2*B_prime*sigma**4)", eta**2 * M**4 * n * K / (B**2 * Bp * sigma**4)),
        ("third_order", "eta**3*M**6*n*K/(B**3*sigma**6)", eta**3 * M**6 * n * K / (B**3 * sigma**6)),
        ("clt_remainder", "d*eta**3*M**6*n*K*(1 + log(B))**2/(B**4*sigma**6)",
         d * eta**3 * M**6 * n * K * (1 + math.log(B)) ** 2 / (B**4 * sigma**6)),
    ], flags)


EVALUATORS = {
    "sgld_lsi": bound_sgld_lsi,
    "absgld_lsi": bound_absgld_lsi,
    "sgld_fd_pi": bound_sgld_fd_pi,
    "sgld_traj_kl": bound_sgld_traj_kl,
    "ccsgld_traj_kl": bound_ccsgld_traj_kl,
    "rbm_traj_kl": bound_rbm_traj_kl,
    "ccrbm_traj_kl": bound_ccrbm_traj_kl,
}
