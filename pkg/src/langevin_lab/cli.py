"""Configuration-driven experiment runner.

Usage::

    langevin-lab run CONFIG [--seed S] [--out DIR]
    langevin-lab sweep CONFIG [--seed S] [--out DIR] [--jobs N]
    langevin-lab bounds CONFIG [--out DIR]
    langevin-lab check

Configs are YAML files; the grammar is documented in the README. Exit codes:
0 success, 2 invalid configuration, 3 a check in ``check`` failed.
"""

from __future__ import annotations

import argparse
import copy
import csv
import io
import math
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import product
from typing import Annotated, Dict, List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, PositiveFloat, PositiveInt, ValidationError, model_validator

from . import cltlab, particles, samplers, targets
from ._streams import cell_seed
from .errors import ConfigurationError, ParameterError, StepSizeWarning
from .metrics import bounds as bounds_mod

EXIT_OK, EXIT_INVALID, EXIT_CHECK_FAILED = 0, 2, 3


# -- config schema -------------------------------------------------------------


class _Block(BaseModel):
    model_config = ConfigDict(extra="forbid")


class GaussianTargetBlock(_Block):
    name: Literal["gaussian"]
    d: PositiveInt = 1
    variance: PositiveFloat = 1.0


class FiniteSumTargetBlock(_Block):
    name: Literal["finite_sum_quadratic"]
    centers: List[List[float]] = Field(min_length=1)
    curvature: PositiveFloat = 1.0


class MixtureTargetBlock(_Block):
    name: Literal["mixture"]
    modes: List[List[Union[float, List[float]]]] = Field(min_length=1)


TargetBlock = Annotated[
    Union[GaussianTargetBlock, FiniteSumTargetBlock, MixtureTargetBlock], Field(discriminator="name")
]


class OracleBlock(_Block):
    name: Literal["finite_sum", "exact"] = "finite_sum"
    n: Optional[PositiveInt] = None
    M: Optional[float] = Field(default=None, ge=0)
    G: Optional[float] = Field(default=None, ge=0)


class ChainBlock(_Block):
    variant: Literal["LMC", "SGLD", "ABSGLD", "CCSGLD"]
    eta: PositiveFloat
    K: PositiveInt
    B: PositiveInt = 1
    B_est: Optional[PositiveInt] = None
    x0: Optional[List[float]] = None


class KernelBlock(_Block):
    name: Literal["sine", "zero", "gaussian_repulsion"] = "sine"
    M: float = Field(default=1.0, ge=0)


class ParticlesBlock(_Block):
    variant: Literal["IPD", "RBM", "CCRBM"]
    n: PositiveInt
    d: PositiveInt = 1
    eta: PositiveFloat
    sigma: PositiveFloat = 1.0
    K: int = Field(ge=0)
    B: PositiveInt = 1
    B_prime: PositiveInt = 1
    kernel: KernelBlock = KernelBlock()
    confinement: float = Field(default=0.0, ge=0)
    init_scale: PositiveFloat = 1.0


class NoiseScalingBlock(_Block):
    eta: PositiveFloat
    batches: List[PositiveInt] = Field(default=[1, 2, 4, 8, 16], min_length=4)
    x: Optional[List[float]] = None


class CltBlock(_Block):
    lemma: Literal["wasserstein", "zhai", "noise_energy", "cov_estimator"]
    batches: List[PositiveInt] = Field(min_length=1)
    beta: Optional[PositiveFloat] = None
    d: PositiveInt = 1
    family: Literal["rademacher", "finite_sum_noise"] = "rademacher"
    atoms: Optional[List[float]] = None
    grid_points: PositiveInt = 100001
    h: List[float] = Field(default=[0.01, 0.02], min_length=1)
    x: Optional[List[float]] = None
    B_est: List[PositiveInt] = Field(default=[1], min_length=1)
    draws: PositiveInt = 100000


class BoundsBlock(_Block):
    evaluator: Literal[tuple(bounds_mod.EVALUATORS)]  # type: ignore[valid-type]
    params: Dict[str, float]


class SweepAxis(_Block):
    param: str
    values: List[Union[int, float, str, List[float]]] = Field(min_length=1)


_KIND_BLOCK = {
    "chain": ("chain", "target"),
    "particles": ("particles",),
    "noise-scaling": ("noise_scaling", "target"),
    "clt-check": ("clt",),
    "bound-table": ("bounds",),
}


class ExperimentConfig(_Block):
    kind: Literal["chain", "particles", "noise-scaling", "clt-check", "bound-table"]
    seed: int = Field(default=0, ge=0)
    output: Optional[str] = None
    target: Optional[TargetBlock] = None
    oracle: Optional[OracleBlock] = None
    chain: Optional[ChainBlock] = None
    particles: Optional[ParticlesBlock] = None
    noise_scaling: Optional[NoiseScalingBlock] = None
    clt: Optional[CltBlock] = None
    bounds: Optional[BoundsBlock] = None
    sweep: List[SweepAxis] = []

    @model_validator(mode="after")
    def _blocks_present(self):
        for block in _KIND_BLOCK[self.kind]:
            if getattr(self, block) is None:
                raise ValueError(f"kind '{self.kind}' needs a '{block}' block")
        if self.kind == "clt-check" and self.clt.lemma in ("noise_energy", "cov_estimator") and self.target is None:
            raise ValueError(f"lemma '{self.clt.lemma}' needs a finite_sum_quadratic 'target' block")
        if self.kind == "clt-check" and self.clt.lemma in ("wasserstein", "zhai") and self.clt.beta is None:
            raise ValueError(f"lemma '{self.clt.lemma}' needs 'beta'")
        data = self.model_dump()
        for axis in self.sweep:
            if not _has_path(data, axis.param):
                raise ValueError(f"sweep axis '{axis.param}' does not name a configured parameter")
        return self

    def cells(self):
        """Planned runs: (cell index, key, overrides) in row-major axis order."""
        if not self.sweep:
            return [(0, (), {})]
        grids = [range(len(a.values)) for a in self.sweep]
        out = []
        for i, key in enumerate(product(*grids)):
            out.append((i, key, {a.param: a.values[j] for a, j in zip(self.sweep, key)}))
        return out


def _has_path(data, path):
    cur = data
    for part in path.split("."):
        if not isinstance(cur, dict) or part not in cur:
            return False
        cur = cur[part]
    return True


def _set_path(data, path, value):
    parts = path.split(".")
    cur = data
    for part in parts[:-1]:
        cur = cur[part]
    cur[parts[-1]] = value


def _format_validation(err):
    msgs = []
    for e in err.errors():
        loc = ".".join(str(p) for p in e["loc"])
        if e["type"] == "extra_forbidden":
            msgs.append(f"unknown key '{loc}'")
        else:
            msgs.append(f"{loc or '<root>'}: {e['msg']}")
    return "; ".join(msgs)


def validate_config(data):
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigurationError(_format_validation(err)) from None


def parse_config(path):
    """Read and validate a YAML experiment config; unknown keys are rejected."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as err:
        raise ConfigurationError(f"cannot read config {path}: {err.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.MarkedYAMLError as err:
        mark = err.problem_mark or err.context_mark
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        raise ConfigurationError(f"{path}: parse error at {where}: {err.problem}") from None
    except yaml.YAMLError as err:
        raise ConfigurationError(f"{path}: parse error: {err}") from None
    if not isinstance(data, dict):
        raise ConfigurationError(f"{path}: top level must be a mapping")
    return validate_config(data)


# -- building blocks -----------------------------------------------------------


def build_target(block, oracle_block=None):
    if block.name == "gaussian":
        tgt = targets.make_gaussian_target(block.d, block.variance)
        ob = oracle_block or OracleBlock(name="exact")
        if ob.name != "exact":
            raise ConfigurationError("the gaussian target is served by the 'exact' oracle only")
        orc = targets.make_exact_oracle(tgt, n=ob.n)
    elif block.name == "finite_sum_quadratic":
        tgt, orc = targets.make_finite_sum_quadratic(block.centers, block.curvature)
        if oracle_block is not None and oracle_block.name == "exact":
            orc = targets.make_exact_oracle(tgt, n=orc.n)
    else:
        modes = [(m[0], m[1], m[2]) for m in block.modes]
        tgt = targets.make_mixture_target(modes)
        orc = targets.make_exact_oracle(tgt, n=oracle_block.n if oracle_block else None)
    if oracle_block is not None and (oracle_block.M is not None or oracle_block.G is not None):
        orc = orc.with_growth(M=oracle_block.M, G=oracle_block.G)
    return tgt, orc


def _build_particles(block, seed):
    rng = np.random.default_rng(seed)
    states = block.init_scale * rng.standard_normal((block.n, block.d))
    M = block.kernel.M
    if block.kernel.name == "sine":
        kernel = particles.sine_kernel(M)
    elif block.kernel.name == "zero":
        kernel = particles.zero_kernel
    else:
        # psi(r) = M exp(1/2) exp(-r^2/2): |psi'| peaks at r = 1 with value M
        c = M * math.exp(0.5)
        kernel = particles.clipped_potential_kernel(lambda r: -c * r * np.exp(-0.5 * r * r), M)
    confine = particles.quadratic_confinement(block.confinement) if block.confinement > 0 else None
    return particles.ParticleSystem(
        states=states, interact=kernel, confine=confine, M=M, sigma=block.sigma,
        eta=block.eta, B=block.B, B_prime=block.B_prime,
    )


# -- running -------------------------------------------------------------------


@dataclass
class RunReport:
    """Everything one experiment produced.

    ``rows`` are per-run metrics (each carries its seed), ``slopes`` the
    batch-scaling fits, ``bound_rows`` the bound tables, ``counters`` the
    kernel-evaluation and operation tallies keyed by cell.
    """

    config_hash: str
    kind: str
    rows: list = field(default_factory=list)
    slopes: list = field(default_factory=list)
    bound_rows: list = field(default_factory=list)
    counters: list = field(default_factory=list)
    wall_clock: float = 0.0


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(_fmt(x)) for x in v)
    return v


def _cell_dir(out_dir, index):
    if out_dir is None:
        return None
    path = os.path.join(out_dir, f"cell-{index:04d}")
    os.makedirs(path, exist_ok=True)
    return path


def _run_cell(cfg_data, index, overrides, seed, out_dir):
    data = copy.deepcopy({k: v for k, v in cfg_data.items() if k != "sweep"})
    for path, value in overrides.items():
        _set_path(data, path, value)
    data["seed"] = seed
    cfg = validate_config(data)
    base = {"cell": index, "seed": seed}
    base.update({k: _fmt(v) for k, v in overrides.items()})
    res = {"rows": [], "slopes": [], "bound_rows": [], "counters": []}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        if cfg.kind == "chain":
            _chain_cell(cfg, base, res, _cell_dir(out_dir, index))
        elif cfg.kind == "particles":
            _particles_cell(cfg, base, res, _cell_dir(out_dir, index))
        elif cfg.kind == "noise-scaling":
            _noise_scaling_cell(cfg, base, res)
        elif cfg.kind == "clt-check":
            _clt_cell(cfg, base, res)
        else:
            _bounds_cell(cfg, base, res)
    return res


def _chain_cell(cfg, base, res, cell_dir):
    tgt, orc = build_target(cfg.target, cfg.oracle)
    ch = cfg.chain
    conf = samplers.ChainConfig(eta=ch.eta, B=ch.B, K=ch.K, seed=cfg.seed, variant=ch.variant, B_est=ch.B_est)
    traj = samplers.run_chain(tgt, orc, conf, ch.x0)
    if cell_dir is not None:
        traj.save(os.path.join(cell_dir, "trajectory.csv"), os.path.join(cell_dir, "records.npy"))
    tail = traj.iterates[ch.K // 2:]
    row = dict(base)
    row.update({
        "final_norm": _fmt(float(np.linalg.norm(traj.iterates[-1]))),
        "mean_x0": _fmt(float(tail[:, 0].mean())),
        "var_x0": _fmt(float(tail[:, 0].var())),
        "mean_batch": _fmt(float(traj.batch_sizes.mean())),
        "mean_noise_norm": _fmt(float(traj.noise_norms.mean())),
    })
    res["rows"].append(row)


def _particles_cell(cfg, base, res, cell_dir):
    pb = cfg.particles
    system = _build_particles(pb, cfg.seed)
    run = particles.run_particles(system, pb.variant, pb.K, cfg.seed)
    if cell_dir is not None:
        run.write_csv(os.path.join(cell_dir, "snapshots.csv"))
    row = dict(base)
    final = run.snapshots[-1]
    row.update({"final_mean_norm": _fmt(float(np.linalg.norm(final.mean(axis=0)))),
                "final_spread": _fmt(float(final.var(axis=0).sum()))})
    res["rows"].append(row)
    cnt = dict(base)
    cnt.update({"drift_kernel_evaluations": run.drift_evaluations,
                "estimator_kernel_evaluations": run.estimator_evaluations,
                "correction_flops": run.correction_flops})
    res["counters"].append(cnt)


def _noise_scaling_cell(cfg, base, res):
    tgt, orc = build_target(cfg.target, cfg.oracle)
    if not orc.is_finite_sum:
        raise ConfigurationError("noise-scaling needs a finite_sum_quadratic target")
    ns = cfg.noise_scaling
    x = np.zeros(tgt.dim) if ns.x is None else np.asarray(ns.x, dtype=float)
    unc, cor = [], []
    for B in ns.batches:
        law = cltlab.enumerate_noise_law(orc, x, B)
        unc.append(cltlab.per_step_noise_kl(law, ns.eta, corrected=False))
        cor.append(cltlab.per_step_noise_kl(law, ns.eta, corrected=True))
        row = dict(base)
        row.update({"B": B, "log_B": _fmt(math.log(B)),
                    "kl_uncorrected": _fmt(unc[-1]), "kl_corrected": _fmt(cor[-1]),
                    "log_kl_uncorrected": _fmt(math.log(unc[-1])) if unc[-1] > 0 else "",
                    "log_kl_corrected": _fmt(math.log(cor[-1])) if cor[-1] > 0 else ""})
        res["rows"].append(row)
    for name, vals in (("uncorrected", unc), ("corrected", cor)):
        entry = dict(base)
        try:
            slope, hw = cltlab.batch_scaling_fit(ns.batches, vals)
            entry.update({"variant": name, "slope": _fmt(slope), "half_width_95": _fmt(hw)})
        except Exception as err:  # zero noise gives KL = 0 and no slope
            entry.update({"variant": name, "slope": "", "half_width_95": "", "note": str(err)})
        res["slopes"].append(entry)


def _clt_cell(cfg, base, res):
    cb = cfg.clt
    if cb.lemma in ("wasserstein", "zhai"):
        fn = cltlab.wass_clt_experiment if cb.lemma == "wasserstein" else cltlab.zhai_clt_experiment
        for B in cb.batches:
            ec = cltlab.CltExperimentConfig(beta=cb.beta, B=B, d=cb.d, family=cb.family, atoms=cb.atoms,
                                            grid_points=cb.grid_points, seed=cfg.seed)
            measured, bound = fn(ec)
            row = dict(base)
            row.update({"lemma": cb.lemma, "B": B})
            row.update(cltlab.experiment_row(ec, measured, bound, cb.lemma))
            res["rows"].append(row)
        return
    tgt, orc = build_target(cfg.target, cfg.oracle)
    x = np.zeros(tgt.dim) if cb.x is None else np.asarray(cb.x, dtype=float)
    chash = cltlab.config_hash(cb.model_dump())
    if cb.lemma == "noise_energy":
        for B in cb.batches:
            for h in cb.h:
                measured, bound = cltlab.conditional_noise_energy(orc, x, B, h)
                row = dict(base)
                row.update({"lemma": cb.lemma, "B": B, "h": _fmt(h), "experiment": cb.lemma, "config_hash": chash,
                            "measured": _fmt(measured), "bound": _fmt(bound), "pass": int(measured <= bound)})
                res["rows"].append(row)
        return
    rng = np.random.default_rng(cfg.seed)
    for B in cb.batches:
        for Be in cb.B_est:
            rep = cltlab.cov_estimator_check(orc, x, B, Be, cb.draws, rng)
            row = dict(base)
            row.update({"lemma": cb.lemma, "B": B, "B_est": Be, "experiment": cb.lemma, "config_hash": chash,
                        "measured": _fmt(rep.second_moment_excess), "bound": _fmt(rep.excess_bound),
                        "pass": int(rep.passed)})
            res["rows"].append(row)


def _bounds_cell(cfg, base, res):
    rep = bounds_mod.EVALUATORS[cfg.bounds.evaluator](cfg.bounds.params)
    for r in rep.all_reports():
        for line in r.rows():
            row = dict(base)
            row.update(line)
            res["bound_rows"].append(row)


def run_experiment(config, out_dir=None, jobs=1):
    """Run every planned cell of ``config`` and assemble a :class:`RunReport`.

    Per-cell artifacts (trajectories, snapshots) go under ``out_dir`` when
    given. Cells may run in parallel; results are sorted by cell index so
    the report does not depend on ``jobs``.
    """
    t0 = time.perf_counter()
    data = config.model_dump()
    cells = config.cells()
    args = []
    for i, key, ov in cells:
        # an explicit seed axis is taken literally; otherwise seeds are split off the master
        seed = int(ov["seed"]) if "seed" in ov else (cell_seed(config.seed, key) if key else config.seed)
        args.append((data, i, ov, seed, out_dir))
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    try:
        if jobs > 1 and len(args) > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                results = list(pool.map(_run_cell, *zip(*args)))
        else:
            results = [_run_cell(*a) for a in args]
    except (ConfigurationError, ParameterError) as err:
        raise type(err)(f"{config.kind} run failed: {err}") from err
    report = RunReport(config_hash=cltlab.config_hash(data), kind=config.kind)
    for res in results:
        report.rows += res["rows"]
        report.slopes += res["slopes"]
        report.bound_rows += res["bound_rows"]
        report.counters += res["counters"]
    report.wall_clock = time.perf_counter() - t0
    return report


def _csv_text(rows):
    fields = []
    for r in rows:
        for k in r:
            if k not in fields:
                fields.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n", restval="")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) for k, v in r.items()})
    return buf.getvalue()


def emit_report(report, path):
    """Write CSVs and summary.txt (byte-stable) plus run.log (timings) under ``path``."""
    try:
        os.makedirs(path, exist_ok=True)
        written = []
        for name, rows in (("metrics.csv", report.rows), ("slopes.csv", report.slopes),
                           ("bounds.csv", report.bound_rows), ("counters.csv", report.counters)):
            if rows:
                with open(os.path.join(path, name), "w", newline="\n") as fh:
                    fh.write(_csv_text(rows))
                written.append(name)
        lines = [f"kind: {report.kind}", f"config_hash: {report.config_hash}",
                 f"runs: {len({r.get('cell') for r in report.rows + report.bound_rows})}",
                 f"files: {', '.join(written)}"]
        for s in report.slopes:
            if s.get("slope") != "":
                lines.append(f"slope[{s['variant']}, cell {s['cell']}]: {s['slope']} +- {s['half_width_95']}")
        with open(os.path.join(path, "summary.txt"), "w", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
        with open(os.path.join(path, "run.log"), "a") as fh:
            fh.write(f"{time.strftime('%Y-%m-%dT%H:%M:%S')} config={report.config_hash} "
                     f"wall_clock_s={report.wall_clock:.3f}\n")
    except OSError as err:
        raise OSError(f"cannot write report to {err.filename or path}: {err.strerror}") from err


# -- lemma-verification suite --------------------------------------------------


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def run_checks():
    """Quick versions of the lemma and reduction checks; one result per check."""
    out = []
    _, orc = targets.make_finite_sum_quadratic([[-1.0], [1.0]], 1.0)
    Bs = [1, 2, 4, 8, 16]
    laws = [cltlab.enumerate_noise_law(orc, [0.0], B) for B in Bs]
    unc = [cltlab.per_step_noise_kl(lw, 0.05) for lw in laws]
    cor = [cltlab.per_step_noise_kl(lw, 0.05, corrected=True) for lw in laws]
    su, sc = cltlab.fit_batch_scaling(Bs, unc), cltlab.fit_batch_scaling(Bs, cor)
    out.append(CheckResult("uncorrected batch slope in [-2.3, -1.7]", -2.3 <= su <= -1.7, f"slope={su:.4f}"))
    out.append(CheckResult("corrected batch slope <= -2.6 and below uncorrected",
                           sc <= -2.6 and all(c < u for c, u in zip(cor, unc)), f"slope={sc:.4f}"))

    from .metrics import covariance_mismatch_w2sq
    rng = np.random.default_rng(0)
    ok = True
    for _ in range(200):
        d = int(rng.integers(1, 6))
        A = rng.standard_normal((d, d))
        S = A @ A.T
        S *= rng.uniform() / np.trace(S)
        ok &= covariance_mismatch_w2sq(S) <= np.trace(S) ** 2 / 4 * (1 + 1e-12)
    out.append(CheckResult("covariance mismatch <= Tr^2/4", bool(ok), "200 random PSD matrices"))

    meas = []
    ok = True
    for B in (4, 16, 64):
        m, b = cltlab.wass_clt_experiment(cltlab.CltExperimentConfig(beta=math.sqrt(0.1), B=B, grid_points=20001))
        meas.append(m)
        ok &= m <= b
    ok &= all(meas[i + 1] <= meas[i] for i in range(len(meas) - 1))
    out.append(CheckResult("Gaussian-convolution CLT bound, nonincreasing in B", bool(ok),
                           " ".join(f"{m:.3e}" for m in meas)))

    ok = True
    for B in (1, 2, 4):
        e1, b1 = cltlab.conditional_noise_energy(orc, [0.0], B, 0.01)
        e2, b2 = cltlab.conditional_noise_energy(orc, [0.0], B, 0.02)
        ok &= e1 <= b1 and e2 <= b2 and 1.5 <= e2 / e1 <= 2.5
    out.append(CheckResult("conditional noise energy <= 576 h u^4 / B^2, linear in h", bool(ok), "B in 1,2,4"))

    ok = True
    for Be in (1, 4):
        ok &= cltlab.cov_estimator_check(orc, [0.0], 2, Be, 10**5, np.random.default_rng(Be)).passed
    out.append(CheckResult("covariance estimator moments and trace powers", bool(ok), "B=2, B_est in 1,4"))

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", StepSizeWarning)
        g = targets.make_gaussian_target(3, 1.0)
        a = samplers.run_chain(g, None, samplers.ChainConfig(eta=0.1, K=50, seed=1, variant="LMC"))
        b = samplers.run_chain(g, targets.make_exact_oracle(g), samplers.ChainConfig(eta=0.1, B=4, K=50, seed=1))
    out.append(CheckResult("SGLD with zero noise reproduces LMC", bool(np.array_equal(a.iterates, b.iterates)), "d=3, K=50"))

    ok = samplers.absgld_batch_size([2.5], 1.0, 0.0, 10) == 4 and samplers.absgld_batch_size([100.0], 1.0, 0.0, 3) == 3
    out.append(CheckResult("adaptive batch formula", bool(ok), "spot values"))
    return out


# -- entry point ---------------------------------------------------------------


def _parser():
    p = argparse.ArgumentParser(prog="langevin-lab", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)
    for name, help_ in (("run", "run a single experiment"), ("sweep", "run every cell of a sweep"),
                        ("bounds", "evaluate the bound table of a config")):
        sp = sub.add_parser(name, help=help_)
        sp.add_argument("config")
        sp.add_argument("--seed", type=int, default=None, help="override the master seed")
        sp.add_argument("--out", default=None, help="output directory (overrides the config)")
        sp.add_argument("--jobs", type=int, default=1, help="parallel worker processes for sweep cells")
    sub.add_parser("check", help="run the lemma-verification suite")
    return p


def main(argv=None):
    args = _parser().parse_args(argv)
    if args.command == "check":
        results = run_checks()
        for r in results:
            print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  ({r.detail})")
        return EXIT_OK if all(r.passed for r in results) else EXIT_CHECK_FAILED
    try:
        cfg = parse_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigurationError("--seed must be nonnegative")
            cfg = cfg.model_copy(update={"seed": args.seed})
        if args.jobs < 1:
            raise ConfigurationError("--jobs must be at least 1")
        if args.command == "run" and cfg.sweep:
            raise ConfigurationError("config has sweep axes; use the 'sweep' subcommand")
        if args.command == "sweep" and not cfg.sweep:
            raise ConfigurationError("config has no sweep axes; use the 'run' subcommand")
        if args.command == "bounds":
            if cfg.bounds is None:
                raise ConfigurationError("config has no 'bounds' block")
            cfg = validate_config({**cfg.model_dump(), "kind": "bound-table"})
        out = args.out or cfg.output or "out"
        report = run_experiment(cfg, out_dir=out, jobs=args.jobs)
        emit_report(report, out)
        if args.command == "bounds":
            print(bounds_mod.EVALUATORS[cfg.bounds.evaluator](cfg.bounds.params).to_table())
        else:
            with open(os.path.join(out, "summary.txt")) as fh:
                print(fh.read(), end="")
    except (ConfigurationError, ParameterError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_INVALID
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
