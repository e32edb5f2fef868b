"""
Seeded Monte-Carlo experiments that compare each randomized routine with its
exact oracle and record the error next to the bound it should satisfy.

Trial ``i`` of a run with master seed ``s`` uses seed ``split_seed(s, i)``.
Trials are independent; records are stored sorted by seed so the report does
not depend on execution order.
"""
import csv
import json
import math
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .dense_core import as_matrix, as_vector, spectral_norm_exact, svd
from .errors import InvalidInputError, NumericalFailureError
from .generate import UNIFORM, generate_matrix
from .leverage_fjlt import estimate_leverage_probabilities, leverage_accuracy_report
from .low_rank import RELATIVE, reconstruction_error, sampled_projector
from .regression import exact_least_squares, relative_error_factor, sampled_least_squares
from .rng import make_rng, split_seed
from .sketch_matmul import approx_gram, approx_product
from .spectral import ESTIMATE_BOUNDS, estimate_spectral_norm
from .tail_bounds import BoundParams, scalar_chernoff_bound

TASKS = ("gram", "product", "lowrank", "regress", "leverage", "spectral", "bounds")
NUMERICAL_FAILURE_LIMIT = 0.10
ZERO_RESIDUAL_TOL = 1e-8
PROJECTOR_TOL = 1e-8
BOUNDS_REPEATS = 10_000
BOUNDS_DEFAULT_N = 100
# child-seed indices for generated inputs, disjoint from trial indices
INPUT_STREAM = 1 << 40


@dataclass
class ExperimentConfig:
    task: str
    epsilon: float = 0.5
    delta: float = 0.1
    beta: float = 1.0
    k: int | None = None
    trials: int = 100
    seed: int = 0
    r_override: int | None = None
    input: str | None = None
    input_b: str | None = None
    format: str | None = None
    generate: str | None = None

    def validate(self):
        if self.task not in TASKS:
            raise InvalidInputError(f"unknown task {self.task!r}; choose from {', '.join(TASKS)}")
        if not 0 < self.epsilon < 1:
            raise InvalidInputError(f"epsilon must be in (0, 1), got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidInputError(f"delta must be in (0, 1), got {self.delta}")
        if not 0 < self.beta <= 1:
            raise InvalidInputError(f"beta must be in (0, 1], got {self.beta}")
        if self.trials < 1:
            raise InvalidInputError("trials must be at least 1")
        if self.r_override is not None and self.r_override < 1:
            raise InvalidInputError("r override must be positive")
        if self.task == "lowrank" and self.k is None:
            raise InvalidInputError("task lowrank needs --k")


@dataclass
class TrialRecord:
    seed: int
    r_used: int | None
    error: float | None
    bound: float | None
    passed: bool
    numerical_failure: bool = False
    extra: dict = field(default_factory=dict)


@dataclass
class ExperimentReport:
    config: dict
    records: list
    bound_target: float
    guarantee: bool
    wall_clock_seconds: float = 0.0
    version: str = __version__

    @property
    def trials(self):
        return len(self.records)

    @property
    def failures(self):
        return sum(not r.passed for r in self.records)

    @property
    def numerical_failures(self):
        return sum(r.numerical_failure for r in self.records)

    @property
    def failure_rate(self):
        return self.failures / self.trials if self.records else 0.0

    def to_dict(self):
        return _finite({
            "config": self.config,
            "records": [asdict(r) for r in self.records],
            "trials": self.trials,
            "failures": self.failures,
            "failure_rate": self.failure_rate,
            "numerical_failures": self.numerical_failures,
            "bound_target": self.bound_target,
            "guarantee": self.guarantee,
            "wall_clock_seconds": self.wall_clock_seconds,
            "version": self.version,
        })

    @classmethod
    def from_dict(cls, data):
        return cls(config=data["config"], records=[TrialRecord(**r) for r in data["records"]],
                   bound_target=data["bound_target"], guarantee=data["guarantee"],
                   wall_clock_seconds=data["wall_clock_seconds"], version=data["version"])


def _finite(obj):
    """Replace non-finite floats with None so the output is strict JSON."""
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def emit_report(rep, path, csv_path=None):
    """Write the report as JSON with sorted keys, and optionally per-trial CSV rows."""
    path = Path(path)
    try:
        path.write_text(json.dumps(rep.to_dict(), sort_keys=True, indent=2) + "\n", encoding="utf-8")
        if csv_path is not None:
            with open(csv_path, "w", newline="", encoding="utf-8") as fh:
                writer = csv.writer(fh)
                writer.writerow(["seed", "r_used", "error", "bound", "passed", "numerical_failure"])
                for r in rep.records:
                    writer.writerow([r.seed, r.r_used, _csv_float(r.error), _csv_float(r.bound),
                                     int(r.passed), int(r.numerical_failure)])
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write report: {exc.strerror}", str(exc.filename or path)) from exc


def _csv_float(x):
    return "" if x is None else repr(float(x))


def load_report(path):
    return ExperimentReport.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def summary_line(rep):
    cfg = rep.config
    return (f"task={cfg['task']} trials={rep.trials} failures={rep.failures} "
            f"failure_rate={rep.failure_rate:.4f} target={rep.bound_target:.4f} "
            f"numerical_failures={rep.numerical_failures} guarantee={'yes' if rep.guarantee else 'no'}")


# ---------------------------------------------------------------- inputs

def resolve_inputs(cfg):
    """Load or generate the matrices a config refers to. Returns ``(a, b)``."""
    from .generate import parse_generate_spec
    from .matrix_io import load_matrix

    if cfg.input is not None:
        a = load_matrix(cfg.input, cfg.format)
        b = load_matrix(cfg.input_b, cfg.format) if cfg.input_b is not None else None
        return a, b
    if cfg.generate is None:
        raise InvalidInputError("need --input or --generate")
    spec = parse_generate_spec(cfg.generate)
    a = generate_matrix(seed=split_seed(cfg.seed, INPUT_STREAM), **spec)
    b = None
    if cfg.input_b is not None:
        b = load_matrix(cfg.input_b, cfg.format)
    elif cfg.task == "product":
        b = generate_matrix(seed=split_seed(cfg.seed, INPUT_STREAM + 1), **spec)
    elif cfg.task == "regress":
        rng = make_rng(split_seed(cfg.seed, INPUT_STREAM + 2))
        b = a @ rng.standard_normal(a.shape[1]) + 0.1 * rng.standard_normal(a.shape[0])
    return a, b


# ---------------------------------------------------------------- tasks

class _Task:
    target_multiplier = 1.0

    def __init__(self, cfg, a, b):
        self.cfg = cfg
        self.a = as_matrix(a)
        self.b = b
        self.prepare()

    def prepare(self):
        pass

    def run(self, seed):
        raise NotImplementedError


class _Gram(_Task):
    def prepare(self):
        self.exact = self.a.T @ self.a
        self.norm2 = spectral_norm_exact(self.a) ** 2

    def run(self, seed):
        res = approx_gram(self.a, self.cfg.epsilon, self.cfg.delta, seed, r_override=self.cfg.r_override,
                          beta=self.cfg.beta)
        err = np.linalg.norm(self.exact - res.estimate, 2) / self.norm2
        return res.r_used, err, self.cfg.epsilon, {}


class _Product(_Task):
    def prepare(self):
        if self.b is None:
            raise InvalidInputError("task product needs a second matrix (--input-b)")
        self.b = as_matrix(self.b, "b")
        if self.b.shape[0] != self.a.shape[0]:
            raise InvalidInputError("product inputs must have the same number of rows")
        self.exact = self.a.T @ self.b
        self.scale = spectral_norm_exact(self.a) * spectral_norm_exact(self.b)

    def run(self, seed):
        res = approx_product(self.a, self.b, self.cfg.epsilon, self.cfg.delta, seed, r_override=self.cfg.r_override)
        err = np.linalg.norm(self.exact - res.estimate, 2) / self.scale
        return res.r_used, err, self.cfg.epsilon, {"beta": res.beta, "rho_terms": list(res.rho_terms)}


class _LowRank(_Task):
    def prepare(self):
        f = svd(self.a)
        k = self.cfg.k
        if not 1 <= k <= self.a.shape[1]:
            raise InvalidInputError(f"k must be in [1, {self.a.shape[1]}]")
        self.best = float(f.s[k]) if k < f.rank else 0.0
        factor = math.sqrt((1 + self.cfg.epsilon) / (1 - self.cfg.epsilon))
        self.bound = factor * self.best + PROJECTOR_TOL * float(f.s[0])

    def run(self, seed):
        proj = sampled_projector(self.a, self.cfg.k, RELATIVE, self.cfg.epsilon, self.cfg.delta, seed,
                                 r_override=self.cfg.r_override, beta=self.cfg.beta)
        return proj.r_used, reconstruction_error(self.a, proj), self.bound, {"best": self.best}


class _Regress(_Task):
    target_multiplier = 3.0

    def prepare(self):
        if self.b is None:
            raise InvalidInputError("task regress needs a target vector (--input-b)")
        self.y = as_vector(self.b, self.a.shape[0])
        self.opt = exact_least_squares(self.a, self.y).objective
        self.ynorm = float(np.linalg.norm(self.y))
        self.zero = self.opt <= ZERO_RESIDUAL_TOL * self.ynorm

    def run(self, seed):
        sol = sampled_least_squares(self.a, self.y, self.cfg.epsilon, self.cfg.delta, seed,
                                    r_override=self.cfg.r_override, beta=self.cfg.beta)
        if self.zero:
            return sol.r_used, sol.objective / self.ynorm, ZERO_RESIDUAL_TOL, {"zero_residual": True}
        return sol.r_used, sol.objective / self.opt, relative_error_factor(self.cfg.epsilon), {}


class _Leverage(_Task):
    def run(self, seed):
        est = estimate_leverage_probabilities(self.a, self.cfg.delta, seed)
        rep = leverage_accuracy_report(est, self.a)
        extra = {"sum_w_tilde": rep.sum_w_tilde, "sum_within_bound": rep.sum_within_bound,
                 "coverage_ratio": rep.coverage_ratio, "min_c": rep.min_c,
                 "floor_violations": rep.floor_violations, "beta": est.p.beta_certificate}
        return est.r_target, rep.sandwich_violation_fraction, self.cfg.delta, extra


class _Spectral(_Task):
    def prepare(self):
        self.norm2 = spectral_norm_exact(self.a) ** 2

    def run(self, seed):
        est = estimate_spectral_norm(self.a, self.cfg.delta, seed)
        ratio = est / self.norm2
        lo, hi = ESTIMATE_BOUNDS
        # <= 1 exactly when the estimate is inside [lo, hi] * ||A||^2
        err = max(lo / ratio, ratio / hi)
        return None, err, 1.0, {"ratio": ratio}


class _Bounds(_Task):
    def run(self, seed):
        n = self.cfg.r_override or BOUNDS_DEFAULT_N
        rng = make_rng(seed)
        # sum of n Rademacher variables = 2 * Binomial(n, 1/2) - n
        z = (2.0 * rng.binomial(n, 0.5, size=BOUNDS_REPEATS) - n) / n
        freq = float(np.mean(np.abs(z) > self.cfg.epsilon))
        bound = scalar_chernoff_bound(BoundParams(n=n, epsilon=self.cfg.epsilon, gamma=1.0))
        slack = 3.0 * math.sqrt(max(bound * (1 - bound), 0.0) / BOUNDS_REPEATS)
        return n, freq, min(1.0, bound + slack), {"chernoff": bound}


_TASKS = {"gram": _Gram, "product": _Product, "lowrank": _LowRank, "regress": _Regress,
          "leverage": _Leverage, "spectral": _Spectral, "bounds": _Bounds}


def run_experiment(cfg, a=None, b=None):
    """Run ``cfg.trials`` seeded trials; matrices come from ``a``/``b`` or the config."""
    cfg.validate()
    started = time.perf_counter()
    if a is None:
        a, b = resolve_inputs(cfg)
    task = _TASKS[cfg.task](cfg, a, b)
    records = []
    for i in range(cfg.trials):
        seed = split_seed(cfg.seed, i)
        try:
            r_used, err, bound, extra = task.run(seed)
        except NumericalFailureError as exc:
            records.append(TrialRecord(seed=seed, r_used=None, error=None, bound=None, passed=False,
                                       numerical_failure=True, extra={"message": str(exc)}))
            continue
        err, bound = float(err), float(bound)
        records.append(TrialRecord(seed=seed, r_used=r_used, error=err, bound=bound, passed=err <= bound,
                                   extra=_finite(extra)))
    records.sort(key=lambda r: r.seed)
    return ExperimentReport(
        config=_finite(asdict(cfg)),
        records=records,
        bound_target=min(1.0, task.target_multiplier * cfg.delta),
        guarantee=cfg.r_override is None,
        wall_clock_seconds=time.perf_counter() - started,
    )
