"""Monte Carlo experiments: simulate, estimate, aggregate, export."""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ConfigError
from .estimate import EstimatorConfig, estimate_f, estimate_g, trapezoid_weights
from .io import parse_meta_line, read_table, write_table
from .kernels import KernelSpec, kernel_eval, l2_norm, normalize_kernel_l2
from .rng import RngStream
from .simulate import Integrator, simulate_ma_1d
from .spectral import make_filter


class ReplicationError(RuntimeError):
    def __init__(self, stream_id, seed, cause):
        super().__init__(
            f"replication {stream_id} failed (replay with seed={seed}, stream_id={stream_id}): {cause}"
        )
        self.stream_id = stream_id
        self.seed = seed
        self.cause = cause

    def __reduce__(self):  # survive the trip back from worker processes
        return (ReplicationError, (self.stream_id, self.seed, self.cause))


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a one-dimensional Monte Carlo study.

    ``kernel_c=None`` rescales the kernel to unit L2 norm.  ``target`` selects
    the estimated curve: ``"g"`` compares the normalised estimate with
    ``f / ||f||_2``, ``"f"`` compares the plug-in estimate with ``f``.
    """

    integrator: Integrator
    kernel: str = "triangular"
    kernel_c: float | None = None
    n: int = 1000
    delta: float = 0.01
    truncation_radius: float | None = None
    filter_kind: str = "uniform"
    half_width: int = 5
    estimator: EstimatorConfig | None = None
    target: str = "g"
    replications: int = 100
    base_seed: int = 0
    aggregation: str = "auto"
    envelope: tuple = (0.025, 0.975)
    error_window: tuple | None = None

    def __post_init__(self):
        if self.replications < 1:
            raise ConfigError("replications (M) must be >= 1")
        lo, hi = self.envelope
        if not (0 < lo < hi < 1):
            raise ConfigError("envelope quantiles must satisfy 0 < lower < upper < 1")
        if self.aggregation not in ("auto", "mean", "median"):
            raise ConfigError("aggregation must be auto, mean or median")
        if self.target not in ("g", "f"):
            raise ConfigError("target must be 'g' or 'f'")
        if self.estimator is None:
            alpha = self.integrator.stability or 2.0
            self.estimator = EstimatorConfig(a_n=20.0, alpha=alpha)
        if self.kernel_spec().dimension != 1:
            raise ConfigError("Monte Carlo experiments support one-dimensional kernels only")

    def kernel_spec(self) -> KernelSpec:
        spec = KernelSpec(self.kernel, 1.0)
        return normalize_kernel_l2(spec) if self.kernel_c is None else replace(spec, c=self.kernel_c)

    @property
    def resolved_aggregation(self) -> str:
        if self.aggregation != "auto":
            return self.aggregation
        alpha = self.integrator.stability
        return "median" if alpha is not None and alpha < 1 else "mean"

    def window(self) -> tuple:
        if self.error_window is not None:
            return tuple(self.error_window)
        spec = self.kernel_spec()
        t = self.estimator.t_grid
        if spec.compact:
            return (max(-spec.support_radius, t[0]), min(spec.support_radius, t[-1]))
        return (float(t[0]), float(t[-1]))

    def describe(self) -> dict:
        d = {
            "integrator": self.integrator.label(),
            "kernel": self.kernel,
            "kernel_c": "l2" if self.kernel_c is None else self.kernel_c,
            "n": self.n,
            "delta": self.delta,
            "truncation_radius": self.truncation_radius,
            "filter": self.filter_kind,
            "half_width": self.half_width,
            "target": self.target,
            "M": self.replications,
            "base_seed": self.base_seed,
            "aggregation": self.resolved_aggregation,
            "envelope": f"{self.envelope[0]},{self.envelope[1]}",
            "error_window": "{},{}".format(*self.window()),
        }
        d.update({f"est.{k}": v for k, v in self.estimator.describe().items()})
        return d


@dataclass
class MonteCarloReport:
    t_grid: np.ndarray
    f_true: np.ndarray
    center: np.ndarray
    env_lo: np.ndarray | None
    env_hi: np.ndarray | None
    errors: np.ndarray
    curves: np.ndarray | None = None
    norms: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def median_error(self) -> float:
        return float(np.median(self.errors))

    def coverage(self) -> float:
        """Fraction of grid points whose true value lies inside the envelope."""
        if self.env_lo is None:
            return float("nan")
        inside = (self.env_lo <= self.f_true) & (self.f_true <= self.env_hi)
        return float(np.mean(inside))


def truth(config: ExperimentConfig, t) -> np.ndarray:
    spec = config.kernel_spec()
    f = kernel_eval(spec, t)
    return f / l2_norm(spec) if config.target == "g" else f


def l2_error(t, estimate, reference, window) -> float:
    """Trapezoid L2 distance on the part of ``t`` inside ``window``."""
    lo, hi = window
    tol = 1e-12 * max(1.0, abs(lo), abs(hi))
    mask = (t >= lo - tol) & (t <= hi + tol)
    if mask.sum() < 2:
        raise ConfigError("error window contains fewer than two grid points")
    tt = t[mask]
    d = np.asarray(estimate)[mask] - np.asarray(reference)[mask]
    return float(math.sqrt(np.sum(trapezoid_weights(tt) * d * d)))


def run_replication(config: ExperimentConfig, stream_id: int):
    """One simulate -> estimate -> error cycle; returns ``(curve, l2_error, norm2)``."""
    stream = RngStream(config.base_seed, stream_id)
    try:
        spec = config.kernel_spec()
        path = simulate_ma_1d(
            spec, config.integrator, config.n, config.delta, config.truncation_radius, stream
        )
        filt = make_filter(config.filter_kind, config.half_width)
        est_fn = estimate_g if config.target == "g" else estimate_f
        est = est_fn(path, filt, config.estimator)
        t = config.estimator.t_grid
        err = l2_error(t, est.values, truth(config, t), config.window())
    except Exception as exc:  # fail fast with replay information
        raise ReplicationError(stream_id, config.base_seed, exc) from exc
    return est.values, err, est.norm2


def _run_one(args):
    return run_replication(*args)


def run_monte_carlo(config: ExperimentConfig, workers: int = 1) -> MonteCarloReport:
    """Run ``M`` independent replications (stream ids ``0..M-1``) and aggregate.

    Results are collected in stream order, so the report does not depend on
    ``workers``.
    """
    start = time.perf_counter()
    jobs = [(config, i) for i in range(config.replications)]
    if workers <= 1:
        results = [_run_one(j) for j in jobs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, jobs))
    curves = np.array([r[0] for r in results])
    errors = np.array([r[1] for r in results])
    norms = np.array([np.nan if r[2] is None else r[2] for r in results])

    agg = config.resolved_aggregation
    center = np.median(curves, axis=0) if agg == "median" else np.mean(curves, axis=0)
    if config.replications >= 3:
        env_lo, env_hi = np.quantile(curves, list(config.envelope), axis=0)
    else:
        env_lo = env_hi = None
    t = config.estimator.t_grid
    meta = config.describe()
    meta["version"] = __version__
    meta["wall_clock"] = f"{time.perf_counter() - start:.3f}"
    return MonteCarloReport(t.copy(), truth(config, t), center, env_lo, env_hi, errors, curves, norms, meta)


# -- export -----------------------------------------------------------------------


def errors_path(path) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".errors.csv")


def export_report(report: MonteCarloReport, path, config: ExperimentConfig | None = None) -> Path:
    """Write the report CSV and its sibling ``<stem>.errors.csv``."""
    meta = dict(report.meta)
    alpha = meta.get("est.alpha", "nan")
    lines = [
        f"stablema report version={meta.get('version', __version__)}",
        f"M={meta.get('M', len(report.errors))} alpha={alpha} kernel={meta.get('kernel', 'unknown')}",
    ]
    for k, v in meta.items():
        if k in ("version", "M", "kernel", "wall_clock"):
            continue
        lines.append(f"{k}={str(v).replace(' ', '')}")
    lines.append(f"wall_clock={meta.get('wall_clock', 'nan')}")
    nan = np.full(report.t_grid.shape, np.nan)
    cols = {
        "t": report.t_grid,
        "f_true": report.f_true,
        "center": report.center,
        "env_lo": report.env_lo if report.env_lo is not None else nan,
        "env_hi": report.env_hi if report.env_hi is not None else nan,
    }
    out = write_table(path, cols, lines)
    write_table(
        errors_path(path),
        {"replication": np.arange(report.errors.size), "l2_error": report.errors},
        [f"M={report.errors.size}"],
    )
    return out


def import_report(path) -> MonteCarloReport:
    meta_lines, cols = read_table(path)
    meta = {}
    for line in meta_lines:
        meta.update(parse_meta_line(line))
    _, err = read_table(errors_path(path))
    lo, hi = cols.get("env_lo"), cols.get("env_hi")
    if lo is not None and lo.size and np.all(np.isnan(lo)):
        lo = hi = None
    return MonteCarloReport(
        cols["t"], cols["f_true"], cols["center"], lo, hi,
        err.get("l2_error", np.array([])), meta=meta,
    )
