"""INI-style configuration for the command line.

Example::

    [integrator]
    kind = stable
    alpha = 1.7

    [kernel]
    family = triangular
    c = l2

    [simulation]
    n = 1000
    delta = 0.01

    [filter]
    kind = uniform
    half_width = 5

    [estimator]
    a_n = 20
    t_min = -1
    t_max = 1
    t_points = 201

    [experiment]
    replications = 20
    base_seed = 1

Every key is optional; missing ones fall back to the defaults below.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .conditions import ScheduleSpec
from .errors import ConfigError
from .estimate import EstimatorConfig
from .kernels import KernelSpec, normalize_kernel_l2
from .montecarlo import ExperimentConfig
from .rng import LevyDensityParams
from .simulate import Integrator

_SECTIONS = ("integrator", "kernel", "simulation", "filter", "estimator", "experiment", "schedule")


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.replace(",", " ").split()]


def _opt_float(text):
    if text is None or str(text).strip().lower() in ("", "none", "auto"):
        return None
    return float(text)


@dataclass
class RunConfig:
    """Parsed configuration; each accessor builds the corresponding library object."""

    sections: dict = field(default_factory=dict)

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def integrator(self) -> Integrator:
        kind = self.get("integrator", "kind", "stable")
        alpha = float(self.get("integrator", "alpha", 1.7 if kind == "stable" else 2.0))
        beta = float(self.get("integrator", "beta", 0.0))
        levy = None
        if kind == "levy":
            levy = LevyDensityParams(
                c1=float(self.get("integrator", "c1", 1.0)),
                c2=float(self.get("integrator", "c2", 1.0)),
                p1=float(self.get("integrator", "p1", 2.5)),
                p2=float(self.get("integrator", "p2", 2.5)),
                eps=float(self.get("integrator", "eps", 0.01)),
            )
        return Integrator(kind, alpha=alpha, beta=beta, levy=levy)

    @property
    def alpha(self) -> float:
        integ = self.integrator()
        return integ.stability if integ.stability is not None else 2.0

    def kernel_c(self):
        c = self.get("kernel", "c", "l2")
        return None if str(c).lower() == "l2" else float(c)

    def kernel(self) -> KernelSpec:
        family = self.get("kernel", "family", "triangular")
        c = self.kernel_c()
        if family == "tabulated":
            raise ConfigError("tabulated kernels are only available through the library API")
        spec = KernelSpec(family, 1.0)
        return normalize_kernel_l2(spec) if c is None else KernelSpec(family, c)

    @property
    def n(self) -> int:
        return int(self.get("simulation", "n", 1000))

    @property
    def delta(self) -> float:
        return float(self.get("simulation", "delta", 0.01))

    @property
    def truncation_radius(self):
        return _opt_float(self.get("simulation", "truncation_radius"))

    @property
    def filter_kind(self) -> str:
        return self.get("filter", "kind", "uniform")

    @property
    def half_width(self) -> int:
        return int(self.get("filter", "half_width", 5))

    @property
    def target(self) -> str:
        return self.get("estimator", "target", "g")

    def estimator(self) -> EstimatorConfig:
        t = np.linspace(
            float(self.get("estimator", "t_min", -1.0)),
            float(self.get("estimator", "t_max", 1.0)),
            int(self.get("estimator", "t_points", 201)),
        )
        return EstimatorConfig(
            a_n=float(self.get("estimator", "a_n", 20.0)),
            alpha=self.alpha,
            t_grid=t,
            lambda_points=int(self.get("estimator", "lambda_points", 4096)),
            refine_tol=_opt_float(self.get("estimator", "refine_tol", "1e-4")),
            max_lambda_points=int(self.get("estimator", "max_lambda_points", 65536)),
            bound=float(self.get("estimator", "bound", 1.0)),
            p=_opt_float(self.get("estimator", "p")),
            scale_method=self.get("estimator", "scale_method", "quantile"),
            lowfreq_spacing=_opt_float(self.get("estimator", "lowfreq_spacing")),
            known_norm2=_opt_float(self.get("estimator", "known_norm2")),
        )

    def experiment(self) -> ExperimentConfig:
        env = _floats(self.get("experiment", "envelope", "0.025 0.975"))
        window = self.get("experiment", "error_window")
        return ExperimentConfig(
            integrator=self.integrator(),
            kernel=self.get("kernel", "family", "triangular"),
            kernel_c=self.kernel_c(),
            n=self.n,
            delta=self.delta,
            truncation_radius=self.truncation_radius,
            filter_kind=self.filter_kind,
            half_width=self.half_width,
            estimator=self.estimator(),
            target=self.target,
            replications=int(self.get("experiment", "replications", 100)),
            base_seed=int(self.get("experiment", "base_seed", 0)),
            aggregation=self.get("experiment", "aggregation", "auto"),
            envelope=tuple(env),
            error_window=tuple(_floats(window)) if window else None,
        )

    def schedule(self) -> ScheduleSpec:
        a_rule = self.get("schedule", "a_rule", "log")
        if a_rule not in ("log",) and not a_rule.startswith("const:"):
            a_rule = _floats(a_rule)
        n_range = self.get("schedule", "n_range", "100 1000 10000 100000 1000000")
        return ScheduleSpec(
            delta_exponent=float(self.get("schedule", "delta_exponent", 0.5)),
            m_exponent=float(self.get("schedule", "m_exponent", 0.25)),
            a_rule=a_rule,
            n_range=[int(x) for x in _floats(n_range)],
            filter_kind=self.get("schedule", "filter_kind", self.filter_kind),
            b_exponent=_opt_float(self.get("schedule", "b_exponent")),
            strict=self.get("schedule", "strict", "true").lower() == "true",
        )

    @property
    def a_decay(self):
        return _opt_float(self.get("schedule", "a_decay"))


def load_config(path=None) -> RunConfig:
    """Read an INI file; ``None`` gives an all-defaults configuration."""
    if path is None:
        return RunConfig({})
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError:
        raise
    except configparser.Error as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    unknown = set(parser.sections()) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"{Path(path).name}: unknown section(s) {sorted(unknown)}")
    return RunConfig({s: dict(parser[s]) for s in parser.sections()})
