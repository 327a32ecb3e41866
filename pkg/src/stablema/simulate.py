"""Discretised simulation of moving averages ``X(t) = int f(t - s) Lambda(ds)``.

The kernel is replaced by its left-endpoint step version on the mesh
``t_k = k * delta``, ``k = -N, ..., N - 1``, and the random measure by its
independent cell increments, so that

    X(t_j) = sum_k f(t_k) * Lambda(((j - k - 1) delta, (j - k) delta])

for ``j = 1, ..., n``.  Increments outside ``[0, n delta]`` are drawn too, so
the path has no wrap-around.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy import signal

from . import rng as _rng
from .errors import ConfigError, ParameterError, ResourceError
from .kernels import KernelSpec, kernel_eval
from .rng import LevyDensityParams, RngStream, StableLaw

DEFAULT_TRUNCATION = 20.0
MAX_INCREMENTS = 200_000_000
# numpy.convolve below this many multiply-adds; FFT above
FFT_THRESHOLD = 1e8


@dataclass(frozen=True)
class Integrator:
    """A non-stable random measure, or a stable one with skewness.

    ``kind`` is one of ``"stable"``, ``"gaussian"``, ``"gamma"`` or ``"levy"``.
    """

    kind: str
    alpha: float = 2.0
    beta: float = 0.0
    levy: LevyDensityParams | None = None

    def __post_init__(self):
        if self.kind not in ("stable", "gaussian", "gamma", "levy"):
            raise ConfigError(f"unknown integrator kind {self.kind!r}")
        if self.kind == "stable":
            StableLaw(self.alpha, self.beta)
        if self.kind == "levy" and self.levy is None:
            object.__setattr__(self, "levy", LevyDensityParams())

    @property
    def stability(self) -> float | None:
        if self.kind == "stable":
            return self.alpha
        if self.kind == "gaussian":
            return 2.0
        return None

    def label(self) -> str:
        if self.kind == "stable":
            return f"stable(alpha={self.alpha},beta={self.beta})"
        if self.kind == "levy":
            p = self.levy
            return f"levy(c1={p.c1},c2={p.c2},p1={p.p1},p2={p.p2},eps={p.eps})"
        return self.kind


def as_integrator(law) -> Integrator:
    if isinstance(law, Integrator):
        return law
    if isinstance(law, StableLaw):
        return Integrator("stable", law.alpha, law.beta)
    raise TypeError(f"expected StableLaw or Integrator, got {type(law).__name__}")


def draw_increments(law, cell_measure: float, count: int, gen) -> np.ndarray:
    """Independent values of the random measure on ``count`` cells of equal measure."""
    integ = as_integrator(law)
    if integ.kind == "stable":
        unit = StableLaw(integ.alpha, integ.beta, cell_measure ** (1.0 / integ.alpha))
        return _rng.sample_skewed_stable(unit, count, gen)
    if integ.kind == "gaussian":
        return _rng.sample_gaussian_increment(cell_measure, count, gen)
    if integ.kind == "gamma":
        return _rng.sample_gamma_increment(cell_measure, count, gen)
    return _rng.sample_trunc_levy_increment(integ.levy, cell_measure, count, gen)


@dataclass(frozen=True)
class SampledPath:
    values: np.ndarray
    delta: float
    alpha: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ParameterError("a path needs at least two samples")
        if not self.delta > 0:
            raise ParameterError("mesh delta must be positive")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("path contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def times(self) -> np.ndarray:
        return self.delta * np.arange(1, self.n + 1)

    @cached_property
    def sum_sq(self) -> float:
        return float(np.sum(self.values**2))

    def scaled(self, factor: float) -> "SampledPath":
        return SampledPath(factor * self.values, self.delta, self.alpha, dict(self.meta))


@dataclass(frozen=True)
class SampledField:
    values: np.ndarray
    delta: float
    alpha: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[0] != vals.shape[1] or vals.shape[0] < 2:
            raise ParameterError("a field must be a square grid of side >= 2")
        if not self.delta > 0:
            raise ParameterError("mesh delta must be positive")
        if not np.all(np.isfinite(vals)):
            raise ParameterError("field contains non-finite values")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def times(self) -> np.ndarray:
        return self.delta * np.arange(1, self.n + 1)

    @cached_property
    def sum_sq(self) -> float:
        return float(np.sum(self.values**2))

    def scaled(self, factor: float) -> "SampledField":
        return SampledField(factor * self.values, self.delta, self.alpha, dict(self.meta))


def cell_count(truncation_radius: float, delta: float) -> int:
    """N = ceil(T / delta), tolerant to representation error in the ratio."""
    ratio = truncation_radius / delta
    near = round(ratio)
    return int(near) if abs(ratio - near) < 1e-9 * max(1.0, ratio) else math.ceil(ratio)


def _resolve(spec: KernelSpec, n, delta, truncation_radius):
    if n < 2:
        raise ParameterError("n must be at least 2")
    if not delta > 0:
        raise ParameterError("delta must be positive")
    if truncation_radius is None:
        truncation_radius = spec.support_radius if spec.compact else DEFAULT_TRUNCATION
    if truncation_radius < delta:
        raise ParameterError("truncation radius must be at least one mesh cell")
    return cell_count(truncation_radius, delta), truncation_radius


def discretized_kernel(spec: KernelSpec, delta: float, cells: int) -> np.ndarray:
    """Kernel values ``f(k delta)`` for ``k = -N, ..., N-1`` (per axis in 2D)."""
    t = delta * np.arange(-cells, cells)
    if spec.dimension == 1:
        return kernel_eval(spec, t)
    t1, t2 = np.meshgrid(t, t, indexing="ij")
    return kernel_eval(spec, np.stack([t1, t2], axis=-1))


def _convolve(eps, fk, method):
    cost = float(np.prod([eps.shape[i] - fk.shape[i] + 1 for i in range(eps.ndim)])) * fk.size
    if method == "auto":
        method = "fft" if cost > FFT_THRESHOLD else "direct"
    if eps.ndim == 1 and method == "direct":
        return np.convolve(eps, fk, mode="valid")
    return signal.convolve(eps, fk, mode="valid", method=method)


def _meta(spec, integ, seed_obj, n, delta, cells, truncation_radius):
    meta = {
        "kernel": spec.name,
        "c": spec.c,
        "integrator": integ.label(),
        "n": n,
        "delta": delta,
        "truncation_radius": truncation_radius,
        "cells": cells,
    }
    if isinstance(seed_obj, RngStream):
        meta["seed"] = seed_obj.seed
        meta["stream_id"] = seed_obj.stream_id
    return meta


def simulate_ma_1d(
    spec: KernelSpec,
    law,
    n: int,
    delta: float,
    truncation_radius: float | None = None,
    rng=None,
    method: str = "auto",
) -> SampledPath:
    """Simulate ``n`` samples of the moving average on the mesh ``j * delta``."""
    if spec.dimension != 1:
        raise ParameterError("simulate_ma_1d needs a one-dimensional kernel")
    cells, radius = _resolve(spec, n, delta, truncation_radius)
    count = n + 2 * cells - 1
    if count > MAX_INCREMENTS:
        raise ResourceError(
            f"need {count} increments ({8 * count / 2**30:.1f} GiB); "
            f"reduce truncation radius or n (limit {MAX_INCREMENTS})"
        )
    integ = as_integrator(law)
    gen = _rng._as_generator(rng)
    eps = draw_increments(integ, delta, count, gen)
    fk = discretized_kernel(spec, delta, cells)
    values = _convolve(eps, fk, method)
    return SampledPath(values, delta, integ.stability, _meta(spec, integ, rng, n, delta, cells, radius))


def simulate_ma_2d(
    spec: KernelSpec,
    law,
    n: int,
    delta: float,
    truncation_radius: float | None = None,
    rng=None,
    method: str = "auto",
) -> SampledField:
    """Simulate an ``n x n`` moving-average field with cell area ``delta**2``."""
    if spec.dimension != 2:
        raise ParameterError("simulate_ma_2d needs a two-dimensional kernel")
    cells, radius = _resolve(spec, n, delta, truncation_radius)
    side = n + 2 * cells - 1
    if side * side > MAX_INCREMENTS:
        raise ResourceError(
            f"need {side}x{side} increments ({8 * side * side / 2**30:.1f} GiB); "
            "reduce truncation radius or n"
        )
    integ = as_integrator(law)
    gen = _rng._as_generator(rng)
    eps = draw_increments(integ, delta * delta, side * side, gen).reshape(side, side)
    fk = discretized_kernel(spec, delta, cells)
    values = _convolve(eps, fk, method)
    return SampledField(values, delta, integ.stability, _meta(spec, integ, rng, n, delta, cells, radius))
