"""Nonparametric recovery of the moving-average kernel.

The normalised kernel ``g = f / ||f||_2`` is recovered as the inverse Fourier
transform of ``sqrt(delta * I_s(lam))`` over ``[-a_n, a_n]``.  The norm
``||f||_2`` follows from ``sigma_X(0) = ||f||_alpha`` and the alpha-norm of the
estimate: ``||f||_2 = sigma / ||g||_alpha``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import special

from .errors import ConfigError, DegenerateError, ParameterError, ResourceError
from .rng import stable_quartile
from .spectral import SmoothingFilter, shifted_dft_abs2, smoothed_periodogram_2d_grid

SCALE_METHODS = ("quantile", "moment", "quantile_lowfreq", "moment_lowfreq")


@dataclass
class EstimatorConfig:
    """Parameters of one estimation run.

    ``lambda_points`` counts trapezoid intervals on ``[-a_n, a_n]``; only the
    nonnegative half is evaluated.  In one dimension the grid is doubled until
    the estimate moves by less than ``refine_tol`` in sup norm (``None`` keeps
    the starting grid), up to ``max_lambda_points``.  ``bound`` is the half-width used for the
    alpha-norm of the estimate (``T`` for compact kernels, ``b_n`` otherwise).
    """

    a_n: float
    alpha: float
    t_grid: np.ndarray = field(default_factory=lambda: np.linspace(-1.0, 1.0, 201))
    lambda_points: int = 4096
    refine_tol: float | None = 1e-4
    max_lambda_points: int = 65536
    bound: float = 1.0
    p: float | None = None
    scale_method: str = "quantile"
    lowfreq_spacing: float | None = None
    known_norm2: float | None = None
    norm_points: int = 2001

    def __post_init__(self):
        self.t_grid = np.asarray(self.t_grid, dtype=float)
        if not self.a_n > 0:
            raise ConfigError("a_n must be positive")
        if self.lambda_points < 64 or self.lambda_points % 2:
            raise ConfigError("lambda_points must be even and >= 64")
        if self.refine_tol is not None and not self.refine_tol > 0:
            raise ConfigError("refine_tol must be positive or None")
        if self.max_lambda_points < self.lambda_points:
            raise ConfigError("max_lambda_points must be >= lambda_points")
        if not self.bound > 0:
            raise ConfigError("bound must be positive")
        if not 0 < self.alpha <= 2:
            raise ConfigError("alpha must lie in (0, 2]")
        if self.p is None:
            self.p = self.alpha / 2
        if not 0 < self.p < self.alpha:
            raise ConfigError("moment order p must satisfy 0 < p < alpha")
        if self.scale_method not in SCALE_METHODS:
            raise ConfigError(f"scale_method must be one of {SCALE_METHODS}")
        if self.scale_method.endswith("lowfreq") and not self.lowfreq_spacing:
            raise ConfigError("low-frequency scale estimators need lowfreq_spacing (support half-width T)")
        if self.t_grid.ndim != 1 or np.any(np.diff(self.t_grid) <= 0):
            raise ConfigError("t_grid must be strictly increasing")

    def describe(self) -> dict:
        d = asdict(self)
        t = d.pop("t_grid")
        d["t_min"], d["t_max"], d["t_points"] = float(t[0]), float(t[-1]), int(t.size)
        return d


@dataclass
class KernelEstimate:
    t_grid: np.ndarray
    values: np.ndarray
    norm2: float | None = None
    provenance: dict = field(default_factory=dict)
    t_grid2: np.ndarray | None = None


def half_lambda_grid(a_n: float, lambda_points: int) -> np.ndarray:
    return np.linspace(0.0, a_n, lambda_points // 2 + 1)


def trapezoid_weights(x: np.ndarray) -> np.ndarray:
    h = np.diff(x)
    w = np.zeros(x.size)
    w[:-1] += h / 2
    w[1:] += h / 2
    return w


def inverse_cosine_transform(amplitude, lambdas, t) -> np.ndarray:
    """``(1/pi) int_0^a amplitude(lam) cos(t lam) dlam`` by the trapezoid rule.

    Equals ``(1/2pi) int_{-a}^{a}`` of an even amplitude times ``exp(i t lam)``.
    """
    lam = np.asarray(lambdas, dtype=float)
    wa = trapezoid_weights(lam) * np.asarray(amplitude, dtype=float)
    t = np.asarray(t, dtype=float)
    # evaluate once per |t| so that g(t) and g(-t) are bit-identical
    u, inv = np.unique(np.abs(t), return_inverse=True)
    return (np.cos(np.outer(u, lam)) @ wa / math.pi)[inv.reshape(t.shape)]


def _resolution_check(a_n, lambda_points, t_max):
    h = 2 * a_n / lambda_points
    if t_max > 0 and 2 * math.pi / (t_max * h) < 8:
        warnings.warn(
            f"lambda grid under-resolves cos(t lam) for |t| up to {t_max}: "
            f"{2 * math.pi / (t_max * h):.1f} points per oscillation; raise lambda_points",
            RuntimeWarning,
            stacklevel=3,
        )


def smoothed_periodogram_on(path, lambdas, filt: SmoothingFilter) -> np.ndarray:
    shifts = filt.offsets / (path.n * path.delta)
    if path.sum_sq <= 0:
        raise DegenerateError("sum of squares is zero; periodogram undefined")
    num = shifted_dft_abs2(path.values, path.delta, lambdas, shifts)
    return (filt.weights @ num) / path.sum_sq


def g_amplitude(path, filt: SmoothingFilter, a_n: float, lambda_points: int):
    """Half grid and ``sqrt(delta * I_s)`` on it, negatives clamped at zero."""
    lam = half_lambda_grid(a_n, lambda_points)
    ip = smoothed_periodogram_on(path, lam, filt)
    return lam, np.sqrt(np.maximum(path.delta * ip, 0.0))


def refined_amplitude(path, filt: SmoothingFilter, config: EstimatorConfig, t):
    """Amplitude and transform on ``t``, doubling the grid until converged.

    Each doubling reuses the previous amplitudes and evaluates only the new
    midpoints.  Returns ``(lambdas, amplitude, values, intervals)``.
    """
    points = config.lambda_points
    lam, amp = g_amplitude(path, filt, config.a_n, points)
    vals = inverse_cosine_transform(amp, lam, t)
    if config.refine_tol is None or points >= config.max_lambda_points:
        return lam, amp, vals, points
    while points < config.max_lambda_points:
        points *= 2
        fine_lam = half_lambda_grid(config.a_n, points)
        fine_amp = np.empty(fine_lam.size)
        fine_amp[::2] = amp
        mid = smoothed_periodogram_on(path, fine_lam[1::2], filt)
        fine_amp[1::2] = np.sqrt(np.maximum(path.delta * mid, 0.0))
        fine_vals = inverse_cosine_transform(fine_amp, fine_lam, t)
        change = float(np.max(np.abs(fine_vals - vals))) if t.size else 0.0
        lam, amp, vals = fine_lam, fine_amp, fine_vals
        if change < config.refine_tol:
            return lam, amp, vals, points
    warnings.warn(
        f"lambda quadrature not converged to {config.refine_tol} at {points} intervals",
        RuntimeWarning,
        stacklevel=3,
    )
    return lam, amp, vals, points


def estimate_g(path, filt: SmoothingFilter, config: EstimatorConfig, t_grid=None) -> KernelEstimate:
    """Estimate the L2-normalised kernel on ``config.t_grid`` (or ``t_grid``)."""
    t = config.t_grid if t_grid is None else np.asarray(t_grid, dtype=float)
    _resolution_check(config.a_n, config.lambda_points, float(np.max(np.abs(t))) if t.size else 0.0)
    _, _, vals, points = refined_amplitude(path, filt, config, t)
    prov = {"estimator": "g", "half_width": filt.half_width, **config.describe(), **path.meta}
    prov["lambda_points_used"] = points
    return KernelEstimate(t, vals, None, prov)


# -- scale estimation -----------------------------------------------------------


def c_moment(p: float, alpha: float) -> float:
    """Constant with ``sigma**p = c(p, alpha) * E|X|**p`` for S_alpha(sigma, 0, 0)."""
    if not 0 < alpha <= 2:
        raise ParameterError("alpha must lie in (0, 2]")
    if not 0 < p < alpha:
        raise ParameterError(f"moment order p={p} must satisfy 0 < p < alpha={alpha}")
    lg_a = special.gammaln(1 - p / alpha)
    if p == 1.0:
        return math.pi / (2 * math.exp(lg_a))
    # Gamma(2 - p) / (1 - p) has the sign of (1 - p), as does cos(pi p / 2)
    lg = special.gammaln(2 - p) - math.log(abs(1 - p)) - lg_a
    return math.exp(lg) * abs(math.cos(math.pi * p / 2))


def _subsample(data, spacing):
    if spacing is None:
        return np.asarray(data, dtype=float)
    return np.asarray(data, dtype=float)[:: max(1, int(spacing))]


def scale_moment(data, alpha: float, p: float | None = None) -> float:
    """Moment estimator ``(c(p, alpha) * mean |X|**p)**(1/p)``."""
    x = np.asarray(data, dtype=float)
    if x.size == 0:
        raise ParameterError("scale_moment needs data")
    p = alpha / 2 if p is None else p
    m = np.mean(np.abs(x) ** p)
    if m == 0:
        warnings.warn("all-zero data: scale estimate is zero", RuntimeWarning, stacklevel=2)
        return 0.0
    return (c_moment(p, alpha) * m) ** (1 / p)


def scale_quantile(data, alpha: float) -> float:
    """Interquartile estimator: empirical IQR over the S_alpha(1) IQR.

    Empirical quartiles interpolate linearly between order statistics.
    """
    x = np.asarray(data, dtype=float)
    if x.size < 4:
        raise ParameterError("scale_quantile needs at least four values")
    lo, hi = np.quantile(x, [0.25, 0.75])
    if hi - lo == 0:
        warnings.warn("constant quartiles: scale estimate is zero", RuntimeWarning, stacklevel=2)
        return 0.0
    return float((hi - lo) / (2 * stable_quartile(alpha)))


def estimate_scale(path, config: EstimatorConfig) -> float:
    method = config.scale_method
    data = path.values.ravel()
    if method.endswith("lowfreq"):
        step = round(config.lowfreq_spacing / path.delta)
        data = _subsample(data, step)
    if method.startswith("quantile"):
        return scale_quantile(data, config.alpha)
    return scale_moment(data, config.alpha, config.p)


def norm_alpha_g(estimate: KernelEstimate, alpha: float, bound: float) -> float:
    """``(int_{-bound}^{bound} |g|**alpha dt)**(1/alpha)`` by the trapezoid rule."""
    t = np.asarray(estimate.t_grid, dtype=float)
    v = np.asarray(estimate.values, dtype=float)
    tol = 1e-9 * max(1.0, bound)
    if t[0] > -bound + tol or t[-1] < bound - tol:
        raise ParameterError(
            f"estimate grid [{t[0]}, {t[-1]}] does not cover [-{bound}, {bound}]"
        )
    inside = (t > -bound + tol) & (t < bound - tol)
    tt = np.concatenate([[-bound], t[inside], [bound]])
    vv = np.concatenate([[np.interp(-bound, t, v)], v[inside], [np.interp(bound, t, v)]])
    return float(np.sum(trapezoid_weights(tt) * np.abs(vv) ** alpha) ** (1 / alpha))


def estimate_f(path, filt: SmoothingFilter, config: EstimatorConfig) -> KernelEstimate:
    """Plug-in estimate ``f = ||f||_2 * g`` with ``||f||_2 = sigma / ||g||_alpha``."""
    t = config.t_grid
    _resolution_check(config.a_n, config.lambda_points, float(np.max(np.abs(t))) if t.size else 0.0)
    lam, amp, vals, points = refined_amplitude(path, filt, config, t)
    prov = {"estimator": "g", "half_width": filt.half_width, **config.describe(), **path.meta}
    prov["lambda_points_used"] = points
    g = KernelEstimate(t, vals, None, prov)
    if config.known_norm2 is not None:
        norm2 = float(config.known_norm2)
    else:
        sigma = estimate_scale(path, config)
        t_norm = np.linspace(-config.bound, config.bound, config.norm_points)
        g_norm = KernelEstimate(t_norm, inverse_cosine_transform(amp, lam, t_norm))
        na = norm_alpha_g(g_norm, config.alpha, config.bound)
        if na == 0:
            raise DegenerateError("alpha-norm of the kernel estimate is zero")
        norm2 = sigma / na
        g.provenance["scale"] = sigma
        g.provenance["norm_alpha_g"] = na
    g.provenance["estimator"] = "f"
    return KernelEstimate(g.t_grid, norm2 * g.values, norm2, g.provenance)


# -- two dimensions -------------------------------------------------------------


def inverse_transform_2d(amplitude, lam1, lam2, t1, t2) -> np.ndarray:
    """``(2 pi)**-2 int int amplitude(lam) cos(<t, lam>) dlam`` on a product grid.

    ``amplitude`` has shape ``(len(lam1), len(lam2))``; the result has shape
    ``(len(t1), len(t2))``.  The cosine form is exact for amplitudes with
    ``A(-lam) = A(lam)`` and makes the output symmetric under ``t -> -t``.
    """
    p = trapezoid_weights(np.asarray(lam1))[:, None] * np.asarray(amplitude) * trapezoid_weights(np.asarray(lam2))[None, :]
    a1 = np.outer(t1, lam1)
    a2 = np.outer(t2, lam2)
    out = np.cos(a1) @ p @ np.cos(a2).T - np.sin(a1) @ p @ np.sin(a2).T
    return out / (4 * math.pi**2)


MAX_GRID_2D = 50_000_000


def estimate_g_2d(field, filt: SmoothingFilter, config: EstimatorConfig, t_grid=None) -> KernelEstimate:
    """Estimate the normalised kernel of a field on ``t_grid x t_grid``.

    The periodogram is scaled by the cell area ``delta**2``.
    """
    t = config.t_grid if t_grid is None else np.asarray(t_grid, dtype=float)
    intervals = config.lambda_points
    lam = np.linspace(-config.a_n, config.a_n, intervals + 1)
    s = 2 * filt.half_width + 1
    if (s * lam.size) ** 2 + t.size * lam.size > MAX_GRID_2D:
        raise ResourceError(
            f"2D estimate needs {(s * lam.size) ** 2} periodogram values; lower lambda_points"
        )
    _resolution_check(config.a_n, intervals, float(np.max(np.abs(t))))
    ip = smoothed_periodogram_2d_grid(field, lam, lam, filt)
    amp = np.sqrt(np.maximum(field.delta**2 * ip, 0.0))
    vals = inverse_transform_2d(amp, lam, lam, t, t)
    prov = {"estimator": "g2d", "half_width": filt.half_width, **config.describe(), **field.meta}
    return KernelEstimate(t, vals, None, prov, t_grid2=t)
