"""Random inputs for moving-average simulation.

Stable draws use the Chambers-Mallows-Stuck transform in the
parameterization with characteristic function

    exp(-scale**alpha * |theta|**alpha * (1 - i*beta*sign(theta)*tan(pi*alpha/2)))

so that alpha=2 gives N(0, 2*scale**2).  Every sampler is a pure function of
its parameters and an :class:`RngStream`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special
from scipy.interpolate import PchipInterpolator

from .errors import ParameterError


@dataclass(frozen=True)
class StableLaw:
    alpha: float
    beta: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not 0.0 < self.alpha <= 2.0:
            raise ParameterError(f"alpha must lie in (0, 2], got {self.alpha}")
        if abs(self.beta) > 1.0:
            raise ParameterError(f"beta must lie in [-1, 1], got {self.beta}")
        if not self.scale >= 0.0:
            raise ParameterError(f"scale must be nonnegative, got {self.scale}")
        if self.alpha == 2.0 and self.beta != 0.0:
            # skewness has no effect at alpha=2; normalise instead of failing
            object.__setattr__(self, "beta", 0.0)

    def with_scale(self, scale: float) -> "StableLaw":
        return StableLaw(self.alpha, self.beta, scale)


@dataclass(frozen=True)
class LevyDensityParams:
    """Two-sided Levy density ``c |log|x|| / |x|**p`` cut off at ``|x| <= eps``."""

    c1: float = 1.0
    c2: float = 1.0
    p1: float = 2.5
    p2: float = 2.5
    eps: float = 0.01

    def __post_init__(self):
        if self.c1 <= 0 or self.c2 <= 0:
            raise ParameterError("c1 and c2 must be positive")
        if self.p1 <= 0 or self.p2 <= 0:
            raise ParameterError("p1 and p2 must be positive")
        if self.eps < 0:
            raise ParameterError("eps must be nonnegative")

    @property
    def symmetric(self) -> bool:
        return self.c1 == self.c2 and self.p1 == self.p2

    def density(self, x):
        x = np.asarray(x, dtype=float)
        ax = np.abs(x)
        out = np.zeros_like(x)
        pos = x > self.eps
        neg = x < -self.eps
        out[pos] = self.c1 * np.abs(np.log(ax[pos])) / ax[pos] ** self.p1
        out[neg] = self.c2 * np.abs(np.log(ax[neg])) / ax[neg] ** self.p2
        return out


@dataclass(frozen=True)
class RngStream:
    """Seed plus replication index; identical pairs give identical draws."""

    seed: int
    stream_id: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        return np.random.Generator(np.random.PCG64(ss))


def _as_generator(rng) -> np.random.Generator:
    if isinstance(rng, RngStream):
        return rng.generator()
    if isinstance(rng, np.random.Generator):
        return rng
    raise TypeError(f"expected RngStream or numpy Generator, got {type(rng).__name__}")


def _check_count(count):
    if int(count) != count or count < 1:
        raise ParameterError(f"count must be a positive integer, got {count}")
    return int(count)


def _cms_unit(alpha: float, beta: float, count: int, gen: np.random.Generator) -> np.ndarray:
    """Standard S_alpha(1, beta, 0) draws via Chambers-Mallows-Stuck."""
    v = gen.uniform(-np.pi / 2, np.pi / 2, count)
    w = gen.standard_exponential(count)
    if alpha == 1.0:
        if beta == 0.0:
            return np.tan(v)
        hb = np.pi / 2 + beta * v
        return (2 / np.pi) * (hb * np.tan(v) - beta * np.log((np.pi / 2) * w * np.cos(v) / hb))
    if beta == 0.0:
        b_shift, s_fac = 0.0, 1.0
    else:
        t = beta * math.tan(np.pi * alpha / 2)
        b_shift = math.atan(t) / alpha
        s_fac = (1 + t * t) ** (1 / (2 * alpha))
    av = alpha * (v + b_shift)
    return (
        s_fac
        * np.sin(av)
        / np.cos(v) ** (1 / alpha)
        * (np.cos(v - av) / w) ** ((1 - alpha) / alpha)
    )


def sample_skewed_stable(law: StableLaw, count: int, rng) -> np.ndarray:
    """Draw ``count`` iid values from S_alpha(scale, beta, 0)."""
    count = _check_count(count)
    gen = _as_generator(rng)
    x = _cms_unit(law.alpha, law.beta, count, gen)
    if law.alpha == 1.0 and law.beta != 0.0 and law.scale > 0:
        return law.scale * x + (2 / np.pi) * law.beta * law.scale * math.log(law.scale)
    return law.scale * x


def sample_sas(law: StableLaw, count: int, rng) -> np.ndarray:
    """Draw ``count`` iid symmetric alpha-stable values with the law's scale."""
    if law.beta != 0.0:
        raise ParameterError("sample_sas requires beta = 0; use sample_skewed_stable")
    return sample_skewed_stable(law, count, rng)


def sample_gaussian_increment(cell_measure: float, count: int, rng) -> np.ndarray:
    """N(0, cell_measure) draws: a Gaussian random measure on a cell."""
    if cell_measure <= 0:
        raise ParameterError("cell_measure must be positive")
    count = _check_count(count)
    return math.sqrt(cell_measure) * _as_generator(rng).standard_normal(count)


def sample_gamma_increment(cell_measure: float, count: int, rng) -> np.ndarray:
    """Gamma(rate=1, shape=cell_measure) draws."""
    if not cell_measure > 0:
        raise ParameterError("cell_measure must be positive")
    count = _check_count(count)
    return _as_generator(rng).gamma(shape=cell_measure, scale=1.0, size=count)


# -- truncated Levy ---------------------------------------------------------

_TABLE_POINTS = 2048


def _log_power_antiderivative(u, p):
    """Antiderivative of log(u) * u**(-p), p != 1."""
    q = 1.0 - p
    return u**q * (np.log(u) / q - 1.0 / q**2)


def _half_line_mass(c, p, eps, upper=np.inf):
    """c * integral over (eps, upper) of |log u| u**(-p) du, closed form."""
    if p <= 1.0:
        raise ParameterError(f"exponent p={p} <= 1 gives infinite jump intensity")
    big = _log_power_antiderivative
    lo, hi = eps, upper
    total = 0.0
    if lo < 1.0:
        top = min(hi, 1.0)
        total += -(big(top, p) - big(lo, p))
    if hi > 1.0:
        start = max(lo, 1.0)
        end = 0.0 if np.isinf(hi) else big(hi, p)
        total += end - big(start, p)
    return c * total


def _half_line_first_moment(c, p, eps, upper):
    """c * integral over (eps, upper) of u |log u| u**(-p) du, with upper <= 1."""
    if upper <= eps:
        return 0.0
    # integrand = -log(u) u**(1-p) on (0, 1)
    return -c * (_log_power_antiderivative(upper, p - 1) - _log_power_antiderivative(eps, p - 1)) \
        if p != 2.0 else -c * 0.5 * (math.log(upper) ** 2 - math.log(eps) ** 2)


@dataclass(frozen=True)
class _HalfLineTable:
    mass: float
    inverse: PchipInterpolator
    g_max: float
    x_max: float


@lru_cache(maxsize=64)
def _half_line_table(c, p, eps) -> _HalfLineTable:
    mass = _half_line_mass(c, p, eps)
    # grow the upper end until the neglected tail is below 1e-12 of the mass
    x_max = max(10.0, 10 * eps)
    while _half_line_mass(c, p, x_max) > 1e-12 * mass and x_max < 1e300:
        x_max *= 10.0
    grid = np.geomspace(eps, x_max, _TABLE_POINTS)
    cdf = np.array([_half_line_mass(c, p, eps, g) for g in grid])
    cdf[0] = 0.0
    keep = np.concatenate([[True], np.diff(cdf) > 0])
    inv = PchipInterpolator(cdf[keep], np.log(grid[keep]))
    return _HalfLineTable(mass, inv, float(cdf[keep][-1]), x_max)


def levy_total_intensity(params: LevyDensityParams) -> float:
    """Total jump intensity per unit time of the truncated Levy measure."""
    if params.eps <= 0:
        raise ParameterError("eps = 0 gives infinite jump intensity; choose eps > 0")
    return _half_line_mass(params.c1, params.p1, params.eps) + _half_line_mass(
        params.c2, params.p2, params.eps
    )


def levy_compensator(params: LevyDensityParams) -> float:
    """Integral of x h(x) over eps < |x| < 1."""
    pos = _half_line_first_moment(params.c1, params.p1, params.eps, 1.0)
    neg = _half_line_first_moment(params.c2, params.p2, params.eps, 1.0)
    return pos - neg


def sample_trunc_levy_increment(
    params: LevyDensityParams, dt: float, count: int, rng, return_counts: bool = False
):
    """Draw iid copies of xi(dt) for the compensated compound Poisson process.

    Jumps arrive at rate ``levy_total_intensity(params)``; sizes are drawn by
    inverse CDF on each half-line.  The drift removes ``dt`` times the
    compensator restricted to ``eps < |x| < 1``.
    """
    if params.eps <= 0:
        raise ParameterError("eps = 0 gives infinite jump intensity; choose eps > 0")
    if dt <= 0:
        raise ParameterError("dt must be positive")
    count = _check_count(count)
    gen = _as_generator(rng)
    pos = _half_line_table(params.c1, params.p1, params.eps)
    neg = _half_line_table(params.c2, params.p2, params.eps)
    rate = pos.mass + neg.mass
    counts = gen.poisson(dt * rate, size=count)
    total = int(counts.sum())
    u_side = gen.uniform(size=total)
    u_size = gen.uniform(size=total)
    is_pos = u_side < pos.mass / rate
    sizes = np.empty(total)
    sizes[is_pos] = np.exp(pos.inverse(u_size[is_pos] * pos.g_max))
    sizes[~is_pos] = -np.exp(neg.inverse(u_size[~is_pos] * neg.g_max))
    owner = np.repeat(np.arange(count), counts)
    out = np.bincount(owner, weights=sizes, minlength=count) - dt * levy_compensator(params)
    if return_counts:
        return out, counts
    return out


# -- LePage series ----------------------------------------------------------


def lepage_constant(alpha: float) -> float:
    """Normalising constant of the Gaussian-multiplier LePage series."""
    if not 0 < alpha < 2:
        raise ParameterError("LePage series needs 0 < alpha < 2")
    if alpha == 1.0:
        return math.sqrt(2 / math.pi)
    return (
        (1 - alpha)
        * math.sqrt(math.pi)
        / (
            2 ** (alpha / 2)
            * special.gamma((alpha + 1) / 2)
            * special.gamma(2 - alpha)
            * math.cos(math.pi * alpha / 2)
        )
    )


def lepage_stable_integral(
    kernel_sections,
    domain: tuple[float, float],
    alpha: float,
    truncation_k: int = 10_000,
    rng=None,
    gaussian_tail: bool = False,
    tail_tol: float = 0.05,
) -> np.ndarray:
    """Approximate ``int f_t(x) Lambda(dx)`` over ``domain`` by a LePage series.

    ``kernel_sections(x)`` maps an array of K locations to an array of shape
    ``(n_t, K)`` (or ``(K,)`` for a single section).  Locations are uniform on
    ``domain``.  With ``gaussian_tail`` the discarded terms ``k > K`` are
    replaced by a Gaussian vector of matching conditional covariance.
    """
    if truncation_k < 1:
        raise ParameterError("truncation_k must be >= 1")
    lo, hi = domain
    length = hi - lo
    if length <= 0:
        raise ParameterError("domain must have positive length")
    gen = _as_generator(rng)
    gammas = np.cumsum(gen.standard_exponential(truncation_k))
    xi = gen.uniform(lo, hi, truncation_k)
    zeta = gen.standard_normal(truncation_k)
    raw = np.asarray(kernel_sections(xi), dtype=float)
    vals = np.atleast_2d(raw)
    factor = (lepage_constant(alpha) * length) ** (1 / alpha)
    partial = vals @ (gammas ** (-1 / alpha) * zeta)
    tail_size = gammas[-1] ** (-1 / alpha) * np.max(np.abs(vals), axis=1)
    if gaussian_tail:
        # remaining arrivals form a unit-rate Poisson process on (Gamma_K, inf)
        var = gammas[-1] ** (1 - 2 / alpha) / (2 / alpha - 1)
        extra = vals @ gen.standard_normal(truncation_k) / math.sqrt(truncation_k)
        partial = partial + math.sqrt(var) * extra
    denom = np.maximum(np.abs(partial), np.finfo(float).tiny)
    if np.any((tail_size > tail_tol * denom) & (tail_size > 0)):
        warnings.warn(
            f"LePage truncation K={truncation_k} may be too small: last term is large "
            "relative to the partial sum",
            RuntimeWarning,
            stacklevel=2,
        )
    out = factor * partial
    return out if raw.ndim > 1 else out[0]


# -- quartiles ----------------------------------------------------------------


def _sas_cdf(x: float, alpha: float) -> float:
    """CDF of S_alpha(1, 0, 0) at x > 0 by Gil-Pelaez inversion."""
    head = integrate.quad(
        lambda th: x * np.sinc(x * th / np.pi) * np.exp(-(th**alpha)),
        0.0, 1.0, epsabs=1e-13, limit=200,
    )[0]
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        tail = integrate.quad(
            lambda th: np.exp(-(th**alpha)) / th,
            1.0, np.inf, weight="sin", wvar=x, epsabs=1e-13, limlst=200,
        )[0]
    return 0.5 + (head + tail) / np.pi


@lru_cache(maxsize=256)
def stable_quartile(alpha: float) -> float:
    """Upper quartile of S_alpha(1, 0, 0); the lower quartile is its negative."""
    if not 0 < alpha <= 2:
        raise ParameterError(f"alpha must lie in (0, 2], got {alpha}")
    target = lambda x: _sas_cdf(x, alpha) - 0.75  # noqa: E731
    hi = 1.0
    while target(hi) < 0:
        hi *= 2.0
    return float(optimize.brentq(target, 1e-12, hi, xtol=1e-12))
