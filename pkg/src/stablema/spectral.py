"""Self-normalised and smoothed periodograms in one and two dimensions.

For a path ``X(t_j)``, ``t_j = j * delta`` (``j = 1..n``)::

    I(lam) = |sum_j X(t_j) exp(i t_j lam)|**2 / sum_j X(t_j)**2

and the smoothed version averages ``I`` at ``lam + m / (n delta)`` for
``|m| <= m_n`` with filter weights.  Frequencies are evaluated by direct
summation; grids are generally not commensurate with the DFT.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateError, ParameterError

_CHUNK = 1 << 22  # max phase-matrix entries per block


@dataclass(frozen=True)
class SmoothingFilter:
    half_width: int
    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if self.half_width < 1:
            raise ParameterError("filter half-width must be >= 1")
        if w.shape != (2 * self.half_width + 1,):
            raise ParameterError("filter needs 2*half_width + 1 weights")
        if np.any(w < 0):
            raise ParameterError("filter weights must be nonnegative")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ParameterError(f"filter weights must sum to one, got {w.sum()!r}")
        object.__setattr__(self, "weights", w)

    @property
    def offsets(self) -> np.ndarray:
        return np.arange(-self.half_width, self.half_width + 1)

    @property
    def w_star(self) -> float:
        return float(self.weights.max())

    @property
    def w2(self) -> float:
        return float(np.sum(self.offsets**2 * self.weights))


def uniform_filter(half_width: int) -> SmoothingFilter:
    """Constant weights ``1 / (2 m + 1)``."""
    m = int(half_width)
    if m < 1:
        raise ParameterError("filter half-width must be >= 1")
    return SmoothingFilter(m, np.full(2 * m + 1, 1.0 / (2 * m + 1)))


def triangular_filter(half_width: int) -> SmoothingFilter:
    m = int(half_width)
    if m < 1:
        raise ParameterError("filter half-width must be >= 1")
    w = (m + 1.0) - np.abs(np.arange(-m, m + 1))
    return SmoothingFilter(m, w / w.sum())


def delta_filter(half_width: int) -> SmoothingFilter:
    """All weight on ``m = 0``; smoothing becomes the identity."""
    w = np.zeros(2 * int(half_width) + 1)
    w[int(half_width)] = 1.0
    return SmoothingFilter(int(half_width), w)


def make_filter(kind: str, half_width: int) -> SmoothingFilter:
    try:
        factory = {"uniform": uniform_filter, "triangular": triangular_filter, "delta": delta_filter}[kind]
    except KeyError:
        raise ParameterError(f"unknown filter kind {kind!r}") from None
    return factory(half_width)


@dataclass(frozen=True)
class FrequencyGrid:
    lambdas: np.ndarray
    bound: float

    def __post_init__(self):
        lam = np.asarray(self.lambdas, dtype=float)
        if np.any(np.diff(lam) < 0):
            raise ParameterError("frequency grid must be sorted")
        if not np.array_equal(lam, -lam[::-1]):
            raise ParameterError("frequency grid must be symmetric about zero")
        if np.max(np.abs(lam)) > self.bound:
            raise ParameterError("frequency grid exceeds its bound")
        object.__setattr__(self, "lambdas", lam)

    @classmethod
    def uniform(cls, bound: float, intervals: int) -> "FrequencyGrid":
        half = np.linspace(0.0, bound, intervals // 2 + 1)
        return cls(np.concatenate([-half[:0:-1], half]), bound)


def _denominator(obj) -> float:
    s = obj.sum_sq
    if s <= 0:
        raise DegenerateError("sum of squares is zero; periodogram undefined")
    return s


def dft_abs2(values, delta: float, lambdas) -> np.ndarray:
    """``|sum_j x_j exp(i j delta lam)|**2`` for each lam, direct summation.

    The sum over ``j`` runs along the contiguous axis so numpy uses pairwise
    summation.
    """
    x = np.asarray(values, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    flat = lam.ravel()
    t = delta * np.arange(1, x.size + 1)
    out = np.empty(flat.size)
    step = max(1, _CHUNK // x.size)
    for lo in range(0, flat.size, step):
        ph = flat[lo:lo + step, None] * t[None, :]
        re = np.sum(np.cos(ph) * x, axis=1)
        im = np.sum(np.sin(ph) * x, axis=1)
        out[lo:lo + step] = re * re + im * im
    return out.reshape(lam.shape)


def self_normalized_periodogram(path, lam):
    """Self-normalised periodogram of a :class:`SampledPath` at ``lam``."""
    denom = _denominator(path)
    out = dft_abs2(path.values, path.delta, lam) / denom
    return float(out) if np.ndim(out) == 0 else out


def shifted_dft_abs2(values, delta: float, lambdas, shifts) -> np.ndarray:
    """``|DFT|**2`` at ``lam + s`` for every shift s and lam; shape ``(S, L)``.

    Phases factor as ``exp(i t s) * exp(i t lam)``, so only ``n * (S + L)``
    trigonometric evaluations are needed.
    """
    x = np.asarray(values, dtype=float)
    lam = np.asarray(lambdas, dtype=float).ravel()
    shifts = np.asarray(shifts, dtype=float)
    t = delta * np.arange(1, x.size + 1)
    pre = x[None, :] * np.exp(1j * shifts[:, None] * t[None, :])  # (S, n)
    out = np.empty((shifts.size, lam.size))
    step = max(1, _CHUNK // x.size)
    for lo in range(0, lam.size, step):
        ph = np.exp(1j * t[:, None] * lam[None, lo:lo + step])  # (n, L)
        z = pre @ ph
        out[:, lo:lo + step] = z.real**2 + z.imag**2
    return out


def smoothed_periodogram(path, lam, filt: SmoothingFilter):
    """Filter-weighted average of the periodogram over ``lam + m / (n delta)``."""
    denom = _denominator(path)
    lam_arr = np.asarray(lam, dtype=float)
    shifts = filt.offsets / (path.n * path.delta)
    num = shifted_dft_abs2(path.values, path.delta, lam_arr, shifts)
    out = (filt.weights @ num) / denom
    out = out.reshape(lam_arr.shape)
    return float(out) if out.ndim == 0 else out


# -- two dimensions -----------------------------------------------------------


def _phase_matrix(t, lam):
    return np.exp(1j * np.outer(t, lam))


def periodogram_2d(field, lam):
    """Self-normalised periodogram of a square field at 2-vectors ``lam``.

    ``lam`` has a trailing axis of size 2; the first component pairs with the
    first array axis of the field.
    """
    denom = _denominator(field)
    lam = np.asarray(lam, dtype=float)
    if lam.shape[-1] != 2:
        raise ParameterError("2D frequencies need a trailing axis of size 2")
    pts = lam.reshape(-1, 2)
    t = field.times
    e1 = np.exp(1j * np.outer(pts[:, 0], t))  # (P, n)
    e2 = np.exp(1j * np.outer(pts[:, 1], t))
    z = np.einsum("pj,jk,pk->p", e1, field.values, e2)
    out = (z.real**2 + z.imag**2).reshape(lam.shape[:-1]) / denom
    return float(out) if out.ndim == 0 else out


def periodogram_2d_grid(field, lam1, lam2) -> np.ndarray:
    """Unsmoothed periodogram on the product grid ``lam1 x lam2``."""
    denom = _denominator(field)
    t = field.times
    z = _phase_matrix(t, lam1).T @ field.values @ _phase_matrix(t, lam2)
    return (z.real**2 + z.imag**2) / denom


def smoothed_periodogram_2d_grid(field, lam1, lam2, filt: SmoothingFilter) -> np.ndarray:
    """Smoothed periodogram on a product grid with product-form weights.

    Smoothing runs over the square ``{-m..m}**2`` with weight
    ``w(m1) * w(m2)``; shifts are ``m / (n delta)`` in each coordinate.
    """
    denom = _denominator(field)
    lam1 = np.asarray(lam1, dtype=float)
    lam2 = np.asarray(lam2, dtype=float)
    shifts = filt.offsets / (field.n * field.delta)
    s = shifts.size
    f1 = (lam1[None, :] + shifts[:, None]).ravel()  # (S*L1,)
    f2 = (lam2[None, :] + shifts[:, None]).ravel()
    t = field.times
    z = _phase_matrix(t, f1).T @ field.values @ _phase_matrix(t, f2)
    num = (z.real**2 + z.imag**2).reshape(s, lam1.size, s, lam2.size)
    w = filt.weights
    return np.einsum("a,aibk,b->ik", w, num, w) / denom


def smoothed_periodogram_2d(field, lam, filt: SmoothingFilter):
    """Smoothed 2D periodogram at arbitrary 2-vectors ``lam``."""
    lam = np.asarray(lam, dtype=float)
    shifts = filt.offsets / (field.n * field.delta)
    total = 0.0
    for a, s1 in enumerate(shifts):
        for b, s2 in enumerate(shifts):
            weight = filt.weights[a] * filt.weights[b]
            if weight == 0.0:
                continue
            total = total + weight * np.asarray(periodogram_2d(field, lam + np.array([s1, s2])))
    return float(total) if np.ndim(total) == 0 else total
