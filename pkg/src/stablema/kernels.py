"""Moving-average kernels: evaluation, L2 normalisation and Fourier transforms.

All built-in kernels are even and of positive type.  The Fourier convention
is ``fhat(lam) = int f(t) exp(-i lam t) dt``; for even kernels it is real.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator

from .errors import ParameterError

FAMILIES = ("triangular", "spherical", "exponential", "gaussian2d", "tabulated")

# integral of the unit-amplitude kernel squared
_UNIT_L2_SQ = {
    "triangular": 2.0 / 3.0,
    "spherical": 33.0 / 70.0,
    "exponential": 1.0,
    "gaussian2d": math.pi,
}


@dataclass(frozen=True)
class KernelSpec:
    """A kernel ``c * shape(t)``.

    ``table`` is only used by the ``tabulated`` family: a pair ``(grid, values)``
    with a 1D abscissa grid (shared by both axes when ``dimension == 2``) and
    values of matching shape, interpolated linearly.
    """

    family: str
    c: float = 1.0
    support_radius: float = math.inf
    dimension: int = 1
    table: tuple | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ParameterError(f"unknown kernel family {self.family!r}")
        if self.c < 0:
            raise ParameterError("kernel amplitude c must be nonnegative")
        if self.family in ("triangular", "spherical"):
            object.__setattr__(self, "support_radius", 1.0)
        if self.family == "gaussian2d":
            object.__setattr__(self, "dimension", 2)
        if self.family in ("triangular", "spherical", "exponential") and self.dimension != 1:
            raise ParameterError(f"{self.family} kernel is one-dimensional")
        if self.dimension not in (1, 2):
            raise ParameterError("dimension must be 1 or 2")
        if self.family == "tabulated":
            if self.table is None:
                raise ParameterError("tabulated kernel needs a table")
            grid, values = self.table
            grid = np.asarray(grid, dtype=float)
            values = np.asarray(values, dtype=float)
            if grid.ndim != 1 or np.any(np.diff(grid) <= 0):
                raise ParameterError("table grid must be strictly increasing")
            if values.shape != (grid.size,) * self.dimension:
                raise ParameterError("table values do not match the grid")
            object.__setattr__(self, "table", (grid, values))
            if math.isinf(self.support_radius):
                radius = float(max(abs(grid[0]), abs(grid[-1])))
                object.__setattr__(self, "support_radius", radius)

    @property
    def name(self) -> str:
        return self.family

    @property
    def compact(self) -> bool:
        return math.isfinite(self.support_radius)


def triangular(c: float = 1.0) -> KernelSpec:
    return KernelSpec("triangular", c)


def spherical(c: float = 1.0) -> KernelSpec:
    return KernelSpec("spherical", c)


def exponential(c: float = 1.0) -> KernelSpec:
    return KernelSpec("exponential", c)


def gaussian2d(c: float = 1.0 / (2.0 * math.pi)) -> KernelSpec:
    return KernelSpec("gaussian2d", c, dimension=2)


def tabulated(grid, values, c: float = 1.0) -> KernelSpec:
    values = np.asarray(values, dtype=float)
    return KernelSpec("tabulated", c, dimension=values.ndim, table=(grid, values))


def _unit_shape(spec: KernelSpec, t: np.ndarray) -> np.ndarray:
    fam = spec.family
    if fam == "gaussian2d":
        return np.exp(-0.5 * np.sum(t * t, axis=-1))
    if fam == "tabulated":
        grid, values = spec.table
        lo, hi = grid[0], grid[-1]
        if np.any(t < lo - 1e-12 * max(1.0, abs(lo))) or np.any(t > hi + 1e-12 * max(1.0, abs(hi))):
            raise ParameterError(f"tabulated kernel queried outside [{lo}, {hi}]")
        t = np.clip(t, lo, hi)
        if spec.dimension == 1:
            return np.interp(t, grid, values)
        interp = RegularGridInterpolator((grid, grid), values, method="linear")
        return interp(t.reshape(-1, 2)).reshape(t.shape[:-1])
    a = np.abs(t)
    if fam == "triangular":
        return np.where(a <= 1.0, 1.0 - a, 0.0)
    if fam == "spherical":
        return np.where(a <= 1.0, 1.0 - 1.5 * a + 0.5 * a**3, 0.0)
    return np.exp(-a)


def kernel_eval(spec: KernelSpec, t):
    """Evaluate the kernel at ``t``.

    For two-dimensional kernels the last axis of ``t`` holds coordinates.
    """
    t = np.asarray(t, dtype=float)
    if spec.dimension == 2 and (t.ndim == 0 or t.shape[-1] != 2):
        raise ParameterError("two-dimensional kernel needs points with a trailing axis of size 2")
    out = spec.c * _unit_shape(spec, t)
    return float(out) if np.ndim(out) == 0 else out


def _unit_l2_sq(spec: KernelSpec) -> float:
    if spec.family in _UNIT_L2_SQ:
        return _UNIT_L2_SQ[spec.family]
    grid, values = spec.table
    if spec.dimension == 1:
        # square of a linear interpolant: Simpson is exact on each cell
        mid = 0.5 * (values[1:] + values[:-1])
        return float(np.sum(np.diff(grid) * (values[1:] ** 2 + 4 * mid**2 + values[:-1] ** 2) / 6))
    h = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += h / 2
    w[1:] += h / 2
    return float(w @ (values**2) @ w)


def l2_norm(spec: KernelSpec) -> float:
    """The L2 norm of the kernel."""
    return spec.c * math.sqrt(_unit_l2_sq(spec))


def normalize_kernel_l2(spec: KernelSpec) -> KernelSpec:
    """Return ``spec`` with its amplitude chosen so that the L2 norm is one."""
    sq = _unit_l2_sq(spec)
    if not np.isfinite(sq) or sq <= 0:
        raise ParameterError("kernel is not square integrable or vanishes identically")
    return replace(spec, c=1.0 / math.sqrt(sq))


def _spherical_ft(lam):
    lam = np.abs(np.asarray(lam, dtype=float))
    out = np.empty_like(lam)
    small = lam < 0.1
    l2 = lam[small] ** 2
    out[small] = 0.75 - l2 / 24 + l2**2 / 960 - l2**3 / 67200 + l2**4 / 7257600
    lb = lam[~small]
    out[~small] = 3 * (lb**2 - 2 * lb * np.sin(lb) - 2 * np.cos(lb) + 2) / lb**4
    return out


def _tabulated_ft(spec: KernelSpec, lam):
    grid, values = spec.table
    lam = np.asarray(lam, dtype=float)
    if spec.dimension == 1:
        res = [
            integrate.quad(
                lambda t: np.interp(t, grid, values), grid[0], grid[-1],
                weight="cos", wvar=float(l), limit=400,
            )[0]
            if l != 0 else integrate.trapezoid(values, grid)
            for l in np.ravel(lam)
        ]
        return np.reshape(res, lam.shape)
    # trapezoid product rule; the imaginary part cancels for even tables
    h = np.diff(grid)
    w = np.zeros(grid.size)
    w[:-1] += h / 2
    w[1:] += h / 2
    pts = lam.reshape(-1, 2)
    res = np.empty(len(pts))
    for i, (l1, l2) in enumerate(pts):
        e1 = w * np.exp(-1j * l1 * grid)
        e2 = w * np.exp(-1j * l2 * grid)
        res[i] = np.real(e1 @ values @ e2)
    return res.reshape(lam.shape[:-1])


def kernel_fourier(spec: KernelSpec, lam):
    """Fourier transform of the kernel at ``lam`` (vectorised)."""
    lam = np.asarray(lam, dtype=float)
    fam = spec.family
    if fam == "triangular":
        half = lam / 2
        out = np.sinc(half / np.pi) ** 2
    elif fam == "spherical":
        out = _spherical_ft(lam)
    elif fam == "exponential":
        out = 2.0 / (1.0 + lam**2)
    elif fam == "gaussian2d":
        if lam.ndim == 0 or lam.shape[-1] != 2:
            raise ParameterError("gaussian2d transform needs 2-vectors")
        out = 2 * math.pi * np.exp(-0.5 * np.sum(lam * lam, axis=-1))
    else:
        out = _tabulated_ft(spec, lam)
    out = spec.c * out
    return float(out) if np.ndim(out) == 0 else out


def is_even(spec: KernelSpec, points: int = 1000, radius: float | None = None) -> bool:
    """Check ``f(t) == f(-t)`` exactly on a grid."""
    r = radius if radius is not None else (spec.support_radius if spec.compact else 20.0)
    if spec.family == "tabulated":
        grid = spec.table[0]
        r = min(r, abs(grid[0]), abs(grid[-1]))
    t = np.linspace(0.0, r, points)
    if spec.dimension == 1:
        return bool(np.array_equal(kernel_eval(spec, t), kernel_eval(spec, -t)))
    pts = np.stack([t, t[::-1]], axis=-1)
    return bool(np.array_equal(kernel_eval(spec, pts), kernel_eval(spec, -pts)))
