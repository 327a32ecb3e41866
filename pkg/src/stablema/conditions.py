"""Numerical audit of the filter, frequency-cutoff and kernel conditions.

Asymptotic conditions cannot be proven from finitely many ``n``; each one is
turned into a ratio that must tend to zero and judged on the tail of the
user's ``n_range``: strictly decreasing is ``pass``, nondecreasing is
``fail``, anything else ``indeterminate``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConfigError
from .kernels import KernelSpec, kernel_eval, kernel_fourier, l2_norm
from .spectral import SmoothingFilter, make_filter

PASS, FAIL, INDETERMINATE = "pass", "fail", "indeterminate"


@dataclass
class ScheduleSpec:
    """``delta_n = n**-delta_exponent``, ``m_n = floor(n**m_exponent)``.

    ``a_rule`` is ``"log"`` (``a_n = log n``), ``"const:<value>"`` or a
    sequence of explicit values aligned with ``n_range``.  ``b_exponent``
    enables the alpha-norm conditions with ``b_n = n**b_exponent``.
    """

    delta_exponent: float = 0.5
    m_exponent: float = 0.25
    a_rule: object = "log"
    n_range: list = field(default_factory=lambda: [10**k for k in range(2, 7)])
    filter_kind: str = "uniform"
    b_exponent: float | None = None
    strict: bool = True

    def __post_init__(self):
        if self.strict:
            if not 0 < self.delta_exponent < 1:
                raise ConfigError("delta exponent must lie in (0, 1)")
            if not 0 < self.m_exponent < 1 - self.delta_exponent:
                raise ConfigError("m exponent must lie in (0, 1 - delta exponent)")
        if len(self.n_range) < 3:
            raise ConfigError("n_range needs at least three values")

    def deltas(self):
        return np.array([n ** -self.delta_exponent for n in self.n_range], dtype=float)

    def half_widths(self):
        return [max(1, int(math.floor(n**self.m_exponent + 1e-9))) for n in self.n_range]

    def cutoffs(self):
        rule = self.a_rule
        if isinstance(rule, str):
            if rule == "log":
                return np.log(np.asarray(self.n_range, dtype=float))
            if rule.startswith("const:"):
                return np.full(len(self.n_range), float(rule.split(":", 1)[1]))
            raise ConfigError(f"unknown a_rule {rule!r}")
        vals = np.asarray(rule, dtype=float)
        if vals.shape != (len(self.n_range),):
            raise ConfigError("explicit a_n table must match n_range")
        return vals

    def filters(self) -> list[SmoothingFilter]:
        return [make_filter(self.filter_kind, m) for m in self.half_widths()]


@dataclass
class ConditionVerdict:
    id: str
    description: str
    ratios: list
    verdict: str


@dataclass
class ConditionReport:
    verdicts: list

    def __getitem__(self, cid) -> ConditionVerdict:
        for v in self.verdicts:
            if v.id == cid:
                return v
        raise KeyError(cid)

    @property
    def ids(self):
        return [v.id for v in self.verdicts]

    def all_pass(self, ids=None) -> bool:
        chosen = self.verdicts if ids is None else [self[i] for i in ids]
        return all(v.verdict == PASS for v in chosen)

    def table(self) -> str:
        lines = [f"{'condition':<10} {'verdict':<14} tail ratios"]
        for v in self.verdicts:
            tail = ", ".join(f"{r:.3g}" for r in v.ratios[-3:])
            lines.append(f"{v.id:<10} {v.verdict:<14} {tail}   # {v.description}")
        return "\n".join(lines)


def modulus_of_continuity(spec: KernelSpec, delta: float, window: float = 20.0) -> float:
    """``sup |f(t) - f(s)|`` over ``|t - s| <= delta`` on a grid of step ``delta/64``.

    The grid covers the support extended by ``delta`` (or ``[-window, window]``
    for unbounded kernels).  Two-dimensional kernels are probed along the
    first axis, which is exact for radial kernels.
    """
    if delta <= 0:
        return 0.0
    radius = spec.support_radius if spec.compact else window
    h = delta / 64
    if spec.family == "tabulated":
        grid = spec.table[0]
        lo, hi = grid[0], grid[-1]
    else:
        lo, hi = -radius - delta, radius + delta
    x = np.arange(lo, hi + h / 2, h)
    if spec.dimension == 2:
        vals = kernel_eval(spec, np.stack([x, np.zeros_like(x)], axis=-1))
    else:
        vals = kernel_eval(spec, x)
    best = 0.0
    for k in range(1, 65):
        if k >= vals.size:
            break
        best = max(best, float(np.max(np.abs(vals[k:] - vals[:-k]))))
    return best


# a decreasing tail must still be falling at least this fast in log-log scale
# to count as heading to zero (1/log n falls at -1/log n, about -0.07 at 1e6)
MIN_LOG_SLOPE = -0.02


def trend_verdict(ratios, n=None) -> str:
    """``pass`` if the tail decreases strictly towards 0, ``fail`` if it never decreases."""
    r = np.asarray(ratios, dtype=float)
    k = max(3, r.size // 2)
    tail = r[-k:]
    d = np.diff(tail)
    if not np.all(np.isfinite(tail)):
        return INDETERMINATE
    if np.all(d >= 0):
        return FAIL
    if not np.all(d < 0):
        return INDETERMINATE
    if tail[-1] <= 0:
        return PASS
    nn = np.arange(1.0, r.size + 1) if n is None else np.asarray(n, dtype=float)
    nn = nn[-k:]
    slope = (math.log(tail[-1]) - math.log(tail[-2])) / (math.log(nn[-1]) - math.log(nn[-2]))
    return PASS if slope < MIN_LOG_SLOPE else INDETERMINATE


def _decay_ratio(spec: KernelSpec, a: float, window: float = 50.0) -> list:
    """``|f(t)| * |t|**a`` on an increasing window; bounded tails pass."""
    ts = np.geomspace(1.0, window, 12)
    pts = ts if spec.dimension == 1 else np.stack([ts, np.zeros_like(ts)], axis=-1)
    return list(np.abs(kernel_eval(spec, pts)) * ts**a)


def _ghat_tail(spec: KernelSpec, a_n: float, cutoff: float = 1e3) -> float:
    """Integral of ghat**2 over a_n < |lam| < cutoff (1D kernels)."""
    norm = l2_norm(spec)
    if a_n >= cutoff:
        return 0.0
    val = integrate.quad(lambda l: (kernel_fourier(spec, l) / norm) ** 2, a_n, cutoff, limit=500)[0]
    return 2 * val


def check_schedule(
    schedule: ScheduleSpec, kernel: KernelSpec, alpha: float, a_decay: float | None = None
) -> ConditionReport:
    """Evaluate every applicable condition along ``schedule.n_range``."""
    n = np.asarray(schedule.n_range, dtype=float)
    d = kernel.dimension
    dn = schedule.deltas()
    an = schedule.cutoffs()
    filters = schedule.filters()
    horizon = n * dn
    if d == 1:
        w_star = np.array([f.w_star for f in filters])
        w2 = np.array([f.w2 for f in filters])
    else:
        # product-form weights over {-m..m}**2
        w_star = np.array([f.w_star**2 for f in filters])
        w2 = np.array([2 * f.w2 for f in filters])
    omega = np.array([modulus_of_continuity(kernel, x) for x in dn])
    out = []

    def add(cid, desc, ratios, verdict=None):
        ratios = [float(r) for r in ratios]
        out.append(ConditionVerdict(cid, desc, ratios, verdict or trend_verdict(ratios, n)))

    neg = [float(np.min(f.weights)) for f in filters]
    add("W1", "weights nonnegative", neg, PASS if min(neg) >= 0 else FAIL)
    sums = [abs(float(np.sum(f.weights)) - 1.0) for f in filters]
    add("W2", "weights sum to one", sums, PASS if max(sums) <= 1e-12 else FAIL)
    add("W3", "max weight -> 0", w_star)
    add("W4", "W2_n / (n delta)^2 -> 0", w2 / horizon**2)

    add("A1", "1 / a_n -> 0", 1.0 / an)
    add("A2", "a_n^(2d) W*_n -> 0", an ** (2 * d) * w_star)
    add("A3", "a_n^(3d/4) / (n delta)^(1/alpha) -> 0", an ** (3 * d / 4) / horizon ** (1 / alpha))
    add("A4", "a_n^(d+1) delta_n -> 0" if d > 1 else "a_n^2 delta_n -> 0", an ** (d + 1) * dn)
    add("A5", "a_n^(2d) W2_n / (n delta)^2 -> 0", an ** (2 * d) * w2 / horizon**2)

    if kernel.compact:
        add("F2", "a_n^d omega_f(delta_n) -> 0", an**d * omega)
    else:
        if a_decay is None:
            raise ConfigError("unbounded kernels need the decay exponent a")
        if a_decay <= max(d + 1 if d > 1 else 2, d / alpha):
            raise ConfigError("decay exponent a is too small for these conditions")
        expo = (1 / d - 1 / a_decay) if d > 1 else (1 - 1 / a_decay)
        add("F2'", "a_n^d omega^(1-1/a) -> 0", an**d * omega**expo)
        decay = _decay_ratio(kernel, a_decay)
        bounded = np.all(np.diff(decay[-4:]) <= 1e-12 * max(decay)) or max(decay) < 1e-12
        add("F3'", f"|f(t)| |t|^{a_decay} bounded on [1, 50]", decay, PASS if bounded else INDETERMINATE)
        add(
            "F4'",
            "a_n^(3d/4) / (omega^(1/(a alpha)) (n delta)^(1/alpha)) -> 0",
            an ** (3 * d / 4) / (omega ** (1 / (a_decay * alpha)) * horizon ** (1 / alpha)),
        )

    if schedule.b_exponent is not None and d == 1:
        bn = n**schedule.b_exponent
        k = bn ** (2 / alpha - 1)
        add("B1", "1 / b_n -> 0", 1.0 / bn)
        add("B2", "b^(2/alpha-1) a^2 W* -> 0", k * an**2 * w_star)
        add("B3", "b^(2/alpha-1) a / (n delta)^(1/alpha) -> 0", k * an / horizon ** (1 / alpha))
        add("B4", "b^(2/alpha-1) a^4 delta^2 -> 0", k * an**4 * dn**2)
        add("B5", "b^(2/alpha-1) a^2 W2 / (n delta)^2 -> 0", k * an**2 * w2 / horizon**2)
        a_exp = a_decay if a_decay is not None else math.inf
        add("B6", "b^(2/alpha-1) a^2 omega^(2-2/a) -> 0", k * an**2 * omega ** (2 - 2 / a_exp))
        tails = np.array([_ghat_tail(kernel, a) for a in an])
        add("B7", "b^(2/alpha-1) int_{|lam|>a_n} ghat^2 -> 0", k * tails)

    return ConditionReport(out)
