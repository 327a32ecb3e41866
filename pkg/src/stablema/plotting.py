"""Optional figures written next to the CSV outputs (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def plot_report(report, path, title=None) -> Path:
    """True kernel, center curve and the pointwise envelope band."""
    fig, ax = plt.subplots(figsize=(6, 4))
    t = report.t_grid
    if report.env_lo is not None:
        ax.fill_between(t, report.env_lo, report.env_hi, color="tab:blue", alpha=0.2, label="envelope")
    ax.plot(t, report.center, color="tab:blue", label=report.meta.get("aggregation", "center"))
    ax.plot(t, report.f_true, "k--", lw=1, label="true")
    ax.set_xlabel("t")
    ax.legend(loc="upper right", frameon=False)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_estimate(t, values, path, truth=None, label="estimate") -> Path:
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(t, values, label=label)
    if truth is not None:
        ax.plot(t, truth, "k--", lw=1, label="true")
    ax.set_xlabel("t")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def plot_field(values, path, extent=None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 4.5))
    im = ax.imshow(values.T, origin="lower", extent=extent, cmap="viridis")
    fig.colorbar(im, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)
