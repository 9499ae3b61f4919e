"""Figures written next to the CSV/text reports."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed metadata keeps PNG output byte-stable across runs
_PNG_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata=_PNG_META)
    plt.close(fig)


def plot_convergence(points, path, alpha=None, analytic=None, title=None):
    """Mean test adversarial risk (±1 std) against training-set size, log-x."""
    sizes = np.array([p.train_size for p in points])
    mean = np.array([p.mean_test_adv_risk for p in points])
    std = np.array([p.std_test_adv_risk for p in points])
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.errorbar(sizes, mean, yerr=std, marker="o", capsize=3, label="half-space estimate")
    if analytic is not None:
        ax.axhline(analytic, color="k", ls="--", lw=1, label=f"analytic {analytic:.4f}")
    if alpha is not None:
        ax.axhline(alpha, color="0.5", ls=":", lw=1, label=f"alpha = {alpha:g}")
    ax.set_xscale("log")
    ax.set_xlabel("training samples")
    ax.set_ylabel("test adversarial risk")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)


def plot_margins(test_margins, shift, path, title=None):
    """Histogram of normalized test margins (wᵀx + b) / ‖w‖_q with the set and expansion edges."""
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    ax.hist(test_margins, bins=80, color="0.6")
    ax.axvline(0.0, color="C3", lw=1, label="half space boundary")
    ax.axvline(shift, color="C0", lw=1, ls="--", label="expanded boundary")
    ax.set_xlabel("l_p distance to the boundary (signed)")
    ax.set_ylabel("test samples")
    if title:
        ax.set_title(title)
    ax.legend(frameon=False, fontsize=8)
    _save(fig, path)
