"""PNG figures written next to the CSV/JSON reports (headless Agg backend)."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .metrics import empirical_cdf, histogram  # noqa: E402

# fixed metadata keeps PNG bytes identical between runs
_PNG_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    fig.savefig(path, dpi=100, metadata=_PNG_META)
    plt.close(fig)
    return path


def plot_error_distributions(summary, out_dir, unit_scale: float = 100.0, unit: str = "cm") -> dict:
    """Histogram and cumulative plots of per-sample E_max and E_aver."""
    out_dir = Path(out_dir)
    paths = {}
    for name, values in (("e_max", summary.e_max), ("e_aver", summary.e_aver)):
        vals = np.asarray(values) * unit_scale
        counts, edges = histogram(vals)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.bar(edges[:-1], counts, width=np.diff(edges), align="edge", edgecolor="k", linewidth=0.3)
        ax.set_xlabel(f"{name} ({unit})")
        ax.set_ylabel("samples")
        fig.tight_layout()
        paths[f"hist_{name}"] = _save(fig, out_dir / f"hist_{name}.png")

        x, F = empirical_cdf(vals)
        fig, ax = plt.subplots(figsize=(5, 3.5))
        ax.step(x, 100 * F, where="post")
        ax.set_xlabel(f"{name} ({unit})")
        ax.set_ylabel("samples below (%)")
        ax.set_ylim(0, 100)
        fig.tight_layout()
        paths[f"cdf_{name}"] = _save(fig, out_dir / f"cdf_{name}.png")
    return paths


def plot_training_curve(history, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    epochs = np.arange(1, len(history.train_loss) + 1)
    ax.semilogy(epochs, history.train_loss, lw=0.8, label="train loss")
    ax.set_xlabel("epoch")
    ax.set_ylabel("summed coefficient loss")
    if history.val_e_aver:
        ax2 = ax.twinx()
        ax2.plot(history.val_epochs, history.val_e_aver, "o-", ms=3, color="C1", label="val E_aver")
        ax2.set_ylabel("validation E_aver")
    fig.tight_layout()
    return _save(fig, path)


def plot_contours(front, side, path) -> Path:
    """Front and side contour samples with the start point marked."""
    fig, axes = plt.subplots(1, 2, figsize=(6, 5))
    for ax, c in zip(axes, (front, side)):
        p = c.interior
        ax.plot(p[:, 0], p[:, 1], lw=0.8)
        ax.plot(p[0, 0], p[0, 1], "ro", ms=4)
        ax.set_aspect("equal")
        ax.set_title(c.view)
    fig.tight_layout()
    return _save(fig, path)


def plot_sweep(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.5))
    M = [r["M"] for r in rows]
    ax.plot(M, [r["param_count"] / 1e6 for r in rows], "o-")
    ax.set_xlabel("contour points M")
    ax.set_ylabel("parameters (millions)")
    errs = [r.get("e_aver_cm") for r in rows]
    if all(e is not None for e in errs):
        ax2 = ax.twinx()
        ax2.plot(M, errs, "s--", color="C1")
        ax2.set_ylabel("mean E_aver (cm)")
    fig.tight_layout()
    return _save(fig, path)
