"""Report figures, rendered off-screen to PNG files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_META = {"Software": None}


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=100, metadata=_META)
    plt.close(fig)
    return path


def index_staircase(ts, values, path, title: str = "", breakpoints=()) -> Path:
    """i(Q_t) along a quadratic family."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.step(ts, values, where="post", color="C0")
    for b in breakpoints:
        ax.axvline(b, color="0.8", lw=0.8, zorder=0)
    ax.set_xlabel("t")
    ax.set_ylabel("i(Q_t)")
    ax.set_title(title)
    return _save(fig, path)


def translated_points_plot(etas, residuals, nondegenerate, path, title: str = "") -> Path:
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.5))
    etas = np.asarray(etas, dtype=float)
    nd = np.asarray(nondegenerate, dtype=bool)
    idx = np.arange(len(etas))
    a1.scatter(idx[nd], etas[nd], label="nondegenerate", color="C0")
    a1.scatter(idx[~nd], etas[~nd], label="degenerate", color="C3", marker="x")
    a1.set_xlabel("point")
    a1.set_ylabel("eta")
    a1.legend(fontsize=8)
    res = np.maximum(np.asarray(residuals, dtype=float), 1e-18)
    a2.semilogy(idx, res, "o", color="C2")
    a2.set_xlabel("point")
    a2.set_ylabel("residual")
    fig.suptitle(title)
    return _save(fig, path)


def crossings_plot(T, times, lower, upper, path, title: str = "") -> Path:
    """Cumulative interval bounds on mu across the crossing times."""
    fig, ax = plt.subplots(figsize=(6, 3.5))
    xs = [0.0] + list(times) + [T]
    lo = list(lower) + [lower[-1]]
    hi = list(upper) + [upper[-1]]
    ax.step(xs, lo, where="post", label="lower bound", color="C0")
    ax.step(xs, hi, where="post", label="upper bound", color="C1")
    for t in times:
        ax.axvline(t, color="0.7", ls="--", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("mu bound")
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)


def bars(labels, values, path, ylabel: str = "", title: str = "", reference=None) -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.bar(range(len(values)), values, color="C0")
    ax.set_xticks(range(len(values)))
    ax.set_xticklabels([str(s) for s in labels], rotation=30, ha="right", fontsize=8)
    if reference is not None:
        ax.axhline(reference, color="C3", ls="--", lw=1)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    return _save(fig, path)


def defect_histogram(defects, bound, path, title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(6, 3.5))
    d = np.asarray(defects, dtype=int)
    ax.hist(d, bins=np.arange(-0.5, max(int(d.max()) if d.size else 0, bound) + 1.5), color="C0", rwidth=0.9)
    ax.axvline(bound, color="C3", ls="--", label=f"bound {bound}")
    ax.set_xlabel("|mu(xy) - mu(x) - mu(y)|")
    ax.set_ylabel("pairs")
    ax.legend(fontsize=8)
    ax.set_title(title)
    return _save(fig, path)


def acceptance_plot(rows, path) -> Path:
    fig, ax = plt.subplots(figsize=(7, 3.5))
    ids = [r["id"] for r in rows]
    secs = [r["seconds"] for r in rows]
    colors = ["C2" if r["passed"] else "C3" for r in rows]
    ax.bar(range(len(rows)), secs, color=colors)
    ax.set_xticks(range(len(rows)))
    ax.set_xticklabels([str(i) for i in ids])
    ax.set_xlabel("criterion")
    ax.set_ylabel("seconds")
    ax.set_title("acceptance suite (green = pass)")
    return _save(fig, path)
