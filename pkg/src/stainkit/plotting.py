"""Matplotlib figures written next to the CSV reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .errors import IoFailure  # noqa: E402

COLORS = ("#1b6ca8", "#c0392b", "#27ae60")

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "savefig.dpi": 150,
}


def _save(fig, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        # fixed metadata keeps PNG output byte-stable across runs
        fig.savefig(path, metadata={"Software": None}, bbox_inches="tight")
    except OSError as exc:
        raise IoFailure(f"cannot write figure {path}: {exc}") from exc
    finally:
        plt.close(fig)


def plot_series(rows, path) -> None:
    """Histogram distance to the base against darkening factor (two y axes)."""
    factors = [r["factor"] for r in rows]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        ax.plot(factors, [r["h_dist"] for r in rows], "o-", color=COLORS[0], label="Hellinger")
        ax.set_xlabel("OD darkening factor")
        ax.set_ylabel("Hellinger distance", color=COLORS[0])
        ax2 = ax.twinx()
        ax2.plot(factors, [r["kl_div"] for r in rows], "s--", color=COLORS[1], label="KL")
        ax2.set_ylabel("KL divergence", color=COLORS[1])
        ax.set_title("Color distance to base image")
        _save(fig, path)


def plot_study(rows, path) -> None:
    """F1 / AJI / Dice of each recolored set against its Hellinger distance."""
    rows = [r for r in rows if isinstance(r.get("h_dist"), (int, float))]
    h = [r["h_dist"] for r in rows]
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.0, 3.0))
        for color, (key, name) in zip(COLORS, (("f1", "F1"), ("aji", "AJI"), ("dice", "Dice"))):
            if all(r.get(key) not in (None, "") for r in rows):
                ax.plot(h, [r[key] for r in rows], "o-", color=color, label=name)
        ax.set_xlabel("Hellinger distance to base")
        ax.set_ylabel("score")
        ax.set_ylim(0, 1.05)
        ax.legend(frameon=False)
        _save(fig, path)
