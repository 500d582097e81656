"""Scoring a recolored image with the color-matching and detail-reconstruction terms.

The realism (discriminator) term needs a trained network and is left out;
``QualityReport.note`` says so in every serialized report.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from scipy import ndimage

from .colorspaces import as_rgb
from .errors import ParameterError
from .histogram import ColorHistogram, compute_histogram, hellinger_distance, kl_divergence

ALPHA = 32.0
BETA = 1.5
LAPLACIAN = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
NOTE = "discriminator realism term omitted"


@dataclass
class QualityReport:
    l_color: float
    l_reconstruction: float
    hellinger_to_target: float
    kl_to_target: float
    alpha: float = ALPHA
    beta: float = BETA
    note: str = NOTE

    @property
    def combined(self) -> float:
        return self.alpha * self.l_color + self.beta * self.l_reconstruction

    def to_dict(self) -> dict:
        d = asdict(self)
        return {
            "l_color": d["l_color"],
            "l_reconstruction": d["l_reconstruction"],
            "alpha": d["alpha"],
            "beta": d["beta"],
            "combined": self.combined,
            "hellinger_to_target": d["hellinger_to_target"],
            "kl_to_target": d["kl_to_target"],
            "note": d["note"],
        }


def laplacian_detail(img) -> np.ndarray:
    """Per-channel 4-neighbour Laplacian with replicated borders, shape (H, W, 3)."""
    rgb = as_rgb(img)
    out = np.empty_like(rgb)
    for c in range(3):
        out[..., c] = ndimage.correlate(rgb[..., c], LAPLACIAN, mode="nearest")
    return out


def _histogram_like(img, like: ColorHistogram) -> ColorHistogram:
    return compute_histogram(img, n=like.n, range=like.range, epsilon=like.epsilon, weighted=like.weighted)


def color_matching_loss(recolored, target_hist: ColorHistogram) -> float:
    """Hellinger distance between the recolored image's histogram and ``target_hist``.

    The recolored histogram is built with the target histogram's parameters.
    """
    return hellinger_distance(_histogram_like(recolored, target_hist), target_hist)


def reconstruction_loss(source, recolored) -> float:
    """Mean absolute difference of the Laplacian detail maps."""
    a, b = as_rgb(source), as_rgb(recolored)
    if a.shape != b.shape:
        raise ParameterError(f"image sizes differ: {a.shape} vs {b.shape}")
    return float(np.mean(np.abs(laplacian_detail(a) - laplacian_detail(b))))


def quality_report(source, recolored, target, **hist_options) -> QualityReport:
    """Score ``recolored`` against the colors of ``target`` and the detail of ``source``.

    ``hist_options`` are passed to :func:`compute_histogram`.
    """
    h_target = compute_histogram(target, **hist_options)
    h_recolored = compute_histogram(recolored, **hist_options)
    h = hellinger_distance(h_recolored, h_target)
    return QualityReport(
        l_color=h,
        l_reconstruction=reconstruction_loss(source, recolored),
        hellinger_to_target=h,
        kl_to_target=kl_divergence(h_recolored, h_target),
    )
