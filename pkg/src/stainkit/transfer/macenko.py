"""Macenko stain estimation and normalization."""

from __future__ import annotations

import numpy as np

from ..colorspaces import od_to_rgb
from ..errors import DegenerateRank
from ._stains import (
    align_columns,
    od_pixels,
    recompose,
    rescale_concentrations,
    tissue_pixels,
    unit_nonnegative,
)

# Second singular value below this fraction of the first counts as rank 1.
RANK_TOLERANCE = 0.02


def macenko_estimate_stains(img, beta_od: float = 0.15, alpha_pct: float = 1.0) -> np.ndarray:
    """Estimate two stain vectors from the angular extremes of tissue OD.

    Tissue pixels (OD magnitude above ``beta_od``) are projected onto the
    plane of their two leading right singular vectors. The ``alpha_pct`` and
    ``100 - alpha_pct`` percentiles of the projected angles give the two
    stain directions.

    Returns:
        3 x 2 stain matrix, unit non-negative columns ordered by angle.

    Raises:
        LowSignal: fewer than 100 tissue pixels.
        DegenerateRank: tissue OD is essentially one-dimensional.
    """
    od = tissue_pixels(od_pixels(img), beta_od)
    _, sv, vt = np.linalg.svd(od, full_matrices=False)
    if sv[1] < RANK_TOLERANCE * sv[0]:
        raise DegenerateRank(
            f"OD singular values {sv[0]:.4g}, {sv[1]:.4g}: fewer than two stain directions"
        )
    plane = vt[:2].T.copy()
    if plane[:, 0].sum() < 0:
        plane[:, 0] = -plane[:, 0]
    if plane[np.argmax(np.abs(plane[:, 1])), 1] < 0:
        plane[:, 1] = -plane[:, 1]

    proj = od @ plane
    phi = np.arctan2(proj[:, 1], proj[:, 0])
    lo = np.percentile(phi, alpha_pct)
    hi = np.percentile(phi, 100.0 - alpha_pct)
    v_lo = plane @ np.array([np.cos(lo), np.sin(lo)])
    v_hi = plane @ np.array([np.cos(hi), np.sin(hi)])
    return unit_nonnegative(np.stack([v_lo, v_hi], axis=1))


def concentrations(img, stains: np.ndarray) -> np.ndarray:
    """Least-squares stain concentrations (k, N), clamped at zero."""
    od = od_pixels(img)
    return np.clip(np.linalg.pinv(stains) @ od.T, 0.0, None)


def macenko_normalize(
    source,
    target,
    beta_od: float = 0.15,
    alpha_pct: float = 1.0,
    preserve_residual: bool = True,
) -> np.ndarray:
    """Recolor ``source`` with the stains and concentration scale of ``target``.

    Source concentrations are rescaled channel-wise so their 99th percentile
    matches the target's, then recomposed with the target stain vectors.
    Set ``preserve_residual=False`` for the textbook recomposition that drops
    OD outside the stain model.
    """
    src = np.asarray(source)
    stains_s = macenko_estimate_stains(src, beta_od, alpha_pct)
    stains_t = align_columns(macenko_estimate_stains(target, beta_od, alpha_pct), stains_s)
    conc_s = concentrations(src, stains_s)
    conc_t = concentrations(target, stains_t)
    conc = rescale_concentrations(conc_s, conc_t)
    od = recompose(od_pixels(src), stains_s, conc_s, stains_t, conc, preserve_residual)
    return od_to_rgb(od.reshape(src.shape[0], src.shape[1], 3))
