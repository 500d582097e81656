"""Reinhard color transfer: match per-channel mean and std in l-alpha-beta."""

from __future__ import annotations

import numpy as np

from ..colorspaces import lalphabeta_to_rgb, rgb_to_lalphabeta


def reinhard_lab(source, target) -> np.ndarray:
    """Transferred l-alpha-beta planes before conversion back to RGB.

    A source channel with zero spread maps every pixel to the target mean.
    """
    lab_s = rgb_to_lalphabeta(source)
    lab_t = rgb_to_lalphabeta(target)
    mu_s = lab_s.mean(axis=(0, 1))
    mu_t = lab_t.mean(axis=(0, 1))
    sd_s = lab_s.std(axis=(0, 1))
    sd_t = lab_t.std(axis=(0, 1))
    out = np.empty_like(lab_s)
    for c in range(3):
        # a constant plane can still report a std of a few ulps, so test the range
        if np.ptp(lab_s[..., c]) > 0:
            out[..., c] = (lab_s[..., c] - mu_s[c]) * (sd_t[c] / sd_s[c]) + mu_t[c]
        else:
            out[..., c] = mu_t[c]
    return out


def reinhard_transfer(source, target) -> np.ndarray:
    """Recolor ``source`` to the l-alpha-beta statistics of ``target``."""
    return lalphabeta_to_rgb(reinhard_lab(source, target))
