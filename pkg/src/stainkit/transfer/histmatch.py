"""Per-channel histogram matching, classical (CDF) and exact (strict ordering)."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..colorspaces import as_rgb

LEVELS = 256


def _channel_counts(channel: np.ndarray) -> np.ndarray:
    return np.bincount(channel.ravel(), minlength=LEVELS).astype(np.int64)


def cdf_lookup(source_counts: np.ndarray, target_counts: np.ndarray) -> np.ndarray:
    """Level map sending each source level to the first target level whose
    CDF reaches the source CDF. Comparisons are done on exact integers."""
    ns, nt = source_counts.sum(), target_counts.sum()
    cs = np.cumsum(source_counts) * nt
    ct = np.cumsum(target_counts) * ns
    return np.searchsorted(ct, cs, side="left").clip(0, LEVELS - 1).astype(np.uint8)


def resample_counts(counts: np.ndarray, total: int) -> np.ndarray:
    """Rescale a histogram to ``total`` pixels by largest remainder rounding.

    Each bin ends up at the floor or ceiling of its proportional share.
    """
    counts = np.asarray(counts, dtype=np.int64)
    n = counts.sum()
    if n == total:
        return counts.copy()
    exact = counts * total
    base = exact // n
    remainder = exact - base * n
    short = total - base.sum()
    # stable: larger remainder first, lower level on ties
    order = np.lexsort((np.arange(len(counts)), -remainder))
    base[order[:short]] += 1
    return base


def strict_order(channel: np.ndarray) -> np.ndarray:
    """Raster indices sorted by (value, 3x3 mean, 5x5 mean, raster index)."""
    ch = channel.astype(np.int64)
    # integer window sums preserve the mean ordering exactly
    s3 = ndimage.correlate(ch, np.ones((3, 3), dtype=np.int64), mode="nearest")
    s5 = ndimage.correlate(ch, np.ones((5, 5), dtype=np.int64), mode="nearest")
    raster = np.arange(ch.size)
    return np.lexsort((raster, s5.ravel(), s3.ravel(), ch.ravel()))


def histogram_match(source, target, exact: bool = False) -> np.ndarray:
    """Match each RGB channel of ``source`` to the histogram of ``target``.

    In exact mode pixels are strictly ordered and assigned target levels in
    consecutive blocks, so the output histogram equals the target histogram
    (resampled to the source pixel count when sizes differ).
    """
    src = np.rint(as_rgb(source)).astype(np.uint8)
    tgt = np.rint(as_rgb(target)).astype(np.uint8)
    out = np.empty_like(src)
    for c in range(3):
        s_ch, t_ch = src[..., c], tgt[..., c]
        t_counts = _channel_counts(t_ch)
        if not exact:
            lut = cdf_lookup(_channel_counts(s_ch), t_counts)
            out[..., c] = lut[s_ch]
            continue
        wanted = resample_counts(t_counts, s_ch.size)
        levels = np.repeat(np.arange(LEVELS, dtype=np.uint8), wanted)
        flat = np.empty(s_ch.size, dtype=np.uint8)
        flat[strict_order(s_ch)] = levels
        out[..., c] = flat.reshape(s_ch.shape)
    return out
