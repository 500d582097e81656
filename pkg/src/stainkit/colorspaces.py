"""Pixel-wise conversions between 8-bit RGB and the working color spaces.

Images are ``numpy`` arrays of shape ``(H, W, 3)``. Forward conversions accept
any integer or float RGB array in ``[0, 255]``; inverse conversions return
real-valued planes unless ``quantize`` is set, in which case they round half
to even and clip to ``uint8``.
"""

from __future__ import annotations

import numpy as np

from .errors import ParameterError

DEFAULT_EPSILON = 1.0 / 255.0
OD_EPSILON = 1e-6

# Reinhard et al. RGB -> LMS, rows rescaled to sum to one so that gray pixels
# land exactly on the achromatic axis.
_RGB2LMS_RAW = np.array(
    [
        [0.3811, 0.5783, 0.0402],
        [0.1967, 0.7244, 0.0782],
        [0.0241, 0.1288, 0.8444],
    ]
)
RGB2LMS = _RGB2LMS_RAW / _RGB2LMS_RAW.sum(axis=1, keepdims=True)
LMS2RGB = np.linalg.inv(RGB2LMS)

_LOGLMS2LAB = np.diag([1 / np.sqrt(3), 1 / np.sqrt(6), 1 / np.sqrt(2)]) @ np.array(
    [[1.0, 1.0, 1.0], [1.0, 1.0, -2.0], [1.0, -1.0, 0.0]]
)
_LAB2LOGLMS = np.linalg.inv(_LOGLMS2LAB)

LOG_CHROMA_PLANES = ("uR", "vR", "uG", "vG", "uB", "vB")


def as_rgb(img) -> np.ndarray:
    """Validate an RGB image and return it as a float64 array of shape (H, W, 3)."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ParameterError(f"expected an (H, W, 3) RGB image, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ParameterError("image must have at least one pixel")
    return arr.astype(np.float64, copy=False)


def quantize(planes: np.ndarray) -> np.ndarray:
    """Round half to even and clip to the 8-bit range."""
    return np.clip(np.rint(planes), 0, 255).astype(np.uint8)


def rgb_to_log_chroma(img, epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Project RGB onto the six log-chroma planes.

    Intensities are scaled to ``[0, 1]`` first; each channel is then taken
    relative to the other two, ``u_K = log((K + eps) / (K' + eps))`` and
    ``v_K = log((K + eps) / (K'' + eps))`` with ``(K', K'')`` being
    ``(G, B)``, ``(R, B)`` and ``(R, G)`` for ``K = R, G, B``.

    Args:
        img: RGB image, shape (H, W, 3), values in [0, 255].
        epsilon: Stabiliser added to the normalized intensities.

    Returns:
        Array of shape (H, W, 6) ordered as ``LOG_CHROMA_PLANES``.
    """
    if not epsilon > 0:
        raise ParameterError(f"epsilon must be positive, got {epsilon}")
    rgb = as_rgb(img)
    logs = np.log(rgb / 255.0 + epsilon)
    r, g, b = logs[..., 0], logs[..., 1], logs[..., 2]
    # Differences of shared logs keep reciprocal planes exact negatives.
    return np.stack([r - g, r - b, g - r, g - b, b - r, b - g], axis=-1)


def rgb_to_lalphabeta(img) -> np.ndarray:
    """RGB to Reinhard's l-alpha-beta space (planes l, alpha, beta).

    A +1 offset on the 8-bit values keeps the log stage finite for black pixels.
    """
    rgb = as_rgb(img) + 1.0
    lms = rgb @ RGB2LMS.T
    return np.log10(lms) @ _LOGLMS2LAB.T


def lalphabeta_to_rgb(lab, quantize_output: bool = True) -> np.ndarray:
    """Inverse of :func:`rgb_to_lalphabeta`."""
    lab = np.asarray(lab, dtype=np.float64)
    lms = 10.0 ** (lab @ _LAB2LOGLMS.T)
    rgb = lms @ LMS2RGB.T - 1.0
    return quantize(rgb) if quantize_output else rgb


def rgb_to_od(img, i0: float = 255.0) -> np.ndarray:
    """Optical density ``-log10(I / i0)`` per channel.

    Zero intensities get ``OD_EPSILON`` added inside the log so that the
    result stays finite while ``OD(i0) == 0`` exactly.
    """
    if not i0 > 0:
        raise ParameterError(f"i0 must be positive, got {i0}")
    rgb = as_rgb(img)
    safe = np.where(rgb == 0, OD_EPSILON, rgb)
    return -np.log10(safe / i0)


def od_to_rgb(od, i0: float = 255.0, quantize_output: bool = True) -> np.ndarray:
    """Inverse of :func:`rgb_to_od`, clamped to the valid intensity range."""
    if not i0 > 0:
        raise ParameterError(f"i0 must be positive, got {i0}")
    rgb = i0 * 10.0 ** (-np.asarray(od, dtype=np.float64))
    return quantize(rgb) if quantize_output else np.clip(rgb, 0, 255)
