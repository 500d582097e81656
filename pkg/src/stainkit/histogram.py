"""Log-chroma color histograms and histogram distances."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .colorspaces import DEFAULT_EPSILON, as_rgb, rgb_to_log_chroma
from .errors import EmptyHistogram, IoFailure, ParameterError, UnsupportedFormat

DEFAULT_BINS = 64
DEFAULT_RANGE = 3.0
DEFAULT_SMOOTHING = 1e-8

_MAGIC = b"LCH1"
_HEADER = struct.Struct("<4sIdd?")


@dataclass(eq=False)
class ColorHistogram:
    """Normalized ``n x n x 3`` log-chroma histogram.

    ``bins[i, j, k]`` holds the mass of pixels whose ``(u, v)`` pair for
    channel group ``k`` (R, G, B) falls in u-bin ``i`` and v-bin ``j``.
    """

    bins: np.ndarray
    n: int = DEFAULT_BINS
    range: float = DEFAULT_RANGE
    epsilon: float = DEFAULT_EPSILON
    weighted: bool = True
    meta: dict = field(default_factory=dict, repr=False)

    @property
    def mass(self) -> float:
        return float(self.bins.sum())

    def params(self) -> dict:
        return {"n": self.n, "range": self.range, "epsilon": self.epsilon, "weighted": self.weighted}

    def __eq__(self, other) -> bool:
        if not isinstance(other, ColorHistogram):
            return NotImplemented
        return self.params() == other.params() and np.array_equal(self.bins, other.bins)


def bin_index(values: np.ndarray, n: int, value_range: float) -> np.ndarray:
    """Map values to bin indices of ``n`` equal bins over ``[-range, range]``.

    Values outside the range land in the edge bins; 0 falls in bin ``n // 2``.
    """
    scaled = (np.asarray(values) + value_range) * (n / (2.0 * value_range))
    return np.clip(np.floor(scaled), 0, n - 1).astype(np.int64)


def compute_histogram(
    img,
    n: int = DEFAULT_BINS,
    range: float = DEFAULT_RANGE,
    epsilon: float = DEFAULT_EPSILON,
    weighted: bool = True,
) -> ColorHistogram:
    """Build the log-chroma histogram of an RGB image.

    Every pixel adds weight ``sqrt(R^2 + G^2 + B^2)`` (intensities in [0, 1]),
    or 1 when ``weighted`` is False, to one bin in each of the three channel
    planes. The result is normalized to unit total mass.

    Accumulation runs over the sorted set of distinct colors, so the result
    does not depend on pixel order.

    Raises:
        ParameterError: ``n < 2`` or ``range <= 0``.
        EmptyHistogram: total weight is zero (all-black image when weighted).
    """
    if int(n) != n or n < 2:
        raise ParameterError(f"bin count must be an integer >= 2, got {n}")
    if not range > 0:
        raise ParameterError(f"range must be positive, got {range}")
    n = int(n)
    rgb = np.rint(as_rgb(img)).astype(np.int64).reshape(-1, 3)
    packed = (rgb[:, 0] << 16) | (rgb[:, 1] << 8) | rgb[:, 2]
    colors, counts = np.unique(packed, return_counts=True)
    uniq = np.stack([colors >> 16, (colors >> 8) & 255, colors & 255], axis=-1)

    if weighted:
        weights = np.sqrt(((uniq / 255.0) ** 2).sum(axis=1)) * counts
    else:
        weights = counts.astype(np.float64)
    total = weights.sum()
    if not total > 0:
        raise EmptyHistogram("image has zero total histogram weight")

    chroma = rgb_to_log_chroma(uniq[None, :, :], epsilon)[0]
    idx = bin_index(chroma, n, range)
    bins = np.empty((n, n, 3))
    for k in (0, 1, 2):
        flat = idx[:, 2 * k] * n + idx[:, 2 * k + 1]
        bins[:, :, k] = np.bincount(flat, weights=weights, minlength=n * n).reshape(n, n)
    bins /= 3.0 * total
    return ColorHistogram(bins=bins, n=n, range=float(range), epsilon=float(epsilon), weighted=bool(weighted))


def _bins_of(h) -> np.ndarray:
    return np.asarray(h.bins if isinstance(h, ColorHistogram) else h, dtype=np.float64)


def _pair(h1, h2) -> tuple[np.ndarray, np.ndarray]:
    a, b = _bins_of(h1), _bins_of(h2)
    if a.shape != b.shape:
        raise ParameterError(f"histogram shapes differ: {a.shape} vs {b.shape}")
    return a, b


def hellinger_distance(h1, h2) -> float:
    """Hellinger distance ``||sqrt(h1) - sqrt(h2)||_2 / sqrt(2)``, clipped to [0, 1]."""
    a, b = _pair(h1, h2)
    d = np.sqrt(np.sum((np.sqrt(a) - np.sqrt(b)) ** 2) / 2.0)
    return float(min(d, 1.0))


def kl_divergence(h1, h2, smoothing: float = DEFAULT_SMOOTHING) -> float:
    """KL divergence ``D(h1 || h2)`` in nats.

    ``smoothing`` is added to every bin of both histograms, which are then
    renormalized, so the value is always finite.
    """
    a, b = _pair(h1, h2)
    if smoothing < 0:
        raise ParameterError(f"smoothing must be non-negative, got {smoothing}")
    p = a + smoothing
    q = b + smoothing
    p = p / p.sum()
    q = q / q.sum()
    if np.array_equal(p, q):
        return 0.0
    mask = p > 0
    return float(max(np.sum(p[mask] * np.log(p[mask] / q[mask])), 0.0))


# -- serialization ---------------------------------------------------------


def histogram_to_json(h: ColorHistogram) -> dict:
    return {**h.params(), "bins": h.bins.ravel().tolist()}


def histogram_from_json(obj: dict) -> ColorHistogram:
    try:
        n = int(obj["n"])
        bins = np.asarray(obj["bins"], dtype=np.float64).reshape(n, n, 3)
        return ColorHistogram(
            bins=bins,
            n=n,
            range=float(obj["range"]),
            epsilon=float(obj["epsilon"]),
            weighted=bool(obj["weighted"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise UnsupportedFormat(f"malformed histogram JSON: {exc}") from exc


def histogram_to_bytes(h: ColorHistogram) -> bytes:
    """Binary form: ``LCH1`` magic, header, then row-major little-endian float64 bins."""
    header = _HEADER.pack(_MAGIC, h.n, h.range, h.epsilon, h.weighted)
    return header + np.ascontiguousarray(h.bins, dtype="<f8").tobytes()


def histogram_from_bytes(data: bytes) -> ColorHistogram:
    if len(data) < _HEADER.size or data[:4] != _MAGIC:
        raise UnsupportedFormat("not an LCH1 histogram")
    _, n, rng, eps, weighted = _HEADER.unpack_from(data)
    body = data[_HEADER.size:]
    if len(body) != n * n * 3 * 8:
        raise UnsupportedFormat(f"LCH1 payload has {len(body)} bytes, expected {n * n * 3 * 8}")
    bins = np.frombuffer(body, dtype="<f8").reshape(n, n, 3).astype(np.float64)
    return ColorHistogram(bins=bins, n=n, range=rng, epsilon=eps, weighted=weighted)


def save_histogram(h: ColorHistogram, path) -> None:
    """Write ``.json`` as JSON, anything else as LCH1 binary."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        if path.suffix.lower() == ".json":
            path.write_text(json.dumps(histogram_to_json(h)))
        else:
            path.write_bytes(histogram_to_bytes(h))
    except OSError as exc:
        raise IoFailure(f"cannot write histogram to {path}: {exc}") from exc


def load_histogram(path) -> ColorHistogram:
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read histogram {path}: {exc}") from exc
    if data[:4] == _MAGIC:
        return histogram_from_bytes(data)
    try:
        obj = json.loads(data)
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise UnsupportedFormat(f"{path} is neither LCH1 nor histogram JSON") from exc
    return histogram_from_json(obj)
