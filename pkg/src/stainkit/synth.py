"""Synthetic Beer-Lambert stain images and OD-scaling darkening series."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .colorspaces import od_to_rgb, quantize, rgb_to_od
from .errors import ParameterError

# Column-stacked unit OD vectors: a DAB-like brown and a hematoxylin-like blue.
DEFAULT_STAINS = np.array(
    [
        [0.268, 0.570, 0.776],
        [0.650, 0.704, 0.286],
    ]
).T
DEFAULT_STAINS = DEFAULT_STAINS / np.linalg.norm(DEFAULT_STAINS, axis=0)

LAWS = ("sparse-random", "blob-cells")


@dataclass
class SynthSpec:
    """Parameters of one synthetic stain-mixture image.

    ``stain_matrix`` is 3 x k with unit-norm OD columns. The ``sparse-random``
    law gives each pixel background, one stain, or a mixture, with
    concentrations drawn from ``concentration_range``; ``blob-cells`` draws
    non-overlapping elliptical cells of stain 0 (``cell_concentration``) over
    a faint stain-1 background plus weak non-specific stain-0 everywhere
    (``nonspecific_concentration``), and also returns the cell label map.
    """

    width: int = 128
    height: int = 128
    stain_matrix: np.ndarray = field(default_factory=lambda: DEFAULT_STAINS.copy())
    concentration_law: str = "sparse-random"
    seed: int = 0
    concentration_range: tuple[float, float] = (0.6, 1.6)
    cell_concentration: tuple[float, float] = (0.25, 0.55)
    n_cells: int = 12
    cell_radius: tuple[float, float] = (5.0, 11.0)
    background_concentration: tuple[float, float] = (0.05, 0.15)
    nonspecific_concentration: tuple[float, float] = (0.0, 0.05)

    def __post_init__(self):
        self.stain_matrix = np.asarray(self.stain_matrix, dtype=np.float64)
        if self.stain_matrix.ndim != 2 or self.stain_matrix.shape[0] != 3:
            raise ParameterError("stain_matrix must be 3 x k")
        if self.concentration_law not in LAWS:
            raise ParameterError(f"unknown concentration law {self.concentration_law!r}")
        if self.width < 1 or self.height < 1:
            raise ParameterError("width and height must be positive")

    @classmethod
    def from_dict(cls, obj: dict) -> "SynthSpec":
        obj = dict(obj)
        if "stain_matrix" in obj:
            # JSON carries columns, as in stain-matrix files.
            obj["stain_matrix"] = np.asarray(obj["stain_matrix"], dtype=np.float64).T
        for key in (
            "concentration_range",
            "cell_concentration",
            "cell_radius",
            "background_concentration",
            "nonspecific_concentration",
        ):
            if key in obj:
                obj[key] = tuple(obj[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(obj) - known
        if unknown:
            raise ParameterError(f"unknown SynthSpec fields: {sorted(unknown)}")
        return cls(**obj)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["stain_matrix"] = self.stain_matrix.T.tolist()
        return out


@dataclass
class SeriesSpec:
    base: np.ndarray
    factors: Sequence[float] = (1.0, 1.2, 1.5, 2.0, 3.0)

    def __post_init__(self):
        f = np.asarray(self.factors, dtype=np.float64)
        if f.ndim != 1 or len(f) == 0:
            raise ParameterError("factors must be a non-empty list")
        if np.any(f < 1):
            raise ParameterError("darkening factors must be >= 1")
        if np.any(np.diff(f) <= 0):
            raise ParameterError("darkening factors must be strictly increasing")


def _sparse_random(spec: SynthSpec, rng: np.random.Generator) -> np.ndarray:
    k = spec.stain_matrix.shape[1]
    h, w = spec.height, spec.width
    lo, hi = spec.concentration_range
    # 0 = background, 1..k = single stain, k+1 = mixture of all stains
    kind = rng.choice(k + 2, size=(h, w), p=[0.1] + [0.8 / k] * k + [0.1])
    conc = rng.uniform(lo, hi, size=(k, h, w))
    active = np.zeros((k, h, w), dtype=bool)
    for i in range(k):
        active[i] = (kind == i + 1) | (kind == k + 1)
    return np.where(active, conc, 0.0)


def _blob_cells(spec: SynthSpec, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    k = spec.stain_matrix.shape[1]
    h, w = spec.height, spec.width
    conc = np.zeros((k, h, w))
    labels = np.zeros((h, w), dtype=np.int32)
    if k > 1:
        blo, bhi = spec.background_concentration
        conc[1] = rng.uniform(blo, bhi, size=(h, w))
    nlo, nhi = spec.nonspecific_concentration
    nonspecific = rng.uniform(nlo, nhi, size=(h, w))

    yy, xx = np.mgrid[0:h, 0:w]
    occupied = np.zeros((h, w), dtype=bool)
    lo, hi = spec.cell_concentration
    rmin, rmax = spec.cell_radius
    placed = 0
    for _ in range(spec.n_cells * 50):
        if placed == spec.n_cells:
            break
        ry, rx = rng.uniform(rmin, rmax, size=2)
        cy, cx = rng.uniform(0, h), rng.uniform(0, w)
        theta = rng.uniform(0, np.pi)
        dy, dx = yy - cy, xx - cx
        a = dx * np.cos(theta) + dy * np.sin(theta)
        b = -dx * np.sin(theta) + dy * np.cos(theta)
        inside = (a / rx) ** 2 + (b / ry) ** 2 <= 1.0
        # keep a one-pixel gap so cells stay separate under 8-connectivity
        halo = (a / (rx + 1.5)) ** 2 + (b / (ry + 1.5)) ** 2 <= 1.0
        if not inside.any() or (halo & occupied).any():
            continue
        placed += 1
        occupied |= inside
        labels[inside] = placed
        level = rng.uniform(lo, hi)
        conc[0][inside] = level * rng.uniform(0.9, 1.1, size=int(inside.sum()))
    conc[0] += nonspecific
    return conc, labels


def synthesize_stain_image(spec: SynthSpec):
    """Generate ``(rgb, stain_matrix, concentrations, labels)`` from a spec.

    ``concentrations`` has shape (k, H, W); ``labels`` is the cell instance map
    for ``blob-cells`` and all zeros otherwise. Same seed, same bits.
    """
    rng = np.random.default_rng(spec.seed)
    if spec.concentration_law == "sparse-random":
        conc = _sparse_random(spec, rng)
        labels = np.zeros((spec.height, spec.width), dtype=np.int32)
    else:
        conc, labels = _blob_cells(spec, rng)
    od = np.einsum("ck,khw->hwc", spec.stain_matrix, conc)
    return od_to_rgb(od), spec.stain_matrix.copy(), conc, labels


def darken(img, factor: float) -> np.ndarray:
    """Scale optical density by ``factor``; factor 1 returns the image unchanged."""
    return od_to_rgb(factor * rgb_to_od(img))


def darken_series(spec: SeriesSpec) -> list[np.ndarray]:
    """One darkened copy of ``spec.base`` per factor, in factor order."""
    base = quantize(np.asarray(spec.base, dtype=np.float64))
    return [darken(base, float(k)) for k in spec.factors]
