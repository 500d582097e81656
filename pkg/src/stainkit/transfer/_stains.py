"""Shared helpers for the optical-density stain models."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from ..colorspaces import rgb_to_od
from ..errors import IoFailure, LowSignal, UnsupportedFormat

MIN_TISSUE_PIXELS = 100
RESCALE_PERCENTILE = 99.0


def od_pixels(img) -> np.ndarray:
    """Optical density of every pixel as an (N, 3) matrix."""
    return rgb_to_od(img).reshape(-1, 3)


def tissue_pixels(od: np.ndarray, beta_od: float) -> np.ndarray:
    """Rows of ``od`` whose OD magnitude exceeds ``beta_od``."""
    keep = np.linalg.norm(od, axis=1) > beta_od
    if keep.sum() < MIN_TISSUE_PIXELS:
        raise LowSignal(
            f"only {int(keep.sum())} pixels have OD magnitude above {beta_od}; "
            f"need at least {MIN_TISSUE_PIXELS}"
        )
    return od[keep]


def unit_nonnegative(vectors: np.ndarray) -> np.ndarray:
    """Flip each column into the positive orthant, clip residual negatives, unit-normalize."""
    v = np.array(vectors, dtype=np.float64)
    for j in range(v.shape[1]):
        if v[:, j].sum() < 0:
            v[:, j] = -v[:, j]
    v = np.clip(v, 0.0, None)
    norms = np.linalg.norm(v, axis=0)
    norms[norms == 0] = 1.0
    return v / norms


def angle_between(a, b) -> float:
    """Angle in degrees between two vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    c = np.dot(a, b) / (np.linalg.norm(a) * np.linalg.norm(b))
    return float(np.degrees(np.arccos(np.clip(c, -1.0, 1.0))))


def column_angles(estimated: np.ndarray, reference: np.ndarray) -> list[float]:
    """Per-column angular error after the best column pairing (degrees)."""
    from itertools import permutations

    k = reference.shape[1]
    best = None
    for perm in permutations(range(k)):
        errs = [angle_between(estimated[:, perm[j]], reference[:, j]) for j in range(k)]
        if best is None or max(errs) < max(best):
            best = errs
    return best


def align_columns(stains: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Permute the columns of ``stains`` to best match ``reference`` by cosine."""
    from itertools import permutations

    k = stains.shape[1]
    best_perm, best_score = tuple(range(k)), -np.inf
    for perm in permutations(range(k)):
        score = sum(float(np.dot(stains[:, perm[j]], reference[:, j])) for j in range(k))
        if score > best_score + 1e-12:
            best_perm, best_score = perm, score
    return stains[:, list(best_perm)]


def rescale_concentrations(source: np.ndarray, target: np.ndarray, percentile=RESCALE_PERCENTILE):
    """Scale each source concentration row so its percentile matches the target's.

    Args:
        source, target: (k, N) concentration matrices.
    """
    ps = np.percentile(source, percentile, axis=1)
    pt = np.percentile(target, percentile, axis=1)
    scale = np.divide(pt, ps, out=np.ones_like(pt), where=ps > 0)
    return source * scale[:, None]


def recompose(od, stains_s, conc_s, stains_t, conc_new, preserve_residual=True):
    """Optical density of the recolored pixels, shape (N, 3).

    With ``preserve_residual`` the part of the source OD the stain model does
    not explain (``od - stains_s @ conc_s``) is carried over, so identical
    source and target models reproduce the source exactly.
    """
    out = stains_t @ conc_new
    if preserve_residual:
        out = out + (od.T - stains_s @ conc_s)
    return out.T


def stains_to_json(stains: np.ndarray) -> dict:
    return {"columns": np.asarray(stains).T.tolist(), "space": "od"}


def stains_from_json(obj: dict) -> np.ndarray:
    if obj.get("space") != "od" or "columns" not in obj:
        raise UnsupportedFormat("stain matrix JSON needs 'columns' and space 'od'")
    cols = np.asarray(obj["columns"], dtype=np.float64)
    if cols.ndim != 2 or cols.shape[1] != 3:
        raise UnsupportedFormat("stain matrix columns must be RGB triples")
    return cols.T


def save_stains(stains: np.ndarray, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(stains_to_json(stains)))
    except OSError as exc:
        raise IoFailure(f"cannot write stain matrix to {path}: {exc}") from exc


def load_stains(path) -> np.ndarray:
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"cannot read stain matrix {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UnsupportedFormat(f"{path}: {exc}") from exc
    return stains_from_json(obj)
