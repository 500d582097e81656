"""Instance and semantic segmentation metrics on integer label maps.

Label maps are 2-D integer arrays; 0 is background and every other value is
an instance ID (IDs need not be contiguous).
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import ParameterError


@dataclass
class SegReport:
    f1: float
    aji: float
    dice: float
    tp: int
    fp: int
    fn: int

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Overlaps:
    """Pairwise overlap statistics for every overlapping (pred, gt) instance pair."""

    pred_ids: np.ndarray
    gt_ids: np.ndarray
    intersection: np.ndarray
    union: np.ndarray
    pred_area: dict
    gt_area: dict

    @property
    def iou(self) -> np.ndarray:
        return self.intersection / self.union

    def as_dict(self) -> dict:
        return {(int(p), int(g)): float(v) for p, g, v in zip(self.pred_ids, self.gt_ids, self.iou)}


def _check(pred, gt) -> tuple[np.ndarray, np.ndarray]:
    p, g = np.asarray(pred), np.asarray(gt)
    if p.shape != g.shape:
        raise ParameterError(f"label maps differ in shape: {p.shape} vs {g.shape}")
    if p.size and (p.min() < 0 or g.min() < 0):
        raise ParameterError("label IDs must be non-negative")
    return p.astype(np.int64).ravel(), g.astype(np.int64).ravel()


def _areas(labels: np.ndarray) -> dict:
    ids, counts = np.unique(labels[labels > 0], return_counts=True)
    return dict(zip(ids.tolist(), counts.tolist()))


def overlaps(pred, gt) -> Overlaps:
    p, g = _check(pred, gt)
    pa, ga = _areas(p), _areas(g)
    both = (p > 0) & (g > 0)
    pairs, inter = np.unique(np.stack([p[both], g[both]]), axis=1, return_counts=True)
    pids, gids = pairs[0], pairs[1]
    union = np.array([pa[a] + ga[b] for a, b in zip(pids.tolist(), gids.tolist())], dtype=np.int64) - inter
    return Overlaps(pids, gids, inter.astype(np.int64), union, pa, ga)


def iou_matrix(pred, gt) -> dict:
    """IoU of every overlapping instance pair as ``{(pred_id, gt_id): iou}``."""
    return overlaps(pred, gt).as_dict()


def f1_at_iou(pred, gt, threshold: float = 0.5) -> tuple[float, int, int, int]:
    """Instance F1 with one-to-one greedy matching on IoU > ``threshold``.

    Candidate pairs are visited by descending IoU, ties by lower pred ID then
    lower GT ID. Two empty maps score 1.

    Returns:
        ``(f1, tp, fp, fn)``
    """
    ov = overlaps(pred, gt)
    iou = ov.iou
    order = np.lexsort((ov.gt_ids, ov.pred_ids, -iou))
    used_p, used_g = set(), set()
    for i in order:
        if not iou[i] > threshold:
            break
        pid, gid = int(ov.pred_ids[i]), int(ov.gt_ids[i])
        if pid in used_p or gid in used_g:
            continue
        used_p.add(pid)
        used_g.add(gid)
    tp = len(used_p)
    fp = len(ov.pred_area) - tp
    fn = len(ov.gt_area) - tp
    denom = 2 * tp + fp + fn
    return (1.0 if denom == 0 else 2 * tp / denom), tp, fp, fn


def aji(pred, gt) -> float:
    """Aggregated Jaccard Index.

    Each GT instance takes the prediction of highest IoU (lowest ID on ties)
    and adds its intersection and union; a GT with no overlapping prediction
    adds only its area to the union. Predictions never picked add their area
    to the union.
    """
    ov = overlaps(pred, gt)
    if not ov.gt_area:
        return 1.0 if not ov.pred_area else 0.0
    iou = ov.iou
    # best prediction per GT: highest IoU, then lowest pred ID
    order = np.lexsort((ov.pred_ids, -iou, ov.gt_ids))
    inter_sum = 0
    union_sum = 0
    used = set()
    seen = set()
    for i in order:
        gid = int(ov.gt_ids[i])
        if gid in seen:
            continue
        seen.add(gid)
        inter_sum += int(ov.intersection[i])
        union_sum += int(ov.union[i])
        used.add(int(ov.pred_ids[i]))
    for gid, area in ov.gt_area.items():
        if gid not in seen:
            union_sum += area
    for pid, area in ov.pred_area.items():
        if pid not in used:
            union_sum += area
    return inter_sum / union_sum


def dice(pred, gt) -> float:
    """Binary foreground Dice; two empty foregrounds score 1."""
    p, g = _check(pred, gt)
    fp, fg = p > 0, g > 0
    denom = int(fp.sum()) + int(fg.sum())
    if denom == 0:
        return 1.0
    return 2.0 * int((fp & fg).sum()) / denom


def evaluate(pred, gt, threshold: float = 0.5) -> SegReport:
    f1, tp, fp, fn = f1_at_iou(pred, gt, threshold)
    return SegReport(f1=f1, aji=aji(pred, gt), dice=dice(pred, gt), tp=tp, fp=fp, fn=fn)


# -- connected components -------------------------------------------------


def _find(parent: list, x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def connected_components(mask, connectivity: int = 8) -> np.ndarray:
    """Label the foreground of ``mask`` with IDs 1..k in raster-scan order.

    Two-pass union-find over horizontal runs: each row is split into runs
    of foreground pixels, runs on consecutive rows are merged when they touch
    (diagonal contact counts at connectivity 8).
    """
    if connectivity not in (4, 8):
        raise ParameterError(f"connectivity must be 4 or 8, got {connectivity}")
    fg = np.asarray(mask) != 0
    if fg.ndim != 2:
        raise ParameterError("mask must be 2-D")
    h, w = fg.shape
    out = np.zeros((h, w), dtype=np.int32)
    if not fg.any():
        return out

    reach = 1 if connectivity == 8 else 0
    parent: list[int] = []
    runs = []  # (row, start, stop, run_id)
    prev: list[tuple[int, int, int]] = []
    padded = np.zeros(w + 2, dtype=np.int8)
    for r in range(h):
        padded[1:-1] = fg[r]
        edges = np.flatnonzero(np.diff(padded))
        cur = []
        j = 0
        for start, stop in zip(edges[::2].tolist(), edges[1::2].tolist()):
            rid = len(parent)
            parent.append(rid)
            # previous-row runs overlapping [start - reach, stop + reach)
            while j < len(prev) and prev[j][1] + reach <= start:
                j += 1
            k = j
            while k < len(prev) and prev[k][0] < stop + reach:
                a, b = _find(parent, prev[k][2]), _find(parent, rid)
                if a != b:
                    parent[max(a, b)] = min(a, b)
                k += 1
            cur.append((start, stop, rid))
            runs.append((r, start, stop, rid))
        prev = cur

    final: dict[int, int] = {}
    for r, start, stop, rid in runs:
        root = _find(parent, rid)
        label = final.setdefault(root, len(final) + 1)
        out[r, start:stop] = label
    return out
