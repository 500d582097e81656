"""The two synthetic studies: darkening-series distances and color vs. segmentation."""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import io as sio
from .colorspaces import DEFAULT_EPSILON, rgb_to_od
from .errors import IoFailure, ParameterError
from .histogram import DEFAULT_BINS, DEFAULT_RANGE, compute_histogram, hellinger_distance, kl_divergence
from .segmetrics import connected_components, evaluate
from .synth import SeriesSpec, SynthSpec, darken, synthesize_stain_image

CONFIG_VERSION = 1


def worker_count() -> int:
    """Worker cap from ``STAINKIT_THREADS`` (0 or unset means CPU count)."""
    raw = os.environ.get("STAINKIT_THREADS", "0")
    try:
        n = int(raw)
    except ValueError as exc:
        raise ParameterError(f"STAINKIT_THREADS must be an integer, got {raw!r}") from exc
    if n < 0:
        raise ParameterError("STAINKIT_THREADS must be >= 0")
    return n or (os.cpu_count() or 1)


def ordered_map(fn, items):
    """``map`` over a thread pool; results keep input order."""
    items = list(items)
    workers = min(worker_count(), max(len(items), 1))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Threshold maximizing between-class variance of ``values``."""
    values = np.asarray(values, dtype=np.float64).ravel()
    counts, edges = np.histogram(values, bins=bins)
    centers = (edges[:-1] + edges[1:]) / 2
    w0 = np.cumsum(counts)
    w1 = w0[-1] - w0
    m0 = np.cumsum(counts * centers)
    mu0 = np.divide(m0, w0, out=np.zeros_like(m0), where=w0 > 0)
    mu1 = np.divide(m0[-1] - m0, w1, out=np.zeros_like(m0), where=w1 > 0)
    between = w0 * w1 * (mu0 - mu1) ** 2
    return float(centers[int(np.argmax(between[:-1]))])


@dataclass
class ThresholdSegmenter:
    """Fixed-threshold pseudo-segmenter on summed optical density.

    Pixels with OD sum above ``od_threshold`` are foreground; instances are
    8-connected components.
    """

    od_threshold: float

    @classmethod
    def fit(cls, img, gt=None) -> "ThresholdSegmenter":
        """Calibrate on one image: best-Dice cut against ``gt`` if given, else Otsu.

        The Dice-optimal cut is placed halfway between the two OD values it
        separates.
        """
        od_sum = rgb_to_od(img).sum(axis=2).ravel()
        if gt is None:
            return cls(otsu_threshold(od_sum))
        fg = np.asarray(gt).ravel() > 0
        order = np.argsort(od_sum, kind="stable")
        v, g = od_sum[order], fg[order]
        # cut i keeps v[i:] as foreground
        inter = np.concatenate([np.cumsum(g[::-1])[::-1], [0]])
        pred = len(v) - np.arange(len(v) + 1)
        score = 2.0 * inter / np.maximum(pred + fg.sum(), 1)
        # only cuts between distinct values are realisable
        valid = np.ones(len(v) + 1, dtype=bool)
        valid[1:-1] = v[1:] > v[:-1]
        score[~valid] = -1.0
        i = int(np.argmax(score))
        if i == 0:
            return cls(float(v[0]) - 1e-9)
        if i == len(v):
            return cls(float(v[-1]))
        return cls(float((v[i - 1] + v[i]) / 2))

    def __call__(self, img) -> np.ndarray:
        return connected_components(rgb_to_od(img).sum(axis=2) > self.od_threshold, 8)


def series_distances(base, factors, **hist_options) -> list[dict]:
    """Hellinger and KL from the base histogram to each darkened copy."""
    spec = SeriesSpec(base, factors)
    h_base = compute_histogram(spec.base, **hist_options)

    def row(k):
        h = compute_histogram(darken(spec.base, k), **hist_options)
        return {"factor": float(k), "h_dist": hellinger_distance(h_base, h), "kl_div": kl_divergence(h_base, h)}

    return ordered_map(row, spec.factors)


@dataclass
class StudyConfig:
    factors: list
    base: np.ndarray
    gt: np.ndarray | None = None
    predictions: dict = field(default_factory=dict)
    segmenter: ThresholdSegmenter | None = None
    hist_options: dict = field(default_factory=dict)

    @classmethod
    def from_dict(cls, obj: dict, root: Path = Path(".")) -> "StudyConfig":
        """Build a study from its JSON config.

        Schema (version 1)::

            {"v": 1,
             "base": {"image": "base.png"} | {"synth": {...SynthSpec fields...}},
             "factors": [1, 1.2, 1.5, 2, 3],
             "histogram": {"bins": 64, "range": 3.0, "epsilon": 0.00392, "weighted": true},
             "segmentation": {"gt": "gt.png",
                              "predictions": {"original": "p0.png", "1.2": "p1.png"},
                              "segmenter": {"kind": "threshold", "od_threshold": null}}}

        ``gt`` defaults to the synthetic cell labels; a null threshold is
        calibrated once on the base image against ``gt`` (best Dice) and then
        held fixed for every recolored set. Relative paths resolve
        against ``root``.
        """
        if obj.get("v") != CONFIG_VERSION:
            raise ParameterError(f"config must declare \"v\": {CONFIG_VERSION}")
        if "factors" not in obj or "base" not in obj:
            raise ParameterError("config needs 'base' and 'factors'")

        def resolve(p):
            p = Path(p)
            return p if p.is_absolute() else root / p

        base_cfg = obj["base"]
        gt = None
        if "image" in base_cfg:
            base = sio.read_image(resolve(base_cfg["image"]))
        elif "synth" in base_cfg:
            base, _, _, labels = synthesize_stain_image(SynthSpec.from_dict(base_cfg["synth"]))
            if labels.any():
                gt = labels
        else:
            raise ParameterError("base needs 'image' or 'synth'")

        hist = obj.get("histogram", {})
        unknown = set(hist) - {"bins", "range", "epsilon", "weighted"}
        if unknown:
            raise ParameterError(f"unknown histogram options {sorted(unknown)}")
        hist_options = {
            "n": int(hist.get("bins", DEFAULT_BINS)),
            "range": float(hist.get("range", DEFAULT_RANGE)),
            "epsilon": float(hist.get("epsilon", DEFAULT_EPSILON)),
            "weighted": bool(hist.get("weighted", True)),
        }

        seg = obj.get("segmentation") or {}
        if "gt" in seg:
            gt = sio.read_labelmap(resolve(seg["gt"]))
        predictions = {str(k): sio.read_labelmap(resolve(v)) for k, v in seg.get("predictions", {}).items()}
        segmenter = None
        if "segmenter" in seg:
            s = seg["segmenter"]
            if s.get("kind", "threshold") != "threshold":
                raise ParameterError(f"unknown segmenter {s.get('kind')!r}")
            t = s.get("od_threshold")
        if (predictions or "segmenter" in seg) and gt is None:
            raise ParameterError("segmentation needs a ground-truth label map")
        if "segmenter" in seg:
            segmenter = ThresholdSegmenter.fit(base, gt) if t is None else ThresholdSegmenter(float(t))

        return cls(
            factors=[float(f) for f in obj["factors"]],
            base=base,
            gt=gt,
            predictions=predictions,
            segmenter=segmenter,
            hist_options=hist_options,
        )

    @classmethod
    def load(cls, path) -> "StudyConfig":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except OSError as exc:
            raise IoFailure(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(obj, path.parent)


def _factor_key(k: float) -> str:
    return f"{k:g}"


def _prediction(cfg: StudyConfig, key: str, img) -> np.ndarray | None:
    if key in cfg.predictions:
        return cfg.predictions[key]
    if cfg.segmenter is not None:
        return cfg.segmenter(img)
    return None


def segmentation_table(cfg: StudyConfig) -> list[dict]:
    """Rows in the layout of a color-variation vs. segmentation table.

    The first row is the unmodified base ("original"); factor 1 is the
    "control" set and later factors are "recolored-1", "recolored-2", ...
    Distances are measured from the base histogram.
    """
    h_base = compute_histogram(cfg.base, **cfg.hist_options)
    segment = cfg.gt is not None and (cfg.predictions or cfg.segmenter is not None)

    def scores(key, img):
        if not segment:
            return {}
        pred = _prediction(cfg, key, img)
        if pred is None:
            raise ParameterError(f"no prediction for set {key!r}")
        rep = evaluate(pred, cfg.gt)
        return {"f1": rep.f1, "aji": rep.aji, "dice": rep.dice}

    rows = [{"set": "original", "factor": "-", "h_dist": "-", "kl_div": "-", **scores("original", cfg.base)}]

    def row(indexed):
        i, k = indexed
        img = darken(cfg.base, k)
        h = compute_histogram(img, **cfg.hist_options)
        name = "control" if k == 1.0 else f"recolored-{i}"
        return {
            "set": name,
            "factor": k,
            "h_dist": hellinger_distance(h_base, h),
            "kl_div": kl_divergence(h_base, h),
            **scores(_factor_key(k), img),
        }

    numbered = []
    i = 0
    for k in cfg.factors:
        if k != 1.0:
            i += 1
        numbered.append((i, k))
    return rows + ordered_map(row, numbered)


def run_study(cfg: StudyConfig, out_dir, fmt: str = "csv", plot: bool = True) -> dict:
    """Write the series table, scatter data, study table and figures to ``out_dir``.

    Returns a mapping of artifact name to path.
    """
    out = Path(out_dir)
    series = series_distances(cfg.base, cfg.factors, **cfg.hist_options)
    table = segmentation_table(cfg)
    paths = {
        "series": out / f"series.{fmt}",
        "scatter": out / "scatter.csv",
        "study": out / f"study.{fmt}",
    }
    sio.write_report(series, fmt, paths["series"])
    sio.write_report(series, "csv", paths["scatter"], columns=["factor", "h_dist", "kl_div"])
    sio.write_report(table, fmt, paths["study"])
    if plot:
        from .plotting import plot_series, plot_study

        paths["series_plot"] = out / "series.png"
        plot_series(series, paths["series_plot"])
        if any("dice" in r for r in table):
            paths["study_plot"] = out / "study.png"
            plot_study(table, paths["study_plot"])
    return paths
