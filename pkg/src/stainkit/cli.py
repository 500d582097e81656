"""``stainkit`` command-line interface.

Exit codes: 0 success, 2 usage or parameter error, 3 I/O error, 4 method
failure (too little stain signal, rank-deficient stains, empty histogram).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import io as sio
from .colorspaces import DEFAULT_EPSILON
from .errors import EmptyHistogram, IoFailure, MethodFailure, ParameterError, StainkitError, UnsupportedFormat
from .histogram import (
    DEFAULT_BINS,
    DEFAULT_RANGE,
    DEFAULT_SMOOTHING,
    ColorHistogram,
    compute_histogram,
    hellinger_distance,
    kl_divergence,
    load_histogram,
    save_histogram,
)
from .quality import quality_report
from .segmetrics import evaluate
from .synth import SeriesSpec, SynthSpec, darken_series, synthesize_stain_image
from .transfer import TransferMethod, transfer

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_METHOD = 0, 2, 3, 4


def _hist_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("histogram")
    g.add_argument("--bins", type=int, default=DEFAULT_BINS, help="bins per u/v axis")
    g.add_argument("--range", type=float, default=DEFAULT_RANGE, help="u/v clamp bound")
    g.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON, help="log-chroma stabiliser")
    g.add_argument("--uniform-weight", action="store_true", help="count pixels instead of weighting by intensity")


def _hist_options(args) -> dict:
    return {"n": args.bins, "range": args.range, "epsilon": args.epsilon, "weighted": not args.uniform_weight}


def _histogram_of(path: str, args) -> ColorHistogram:
    if Path(path).suffix.lower() == ".png":
        return compute_histogram(sio.read_image(path), **_hist_options(args))
    return load_histogram(path)


def _emit(obj, out) -> None:
    text = json.dumps(obj, indent=2)
    if out:
        path = Path(out)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot write {path}: {exc}") from exc
    else:
        print(text)


def _factors(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad factor list {text!r}") from exc


def cmd_hist(args) -> int:
    h = compute_histogram(sio.read_image(args.input), **_hist_options(args))
    save_histogram(h, args.output)
    return EXIT_OK


def cmd_dist(args) -> int:
    metrics = [m.strip() for m in args.metric.split(",") if m.strip()]
    unknown = set(metrics) - {"hellinger", "kl"}
    if unknown or not metrics:
        raise ParameterError(f"unknown metric(s) {sorted(unknown)}; choose from hellinger, kl")
    a, b = _histogram_of(args.a, args), _histogram_of(args.b, args)
    result = {}
    if "hellinger" in metrics:
        result["hellinger"] = hellinger_distance(a, b)
    if "kl" in metrics:
        result["kl"] = kl_divergence(a, b, args.smoothing)
    _emit(result, args.output)
    return EXIT_OK


def cmd_transfer(args) -> int:
    source, target = sio.read_image(args.source), sio.read_image(args.target)
    method = TransferMethod(args.method)
    if method is TransferMethod.MACENKO:
        opts = {"beta_od": args.beta_od, "alpha_pct": args.alpha_pct, "preserve_residual": not args.no_preserve_residual}
    elif method is TransferMethod.VAHADANE:
        opts = {
            "k": args.stains,
            "lambda_sparse": args.lambda_sparse,
            "iters": args.iters,
            "beta_od": args.beta_od,
            "preserve_residual": not args.no_preserve_residual,
        }
    elif method is TransferMethod.HISTMATCH:
        opts = {"exact": args.exact}
    else:
        opts = {}
    sio.write_image(transfer(method, source, target, **opts), args.output)
    return EXIT_OK


def cmd_quality(args) -> int:
    report = quality_report(
        sio.read_image(args.source),
        sio.read_image(args.recolored),
        sio.read_image(args.target),
        **_hist_options(args),
    )
    _emit(report.to_dict(), args.output)
    return EXIT_OK


def cmd_seg_eval(args) -> int:
    metrics = [m.strip() for m in args.metrics.split(",") if m.strip()]
    unknown = set(metrics) - {"f1", "aji", "dice"}
    if unknown or not metrics:
        raise ParameterError(f"unknown metric(s) {sorted(unknown)}; choose from f1, aji, dice")
    rep = evaluate(sio.read_labelmap(args.pred), sio.read_labelmap(args.gt), args.threshold).to_dict()
    row = {k: rep[k] for k in metrics}
    if "f1" in metrics:
        row.update(tp=rep["tp"], fp=rep["fp"], fn=rep["fn"])
    if args.output and Path(args.output).suffix.lower() == ".csv":
        sio.write_report([row], "csv", args.output)
    else:
        _emit(row, args.output)
    return EXIT_OK


def cmd_series(args) -> int:
    from .study import series_distances

    out = Path(args.output)
    if args.base:
        base = sio.read_image(args.base)
    else:
        try:
            cfg = json.loads(Path(args.synth).read_text())
        except OSError as exc:
            raise IoFailure(f"cannot read {args.synth}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParameterError(f"{args.synth}: invalid JSON ({exc})") from exc
        base, _, _, labels = synthesize_stain_image(SynthSpec.from_dict(cfg))
        sio.write_image(base, out / "base.png")
        if labels.any():
            sio.write_labelmap(labels, out / "base_labels.png")
    factors = args.factors
    images = darken_series(SeriesSpec(base, factors))
    if args.save_images:
        for k, img in zip(factors, images):
            sio.write_image(img, out / f"series_{k:g}.png")
    rows = series_distances(base, factors, **_hist_options(args))
    sio.write_report(rows, args.format, out / f"series.{args.format}", summary=args.summary)
    sio.write_report(rows, "csv", out / "scatter.csv")
    if not args.no_plot:
        from .plotting import plot_series

        plot_series(rows, out / "series.png")
    return EXIT_OK


def cmd_study(args) -> int:
    from .study import StudyConfig, run_study

    cfg = StudyConfig.load(args.config)
    paths = run_study(cfg, args.output, fmt=args.format, plot=not args.no_plot)
    for name, path in paths.items():
        print(f"{name}: {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(
        prog="stainkit", description="Stain color measurement, transfer and segmentation scoring.", formatter_class=fmt
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("hist", help="compute a log-chroma histogram", formatter_class=fmt)
    p.add_argument("input", help="RGB PNG")
    p.add_argument("-o", "--output", required=True, help="output file (.json, otherwise LCH1 binary)")
    _hist_flags(p)
    p.set_defaults(func=cmd_hist)

    p = sub.add_parser("dist", help="histogram distances between two images or histogram files", formatter_class=fmt)
    p.add_argument("a", help="RGB PNG or saved histogram")
    p.add_argument("b", help="RGB PNG or saved histogram")
    p.add_argument("--metric", default="hellinger,kl", help="comma list of hellinger, kl")
    p.add_argument("--smoothing", type=float, default=DEFAULT_SMOOTHING, help="KL bin smoothing")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")
    _hist_flags(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("transfer", help="recolor an image with a classical baseline", formatter_class=fmt)
    p.add_argument("--method", required=True, choices=[m.value for m in TransferMethod])
    p.add_argument("--source", required=True, help="RGB PNG to recolor")
    p.add_argument("--target", required=True, help="RGB PNG giving the colors")
    p.add_argument("-o", "--output", required=True, help="recolored RGB PNG")
    p.add_argument("--beta-od", type=float, default=0.15, help="tissue OD threshold (macenko, vahadane)")
    p.add_argument("--alpha-pct", type=float, default=1.0, help="angle percentile (macenko)")
    p.add_argument("--stains", type=int, default=2, help="dictionary size (vahadane)")
    p.add_argument("--lambda-sparse", type=float, default=0.1, help="L1 weight (vahadane)")
    p.add_argument("--iters", type=int, default=50, help="alternations (vahadane)")
    p.add_argument("--exact", action="store_true", help="exact histogram specification (histmatch)")
    p.add_argument(
        "--no-preserve-residual",
        action="store_true",
        help="drop OD outside the stain model when recomposing (macenko, vahadane)",
    )
    p.set_defaults(func=cmd_transfer)

    p = sub.add_parser("quality", help="score a recoloring (color + detail terms)", formatter_class=fmt)
    p.add_argument("--source", required=True, help="image before recoloring")
    p.add_argument("--recolored", required=True, help="image after recoloring")
    p.add_argument("--target", required=True, help="image whose colors were requested")
    p.add_argument("-o", "--output", help="write JSON here instead of stdout")
    _hist_flags(p)
    p.set_defaults(func=cmd_quality)

    p = sub.add_parser("seg-eval", help="F1 / AJI / Dice of a predicted label map", formatter_class=fmt)
    p.add_argument("--pred", required=True, help="16-bit label PNG")
    p.add_argument("--gt", required=True, help="16-bit label PNG")
    p.add_argument("--metrics", default="f1,aji,dice", help="comma list of f1, aji, dice")
    p.add_argument("--threshold", type=float, default=0.5, help="IoU threshold for F1")
    p.add_argument("-o", "--output", help=".json or .csv; stdout JSON if omitted")
    p.set_defaults(func=cmd_seg_eval)

    p = sub.add_parser("series", help="darkening series and its distances to the base", formatter_class=fmt)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--base", help="base RGB PNG")
    src.add_argument("--synth", help="SynthSpec JSON for a synthetic base")
    p.add_argument("--factors", type=_factors, default="1,1.2,1.5,2,3", help="comma list of OD factors")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="table format")
    p.add_argument("--summary", action="store_true", help="append a mean ± std row")
    p.add_argument("--save-images", action="store_true", help="also write each darkened image")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")
    _hist_flags(p)
    p.set_defaults(func=cmd_series)

    p = sub.add_parser("study", help="run a JSON-configured series + segmentation study", formatter_class=fmt)
    p.add_argument("config", help="study JSON config")
    p.add_argument("-o", "--output", required=True, help="output directory")
    p.add_argument("--format", choices=["csv", "json"], default="csv", help="table format")
    p.add_argument("--no-plot", action="store_true", help="skip the PNG figures")
    p.set_defaults(func=cmd_study)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ParameterError, ValueError) as exc:
        print(f"stainkit {args.command}: parameter error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (IoFailure, UnsupportedFormat) as exc:
        print(f"stainkit {args.command}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (MethodFailure, EmptyHistogram) as exc:
        kind = type(exc).__name__
        print(f"stainkit {args.command}: {kind}: {exc}", file=sys.stderr)
        return EXIT_METHOD
    except StainkitError as exc:
        print(f"stainkit {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
