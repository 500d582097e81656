"""PNG image and label-map I/O plus JSON/CSV report writers."""

from __future__ import annotations

import csv
import io as _io
import json
import math
import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image

from .errors import HeterogeneousRows, IoFailure, ParameterError, UnsupportedFormat

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"
# PNG color types
_GRAY, _RGB, _PALETTE, _GRAY_ALPHA, _RGBA = 0, 2, 3, 4, 6


def _png_header(data: bytes, path) -> tuple[int, int]:
    """Bit depth and color type from the IHDR chunk."""
    if len(data) < 33 or data[:8] != _PNG_SIGNATURE or data[12:16] != b"IHDR":
        raise UnsupportedFormat(f"{path}: not a PNG file")
    bit_depth, color_type = struct.unpack(">BB", data[24:26])
    return bit_depth, color_type


def _read_bytes(path) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


def _decode(data: bytes, path) -> Image.Image:
    try:
        im = Image.open(_io.BytesIO(data))
        im.load()
    except Exception as exc:  # Pillow raises a zoo of types on corrupt data
        raise IoFailure(f"cannot decode {path}: {exc}") from exc
    return im


def read_image(path) -> np.ndarray:
    """Read an 8-bit RGB, grayscale or opaque palette PNG as a (H, W, 3) uint8 array."""
    data = _read_bytes(path)
    bit_depth, color_type = _png_header(data, path)
    if color_type in (_GRAY_ALPHA, _RGBA):
        raise UnsupportedFormat(f"{path}: alpha channels are not supported")
    if color_type == _RGB and bit_depth != 8:
        raise UnsupportedFormat(f"{path}: {bit_depth}-bit color PNG is not supported")
    if color_type == _GRAY and bit_depth == 16:
        raise UnsupportedFormat(f"{path}: 16-bit grayscale is a label map, not an image")
    im = _decode(data, path)
    if color_type == _PALETTE:
        if "transparency" in im.info:
            raise UnsupportedFormat(f"{path}: palette PNG with alpha is not supported")
        im = im.convert("RGB")
    elif color_type == _GRAY:
        im = im.convert("L")
    arr = np.asarray(im)
    if arr.ndim == 2:
        arr = np.repeat(arr[:, :, None], 3, axis=2)
    return np.ascontiguousarray(arr, dtype=np.uint8)


def write_image(img, path) -> None:
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ParameterError(f"expected an (H, W, 3) image, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.min() < 0 or arr.max() > 255:
            raise ParameterError("image values must lie in [0, 255]")
        arr = np.rint(arr).astype(np.uint8)
    _save(Image.fromarray(np.ascontiguousarray(arr), mode="RGB"), path)


def read_labelmap(path) -> np.ndarray:
    """Read an 8- or 16-bit single-channel PNG as an int32 label map."""
    data = _read_bytes(path)
    bit_depth, color_type = _png_header(data, path)
    if color_type != _GRAY or bit_depth not in (8, 16):
        raise UnsupportedFormat(f"{path}: label maps must be 8/16-bit single-channel PNG")
    im = _decode(data, path)
    return np.asarray(im).astype(np.int32)


def write_labelmap(labels, path) -> None:
    """Write a label map as 16-bit grayscale PNG (IDs up to 65535)."""
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ParameterError("label map must be 2-D")
    if arr.size and (arr.min() < 0 or arr.max() > 65535):
        raise UnsupportedFormat("label IDs must lie in [0, 65535] for 16-bit PNG")
    im = Image.fromarray(np.ascontiguousarray(arr.astype(np.uint16)))
    _save(im, path)


def _save(im: Image.Image, path) -> None:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        im.save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


# -- reports ---------------------------------------------------------------


def _is_number(v) -> bool:
    return isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool)


def format_value(v):
    """Numbers to 6 significant digits; integers and strings unchanged."""
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            return v
        return float(f"{v:.6g}")
    return v


def format_rows(rows: Sequence[dict]) -> list[dict]:
    """Check that rows share one column layout and format their numbers."""
    rows = list(rows)
    if rows:
        columns = list(rows[0])
        for i, row in enumerate(rows):
            if list(row) != columns:
                raise HeterogeneousRows(f"row {i} has columns {list(row)}, expected {columns}")
    return [{k: format_value(v) for k, v in row.items()} for row in rows]


def summary_row(rows: Sequence[dict]) -> dict:
    """``mean ± std`` per numeric column, e.g. ``0.043 ± 0.031``.

    The first non-numeric column is labelled ``mean ± std``; other text
    columns are left blank. When every column is numeric the label replaces
    the first column so the row stays recognisable.
    """
    rows = list(rows)
    if not rows:
        return {}
    out = {}
    labelled = False
    for key in rows[0]:
        values = [r[key] for r in rows]
        if all(_is_number(v) for v in values):
            arr = np.asarray(values, dtype=np.float64)
            std = arr.std(ddof=1) if len(arr) > 1 else 0.0
            out[key] = f"{arr.mean():.3f} ± {std:.3f}"
        elif not labelled:
            out[key] = "mean ± std"
            labelled = True
        else:
            out[key] = ""
    if not labelled:
        out[next(iter(out))] = "mean ± std"
    return out


def _csv_cell(v) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def render_report(rows: Iterable[dict], fmt: str = "csv", summary: bool = False, columns=None) -> str:
    rows = format_rows(rows)
    if summary and rows:
        rows.append(summary_row(rows))
    if fmt == "json":
        return json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    if fmt != "csv":
        raise ParameterError(f"unknown report format {fmt!r}")
    buf = _io.StringIO()
    header = list(rows[0]) if rows else list(columns or [])
    writer = csv.writer(buf, lineterminator="\r\n")
    if header:
        writer.writerow(header)
    for row in rows:
        writer.writerow([_csv_cell(row[k]) for k in header])
    return buf.getvalue()


def write_report(rows: Iterable[dict], fmt: str, path, summary: bool = False, columns=None) -> None:
    """Write rows as a JSON array of objects or an RFC 4180 CSV table.

    ``columns`` names the CSV header when ``rows`` is empty.
    """
    text = render_report(rows, fmt, summary, columns)
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _parse_cell(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_report(path) -> list[dict]:
    """Parse a report written by :func:`write_report` (format from the suffix)."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc
    if path.suffix.lower() == ".json":
        return json.loads(text)
    reader = csv.DictReader(_io.StringIO(text, newline=""))
    return [{k: _parse_cell(v) for k, v in row.items()} for row in reader]
