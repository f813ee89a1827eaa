"""Plain-text point lists, XYZ clouds, CSV export and binary PPM images."""

from __future__ import annotations

import csv
import io as _io
import re
from pathlib import Path

import numpy as np

from .core import ValidationError


class ParseError(ValidationError):
    def __init__(self, path, line, msg):
        super().__init__(f"{path}:{line}: {msg}")
        self.path = path
        self.line = line


def _data_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.split("#", 1)[0].strip()
            if text:
                yield lineno, text


def read_points(path) -> np.ndarray:
    """One coordinate per line; blank lines and ``#`` comments are skipped."""
    vals = []
    for lineno, text in _data_lines(path):
        try:
            v = float(text)
        except ValueError:
            raise ParseError(path, lineno, f"not a number: {text!r}") from None
        if not np.isfinite(v):
            raise ParseError(path, lineno, f"non-finite value: {text!r}")
        vals.append(v)
    return np.array(vals, dtype=float)


def write_points(path, values, header: str | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for v in np.asarray(values, dtype=float).reshape(-1):
            fh.write(f"{float(v)!r}\n")


def points_csv(values) -> str:
    """CSV text with columns ``i,x``."""
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["i", "x"])
    for i, v in enumerate(np.asarray(values, dtype=float).reshape(-1)):
        w.writerow([i, repr(float(v))])
    return buf.getvalue()


def read_cloud(path, dim: int | None = None) -> np.ndarray:
    """Whitespace-separated coordinates, one point per line."""
    rows = []
    width = dim
    for lineno, text in _data_lines(path):
        parts = text.replace(",", " ").split()
        if width is None:
            width = len(parts)
        if len(parts) != width:
            raise ParseError(path, lineno, f"expected {width} columns, got {len(parts)}")
        try:
            row = [float(t) for t in parts]
        except ValueError:
            raise ParseError(path, lineno, f"not numeric: {text!r}") from None
        if not np.all(np.isfinite(row)):
            raise ParseError(path, lineno, "non-finite coordinate")
        rows.append(row)
    return np.array(rows, dtype=float).reshape(-1, width or (dim or 1))


def write_cloud(path, points) -> None:
    P = np.asarray(points, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        for row in P:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


_PPM_TOKEN = re.compile(rb"\s*(#[^\n]*\n\s*)*(\S+)")


def read_ppm(path) -> np.ndarray:
    """Binary (P6) 8-bit PPM as an ``(h, w, 3)`` uint8 array."""
    data = Path(path).read_bytes()
    pos = 0
    header = []
    for _ in range(4):
        mt = _PPM_TOKEN.match(data, pos)
        if mt is None:
            raise ValidationError(f"{path}: truncated PPM header")
        header.append(mt.group(2))
        pos = mt.end()
    magic, w, h, maxval = header
    if magic != b"P6":
        raise ValidationError(f"{path}: not a binary PPM (magic {magic!r})")
    w, h, maxval = int(w), int(h), int(maxval)
    if maxval != 255:
        raise ValidationError(f"{path}: only 8-bit PPM (maxval 255) is supported")
    pos += 1  # single whitespace byte before the raster
    raster = data[pos:pos + w * h * 3]
    if len(raster) != w * h * 3:
        raise ValidationError(f"{path}: raster has {len(raster)} bytes, "
                              f"expected {w * h * 3}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(h, w, 3).copy()


def write_ppm(path, rgb8) -> None:
    arr = np.asarray(rgb8)
    if arr.dtype != np.uint8 or arr.ndim != 3 or arr.shape[2] != 3:
        raise ValidationError("PPM raster must be an (h, w, 3) uint8 array")
    h, w, _ = arr.shape
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(np.ascontiguousarray(arr).tobytes())


def read_image_file(path) -> np.ndarray:
    """PPM natively; other formats (e.g. PNG) through Pillow."""
    if str(path).lower().endswith((".ppm", ".pnm")):
        return read_ppm(path)
    from PIL import Image as PILImage

    with PILImage.open(path) as im:
        return np.asarray(im.convert("RGB"), dtype=np.uint8).copy()


def write_image_file(path, rgb8) -> None:
    if str(path).lower().endswith((".ppm", ".pnm")):
        write_ppm(path, rgb8)
        return
    from PIL import Image as PILImage

    PILImage.fromarray(np.asarray(rgb8, dtype=np.uint8), "RGB").save(path)
