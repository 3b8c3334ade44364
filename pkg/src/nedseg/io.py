"""NetPBM grayscale images, text label maps and CSV outputs."""

from __future__ import annotations

import csv
import math
import os
import re
from pathlib import Path
from typing import Iterable

import numpy as np

from .algebra import GrayImage, Histogram
from .errors import (
    DimensionError,
    FormatError,
    MalformedHeaderError,
    PixelRangeError,
    TruncatedDataError,
    UnsupportedFormatError,
    ZeroMaxvalError,
)
from .evaluation import LabelMap
from .mshi import IterationTrace

PathLike = str | os.PathLike

TRACE_HEADER = ("iteration", "criterion", "entropy")


def _header_tokens(raw: bytes, count: int, pos: int) -> tuple[list[bytes], int]:
    """Scan ``count`` header tokens starting at ``pos``, skipping ``#`` comments.

    Returns the tokens and the offset just past the last one.
    """
    tokens = []
    n = len(raw)
    while len(tokens) < count:
        if pos >= n:
            raise MalformedHeaderError("unexpected end of PGM header")
        c = raw[pos:pos + 1]
        if c == b"#":
            while pos < n and raw[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c.isspace():
            pos += 1
        else:
            start = pos
            while pos < n and not raw[pos:pos + 1].isspace() and raw[pos:pos + 1] != b"#":
                pos += 1
            tokens.append(raw[start:pos])
    return tokens, pos


def _header_int(tok: bytes, what: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise MalformedHeaderError(f"PGM {what} is not an integer: {tok!r}") from None
    if value < 0:
        raise MalformedHeaderError(f"PGM {what} is negative: {value}")
    return value


def read_pgm(path: PathLike) -> GrayImage:
    """Read a P2 (ASCII) or P5 (binary) PGM file.

    ``levels`` is the smallest power of two above ``maxval``; pixel values
    are kept as stored, never rescaled.
    """
    raw = Path(path).read_bytes()
    magic = raw[:2]
    if magic not in (b"P2", b"P5"):
        raise UnsupportedFormatError(f"{path}: not a grayscale PGM (magic {magic!r})")
    if len(raw) > 2 and not raw[2:3].isspace():
        raise MalformedHeaderError(f"{path}: no whitespace after magic number")
    (w_tok, h_tok, max_tok), pos = _header_tokens(raw, 3, 2)
    width = _header_int(w_tok, "width")
    height = _header_int(h_tok, "height")
    maxval = _header_int(max_tok, "maxval")
    if width < 1 or height < 1:
        raise MalformedHeaderError(f"{path}: invalid size {width}x{height}")
    if maxval == 0:
        raise ZeroMaxvalError(f"{path}: maxval is 0")
    if maxval > 65535:
        raise MalformedHeaderError(f"{path}: maxval {maxval} exceeds 65535")
    levels = max(2, 1 << maxval.bit_length())
    n = width * height

    if magic == b"P5":
        # exactly one whitespace byte separates maxval from the raster
        start = pos + 1
        dtype = np.dtype(">u2") if maxval > 255 else np.dtype("u1")
        need = n * dtype.itemsize
        body = raw[start:start + need]
        if len(body) < need:
            raise TruncatedDataError(f"{path}: expected {need} raster bytes, found {len(body)}")
        pixels = np.frombuffer(body, dtype=dtype).astype(np.int64)
    else:
        text = re.sub(rb"#[^\n\r]*", b"", raw[pos:])
        values = text.split()
        if len(values) < n:
            raise TruncatedDataError(f"{path}: expected {n} pixel values, found {len(values)}")
        try:
            pixels = np.array([int(v) for v in values[:n]], dtype=np.int64)
        except ValueError:
            raise FormatError(f"{path}: non-integer pixel value") from None

    if pixels.size and pixels.max() > maxval:
        raise PixelRangeError(f"{path}: pixel value {pixels.max()} exceeds maxval {maxval}")
    return GrayImage(pixels.reshape(height, width), levels)


def write_pgm(image: GrayImage, path: PathLike) -> None:
    """Write ``image`` as binary P5 with ``maxval = levels - 1``."""
    if image.levels > 65536:
        raise ValueError(f"PGM cannot hold {image.levels} levels (max 65536)")
    maxval = image.levels - 1
    dtype = ">u2" if maxval > 255 else "u1"
    header = f"P5\n{image.width} {image.height}\n{maxval}\n".encode("ascii")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(image.data.astype(dtype).tobytes())


def read_labelmap(path: PathLike) -> LabelMap:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty label map")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"{path}: first line must be 'width height'")
    try:
        width, height = int(head[0]), int(head[1])
    except ValueError:
        raise FormatError(f"{path}: first line must be 'width height'") from None
    rows = lines[1:]
    if width < 1 or height < 1:
        raise DimensionError(f"{path}: invalid size {width}x{height}")
    if len(rows) != height:
        raise DimensionError(f"{path}: expected {height} rows, found {len(rows)}")
    data = []
    for i, row in enumerate(rows):
        try:
            values = [int(v) for v in row.split()]
        except ValueError:
            raise FormatError(f"{path}: row {i + 1} has a non-integer label") from None
        if len(values) != width:
            raise DimensionError(f"{path}: row {i + 1} has {len(values)} labels, expected {width}")
        data.append(values)
    arr = np.array(data, dtype=np.int64)
    if arr.min() < 0:
        raise FormatError(f"{path}: negative label")
    return LabelMap(arr)


def write_labelmap(labels: LabelMap, path: PathLike) -> None:
    with open(path, "w") as fh:
        fh.write(f"{labels.width} {labels.height}\n")
        for row in labels.labels:
            fh.write(" ".join(str(int(v)) for v in row) + "\n")


def format_real(x: float) -> str:
    """Fixed-point text with at least 12 decimals and 12 significant digits."""
    if x == 0 or not math.isfinite(x):
        return f"{x:.12f}"
    decimals = max(12, 11 - math.floor(math.log10(abs(x))))
    return f"{x:.{decimals}f}"


def write_trace_csv(trace: IterationTrace, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(TRACE_HEADER)
        for e in trace.entries:
            writer.writerow([e.iteration, format_real(e.criterion), format_real(e.entropy)])


def read_trace_csv(path: PathLike) -> list[tuple[int, float, float]]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != TRACE_HEADER:
            raise FormatError(f"{path}: unexpected trace header {header}")
        return [(int(k), float(c), float(h)) for k, c, h in reader]


def write_histogram_csv(hist: Histogram, path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("level", "count"))
        writer.writerows((v, int(c)) for v, c in enumerate(hist.counts))


def read_histogram_csv(path: PathLike) -> np.ndarray:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        next(reader)
        return np.array([int(c) for _, c in reader], dtype=np.int64)


def write_rows_csv(rows: Iterable[dict], fieldnames: list[str], path: PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
