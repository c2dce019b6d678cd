"""Readers and writers: ENVI rasters, the internal ``HSAD0001`` cube format,
CSV matrices/masks and 16-bit PGM renderings.

All readers reject short or malformed input instead of truncating.
"""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import GroundTruthMask, HsiCube, PixelMatrix, ScoreMap
from .errors import FormatError

__all__ = [
    "EnviHeader",
    "parse_envi_header",
    "format_envi_header",
    "read_envi",
    "write_envi",
    "read_envi_file",
    "write_cube",
    "read_cube",
    "score_map_to_cube",
    "cube_to_score_map",
    "write_pgm",
    "read_csv_matrix",
    "write_csv_matrix",
    "read_mask_csv",
    "write_mask_csv",
    "load_cube",
    "load_mask",
    "load_scores",
]

MAGIC = b"HSAD0001"

# ENVI "data type" codes supported here.
ENVI_DTYPES = {4: "f4", 5: "f8", 12: "u2"}
INTERLEAVES = ("bsq", "bil", "bip")


@dataclass(frozen=True)
class EnviHeader:
    samples: int
    lines: int
    bands: int
    interleave: str = "bsq"
    data_type: int = 4
    byte_order: int = 0
    header_offset: int = 0

    def __post_init__(self):
        if min(self.samples, self.lines, self.bands) < 1:
            raise FormatError("samples, lines and bands must be positive")
        if self.interleave not in INTERLEAVES:
            raise FormatError(f"unsupported interleave {self.interleave!r}")
        if self.data_type not in ENVI_DTYPES:
            raise FormatError(f"unsupported ENVI data type {self.data_type}")
        if self.byte_order not in (0, 1):
            raise FormatError(f"byte order must be 0 or 1, got {self.byte_order}")
        if self.header_offset < 0:
            raise FormatError("header offset must be nonnegative")

    @property
    def dtype(self) -> np.dtype:
        return np.dtype(("<" if self.byte_order == 0 else ">") + ENVI_DTYPES[self.data_type])

    @property
    def data_bytes(self) -> int:
        return self.samples * self.lines * self.bands * self.dtype.itemsize


_REQUIRED = ("samples", "lines", "bands", "data type")


def parse_envi_header(text: str) -> EnviHeader:
    lines = text.splitlines()
    if not lines or lines[0].strip().upper() != "ENVI":
        raise FormatError("ENVI header must start with 'ENVI'")
    body = "\n".join(lines[1:])
    # Drop brace blocks (band names, wavelengths, ...) that may span lines.
    body = re.sub(r"\{[^}]*\}", "{}", body, flags=re.S)
    fields = {}
    for line in body.splitlines():
        if "=" not in line or line.lstrip().startswith(";"):
            continue
        key, value = line.split("=", 1)
        fields[key.strip().lower()] = value.strip()
    missing = [k for k in _REQUIRED if k not in fields]
    if missing:
        raise FormatError(f"ENVI header missing {', '.join(missing)}")
    try:
        return EnviHeader(
            samples=int(fields["samples"]),
            lines=int(fields["lines"]),
            bands=int(fields["bands"]),
            interleave=fields.get("interleave", "bsq").lower(),
            data_type=int(fields["data type"]),
            byte_order=int(fields.get("byte order", 0)),
            header_offset=int(fields.get("header offset", 0)),
        )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"malformed ENVI header value: {exc}") from exc


def format_envi_header(header: EnviHeader) -> str:
    return (
        "ENVI\n"
        f"samples = {header.samples}\n"
        f"lines = {header.lines}\n"
        f"bands = {header.bands}\n"
        f"header offset = {header.header_offset}\n"
        "file type = ENVI Standard\n"
        f"data type = {header.data_type}\n"
        f"interleave = {header.interleave}\n"
        f"byte order = {header.byte_order}\n"
    )


def read_envi(header_text: str, raw_bytes: bytes) -> HsiCube:
    header = parse_envi_header(header_text)
    need = header.header_offset + header.data_bytes
    if len(raw_bytes) < need:
        raise FormatError(f"raster holds {len(raw_bytes)} bytes, header requires {need}")
    flat = np.frombuffer(raw_bytes, dtype=header.dtype, count=header.data_bytes // header.dtype.itemsize,
                         offset=header.header_offset)
    d, h, w = header.bands, header.lines, header.samples
    if header.interleave == "bsq":
        arr = flat.reshape(d, h, w)
    elif header.interleave == "bil":
        arr = flat.reshape(h, d, w).transpose(1, 0, 2)
    else:
        arr = flat.reshape(h, w, d).transpose(2, 0, 1)
    return HsiCube(arr.astype(np.float64))


def write_envi(cube: HsiCube, interleave: str = "bsq", data_type: int = 4, byte_order: int = 0) -> tuple[str, bytes]:
    header = EnviHeader(cube.width, cube.height, cube.bands, interleave, data_type, byte_order)
    v = cube.values
    if interleave == "bil":
        v = v.transpose(1, 0, 2)
    elif interleave == "bip":
        v = v.transpose(1, 2, 0)
    if data_type == 12:
        v = np.clip(np.rint(v), 0, 65535)
    return format_envi_header(header), np.ascontiguousarray(v, dtype=header.dtype).tobytes()


def _envi_data_path(hdr: Path) -> Path:
    for candidate in (hdr.with_suffix(""), hdr.with_suffix(".img"), hdr.with_suffix(".raw"),
                      hdr.with_suffix(".dat"), hdr.with_suffix(".bsq"), hdr.with_suffix(".bil"),
                      hdr.with_suffix(".bip")):
        if candidate != hdr and candidate.is_file():
            return candidate
    raise FileNotFoundError(f"no raster data file next to {hdr}")


def read_envi_file(path) -> HsiCube:
    path = Path(path)
    hdr = path if path.suffix.lower() == ".hdr" else path.with_suffix(".hdr")
    data = path if path != hdr else _envi_data_path(hdr)
    return read_envi(hdr.read_text(), data.read_bytes())


# --- internal format ----------------------------------------------------------


def write_cube(cube: HsiCube) -> bytes:
    """``HSAD0001`` + uint32 LE (h, w, d) + float32 LE samples, band-sequential."""
    head = MAGIC + struct.pack("<III", cube.height, cube.width, cube.bands)
    return head + np.ascontiguousarray(cube.values, dtype="<f4").tobytes()


def read_cube(data: bytes) -> HsiCube:
    if len(data) < 20 or data[:8] != MAGIC:
        raise FormatError("not an HSAD0001 cube (bad magic)")
    h, w, d = struct.unpack("<III", data[8:20])
    need = 20 + 4 * h * w * d
    if len(data) != need:
        raise FormatError(f"cube payload is {len(data)} bytes, expected {need}")
    arr = np.frombuffer(data, dtype="<f4", offset=20).reshape(d, h, w)
    return HsiCube(arr.astype(np.float64))


def score_map_to_cube(scores: ScoreMap) -> HsiCube:
    return HsiCube(scores.scores[None, :, :])


def cube_to_score_map(cube: HsiCube) -> ScoreMap:
    if cube.bands != 1:
        raise FormatError(f"score rasters have one band, got {cube.bands}")
    return ScoreMap(cube.values[0])


# --- PGM ------------------------------------------------------------------------


def write_pgm(scores: ScoreMap, normalize: bool = True) -> bytes:
    """Binary 16-bit PGM (P5, big-endian samples)."""
    s = scores.scores
    if normalize:
        lo, hi = s.min(), s.max()
        s = np.zeros_like(s) if hi <= lo else (s - lo) / (hi - lo) * 65535.0
    pixels = np.clip(np.rint(s), 0, 65535).astype(">u2")
    head = f"P5\n{scores.width} {scores.height}\n65535\n".encode("ascii")
    return head + pixels.tobytes()


# --- CSV ------------------------------------------------------------------------


def _parse_rows(text: str) -> list[list[str]]:
    return [[c.strip() for c in line.split(",")] for line in text.splitlines() if line.strip()]


def _to_float(cell: str) -> float:
    try:
        return float(cell)
    except ValueError as exc:
        raise FormatError(f"non-numeric CSV cell {cell!r}") from exc


def read_csv_matrix(text: str) -> PixelMatrix:
    """First line ``h,w``; then one row per pixel (row-major), one column per band."""
    rows = _parse_rows(text)
    if not rows or len(rows[0]) != 2:
        raise FormatError("matrix CSV must start with an 'h,w' line")
    try:
        h, w = int(rows[0][0]), int(rows[0][1])
    except ValueError as exc:
        raise FormatError("matrix CSV shape line must hold two integers") from exc
    body = rows[1:]
    if len(body) != h * w:
        raise FormatError(f"expected {h * w} pixel rows, found {len(body)}")
    widths = {len(r) for r in body}
    if len(widths) != 1:
        raise FormatError("ragged rows in matrix CSV")
    values = np.array([[_to_float(c) for c in r] for r in body], dtype=np.float64)
    return PixelMatrix(values.T, (h, w))


def write_csv_matrix(matrix: PixelMatrix) -> str:
    h, w = matrix.origin_shape
    lines = [f"{h},{w}"]
    lines += [",".join(repr(float(v)) for v in col) for col in matrix.values.T]
    return "\n".join(lines) + "\n"


def read_mask_csv(text: str) -> GroundTruthMask:
    rows = _parse_rows(text)
    if not rows:
        raise FormatError("empty mask CSV")
    if len({len(r) for r in rows}) != 1:
        raise FormatError("ragged rows in mask CSV")
    values = np.array([[_to_float(c) for c in r] for r in rows])
    if not np.all((values == 0) | (values == 1)):
        raise FormatError("mask CSV entries must be 0 or 1")
    return GroundTruthMask(values.astype(np.uint8))


def write_mask_csv(mask: GroundTruthMask) -> str:
    return "\n".join(",".join(str(int(v)) for v in row) for row in mask.labels) + "\n"


# --- path-level helpers used by the CLI --------------------------------------------


def load_cube(path) -> HsiCube:
    """Dispatch on extension: ``.hsad`` internal, ``.hdr``/ENVI, ``.csv`` matrix."""
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".hsad":
        return read_cube(path.read_bytes())
    if suffix == ".csv":
        matrix = read_csv_matrix(path.read_text())
        return HsiCube(matrix.values.reshape(matrix.bands, *matrix.origin_shape))
    if suffix == ".hdr" or path.with_suffix(".hdr").is_file():
        return read_envi_file(path)
    raise FormatError(f"cannot infer raster format of {path}")


def load_mask(path) -> GroundTruthMask:
    path = Path(path)
    if path.suffix.lower() == ".hsad":
        cube = read_cube(path.read_bytes())
        if cube.bands != 1:
            raise FormatError("mask raster must have one band")
        values = cube.values[0]
        if not np.all((values == 0) | (values == 1)):
            raise FormatError("mask raster entries must be 0 or 1")
        return GroundTruthMask(values.astype(np.uint8))
    return read_mask_csv(path.read_text())


def load_scores(path) -> ScoreMap:
    return cube_to_score_map(load_cube(path))
