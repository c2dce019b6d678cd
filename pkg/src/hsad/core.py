"""Data model for hyperspectral scenes, masks, score maps and dual windows.

Arrays are stored read-only; every container validates on construction.
Pixel order is row-major everywhere: pixel ``j`` sits at
``(j // width, j % width)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

__all__ = [
    "HsiCube",
    "PixelMatrix",
    "GroundTruthMask",
    "ScoreMap",
    "DualWindowSpec",
    "cube_to_matrix",
    "matrix_to_cube",
    "matrix_to_score_map",
    "mirror_pad",
    "dual_window_offsets",
    "extract_dual_window",
]


def _frozen(values, dtype=np.float64) -> np.ndarray:
    arr = np.array(values, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class HsiCube:
    """A hyperspectral scene indexed ``(band, row, col)``."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 3 or min(arr.shape) < 1:
            raise ParameterError(f"cube must be a non-empty 3-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("cube contains non-finite values")
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_hwd(cls, values) -> "HsiCube":
        """Build from an ``(row, col, band)`` array, the layout most imaging code uses."""
        return cls(np.moveaxis(np.asarray(values, dtype=np.float64), -1, 0))

    @property
    def bands(self) -> int:
        return self.values.shape[0]

    @property
    def height(self) -> int:
        return self.values.shape[1]

    @property
    def width(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> tuple[int, int]:
        return self.height, self.width


@dataclass(frozen=True, eq=False)
class PixelMatrix:
    """Unfolded scene: a ``bands x pixels`` matrix, one spectrum per column."""

    values: np.ndarray
    origin_shape: tuple[int, int]

    def __post_init__(self):
        arr = _frozen(self.values)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ParameterError(f"pixel matrix must be a non-empty 2-D array, got shape {arr.shape}")
        h, w = (int(v) for v in self.origin_shape)
        if h < 1 or w < 1 or h * w != arr.shape[1]:
            raise ParameterError(
                f"origin shape {self.origin_shape} does not match {arr.shape[1]} pixels"
            )
        if not np.all(np.isfinite(arr)):
            raise ParameterError("pixel matrix contains non-finite values")
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "origin_shape", (h, w))

    @property
    def bands(self) -> int:
        return self.values.shape[0]

    @property
    def pixels(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class GroundTruthMask:
    """Binary anomaly labels on the image grid (1 = anomaly)."""

    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim != 2 or min(raw.shape) < 1:
            raise ParameterError(f"mask must be a non-empty 2-D array, got shape {raw.shape}")
        if not np.all((raw == 0) | (raw == 1)):
            raise ParameterError("mask entries must be 0 or 1")
        object.__setattr__(self, "labels", _frozen(raw, dtype=np.uint8))

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.labels.shape

    @property
    def anomaly_count(self) -> int:
        return int(self.labels.sum())


@dataclass(frozen=True, eq=False)
class ScoreMap:
    """Per-pixel nonnegative anomaly scores on the image grid."""

    scores: np.ndarray

    def __post_init__(self):
        arr = _frozen(self.scores)
        if arr.ndim != 2 or min(arr.shape) < 1:
            raise ParameterError(f"score map must be a non-empty 2-D array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ParameterError("score map contains non-finite values")
        if np.any(arr < 0):
            raise ParameterError("score map contains negative values")
        object.__setattr__(self, "scores", arr)

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.scores.shape


@dataclass(frozen=True)
class DualWindowSpec:
    """Concentric inner/outer square windows; both sizes odd, ``w_out > w_in``."""

    w_in: int
    w_out: int

    def __post_init__(self):
        w_in, w_out = self.w_in, self.w_out
        if int(w_in) != w_in or int(w_out) != w_out:
            raise ParameterError("window sizes must be integers")
        if w_in < 1 or w_in % 2 == 0:
            raise ParameterError(f"inner window must be an odd integer >= 1, got {w_in}")
        if w_out < 3 or w_out % 2 == 0:
            raise ParameterError(f"outer window must be an odd integer >= 3, got {w_out}")
        if w_out <= w_in:
            raise ParameterError(f"outer window ({w_out}) must exceed inner window ({w_in})")

    @property
    def size(self) -> int:
        """Number of neighbourhood pixels ``w_out**2 - w_in**2``."""
        return self.w_out**2 - self.w_in**2

    @property
    def margin(self) -> int:
        return (self.w_out - 1) // 2


def cube_to_matrix(cube: HsiCube) -> PixelMatrix:
    return PixelMatrix(cube.values.reshape(cube.bands, -1), cube.shape)


def matrix_to_cube(matrix: PixelMatrix) -> HsiCube:
    return HsiCube(matrix.values.reshape(matrix.bands, *matrix.origin_shape))


def matrix_to_score_map(scores, shape) -> ScoreMap:
    """Place a length-``h*w`` score vector on the grid in row-major order."""
    vec = np.asarray(scores, dtype=np.float64)
    h, w = shape
    if vec.ndim != 1 or vec.size != h * w:
        raise ParameterError(f"expected {h * w} scores for shape {shape}, got {vec.shape}")
    return ScoreMap(vec.reshape(h, w))


def mirror_pad(cube: HsiCube, margin: int) -> HsiCube:
    """Reflect the cube across each spatial edge without repeating the edge pixel."""
    if margin < 0:
        raise ParameterError("margin must be nonnegative")
    if margin >= min(cube.height, cube.width):
        raise ParameterError(
            f"margin {margin} too large for a {cube.height}x{cube.width} image"
        )
    if margin == 0:
        return cube
    padded = np.pad(cube.values, ((0, 0), (margin, margin), (margin, margin)), mode="reflect")
    return HsiCube(padded)


def dual_window_offsets(spec: DualWindowSpec) -> tuple[np.ndarray, np.ndarray]:
    """Row/col offsets of the annulus, row-major over the outer box, inner box skipped."""
    a, b = spec.margin, (spec.w_in - 1) // 2
    dy, dx = np.mgrid[-a : a + 1, -a : a + 1]
    keep = (np.abs(dy) > b) | (np.abs(dx) > b)
    return dy[keep], dx[keep]


def extract_dual_window(padded: HsiCube, center: tuple[int, int], spec: DualWindowSpec) -> np.ndarray:
    """Neighbourhood matrix (``bands x s``) of an unpadded pixel.

    ``padded`` must be the scene mirror-padded by ``spec.margin``.
    """
    m = spec.margin
    row, col = center
    h, w = padded.height - 2 * m, padded.width - 2 * m
    if not (0 <= row < h and 0 <= col < w):
        raise ParameterError(f"center {center} outside the {h}x{w} image")
    dy, dx = dual_window_offsets(spec)
    return padded.values[:, row + m + dy, col + m + dx]


def window_neighbourhoods(padded: np.ndarray, row: int, width: int, spec: DualWindowSpec) -> np.ndarray:
    """All neighbourhoods of one image row, stacked as ``(width, bands, s)``."""
    m = spec.margin
    dy, dx = dual_window_offsets(spec)
    cols = np.arange(width)[:, None] + m + dx[None, :]
    rows = np.broadcast_to(row + m + dy, cols.shape)
    return np.moveaxis(padded[:, rows, cols], 0, 1)
