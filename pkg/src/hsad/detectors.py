"""Anomaly detectors: RX baselines and the collaborative-representation family.

Per-pixel detectors (LRX, CRD, Local PCAroCRD) and ensemble members (ERCRD)
accept ``threads``; rows and members are farmed out to a thread pool and
written back by index, so results never depend on scheduling.
"""
from __future__ import annotations

import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    DualWindowSpec,
    HsiCube,
    PixelMatrix,
    ScoreMap,
    cube_to_matrix,
    matrix_to_score_map,
    mirror_pad,
    window_neighbourhoods,
)
from .errors import ParameterError
from .linalg import (
    RidgeParams,
    cholesky_solve,
    covariance_ridge,
    mahalanobis_scores,
    pca_top_components,
    ridge_residuals,
    sample_mean_cov,
)
from .splitmix import MASK64, member_seed, partial_fisher_yates

__all__ = [
    "CrdParams",
    "PcaroParams",
    "ErcrdParams",
    "grx",
    "lrx",
    "ssrx",
    "crd",
    "global_pcaro_crd",
    "local_pcaro_crd",
    "random_subsample",
    "rcrd_single",
    "ercrd",
    "ercrd_member_seeds",
]

AGGREGATES = ("raw-sum", "normalized-sum")


@dataclass(frozen=True)
class CrdParams:
    window: DualWindowSpec
    ridge: RidgeParams = field(default_factory=RidgeParams)


@dataclass(frozen=True)
class PcaroParams:
    """Global (``window=None``) or local PCAroCRD settings.

    ``num_components=None`` selects the defaults: ``min(20, d, n)`` for the
    global variant and ``min(d, s) // 2`` for the local one.
    """

    ridge: RidgeParams = field(default_factory=RidgeParams)
    num_components: int | None = None
    window: DualWindowSpec | None = None
    center: bool = False


@dataclass(frozen=True)
class ErcrdParams:
    subsample: int = 10
    ensemble: int = 20
    ridge: RidgeParams = field(default_factory=RidgeParams)
    master_seed: int = 0
    aggregate: str = "raw-sum"

    def __post_init__(self):
        if self.subsample < 1:
            raise ParameterError("subsample size r must be >= 1")
        if self.ensemble < 1:
            raise ParameterError("ensemble size T must be >= 1")
        if not 0 <= self.master_seed <= MASK64:
            raise ParameterError("master_seed must be a 64-bit unsigned integer")
        if self.aggregate not in AGGREGATES:
            raise ParameterError(f"aggregate must be one of {AGGREGATES}")


def _map_ordered(fn, items, threads):
    items = list(items)
    if not threads or threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _matrix(X) -> PixelMatrix:
    if isinstance(X, HsiCube):
        return cube_to_matrix(X)
    return X


def _cube(cube) -> HsiCube:
    if isinstance(cube, PixelMatrix):
        h, w = cube.origin_shape
        return HsiCube(cube.values.reshape(cube.bands, h, w))
    return cube


def _padded(cube: HsiCube, window: DualWindowSpec) -> np.ndarray:
    return mirror_pad(cube, window.margin).values


def _nonneg(scores: np.ndarray) -> np.ndarray:
    # Quadratic forms can round to tiny negatives.
    return np.maximum(scores, 0.0)


# --- RX family -----------------------------------------------------------------


def _rx_scores(A: np.ndarray, normalization: str = "1/n") -> np.ndarray:
    mean, cov = sample_mean_cov(A, normalization)
    ridge = covariance_ridge(cov, float(np.mean(A**2)))
    return _nonneg(mahalanobis_scores(A, mean, cov, ridge))


def grx(X, normalization: str = "1/n") -> ScoreMap:
    """Global RX: Mahalanobis distance to the scene-wide mean and covariance."""
    X = _matrix(X)
    if X.pixels < 2:
        raise ParameterError("GRX needs at least two pixels")
    return matrix_to_score_map(_rx_scores(X.values, normalization), X.origin_shape)


def lrx(cube, window: DualWindowSpec, normalization: str = "1/n", threads: int | None = None) -> ScoreMap:
    """Local RX with statistics from each pixel's dual-window annulus."""
    cube = _cube(cube)
    d, s = cube.bands, window.size
    if s < d + 1:
        warnings.warn(
            f"dual window yields {s} samples for {d} bands; the local covariance is singular "
            "and only the diagonal loading keeps it invertible",
            stacklevel=2,
        )
    padded = _padded(cube, window)
    denom = s if normalization == "1/n" else s - 1

    def row_scores(row):
        nbs = window_neighbourhoods(padded, row, cube.width, window)
        out = np.empty(cube.width)
        for col in range(cube.width):
            nb = nbs[col]
            mean = nb.mean(axis=1)
            centered = nb - mean[:, None]
            cov = centered @ centered.T / denom
            cov = 0.5 * (cov + cov.T)
            ridge = covariance_ridge(cov, float(np.mean(nb**2)))
            x = cube.values[:, row, col][:, None]
            out[col] = mahalanobis_scores(x, mean, cov, ridge)[0]
        return out

    rows = _map_ordered(row_scores, range(cube.height), threads)
    return ScoreMap(_nonneg(np.vstack(rows)))


def ssrx(X, remove_top: int = 5, normalization: str = "1/n") -> ScoreMap:
    """Subspace RX: GRX after discarding the ``remove_top`` highest-variance directions."""
    X = _matrix(X)
    d = X.bands
    if int(remove_top) != remove_top or not 0 <= remove_top < d:
        raise ParameterError(f"remove_top must be in [0, {d - 1}], got {remove_top}")
    basis = pca_top_components(X.values, min(d, X.pixels), mode="column-space", center=True)
    kept = basis.components[:, remove_top:]
    if kept.shape[1] == 0:
        raise ParameterError("no principal directions left after removal")
    projected = kept.T @ (X.values - X.values.mean(axis=1, keepdims=True))
    return matrix_to_score_map(_rx_scores(projected, normalization), X.origin_shape)


# --- collaborative representation ------------------------------------------------


def _ridge_residual(dictionary: np.ndarray, x: np.ndarray, lam: float, tikhonov=None) -> float:
    gram = dictionary.T @ dictionary
    diag = np.diag_indices_from(gram)
    gram[diag] += lam if tikhonov is None else lam * tikhonov**2
    alpha = cholesky_solve(gram, dictionary.T @ x)
    return float(np.linalg.norm(x - dictionary @ alpha))


def crd(cube, params: CrdParams, threads: int | None = None) -> ScoreMap:
    """Collaborative representation against each pixel's dual-window neighbourhood."""
    cube = _cube(cube)
    window, lam = params.window, params.ridge.lam
    padded = _padded(cube, window)

    def row_scores(row):
        nbs = window_neighbourhoods(padded, row, cube.width, window)
        x = cube.values[:, row, :]
        return np.array([_ridge_residual(nbs[c], x[:, c], lam) for c in range(cube.width)])

    return ScoreMap(np.vstack(_map_ordered(row_scores, range(cube.height), threads)))


def _tikhonov_weights(x: np.ndarray, atoms: np.ndarray) -> np.ndarray:
    return np.linalg.norm(atoms - x[:, None], axis=0)


def global_pcaro_crd(X, params: PcaroParams = PcaroParams(), threads: int | None = None) -> ScoreMap:
    """Global PCAroCRD: distance-weighted ridge on the scene's top spatial principal components."""
    X = _matrix(X)
    d, n = X.values.shape
    m = params.num_components if params.num_components is not None else min(20, d, n)
    if not 1 <= m <= min(d, n):
        raise ParameterError(f"num_components must be in [1, {min(d, n)}], got {m}")
    basis = pca_top_components(X.values, m, mode="row-space", center=params.center)
    atoms = X.values @ basis.components  # transformed scene, first m columns
    gamma = cdist(X.values.T, atoms.T)  # n x m
    gram0 = atoms.T @ atoms
    rhs = atoms.T @ X.values
    lam = params.ridge.lam
    diag = np.diag_indices(m)

    def chunk_scores(bounds):
        lo, hi = bounds
        out = np.empty(hi - lo)
        for i in range(lo, hi):
            gram = gram0.copy()
            gram[diag] += lam * gamma[i] ** 2
            alpha = cholesky_solve(gram, rhs[:, i])
            out[i - lo] = np.linalg.norm(X.values[:, i] - atoms @ alpha)
        return out

    step = max(1, X.origin_shape[1])
    chunks = [(lo, min(lo + step, n)) for lo in range(0, n, step)]
    scores = np.concatenate(_map_ordered(chunk_scores, chunks, threads))
    return matrix_to_score_map(scores, X.origin_shape)


def local_pcaro_crd(cube, params: PcaroParams, threads: int | None = None) -> ScoreMap:
    """Local PCAroCRD: per-pixel PCA of the dual-window neighbourhood, then weighted ridge."""
    cube = _cube(cube)
    window = params.window
    if window is None:
        raise ParameterError("local PCAroCRD needs a dual window")
    d, s = cube.bands, window.size
    k = params.num_components if params.num_components is not None else max(1, min(d, s) // 2)
    if not 1 <= k <= min(d, s):
        raise ParameterError(f"num_components must be in [1, {min(d, s)}], got {k}")
    lam, center = params.ridge.lam, params.center
    padded = _padded(cube, window)

    def row_scores(row):
        nbs = window_neighbourhoods(padded, row, cube.width, window)
        out = np.empty(cube.width)
        for col in range(cube.width):
            nb = nbs[col]
            x = cube.values[:, row, col]
            basis = pca_top_components(nb, k, mode="row-space", center=center)
            atoms = nb @ basis.components
            out[col] = _ridge_residual(atoms, x, lam, _tikhonov_weights(x, atoms))
        return out

    return ScoreMap(np.vstack(_map_ordered(row_scores, range(cube.height), threads)))


# --- random sub-sampling and the ensemble ---------------------------------------------


def random_subsample(X, r: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``r`` distinct pixels drawn uniformly; returns ``(dictionary d x r, indices)``."""
    X = _matrix(X)
    if int(r) != r or not 1 <= r <= X.pixels:
        raise ParameterError(f"subsample size must be in [1, {X.pixels}], got {r}")
    if not 0 <= int(seed) <= MASK64:
        raise ParameterError("seed must be a 64-bit unsigned integer")
    idx = np.array(partial_fisher_yates(X.pixels, int(r), int(seed)), dtype=np.int64)
    return X.values[:, idx], idx


def _rcrd_residuals(values: np.ndarray, dictionary: np.ndarray, ridge: RidgeParams) -> np.ndarray:
    return ridge_residuals(dictionary, values, ridge)


def rcrd_single(X, r: int, ridge: RidgeParams = RidgeParams(), seed: int = 0) -> ScoreMap:
    """One random-dictionary detector: a single ridge solve shared by every pixel."""
    X = _matrix(X)
    dictionary, _ = random_subsample(X, r, seed)
    return matrix_to_score_map(_rcrd_residuals(X.values, dictionary, ridge), X.origin_shape)


def ercrd_member_seeds(params: ErcrdParams) -> list[int]:
    return [member_seed(params.master_seed, t) for t in range(params.ensemble)]


def _minmax(v: np.ndarray) -> np.ndarray:
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.zeros_like(v)
    return (v - lo) / (hi - lo)


def ercrd(X, params: ErcrdParams = ErcrdParams(), member_seeds=None, threads: int | None = None) -> ScoreMap:
    """Ensemble of ``T`` random-dictionary detectors, scores summed per pixel.

    ``member_seeds`` overrides the seeds derived from ``params.master_seed``.
    """
    X = _matrix(X)
    seeds = ercrd_member_seeds(params) if member_seeds is None else [int(s) for s in member_seeds]
    if len(seeds) != params.ensemble:
        raise ParameterError(f"expected {params.ensemble} member seeds, got {len(seeds)}")
    if not 1 <= params.subsample <= X.pixels:
        raise ParameterError(f"subsample size must be in [1, {X.pixels}], got {params.subsample}")

    def member(seed):
        dictionary, _ = random_subsample(X, params.subsample, seed)
        delta = _rcrd_residuals(X.values, dictionary, params.ridge)
        return _minmax(delta) if params.aggregate == "normalized-sum" else delta

    total = np.zeros(X.pixels)
    for delta in _map_ordered(member, seeds, threads):
        total += delta
    return matrix_to_score_map(total, X.origin_shape)
