"""Dense kernels used by the detectors.

Regularized least squares is solved on the (small) dictionary side through a
Cholesky factorization of the Gram system; PCA directions come from the
eigendecomposition of whichever Gram matrix is smaller.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import PixelMatrix
from .errors import NumericalError, ParameterError

__all__ = [
    "RidgeParams",
    "PcaBasis",
    "ridge_solve",
    "ridge_residuals",
    "cholesky_factor",
    "cholesky_solve",
    "pca_top_components",
    "mahalanobis_scores",
    "sample_mean_cov",
    "covariance_ridge",
]

JITTER = 1e-12


@dataclass(frozen=True)
class RidgeParams:
    """Regularization weight of the collaborative representation."""

    lam: float = 1e-6

    def __post_init__(self):
        if not np.isfinite(self.lam) or self.lam < 0:
            raise ParameterError(f"lambda must be finite and >= 0, got {self.lam}")


@dataclass(frozen=True, eq=False)
class PcaBasis:
    components: np.ndarray
    variances: np.ndarray

    @property
    def num_components(self) -> int:
        return self.components.shape[1]


def _as_array(data) -> np.ndarray:
    if isinstance(data, PixelMatrix):
        return data.values
    return np.asarray(data, dtype=np.float64)


def cholesky_factor(gram: np.ndarray):
    """Cholesky factor of a symmetric positive (semi)definite ``gram``.

    On failure the factorization is retried once with ``1e-12 * trace / s``
    added to the diagonal.
    """
    try:
        return scipy.linalg.cho_factor(gram, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        s = gram.shape[0]
        jitter = JITTER * np.trace(gram) / s
        try:
            if not jitter > 0:
                raise np.linalg.LinAlgError("zero trace")
            return scipy.linalg.cho_factor(gram + jitter * np.eye(s), lower=True, check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(
                "Gram system is not positive definite even after jitter; "
                "the dictionary is rank deficient and unregularized"
            ) from exc


def cholesky_solve(gram: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """Solve ``gram @ x = rhs`` through :func:`cholesky_factor`."""
    return scipy.linalg.cho_solve(cholesky_factor(gram), rhs, check_finite=False)


def _checked(dictionary, targets) -> tuple[np.ndarray, np.ndarray, bool]:
    D = _as_array(dictionary)
    T = _as_array(targets)
    if D.ndim != 2:
        raise ParameterError("dictionary must be a matrix")
    vector = T.ndim == 1
    if vector:
        T = T[:, None]
    if T.ndim != 2 or T.shape[0] != D.shape[0] or T.shape[1] < 1:
        raise ParameterError(f"targets shape {T.shape} incompatible with dictionary {D.shape}")
    if not (np.all(np.isfinite(D)) and np.all(np.isfinite(T))):
        raise ParameterError("non-finite input to ridge_solve")
    return D, T, vector


def _regularized_gram(D: np.ndarray, lam: float, tikhonov) -> np.ndarray:
    gram = D.T @ D
    if tikhonov is None:
        gram[np.diag_indices_from(gram)] += lam
    else:
        g = np.asarray(tikhonov, dtype=np.float64)
        if g.shape != (D.shape[1],) or np.any(g < 0) or not np.all(np.isfinite(g)):
            raise ParameterError("tikhonov diagonal must be a finite nonnegative s-vector")
        gram[np.diag_indices_from(gram)] += lam * g**2
    return gram


def ridge_solve(dictionary, targets, params: RidgeParams = RidgeParams(), tikhonov=None) -> np.ndarray:
    """Weights minimizing ``||t - D a||^2 + lam * ||diag(g) a||^2`` per target column.

    ``tikhonov`` is the diagonal ``g`` (identity when omitted). A 1-D target
    returns a 1-D weight vector.
    """
    D, T, vector = _checked(dictionary, targets)
    gram = _regularized_gram(D, params.lam, tikhonov)
    weights = cholesky_solve(gram, D.T @ T)
    return weights[:, 0] if vector else weights


# Targets are processed in column blocks so temporaries stay cache-sized and
# the cost stays linear in the number of pixels.
BLOCK = 512


def ridge_residuals(dictionary, targets, params: RidgeParams = RidgeParams(), tikhonov=None) -> np.ndarray:
    """2-norm reconstruction error of each target column (one factorization)."""
    D, T, _ = _checked(dictionary, targets)
    factor = cholesky_factor(_regularized_gram(D, params.lam, tikhonov))
    out = np.empty(T.shape[1])
    for lo in range(0, T.shape[1], BLOCK):
        block = T[:, lo : lo + BLOCK]
        weights = scipy.linalg.cho_solve(factor, D.T @ block, check_finite=False)
        resid = block - D @ weights
        out[lo : lo + BLOCK] = np.sqrt(np.einsum("ij,ij->j", resid, resid))
    return out


def _orthonormal_completion(vectors: np.ndarray, dim: int, total: int) -> np.ndarray:
    # Extend orthonormal columns deterministically with Gram-Schmidt over the standard basis.
    q, _ = np.linalg.qr(np.hstack([vectors, np.eye(dim)]))
    extra = q[:, vectors.shape[1] : total]
    return np.hstack([vectors, extra])


def _fix_signs(components: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(components), axis=0)
    signs = np.sign(components[idx, np.arange(components.shape[1])])
    signs[signs == 0] = 1.0
    return components * signs


def pca_top_components(data, num: int, mode: str = "row-space", center: bool = False) -> PcaBasis:
    """Top principal directions of a ``rows x cols`` matrix.

    ``row-space`` returns eigenvectors of ``X.T @ X`` (length ``cols``),
    ``column-space`` eigenvectors of ``X @ X.T`` (length ``rows``). The
    eigenproblem is always solved on the smaller Gram matrix and mapped
    through ``X``. ``center`` subtracts the mean observation first (row mean
    for row-space, column mean for column-space). Each component is signed
    so that its largest-magnitude entry is positive.
    """
    X = _as_array(data)
    if X.ndim != 2:
        raise ParameterError("PCA input must be a matrix")
    if not np.all(np.isfinite(X)):
        raise ParameterError("non-finite input to PCA")
    if mode not in ("row-space", "column-space"):
        raise ParameterError(f"unknown PCA mode {mode!r}")
    if int(num) != num or num < 1 or num > min(X.shape):
        raise ParameterError(f"num_components must be in [1, {min(X.shape)}], got {num}")
    if center:
        X = X - X.mean(axis=0 if mode == "row-space" else 1, keepdims=True)
    # Work with A such that the wanted directions are right singular vectors of A.
    A = X if mode == "row-space" else X.T
    rows, cols = A.shape
    if rows < cols:
        evals, evecs = np.linalg.eigh(A @ A.T)
        order = np.argsort(evals)[::-1][:num]
        evals = np.clip(evals[order], 0.0, None)
        sigma = np.sqrt(evals)
        # Eigenvalues carry absolute error ~eps * evals[0]; anything below is rank deficiency.
        tol = max(rows, cols) * np.finfo(float).eps * evals[0]
        good = evals > tol if evals[0] > 0 else np.zeros(num, dtype=bool)
        vecs = (A.T @ evecs[:, order[good]]) / sigma[good]
        if vecs.shape[1]:
            # Mapping amplifies eigenvector error on small singular values; re-orthonormalize
            # while keeping each direction's orientation (positive diagonal of R).
            q, r = np.linalg.qr(vecs)
            signs = np.sign(np.diag(r))
            signs[signs == 0] = 1.0
            vecs = q * signs
        if vecs.shape[1] < num:
            vecs = _orthonormal_completion(vecs, cols, num)
    else:
        evals, evecs = np.linalg.eigh(A.T @ A)
        order = np.argsort(evals)[::-1][:num]
        evals = np.clip(evals[order], 0.0, None)
        vecs = evecs[:, order]
    return PcaBasis(components=_fix_signs(vecs), variances=evals / rows)


def sample_mean_cov(X, normalization: str = "1/n") -> tuple[np.ndarray, np.ndarray]:
    """Mean spectrum and band covariance of the columns of ``X``."""
    A = _as_array(X)
    n = A.shape[1]
    if normalization == "1/n":
        denom = n
    elif normalization == "1/(n-1)":
        if n < 2:
            raise ParameterError("1/(n-1) normalization needs at least two pixels")
        denom = n - 1
    else:
        raise ParameterError(f"unknown normalization {normalization!r}")
    mean = A.mean(axis=1)
    centered = A - mean[:, None]
    cov = centered @ centered.T / denom
    cov = 0.5 * (cov + cov.T)
    return mean, cov


def covariance_ridge(cov: np.ndarray, energy: float, scale: float = 1e-6) -> float:
    """Diagonal loading ``scale * mean(diag cov)`` used by the RX detectors.

    ``energy`` is the mean squared entry of the data the covariance came
    from. When the covariance is numerically null (constant data) a floor
    relative to it keeps the factorization defined.
    """
    ridge = scale * float(np.mean(np.diag(cov)))
    floor = 1e-15 * energy if energy > 0 else 1.0
    return max(ridge, floor)


def mahalanobis_scores(X, mean, covariance, ridge: float = 0.0) -> np.ndarray:
    """``(x - mu)^T (cov + ridge I)^{-1} (x - mu)`` for every column, one factorization."""
    A = _as_array(X)
    mu = np.asarray(mean, dtype=np.float64)
    cov = np.asarray(covariance, dtype=np.float64)
    d = A.shape[0]
    if cov.shape != (d, d) or mu.shape != (d,):
        raise ParameterError("mean/covariance do not match the band count")
    if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-14 * max(1.0, np.abs(cov).max())):
        raise ParameterError("covariance must be symmetric")
    if ridge < 0:
        raise ParameterError("ridge must be nonnegative")
    loaded = cov + ridge * np.eye(d)
    try:
        L = np.linalg.cholesky(loaded)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("covariance is not positive definite; increase the ridge") from exc
    z = scipy.linalg.solve_triangular(L, A - mu[:, None], lower=True, check_finite=False)
    return np.einsum("ij,ij->j", z, z)
