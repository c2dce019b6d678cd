"""Seeded synthetic hyperspectral scenes with implanted anomalies.

Background pixels are spatially clustered mixtures of a few smooth
endmember spectra under a low-frequency log-normal illumination field
(``background_gradient`` is its log-amplitude) plus Gaussian noise.
Anomalies replace a handful of pixels with a spectrum whose angle to every
endmember is at least ``anomaly_contrast`` radians.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .core import GroundTruthMask, HsiCube
from .errors import ParameterError

__all__ = ["SynthSpec", "SynthScene", "synthesize", "generate_scene", "spectral_angle"]

BORDER = 2


@dataclass(frozen=True)
class SynthSpec:
    height: int = 60
    width: int = 60
    bands: int = 50
    num_background_classes: int = 3
    anomaly_count: int = 20
    anomaly_contrast: float = 0.2
    noise_sigma: float = 0.01
    background_gradient: float = 0.8
    seed: int = 42

    def __post_init__(self):
        for name in ("height", "width", "bands", "num_background_classes"):
            if int(getattr(self, name)) != getattr(self, name) or getattr(self, name) < 1:
                raise ParameterError(f"{name} must be a positive integer")
        values = (self.anomaly_contrast, self.noise_sigma, self.background_gradient)
        if not all(np.isfinite(v) for v in values):
            raise ParameterError("synthetic scene parameters must be finite")
        if self.anomaly_count < 0 or int(self.anomaly_count) != self.anomaly_count:
            raise ParameterError("anomaly_count must be a nonnegative integer")
        if self.anomaly_count * 10 >= self.height * self.width:
            raise ParameterError("anomalies must cover less than 10% of the scene")
        interior = max(0, self.height - 2 * BORDER) * max(0, self.width - 2 * BORDER)
        if self.anomaly_count > interior:
            raise ParameterError("not enough interior pixels for the requested anomalies")
        if self.anomaly_contrast <= 0:
            raise ParameterError("anomaly_contrast must be positive")
        if self.noise_sigma < 0 or self.background_gradient < 0:
            raise ParameterError("noise_sigma and background_gradient must be nonnegative")
        if not 0 <= self.seed < 2**64:
            raise ParameterError("seed must be a 64-bit unsigned integer")


@dataclass(frozen=True, eq=False)
class SynthScene:
    cube: HsiCube
    mask: GroundTruthMask
    endmembers: np.ndarray  # bands x classes
    anomaly_spectrum: np.ndarray  # pre-illumination, pre-noise
    clean: np.ndarray  # noise-free cube values


def spectral_angle(a: np.ndarray, b: np.ndarray) -> float:
    cos = float(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)))
    return float(np.arccos(np.clip(cos, -1.0, 1.0)))


def _smooth_spectra(rng: np.random.Generator, bands: int, count: int) -> np.ndarray:
    axis = np.arange(bands, dtype=np.float64)
    out = np.full((bands, count), 0.05)
    for k in range(count):
        for _ in range(3):
            center = rng.uniform(0, bands)
            width = rng.uniform(bands / 10, bands / 4) if bands > 1 else 1.0
            out[:, k] += rng.uniform(0.1, 0.4) * np.exp(-0.5 * ((axis - center) / width) ** 2)
    return out


def _abundances(rng: np.random.Generator, h: int, w: int, k: int) -> np.ndarray:
    if k == 1:
        return np.ones((1, h, w))
    fields = rng.standard_normal((k, h, w))
    sigma = max(1.0, min(h, w) / 8)
    fields = np.stack([gaussian_filter(f, sigma, mode="reflect") for f in fields])
    fields /= fields.std(axis=(1, 2), keepdims=True) + 1e-12
    logits = 3.0 * fields
    logits -= logits.max(axis=0, keepdims=True)
    weights = np.exp(logits)
    return weights / weights.sum(axis=0)


def _illumination(rng: np.random.Generator, h: int, w: int, amplitude: float) -> np.ndarray:
    # Log-normal shading: exp(amplitude * z) for a smooth unit-variance field z.
    if amplitude == 0:
        return np.ones((h, w))
    z = gaussian_filter(rng.standard_normal((h, w)), max(1.0, min(h, w) / 8), mode="reflect")
    z = (z - z.mean()) / (z.std() or 1.0)
    return np.exp(amplitude * z)


def _anomaly_spectrum(rng: np.random.Generator, endmembers: np.ndarray, angle: float) -> np.ndarray:
    bands, k = endmembers.shape
    if angle > np.pi / 2:
        raise ParameterError("anomaly_contrast above pi/2 cannot be guaranteed")
    q, _ = np.linalg.qr(endmembers)
    candidate = _smooth_spectra(rng, bands, 1)[:, 0]
    inside = q @ (q.T @ candidate)
    outside = candidate - inside
    if np.linalg.norm(outside) <= 1e-9 * np.linalg.norm(candidate):
        raise ParameterError(
            f"{bands} bands leave no direction orthogonal to {k} endmembers; contrast infeasible"
        )
    inside_dir = q @ (q.T @ endmembers.mean(axis=1))
    inside_dir /= np.linalg.norm(inside_dir)
    outside /= np.linalg.norm(outside)
    # Angle to any vector in the endmember span is at least `angle` by Cauchy-Schwarz.
    spectrum = np.cos(angle) * inside_dir + np.sin(angle) * outside
    return spectrum * np.linalg.norm(endmembers, axis=0).mean()


def synthesize(spec: SynthSpec) -> SynthScene:
    rng = np.random.default_rng(spec.seed)
    h, w, d = spec.height, spec.width, spec.bands
    endmembers = _smooth_spectra(rng, d, spec.num_background_classes)
    abundance = _abundances(rng, h, w, spec.num_background_classes)
    light = _illumination(rng, h, w, spec.background_gradient)
    clean = np.einsum("dk,khw->dhw", endmembers, abundance) * light
    labels = np.zeros((h, w), dtype=np.uint8)
    anomaly = np.zeros(d)
    if spec.anomaly_count:
        anomaly = _anomaly_spectrum(rng, endmembers, spec.anomaly_contrast)
        ih, iw = h - 2 * BORDER, w - 2 * BORDER
        flat = rng.choice(ih * iw, size=spec.anomaly_count, replace=False)
        rows, cols = flat // iw + BORDER, flat % iw + BORDER
        clean[:, rows, cols] = anomaly[:, None] * light[rows, cols]
        labels[rows, cols] = 1
    noisy = clean + spec.noise_sigma * rng.standard_normal(clean.shape) if spec.noise_sigma else clean.copy()
    return SynthScene(
        cube=HsiCube(noisy),
        mask=GroundTruthMask(labels),
        endmembers=endmembers,
        anomaly_spectrum=anomaly,
        clean=clean,
    )


def generate_scene(spec: SynthSpec = SynthSpec()) -> tuple[HsiCube, GroundTruthMask]:
    scene = synthesize(spec)
    return scene.cube, scene.mask
