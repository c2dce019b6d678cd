"""Runtime sweeps on seeded synthetic scenes.

Each suite times only the detector call (no I/O) and checks the measured
shape against fixed thresholds:

* ``scaling-T``: ERCRD runtime vs ensemble size is close to linear.
* ``scaling-r``: ERCRD runtime barely moves with the subsample size.
* ``crd-vs-ercrd``: ERCRD beats the sliding-window CRD by a wide factor.
"""
from __future__ import annotations

import csv
import io
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .core import DualWindowSpec, HsiCube, cube_to_matrix
from .detectors import CrdParams, ErcrdParams, crd, ercrd
from .linalg import RidgeParams
from .synth import SynthSpec, generate_scene

__all__ = [
    "SUITES",
    "BenchResult",
    "time_call",
    "linear_fit",
    "scaling_t",
    "scaling_r",
    "crd_vs_ercrd",
    "run_suite",
]

SUITES = ("scaling-T", "scaling-r", "crd-vs-ercrd")

MIN_R2 = 0.9
T_RATIO_RANGE = (2.5, 5.5)
MAX_R_SPREAD = 2.5
MIN_SPEEDUP = 5.0


@dataclass
class BenchResult:
    suite: str
    rows: list[tuple[object, float, float]]
    metrics: dict[str, float] = field(default_factory=dict)
    passed: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["param", "mean_s", "sd_s"])
        for param, mean, sd in self.rows:
            writer.writerow([param, repr(mean), repr(sd)])
        return buf.getvalue()

    def verdict(self) -> str:
        details = ", ".join(f"{k}={v:.4g}" for k, v in self.metrics.items())
        return f"{self.suite}: {'PASS' if self.passed else 'FAIL'} ({details})"


def time_call(fn, repeats: int = 3, warmup: int = 1) -> tuple[float, float]:
    """Mean and sample standard deviation of ``fn()`` wall time in seconds."""
    if repeats < 1:
        raise ValueError("repeats must be >= 1")
    for _ in range(warmup):
        fn()
    samples = []
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        samples.append(time.perf_counter() - start)
    sd = statistics.stdev(samples) if len(samples) > 1 else 0.0
    return statistics.fmean(samples), sd


def linear_fit(x, y) -> tuple[float, float, float]:
    """Least-squares ``(slope, intercept, r_squared)``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), r2


def _desk_scene(cube: HsiCube | None) -> HsiCube:
    return cube if cube is not None else generate_scene(SynthSpec())[0]


def scaling_t(cube=None, ensembles=range(5, 55, 5), subsample: int = 5, repeats: int = 3,
              lam: float = 1e-6, seed: int = 0, threads: int | None = 1) -> BenchResult:
    X = cube_to_matrix(_desk_scene(cube))
    rows = []
    for T in ensembles:
        params = ErcrdParams(subsample=subsample, ensemble=T, ridge=RidgeParams(lam), master_seed=seed)
        rows.append((T, *time_call(lambda: ercrd(X, params, threads=threads), repeats)))
    ts = [r[0] for r in rows]
    means = [r[1] for r in rows]
    slope, intercept, r2 = linear_fit(ts, means)
    metrics = {"r2": r2, "slope": slope, "intercept": intercept}
    lookup = dict(zip(ts, means))
    if 10 in lookup and 40 in lookup:
        metrics["ratio_40_10"] = lookup[40] / lookup[10]
    ratio = metrics.get("ratio_40_10")
    passed = r2 >= MIN_R2 and (ratio is None or T_RATIO_RANGE[0] <= ratio <= T_RATIO_RANGE[1])
    return BenchResult("scaling-T", rows, metrics, passed)


def scaling_r(cube=None, subsamples=range(1, 21), ensemble: int = 10, repeats: int = 3,
              lam: float = 1e-6, seed: int = 0, threads: int | None = 1) -> BenchResult:
    X = cube_to_matrix(_desk_scene(cube))
    rows = []
    for r in subsamples:
        params = ErcrdParams(subsample=r, ensemble=ensemble, ridge=RidgeParams(lam), master_seed=seed)
        rows.append((r, *time_call(lambda: ercrd(X, params, threads=threads), repeats)))
    means = np.array([row[1] for row in rows])
    metrics = {
        "max_over_min": float(means.max() / means.min()),
        "max_over_mean": float(means.max() / means.mean()),
    }
    return BenchResult("scaling-r", rows, metrics, metrics["max_over_min"] <= MAX_R_SPREAD)


def crd_vs_ercrd(cube=None, window=DualWindowSpec(11, 15), subsample: int = 10, ensemble: int = 20,
                 repeats: int = 3, lam: float = 1e-6, seed: int = 0, threads: int | None = 1) -> BenchResult:
    cube = _desk_scene(cube)
    X = cube_to_matrix(cube)
    ridge = RidgeParams(lam)
    crd_params = CrdParams(window=window, ridge=ridge)
    er_params = ErcrdParams(subsample=subsample, ensemble=ensemble, ridge=ridge, master_seed=seed)
    crd_t = time_call(lambda: crd(cube, crd_params, threads=threads), repeats)
    er_t = time_call(lambda: ercrd(X, er_params, threads=threads), repeats)
    rows = [(f"crd({window.w_in},{window.w_out})", *crd_t), (f"ercrd(r={subsample},T={ensemble})", *er_t)]
    speedup = crd_t[0] / er_t[0]
    return BenchResult("crd-vs-ercrd", rows, {"speedup": speedup}, speedup >= MIN_SPEEDUP)


def run_suite(name: str, cube=None, repeats: int = 3, threads: int | None = 1) -> BenchResult:
    if name == "scaling-T":
        return scaling_t(cube, repeats=repeats, threads=threads)
    if name == "scaling-r":
        return scaling_r(cube, repeats=repeats, threads=threads)
    if name == "crd-vs-ercrd":
        return crd_vs_ercrd(cube, repeats=repeats, threads=threads)
    raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
