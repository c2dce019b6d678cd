"""``hsad`` command line: detect, eval, synth and bench.

Exit codes: 0 success, 2 usage or parameter error, 3 I/O or format error,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

from . import bench as bench_mod
from .core import DualWindowSpec, cube_to_matrix
from .detectors import (
    AGGREGATES,
    CrdParams,
    ErcrdParams,
    PcaroParams,
    crd,
    ercrd,
    global_pcaro_crd,
    grx,
    local_pcaro_crd,
    lrx,
    rcrd_single,
    ssrx,
)
from .errors import FormatError, NumericalError, ParameterError
from .evaluation import auc, roc_curve, roc_to_csv, separation_stats, separation_to_csv
from .linalg import RidgeParams
from .raster_io import (
    load_cube,
    load_mask,
    load_scores,
    score_map_to_cube,
    write_cube,
    write_mask_csv,
    write_pgm,
)
from .synth import SynthSpec, generate_scene

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4

ALGORITHMS = ("grx", "lrx", "ssrx", "crd", "pcaro-global", "pcaro-local", "rcrd", "ercrd")
WINDOWED = {"lrx", "crd", "pcaro-local"}
THREADS_ENV = "HSAD_THREADS"


def resolve_threads(flag: int | None) -> int:
    if flag is not None:
        if flag < 1:
            raise ParameterError("--threads must be >= 1")
        return flag
    env = os.environ.get(THREADS_ENV)
    if env:
        try:
            value = int(env)
        except ValueError as exc:
            raise ParameterError(f"{THREADS_ENV} must be an integer, got {env!r}") from exc
        if value < 1:
            raise ParameterError(f"{THREADS_ENV} must be >= 1")
        return value
    return os.cpu_count() or 1


def build_detector(args):
    """Validate the algorithm parameters and return ``fn(cube, threads) -> ScoreMap``."""
    algo = args.algo
    ridge = RidgeParams(args.lam)
    window = DualWindowSpec(*args.win) if args.win else DualWindowSpec(11, 15)
    if algo == "grx":
        return lambda cube, threads: grx(cube_to_matrix(cube))
    if algo == "lrx":
        return lambda cube, threads: lrx(cube, window, threads=threads)
    if algo == "ssrx":
        remove_top = 5 if args.remove_top is None else args.remove_top
        return lambda cube, threads: ssrx(cube_to_matrix(cube), remove_top)
    if algo == "crd":
        params = CrdParams(window=window, ridge=ridge)
        return lambda cube, threads: crd(cube, params, threads=threads)
    if algo == "pcaro-global":
        params = PcaroParams(ridge=ridge, num_components=args.m, center=args.center)
        return lambda cube, threads: global_pcaro_crd(cube_to_matrix(cube), params, threads=threads)
    if algo == "pcaro-local":
        params = PcaroParams(ridge=ridge, num_components=args.k, window=window, center=args.center)
        return lambda cube, threads: local_pcaro_crd(cube, params, threads=threads)
    if algo == "rcrd":
        if args.r < 1:
            raise ParameterError("--r must be >= 1")
        return lambda cube, threads: rcrd_single(cube_to_matrix(cube), args.r, ridge, args.seed)
    params = ErcrdParams(
        subsample=args.r, ensemble=args.T, ridge=ridge, master_seed=args.seed, aggregate=args.aggregate
    )
    return lambda cube, threads: ercrd(cube_to_matrix(cube), params, threads=threads)


def cmd_detect(args) -> int:
    if args.win and args.algo not in WINDOWED:
        print(f"note: --win is ignored by {args.algo}", file=sys.stderr)
    detector = build_detector(args)
    threads = resolve_threads(args.threads)
    cube = load_cube(args.input)
    start = time.perf_counter()
    scores = detector(cube, threads)
    elapsed = time.perf_counter() - start
    out = Path(args.output)
    out.write_bytes(write_cube(score_map_to_cube(scores)))
    if args.pgm:
        Path(args.pgm).write_bytes(write_pgm(scores, normalize=True))
    if args.figure:
        from .plotting import plot_score_map

        plot_score_map(scores, args.figure, title=args.algo)
    print(f"seconds {elapsed:.6f}")
    return EXIT_OK


def _sibling(path: Path, suffix: str) -> Path:
    return path.with_name(path.stem + suffix)


def cmd_eval(args) -> int:
    scores = load_scores(args.scores)
    truth = load_mask(args.truth)
    curve = roc_curve(scores, truth)
    stats = separation_stats(scores, truth)
    value = auc(curve)
    base = Path(args.scores)
    roc_path = Path(args.roc_csv) if args.roc_csv else _sibling(base, ".roc.csv")
    sep_path = Path(args.sep_csv) if args.sep_csv else _sibling(base, ".sep.csv")
    roc_path.write_text(roc_to_csv(curve))
    sep_path.write_text(separation_to_csv(stats))
    if args.figures:
        from .plotting import plot_roc, plot_score_map, plot_separation

        label = args.label or base.stem
        fig_dir = Path(args.figures)
        plot_roc({label: curve}, fig_dir / f"{base.stem}.roc.png")
        plot_separation({label: stats}, fig_dir / f"{base.stem}.separation.png")
        plot_score_map(scores, fig_dir / f"{base.stem}.map.png", title=label)
    print(f"AUC {value:.4f}")
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SynthSpec(
        height=args.height,
        width=args.width,
        bands=args.bands,
        num_background_classes=args.classes,
        anomaly_count=args.anomalies,
        anomaly_contrast=args.contrast,
        noise_sigma=args.noise,
        background_gradient=args.gradient,
        seed=args.seed,
    )
    cube, mask = generate_scene(spec)
    Path(args.cube).write_bytes(write_cube(cube))
    Path(args.mask).write_text(write_mask_csv(mask))
    count = mask.anomaly_count
    fraction = count / (mask.height * mask.width)
    print(f"shape {cube.height}x{cube.width}x{cube.bands}")
    print(f"anomalies {count} fraction {fraction:.6f}" + (" (empty mask)" if count == 0 else ""))
    return EXIT_OK


def cmd_bench(args) -> int:
    threads = args.threads if args.threads is not None else 1
    if threads < 1:
        raise ParameterError("--threads must be >= 1")
    if args.repeats < 3:
        raise ParameterError("--repeats must be >= 3")
    cube = load_cube(args.input) if args.input else None
    result = bench_mod.run_suite(args.suite, cube, repeats=args.repeats, threads=threads)
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from .plotting import plot_runtime

        if args.suite == "crd-vs-ercrd":
            params = list(range(len(result.rows)))
        else:
            params = [row[0] for row in result.rows]
        fit = None
        if args.suite == "scaling-T":
            fit = (result.metrics["slope"], result.metrics["intercept"])
        xlabel = {"scaling-T": "Ensemble size T", "scaling-r": "Subsample size r"}.get(args.suite, "detector")
        plot_runtime(params, [r[1] for r in result.rows], [r[2] for r in result.rows], args.figure, xlabel, fit)
    print(result.verdict())
    return 1 if (args.strict and not result.passed) else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsad", description="Hyperspectral anomaly detection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="run a detector and write a score raster")
    p.add_argument("--algo", choices=ALGORITHMS, required=True)
    p.add_argument("--win", type=int, nargs=2, metavar=("W_IN", "W_OUT"), help="dual window sizes")
    p.add_argument("--lambda", dest="lam", type=float, default=1e-6)
    p.add_argument("--r", type=int, default=10, help="random subsample size")
    p.add_argument("--T", type=int, default=20, help="ensemble size")
    p.add_argument("--m", type=int, default=None, help="global PCAroCRD components")
    p.add_argument("--k", type=int, default=None, help="local PCAroCRD components")
    p.add_argument("--remove-top", type=int, default=None, help="SSRX discarded components")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--aggregate", choices=AGGREGATES, default="raw-sum")
    p.add_argument("--center", action="store_true", help="mean-center before PCA")
    p.add_argument("--threads", type=int, default=None)
    p.add_argument("--pgm", help="also write a normalized 16-bit PGM rendering")
    p.add_argument("--figure", help="also write a color detection map image")
    p.add_argument("input")
    p.add_argument("output")
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("eval", help="ROC/AUC and separation statistics of a score raster")
    p.add_argument("scores")
    p.add_argument("truth")
    p.add_argument("--roc-csv")
    p.add_argument("--sep-csv")
    p.add_argument("--figures", metavar="DIR", help="render ROC, separation and map figures into DIR")
    p.add_argument("--label", help="detector name used in figure legends")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a seeded synthetic scene and its mask")
    defaults = SynthSpec()
    p.add_argument("--height", type=int, default=defaults.height)
    p.add_argument("--width", type=int, default=defaults.width)
    p.add_argument("--bands", type=int, default=defaults.bands)
    p.add_argument("--classes", type=int, default=defaults.num_background_classes)
    p.add_argument("--anomalies", type=int, default=defaults.anomaly_count)
    p.add_argument("--contrast", type=float, default=defaults.anomaly_contrast)
    p.add_argument("--noise", type=float, default=defaults.noise_sigma)
    p.add_argument("--gradient", type=float, default=defaults.background_gradient)
    p.add_argument("--seed", type=int, default=defaults.seed)
    p.add_argument("--cube", required=True, help="output cube (.hsad)")
    p.add_argument("--mask", required=True, help="output mask (.csv)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("bench", help="runtime sweeps on the desk scene")
    p.add_argument("--suite", choices=bench_mod.SUITES, required=True)
    p.add_argument("--input", help="scene to time instead of the default synthetic one")
    p.add_argument("--repeats", type=int, default=3)
    p.add_argument("--threads", type=int, default=None, help="detector threads (default 1)")
    p.add_argument("--out", help="CSV path (default stdout)")
    p.add_argument("--figure", help="runtime plot path")
    p.add_argument("--strict", action="store_true", help="exit 1 when the verdict fails")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ParameterError as exc:
        print(f"hsad: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, OSError) as exc:
        print(f"hsad: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"hsad: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
