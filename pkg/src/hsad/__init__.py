"""Hyperspectral anomaly detection: collaborative-representation detectors,
RX baselines, evaluation, synthetic scenes and raster I/O."""
from .core import (
    DualWindowSpec,
    GroundTruthMask,
    HsiCube,
    PixelMatrix,
    ScoreMap,
    cube_to_matrix,
    extract_dual_window,
    matrix_to_cube,
    matrix_to_score_map,
    mirror_pad,
)
from .detectors import (
    CrdParams,
    ErcrdParams,
    PcaroParams,
    crd,
    ercrd,
    global_pcaro_crd,
    grx,
    local_pcaro_crd,
    lrx,
    random_subsample,
    rcrd_single,
    ssrx,
)
from .errors import FormatError, HsadError, NumericalError, ParameterError
from .evaluation import auc, normalize_scores, roc_curve, separation_stats
from .linalg import RidgeParams, mahalanobis_scores, pca_top_components, ridge_solve, sample_mean_cov
from .synth import SynthSpec, generate_scene

__version__ = "0.1.0"
