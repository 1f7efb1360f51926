"""Statistical depth for ensembles of binary and probabilistic contours.

Core objects: masks on a shared grid (GridSpec, ProbMask, BinaryMask) and
ordered collections of them (Ensemble). Depth methods rank members from the
center outward: exact pairwise inclusion depth, its linear-time mean-mask
variant, the binary specialization, and similarity-vs-mean baselines. On
top sit contour-boxplot artifacts, rank-consistency statistics, synthetic
generators, benchmarks, and a CLI (``fuzzdepth``).
"""

from .bench import BenchRow, run_bench
from .boxplot import Band, BoxplotArtifact, build_boxplot, emit_slice_images
from .consistency import RankScatter, kendall_tau, pearson, rank_scatter, stability_test
from .depth import (
    CV_WARN_THRESHOLD,
    METHOD_NAMES,
    DepthResult,
    compare_pid_vs_mean,
    depth_by_method,
    depth_eid,
    depth_pid,
    depth_pid_mean,
    depth_similarity_baseline,
    member_masses,
    ranks_from_depths,
)
from .errors import (
    DegenerateEnsembleError,
    FuzzdepthError,
    GridMismatchError,
    ManifestError,
    ValidationError,
    VolumeFormatError,
)
from .fuzzify import (
    ScalarField,
    default_width,
    fuzzy_isocontour,
    hard_isocontour,
    normalize_density,
)
from .grid import (
    BinaryMask,
    Ensemble,
    GridSpec,
    ProbMask,
    binarize,
    binarize_ensemble,
    binary_mass,
    mask_mass,
    mean_mask,
    permute_cells,
)
from .inclusion import fuzzy_dice, prob_inclusion, prob_iou, subset_epsilon
from .io import (
    read_depth_csv,
    read_manifest,
    read_volume,
    volume_header,
    write_depth_csv,
    write_manifest,
    write_volume,
)
from .synth import (
    gen_contour_ensemble_2d,
    gen_disk_ensemble,
    gen_ellipsoid_ensemble,
    gen_fuzzy_disk,
)

__version__ = "0.1.0"

__all__ = [
    "BenchRow",
    "Band",
    "BinaryMask",
    "BoxplotArtifact",
    "CV_WARN_THRESHOLD",
    "DegenerateEnsembleError",
    "DepthResult",
    "Ensemble",
    "FuzzdepthError",
    "GridMismatchError",
    "GridSpec",
    "ManifestError",
    "METHOD_NAMES",
    "ProbMask",
    "RankScatter",
    "ScalarField",
    "ValidationError",
    "VolumeFormatError",
    "binarize",
    "binarize_ensemble",
    "binary_mass",
    "build_boxplot",
    "compare_pid_vs_mean",
    "default_width",
    "depth_by_method",
    "depth_eid",
    "depth_pid",
    "depth_pid_mean",
    "depth_similarity_baseline",
    "emit_slice_images",
    "fuzzy_dice",
    "fuzzy_isocontour",
    "gen_contour_ensemble_2d",
    "gen_disk_ensemble",
    "gen_ellipsoid_ensemble",
    "gen_fuzzy_disk",
    "hard_isocontour",
    "kendall_tau",
    "mask_mass",
    "mean_mask",
    "member_masses",
    "normalize_density",
    "pearson",
    "permute_cells",
    "prob_inclusion",
    "prob_iou",
    "rank_scatter",
    "ranks_from_depths",
    "read_depth_csv",
    "read_manifest",
    "read_volume",
    "volume_header",
    "run_bench",
    "stability_test",
    "subset_epsilon",
    "write_depth_csv",
    "write_manifest",
    "write_volume",
    "__version__",
]
