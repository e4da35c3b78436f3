"""Scalable spectral estimation and two-sample testing for large networks."""

__version__ = "0.1.0"

from .exceptions import (
    ConvergenceError,
    EdgeListFormatError,
    PredsubError,
    RankDeficientError,
)
from .graph import (
    ProbabilityModel,
    SparseGraph,
    SubsampleIndex,
    degree_filter,
    extract_blocks,
    generate_mmsb,
    load_edge_list,
    perturbed_model,
    sample_adjacency,
    save_edge_list,
    uniform_subsample,
)
from .spectral import (
    Embedding,
    SpectralPair,
    align_orthogonal,
    ase,
    split_signature,
    truncated_eigs,
)
from .lowrank import (
    LowRankP,
    Norms,
    frob_distance,
    norms,
    pooled_average,
    relative_frob_error,
    sample_bernoulli_block,
    two_inf_distance,
)
from .estimate import (
    PredSubResult,
    out_of_sample_rows,
    predsub_estimate,
    subsample_size,
)
from .testing import (
    TestReport,
    bootstrap_pvalue,
    predsub_test,
    puresub_test,
    theorem_normalizers,
)
from .diagnostics import (
    DiagnosticsReport,
    assumption_report,
    coherence,
    condition_number,
    eigen_scaling_check,
    error_curve,
)
from .cli import RunConfig, RunReport, main

__all__ = [
    "__version__",
    "ConvergenceError",
    "EdgeListFormatError",
    "PredsubError",
    "RankDeficientError",
    "ProbabilityModel",
    "SparseGraph",
    "SubsampleIndex",
    "degree_filter",
    "extract_blocks",
    "generate_mmsb",
    "load_edge_list",
    "perturbed_model",
    "sample_adjacency",
    "save_edge_list",
    "uniform_subsample",
    "Embedding",
    "SpectralPair",
    "align_orthogonal",
    "ase",
    "split_signature",
    "truncated_eigs",
    "LowRankP",
    "Norms",
    "frob_distance",
    "norms",
    "pooled_average",
    "relative_frob_error",
    "sample_bernoulli_block",
    "two_inf_distance",
    "PredSubResult",
    "out_of_sample_rows",
    "predsub_estimate",
    "subsample_size",
    "TestReport",
    "bootstrap_pvalue",
    "predsub_test",
    "puresub_test",
    "theorem_normalizers",
    "DiagnosticsReport",
    "assumption_report",
    "coherence",
    "condition_number",
    "eigen_scaling_check",
    "error_curve",
    "main",
    "RunConfig",
    "RunReport",
]
