"""NMF fitting under a Poisson/KL objective and sampling of the full set of
feasible solutions (all equivalent factorizations) around a fit."""

from ._core import (
    ConfigError,
    ContractViolationError,
    DegenerateComponentError,
    FeasibleInterval,
    FitResult,
    InfiniteDivergenceError,
    ParseFileError,
    Rank2Sfs,
    SamplerRun,
    ShapeError,
    TruncatedSvd,
    align_to_reference,
    alpha_of_e,
    alpha_of_p,
    build_transform,
    feasible_interval,
    fit,
    gkl_divergence,
    lee_seung_step,
    make_dense,
    make_separable,
    match_components,
    normalize_columns,
    poisson_bootstrap,
    rank2_sfs,
    reconstruct_from_alpha,
    sample_sfs,
    truncated_svd,
)

__all__ = [
    "ConfigError",
    "ContractViolationError",
    "DegenerateComponentError",
    "FeasibleInterval",
    "FitResult",
    "InfiniteDivergenceError",
    "ParseFileError",
    "Rank2Sfs",
    "SamplerRun",
    "ShapeError",
    "TruncatedSvd",
    "align_to_reference",
    "alpha_of_e",
    "alpha_of_p",
    "build_transform",
    "feasible_interval",
    "fit",
    "gkl_divergence",
    "lee_seung_step",
    "make_dense",
    "make_separable",
    "match_components",
    "normalize_columns",
    "poisson_bootstrap",
    "rank2_sfs",
    "reconstruct_from_alpha",
    "sample_sfs",
    "truncated_svd",
]

__version__ = "0.1.0"
