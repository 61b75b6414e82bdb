"""Gibbs sampling of plane trees through a Markov chain on 2-Motzkin paths.

The sampler targets the distribution proportional to
exp(-(alpha * d0 + beta * d1)) over plane trees with a fixed number of
edges, by walking on the equivalent space of 2-Motzkin paths.  Exhaustive
small-instance oracles (exact stationary law, transition matrix, spectral
gap, block decompositions) back every moving part with checkable numbers.
"""

from .chain import (
    ChainConfig,
    ChainState,
    Sample,
    batch_means_stderr,
    move_constants,
    neighbors,
    run,
    step,
    transition_probability,
)
from .decomposition import (
    PartitionLabel,
    ProjectionModel,
    RestrictionModel,
    check_decomposition_bound,
    check_skeleton_projection,
    classify,
    decomposition_report,
    projected_k_distribution,
    projection_chain,
    restriction_chain,
)
from .energy import (
    BUILTIN_NNTM,
    EnergyParams,
    NNTMParams,
    builtin_params,
    derive_params,
    gibbs_log_weight,
    path_energy,
    resolve_params,
    tree_energy,
)
from .exact import (
    SpectralReport,
    StateIndex,
    TransitionModel,
    build_transition_model,
    gibbs_distribution,
    spectral_gap,
    tv_decay_curve,
    tv_distance,
)
from .paths import (
    DyckPath,
    SymbolCounts,
    TwoMotzkinPath,
    catalan,
    enumerate_paths,
    iter_paths,
    motzkin,
    skeleton,
    symbol_counts,
    validate,
)
from .trees import (
    DegreeProfile,
    PlaneTree,
    decode,
    degree_profile,
    encode,
    text_to_tree,
    tree_to_text,
)

__version__ = "0.1.0"

__all__ = [
    "BUILTIN_NNTM",
    "ChainConfig",
    "ChainState",
    "DegreeProfile",
    "DyckPath",
    "EnergyParams",
    "NNTMParams",
    "PartitionLabel",
    "PlaneTree",
    "ProjectionModel",
    "RestrictionModel",
    "Sample",
    "SpectralReport",
    "StateIndex",
    "SymbolCounts",
    "TransitionModel",
    "TwoMotzkinPath",
    "batch_means_stderr",
    "build_transition_model",
    "builtin_params",
    "catalan",
    "check_decomposition_bound",
    "check_skeleton_projection",
    "classify",
    "decode",
    "decomposition_report",
    "degree_profile",
    "derive_params",
    "encode",
    "enumerate_paths",
    "gibbs_distribution",
    "gibbs_log_weight",
    "iter_paths",
    "motzkin",
    "move_constants",
    "neighbors",
    "path_energy",
    "projected_k_distribution",
    "projection_chain",
    "resolve_params",
    "restriction_chain",
    "run",
    "skeleton",
    "spectral_gap",
    "step",
    "symbol_counts",
    "text_to_tree",
    "transition_probability",
    "tree_energy",
    "tree_to_text",
    "tv_decay_curve",
    "tv_distance",
    "validate",
]
