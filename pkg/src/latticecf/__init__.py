"""Nested lattice compress-and-forward analysis for the two-way relay channel."""

from .channel import (
    ChannelConfig,
    MessageIndex,
    SignalBlock,
    bc_phase,
    config_from_db,
    db_to_linear,
    decompose,
    generate_source,
    linear_to_db,
    mac_phase,
)
from .lattices import (
    COMMON,
    REFINEMENT,
    ChainRates,
    DitherVector,
    LatticeSpec,
    NestedChain,
    SecondMomentEstimate,
    chain_rates,
    cell_volume,
    coset_index,
    coset_leader_of,
    generator_matrix,
    make_lattice,
    mod_lattice,
    nearest_point,
    sample_dither,
    scaled,
    second_moment,
    second_moment_estimate,
)
from .rates import (
    ALL_SCHEMES,
    AsymptoticReferences,
    DistortionResult,
    RateRegion,
    RateResult,
    af_rates,
    asymptotic_references,
    df_rates,
    equal_rate_curve,
    lcf1_distortions,
    lcf1_rates,
    lcf2_distortions,
    lcf2_rates,
    optimize_region,
    outer_bound,
)
from .schemes import (
    DecodeDiagnostics,
    InfeasibleError,
    OptimalParams,
    RealizedChain,
    SchemeConfig,
    SimReport,
    lcf1_decode,
    lcf1_encode,
    lcf2_decode_common,
    lcf2_decode_refined,
    lcf2_encode,
    leader_message,
    optimal_params_lcf1,
    optimal_params_lcf2,
    realize_chain,
    simulate_scheme,
)

__version__ = "0.1.0"

__all__ = [
    "ALL_SCHEMES", "AsymptoticReferences", "COMMON", "ChainRates",
    "ChannelConfig", "DecodeDiagnostics", "DistortionResult", "DitherVector",
    "InfeasibleError", "LatticeSpec", "MessageIndex", "NestedChain",
    "OptimalParams", "REFINEMENT", "RateRegion", "RateResult", "RealizedChain",
    "SchemeConfig", "SecondMomentEstimate", "SignalBlock", "SimReport",
    "af_rates", "asymptotic_references", "bc_phase", "cell_volume",
    "chain_rates", "config_from_db", "coset_index", "coset_leader_of",
    "db_to_linear", "decompose", "df_rates", "equal_rate_curve",
    "generate_source", "generator_matrix", "lcf1_decode", "lcf1_distortions",
    "lcf1_encode", "lcf1_rates", "lcf2_decode_common", "lcf2_decode_refined",
    "lcf2_distortions", "lcf2_encode", "lcf2_rates", "leader_message",
    "linear_to_db", "mac_phase", "make_lattice", "mod_lattice",
    "nearest_point", "optimal_params_lcf1", "optimal_params_lcf2",
    "optimize_region", "outer_bound", "realize_chain", "sample_dither",
    "scaled", "second_moment", "second_moment_estimate", "simulate_scheme",
]
