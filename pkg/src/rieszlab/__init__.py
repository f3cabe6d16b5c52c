"""rieszlab: minimal Riesz s-energy configurations on self-similar fractals,
segments, and separated unions, with the asymptotic diagnostics built on them.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticTrace,
    GammaEstimates,
    RateFlag,
    SplitPrediction,
    TraceError,
    TraceRecord,
    WeakStarStats,
    estimate_gamma,
    lemma3_check,
    predict_alpha_star,
    predict_beta_star,
    split_objective,
    split_upper_bound,
    split_upper_bound_coarse,
    trace_summary,
    weak_star_trace,
)
from .cache import EnergyCache, cache_key
from .energy import (
    CoincidentPointsError,
    ConfigPoint,
    Configuration,
    EnergyError,
    EnergyReport,
    covering_radius,
    energy_gradient,
    normalized_energy,
    point_energy,
    riesz_energy,
)
from .geometry import (
    Ball,
    FractalAddress,
    GeometryError,
    Segment,
    SelfSimilarSet,
    Similitude,
    UnionSet,
    all_addresses,
    dimension,
    realize_address,
    set_from_dict,
    set_hash,
    set_to_dict,
    validate_union,
)
from .optimize import (
    InfeasibleError,
    PoolTooLargeError,
    SearchParams,
    SolveResult,
    SolverError,
    SweepError,
    auto_depth,
    check_cached_split_bounds,
    check_part_decomposition,
    minimize_exhaustive,
    minimize_local_search,
    minimize_union,
    sweep,
)
from .presets import PRESETS, preset_dict
