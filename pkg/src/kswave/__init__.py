"""Traveling-wave solver and classifier for chemotaxis models.

Computes equilibria of the planar slope reduction, critical shooting
thresholds, singular saturation fronts, and reconstructed wave profiles,
for linear as well as flux-saturated diffusion.
"""

from __future__ import annotations

from .errors import (
    AnchorMismatch,
    DegenerateError,
    DenominatorVanished,
    DomainError,
    Inconclusive,
    InsufficientResolution,
    KswaveError,
    NoDichotomy,
    RegimeViolation,
    SeedEscaped,
    SignChange,
    StepSizeUnderflow,
)
from .flux import (
    LARSON,
    LINEAR,
    RELATIVISTIC,
    FluxLimiter,
    g_inverse,
    g_prime,
    limiter_from_config,
    phi,
    slope_domain,
)
from .phase import (
    CASE_A,
    CASE_B,
    CASE_C,
    CASE_D,
    CASE_E,
    DEGENERATE,
    SADDLE,
    STABLE_FOCUS,
    STABLE_NODE,
    UNSTABLE_FOCUS,
    UNSTABLE_NODE,
    Equilibrium,
    ModelParams,
    Nullclines,
    eigenstructure,
    equilibria,
    jacobian,
    nullclines,
    params_from_config,
    regime_case,
    rhs,
)
from .integrate import (
    BOUNDED,
    CONVERGED,
    FLUX_BOUNDARY_HIGH,
    FLUX_BOUNDARY_LOW,
    GRAPH_END,
    MAX_SPAN,
    V_BLOW_UP_MINUS,
    V_BLOW_UP_PLUS,
    W_VANISHED,
    Controls,
    GraphSolution,
    TerminationEvent,
    Trajectory,
    integrate,
    integrate_graph_W,
    merge_trajectories,
    reconstruct_s_from_v,
    shift_trajectory,
)
from .shooting import (
    CONVERGES_TO,
    ENTERS_PARABOLA,
    ESCAPES_ABOVE,
    ESCAPES_BELOW,
    ShotOutcome,
    ThresholdResult,
    classify_trajectory,
    find_w0_star,
    threshold_trajectory,
    trace_stable_manifold,
)
from .profiles import (
    SATURATED_FRONT_CONCAVE,
    SATURATED_FRONT_CONVEX,
    SLOPE_FINITE_NEG,
    SLOPE_FINITE_POS,
    SLOPE_MINUS_INF,
    SLOPE_PLUS_INF,
    SLOPE_ZERO,
    TYPE_A1,
    TYPE_A2,
    TYPE_A3,
    TYPE_A4,
    TYPE_UNCLASSIFIED,
    WaveProfile,
    classify_profile,
    endpoint_slopes,
    farfield_coefficients,
    predicted_types,
    reconstruct,
    saturated_front,
    wave_trajectory,
)

__all__ = [
    "AnchorMismatch",
    "BOUNDED",
    "CASE_A",
    "CASE_B",
    "CASE_C",
    "CASE_D",
    "CASE_E",
    "CONVERGED",
    "CONVERGES_TO",
    "Controls",
    "DEGENERATE",
    "DegenerateError",
    "DenominatorVanished",
    "DomainError",
    "ENTERS_PARABOLA",
    "ESCAPES_ABOVE",
    "ESCAPES_BELOW",
    "Equilibrium",
    "FLUX_BOUNDARY_HIGH",
    "FLUX_BOUNDARY_LOW",
    "FluxLimiter",
    "GRAPH_END",
    "GraphSolution",
    "Inconclusive",
    "InsufficientResolution",
    "KswaveError",
    "LARSON",
    "LINEAR",
    "MAX_SPAN",
    "ModelParams",
    "NoDichotomy",
    "Nullclines",
    "RELATIVISTIC",
    "RegimeViolation",
    "SADDLE",
    "SATURATED_FRONT_CONCAVE",
    "SATURATED_FRONT_CONVEX",
    "SLOPE_FINITE_NEG",
    "SLOPE_FINITE_POS",
    "SLOPE_MINUS_INF",
    "SLOPE_PLUS_INF",
    "SLOPE_ZERO",
    "STABLE_FOCUS",
    "STABLE_NODE",
    "SeedEscaped",
    "ShotOutcome",
    "SignChange",
    "StepSizeUnderflow",
    "TYPE_A1",
    "TYPE_A2",
    "TYPE_A3",
    "TYPE_A4",
    "TYPE_UNCLASSIFIED",
    "TerminationEvent",
    "ThresholdResult",
    "Trajectory",
    "UNSTABLE_FOCUS",
    "UNSTABLE_NODE",
    "V_BLOW_UP_MINUS",
    "V_BLOW_UP_PLUS",
    "W_VANISHED",
    "WaveProfile",
    "classify_profile",
    "classify_trajectory",
    "eigenstructure",
    "endpoint_slopes",
    "equilibria",
    "farfield_coefficients",
    "find_w0_star",
    "g_inverse",
    "g_prime",
    "integrate",
    "integrate_graph_W",
    "jacobian",
    "limiter_from_config",
    "merge_trajectories",
    "nullclines",
    "params_from_config",
    "phi",
    "predicted_types",
    "reconstruct",
    "reconstruct_s_from_v",
    "regime_case",
    "rhs",
    "saturated_front",
    "shift_trajectory",
    "threshold_trajectory",
    "trace_stable_manifold",
    "wave_trajectory",
]

__version__ = "0.1.0"
