"""Wave-breaking simulator and certificate checker for a rotation-modified
two-component Camassa-Holm shallow-water system on a truncated line.

Layers:

- model: parameters, grid, field state, initial-data profiles
- spectral: periodic Helmholtz-kernel convolutions and the forcing functional
- evolution: adaptive embedded Runge-Kutta time stepping and diagnostics
- characteristics: Lagrangian trajectories, extremum tracking, ODE residuals
- certificates: closed-form blow-up certificates and runtime monitors
- cli: batch front end (run | certify | rate | sweep | selftest)
"""

from .model import (
    DecayViolation,
    FieldState,
    Grid,
    InitialDataSpec,
    PhysParams,
    ProfileTerm,
    RegimeFlags,
    boundary_leak,
    build_grid,
    classify_regime,
    synthesize,
)
from .spectral import (
    deriv,
    direct_conv_oracle,
    eval_f,
    helmholtz_conv,
    helmholtz_conv_dx,
    periodized_kernel,
)
from .evolution import (
    BlowupEvent,
    BreakingTimeFit,
    DiagnosticRow,
    FitWindowError,
    NonFiniteState,
    RunRecord,
    RunSettings,
    Termination,
    detect_blowup,
    estimate_T,
    refined_extremum,
    rhs,
    run,
    step,
)
from .characteristics import (
    ExtremumTrack,
    SnapshotCadenceError,
    Trajectory,
    advect,
    argmax_jump_mask,
    gamma_decay_error,
    jacobian_consistency,
    ode_residuals,
    sample_along,
    sup_transport_error,
    track_extremum,
    track_from_rows,
)
from .certificates import (
    Certificate,
    RateCheck,
    Thm41Certificate,
    Thm42Certificate,
    Violation,
    build_certificate,
    constant_C,
    energy,
    k2_bound,
    lemma31_ceiling,
    monitor_bounds,
    rate_check,
    thm41_certificate,
    thm42_certificate,
    thm42_constant_N,
)

__version__ = "0.1.0"

__all__ = [
    "DecayViolation",
    "FieldState",
    "Grid",
    "InitialDataSpec",
    "PhysParams",
    "ProfileTerm",
    "RegimeFlags",
    "boundary_leak",
    "build_grid",
    "classify_regime",
    "synthesize",
    "deriv",
    "direct_conv_oracle",
    "eval_f",
    "helmholtz_conv",
    "helmholtz_conv_dx",
    "periodized_kernel",
    "BlowupEvent",
    "BreakingTimeFit",
    "DiagnosticRow",
    "FitWindowError",
    "NonFiniteState",
    "RunRecord",
    "RunSettings",
    "Termination",
    "detect_blowup",
    "estimate_T",
    "refined_extremum",
    "rhs",
    "run",
    "step",
    "ExtremumTrack",
    "SnapshotCadenceError",
    "Trajectory",
    "advect",
    "argmax_jump_mask",
    "gamma_decay_error",
    "jacobian_consistency",
    "ode_residuals",
    "sample_along",
    "sup_transport_error",
    "track_extremum",
    "track_from_rows",
    "Certificate",
    "RateCheck",
    "Thm41Certificate",
    "Thm42Certificate",
    "Violation",
    "build_certificate",
    "constant_C",
    "energy",
    "k2_bound",
    "lemma31_ceiling",
    "monitor_bounds",
    "rate_check",
    "thm41_certificate",
    "thm42_certificate",
    "thm42_constant_N",
]
