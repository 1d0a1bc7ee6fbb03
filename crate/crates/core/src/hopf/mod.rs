//! The generalized Hopf invariant `HI_alpha f = int omega ^ d omega` with
//! `d omega = f* alpha`, for maps sampled on triangulated spheres.

mod experiments;
mod form;
mod invariant;
mod linking;
mod sampled;

pub use experiments::{
    convergence_experiment, fmt_float, homotopy_sweep, minimal_exponent, radial_sweep,
    ConvergenceRow, ConvergenceTable, HomotopySweep, RadialRow, RadialSweep,
};
pub use form::{radial_cutoff, FormSpec};
pub use invariant::{
    closedness_residual, gauge_independence_check, hopf, hopf_scaled, hopf_with, pullback,
    pullback_with_warnings, scaled_budget, HopfOptions, HopfReport, Pullback,
    DEFAULT_CLOSEDNESS_BUDGET, REFERENCE_MESH_SIZE,
};
pub use linking::{linking_oracle, ORACLE_TOL};
pub use sampled::{DifferentialKind, SampledMap, DEGENERATE_TOL};
