//! Parametric mean curvature flow `dF/dt = H` of periodic curves and
//! surfaces in `R^(n+m)`, with diagnostics for the Gauss map.

pub mod flow;
pub mod geometry;
pub mod grid;
pub mod presets;
pub mod probes;
pub mod run;

pub use flow::{cfl_limit, step, FlowState, DEFAULT_CFL_FACTOR};
pub use geometry::{compute_geometry, mean_curvature, GeometryField};
pub use grid::ImmersionGrid;
pub use presets::Preset;
pub use probes::{
    corollary_a_check, gauss_field, identity22_residual, lagrangian_monitor, laplace_beltrami,
    min_omega_monitor, theorem_a_residual, volume_law_residual,
};
pub use run::{
    run_flow, validate_params, DiagnosticsRecord, FlowParams, FlowRun, Probe, ProbeOutcome,
    ProbeTolerances,
};
