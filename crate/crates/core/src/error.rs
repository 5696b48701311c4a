use thiserror::Error;

/// Errors raised by the Grassmannian routines and the flow simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("columns are rank deficient (smallest singular value {smallest:e})")]
    RankDeficient { smallest: f64 },

    #[error("plane is not a graph over the base plane (smallest projected singular value {smallest:e})")]
    NotAGraph { smallest: f64 },

    #[error("geodesic left the graph chart at s = {s} (|Z| = {z_norm:e})")]
    GraphChartExit { s: f64, z_norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("no near-zero eigenvalue of sigma on the wedge square (minimum {min_eigenvalue:e})")]
    NotBoundaryPoint { min_eigenvalue: f64 },

    #[error("shooting for the connecting geodesic did not converge (residual {residual:e})")]
    NoGeodesicFound { residual: f64 },

    #[error("Gauss image left the chart: omega = {omega:e} at grid point {index}")]
    OutOfChart { omega: f64, index: usize },

    #[error("degenerate induced metric: Gram determinant {det:e} at grid point {index}")]
    DegenerateMetric { det: f64, index: usize },

    #[error("CflViolation: dt = {dt:e} exceeds cfl_factor * h_min^2 = {limit:e}")]
    CflViolation { dt: f64, limit: f64 },

    #[error("grids of the supplied states do not match")]
    GridMismatch,

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(expected: impl ToString, found: impl ToString) -> Error {
    Error::DimensionMismatch {
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
