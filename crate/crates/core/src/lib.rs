//! Grassmannian geometry of Gauss maps and a parametric mean curvature flow
//! simulator for curves and surfaces of arbitrary codimension.
//!
//! - [`grassmann`]: planes, tangent matrices, geodesics, distances, n-vectors.
//! - [`omega`]: `Omega`, the Hessian of `ln Omega`, the region `Xi` and its
//!   boundary second variation.
//! - [`selfdual`]: self-dual coordinates on `G(2, 2)`.
//! - [`mcf`]: periodic grids, discrete geometry, the flow and its probes.

pub mod error;
pub mod grassmann;
mod linalg;
pub mod mcf;
pub mod omega;
pub mod sampling;
pub mod selfdual;

pub use error::{Error, Result};
pub use linalg::combinations;
