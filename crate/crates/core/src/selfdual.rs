//! Self-dual and anti-self-dual coordinates on `G(2, 2)`.
//!
//! With `e^{ij}` the coordinate 2-forms on `R^4`,
//!
//! ```text
//! alpha_1 = (e^12 + e^34)/sqrt2   beta_1 = (e^12 - e^34)/sqrt2
//! alpha_2 = (e^13 + e^42)/sqrt2   beta_2 = (e^13 - e^42)/sqrt2
//! alpha_3 = (e^14 + e^23)/sqrt2   beta_3 = (e^14 - e^23)/sqrt2
//! ```
//!
//! `sqrt2 * alpha_1` is the Kaehler form `dx1^dy1 + dx2^dy2` of `C^2` in the
//! coordinate order `(x1, y1, x2, y2)`. Evaluated on an oriented unit 2-plane
//! the two triples each have squared norm `1/2`, which realizes
//! `G(2,2) = S^2(1/sqrt2) x S^2(1/sqrt2)`.

use std::f64::consts::FRAC_1_SQRT_2 as R;

use crate::error::{dim_mismatch, Error, Result};
use crate::grassmann::{plane_to_nvector, Plane};

/// Rows are forms, columns the coefficients on `e^12, e^13, e^14, e^23, e^24, e^34`.
pub const ALPHA: [[f64; 6]; 3] = [
    [R, 0.0, 0.0, 0.0, 0.0, R],
    [0.0, R, 0.0, 0.0, -R, 0.0],
    [0.0, 0.0, R, R, 0.0, 0.0],
];

pub const BETA: [[f64; 6]; 3] = [
    [R, 0.0, 0.0, 0.0, 0.0, -R],
    [0.0, R, 0.0, 0.0, R, 0.0],
    [0.0, 0.0, R, -R, 0.0, 0.0],
];

/// Values of the six forms on an oriented 2-plane in `R^4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoPlaneCoords {
    pub alpha: [f64; 3],
    pub beta: [f64; 3],
}

fn check_g22(p: &Plane) -> Result<()> {
    if p.n() != 2 || p.m() != 2 {
        return Err(dim_mismatch("G(2, 2)", format!("G({}, {})", p.n(), p.m())));
    }
    Ok(())
}

fn form_index(i: usize) -> Result<usize> {
    if (1..=3).contains(&i) {
        Ok(i - 1)
    } else {
        Err(Error::InvalidInput(format!("form index must be 1, 2 or 3, got {i}")))
    }
}

fn apply(form: &[f64; 6], plucker: &[f64]) -> f64 {
    form.iter().zip(plucker).map(|(a, b)| a * b).sum()
}

pub fn sd_coordinates(p: &Plane) -> Result<TwoPlaneCoords> {
    check_g22(p)?;
    let v = plane_to_nvector(p);
    Ok(TwoPlaneCoords {
        alpha: ALPHA.map(|f| apply(&f, &v)),
        beta: BETA.map(|f| apply(&f, &v)),
    })
}

/// `alpha_i(P) > 0`; orientation sensitive.
pub fn is_symplectic(p: &Plane, i: usize) -> Result<bool> {
    let k = form_index(i)?;
    Ok(sd_coordinates(p)?.alpha[k] > 1e-12)
}

/// `|alpha_i(P)|`, zero exactly on the great circle `{alpha_i = 0}`.
pub fn lagrangian_defect(p: &Plane, i: usize) -> Result<f64> {
    let k = form_index(i)?;
    Ok(sd_coordinates(p)?.alpha[k].abs())
}
