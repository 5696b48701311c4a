//! Random planes and tangent vectors for scans and property checks.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_mismatch, Result};
use crate::grassmann::{graph_plane, orthonormalize, Plane, TangentMatrix};
use crate::linalg::orthonormal_columns;

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Haar-distributed orthogonal `k x k` matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(rng: &mut R, k: usize) -> DMatrix<f64> {
    orthonormal_columns(&gaussian_matrix(rng, k, k))
}

/// Uniformly distributed plane in `G(n, m)`.
pub fn random_plane<R: Rng + ?Sized>(rng: &mut R, n: usize, m: usize) -> Result<Plane> {
    loop {
        match orthonormalize(&gaussian_matrix(rng, n + m, n)) {
            Err(crate::Error::RankDeficient { .. }) => continue,
            other => return other,
        }
    }
}

/// Uniformly distributed unit tangent vector at `plane`.
pub fn random_unit_tangent<R: Rng + ?Sized>(rng: &mut R, plane: &Plane) -> Result<TangentMatrix> {
    let mut g = gaussian_matrix(rng, plane.n(), plane.m());
    g /= g.norm();
    TangentMatrix::new(plane.clone(), g)
}

/// Graph over `base` whose graph map is `U diag(lambdas) V^T` with random
/// orthogonal `U`, `V`; `lambdas` has at most `min(n, m)` entries.
pub fn graph_with_lambdas<R: Rng + ?Sized>(
    rng: &mut R,
    base: &Plane,
    lambdas: &[f64],
) -> Result<Plane> {
    let (n, m) = (base.n(), base.m());
    let mut d = DMatrix::zeros(n, m);
    for (i, &l) in lambdas.iter().enumerate().take(n.min(m)) {
        d[(i, i)] = l;
    }
    let u = random_orthogonal(rng, n);
    let v = random_orthogonal(rng, m);
    graph_plane(base, &(u * d * v.transpose()))
}

/// Graph over `base` with i.i.d. Gaussian graph entries of standard
/// deviation `scale`.
pub fn random_graph_plane<R: Rng + ?Sized>(rng: &mut R, base: &Plane, scale: f64) -> Result<Plane> {
    graph_plane(base, &(gaussian_matrix(rng, base.n(), base.m()) * scale))
}

/// Boundary point of `Xi` over `base` (`n, m >= 2`): singular values
/// `(l, 1/l, ...)` with `l` uniform in `[1, 3)` and any further values below
/// `1/l`, in random singular frames.
pub fn boundary_plane<R: Rng + ?Sized>(rng: &mut R, base: &Plane) -> Result<Plane> {
    let k = base.n().min(base.m());
    if k < 2 {
        return Err(dim_mismatch("n, m >= 2", format!("n = {}, m = {}", base.n(), base.m())));
    }
    let l1: f64 = rng.random_range(1.0..3.0);
    let mut lambdas = vec![l1, 1.0 / l1];
    for _ in 2..k {
        lambdas.push(rng.random_range(0.0..0.9) / l1);
    }
    graph_with_lambdas(rng, base, &lambdas)
}
