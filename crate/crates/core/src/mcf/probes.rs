//! Diagnostics evaluated on one state or on three consecutive states.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{dim_mismatch, Error, Result};
use crate::grassmann::TangentMatrix;
use crate::linalg::combinations;
use crate::omega::{ln_omega_second_derivative, OmegaForm};

use super::flow::FlowState;
use super::geometry::GeometryField;

/// Smallest `Omega` at which `-ln Omega` is evaluated.
pub const CHART_OMEGA: f64 = 0.05;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Maximum in index order; `NaN` entries propagate.
pub fn max_value(values: &[f64]) -> f64 {
    values.iter().fold(f64::NEG_INFINITY, |acc, &v| if v.is_nan() || acc.is_nan() { f64::NAN } else { acc.max(v) })
}

/// Collects per-point results in index order, returning the first error.
fn collect_points(results: Vec<Result<f64>>) -> Result<Vec<f64>> {
    results.into_iter().collect()
}

/// Plucker coordinates of `v_1 ^ ... ^ v_n` on lexicographic index sets.
fn wedge(vectors: &[&[f64]]) -> Vec<f64> {
    let d = vectors[0].len();
    match vectors.len() {
        1 => vectors[0].to_vec(),
        2 => combinations(d, 2)
            .iter()
            .map(|ij| vectors[0][ij[0]] * vectors[1][ij[1]] - vectors[0][ij[1]] * vectors[1][ij[0]])
            .collect(),
        _ => unreachable!("intrinsic dimension is 1 or 2"),
    }
}

/// Unit `n`-vector `e_1 ^ ... ^ e_n` at one point.
pub fn gauss_vector(geo: &GeometryField, idx: usize) -> Vec<f64> {
    let frame: Vec<&[f64]> = (0..geo.n()).map(|i| geo.frame_vector(idx, i)).collect();
    wedge(&frame)
}

/// Gauss map of the state, `C(n + m, n)` entries per point.
pub fn gauss_field(state: &FlowState) -> Vec<f64> {
    let geo = state.geometry();
    (0..geo.npts()).flat_map(|i| gauss_vector(geo, i)).collect()
}

/// Tension field `sum_i e_1 ^ ... ^ nabla_{e_i} H ^ ... ^ e_n`.
pub fn tension_vector(geo: &GeometryField, idx: usize) -> Vec<f64> {
    let n = geo.n();
    let nabla: Vec<Vec<f64>> = (0..n).map(|i| geo.normal_connection_h(idx, i)).collect();
    if n == 1 {
        return nabla[0].clone();
    }
    let e1 = geo.frame_vector(idx, 0);
    let e2 = geo.frame_vector(idx, 1);
    let a = wedge(&[&nabla[0], e2]);
    let b = wedge(&[e1, &nabla[1]]);
    a.iter().zip(&b).map(|(x, y)| x + y).collect()
}

/// Weights of the three-point derivative at the middle time.
fn time_weights(prev: &FlowState, cur: &FlowState, next: &FlowState) -> Result<[f64; 3]> {
    if !prev.surface().same_layout(cur.surface()) || !next.surface().same_layout(cur.surface()) {
        return Err(Error::GridMismatch);
    }
    let h1 = cur.time() - prev.time();
    let h2 = next.time() - cur.time();
    if !(h1 > 0.0 && h2 > 0.0) {
        return Err(Error::InvalidInput("states must be at increasing times".into()));
    }
    if (h2 - h1).abs() <= 1e-9 * h1.max(h2) {
        let h = 0.5 * (next.time() - prev.time());
        return Ok([-0.5 / h, 0.0, 0.5 / h]);
    }
    Ok([
        -h2 / (h1 * (h1 + h2)),
        (h2 - h1) / (h1 * h2),
        h1 / (h2 * (h1 + h2)),
    ])
}

fn time_derivative(w: [f64; 3], values: [&[f64]; 3]) -> Vec<f64> {
    (0..values[1].len())
        .map(|c| w[0] * values[0][c] + w[1] * values[1][c] + w[2] * values[2][c])
        .collect()
}

fn aligned(v: Vec<f64>, reference: &[f64]) -> Vec<f64> {
    if dot(&v, reference) < 0.0 {
        v.into_iter().map(|x| -x).collect()
    } else {
        v
    }
}

/// `|d gamma/dt - tau(gamma)|` per point, with `d/dt` taken from the three
/// states and `gamma` sign-aligned to the middle state.
pub fn theorem_a_residual(prev: &FlowState, cur: &FlowState, next: &FlowState) -> Result<Vec<f64>> {
    let w = time_weights(prev, cur, next)?;
    let geo = cur.geometry();
    Ok((0..geo.npts())
        .into_par_iter()
        .map(|idx| {
            let g1 = gauss_vector(geo, idx);
            let g0 = aligned(gauss_vector(prev.geometry(), idx), &g1);
            let g2 = aligned(gauss_vector(next.geometry(), idx), &g1);
            let dg = time_derivative(w, [&g0, &g1, &g2]);
            let tau = tension_vector(geo, idx);
            dg.iter().zip(&tau).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .collect())
}

/// `|d/dt sqrt(g) + |H|^2 sqrt(g)|` per point.
pub fn volume_law_residual(prev: &FlowState, cur: &FlowState, next: &FlowState) -> Result<Vec<f64>> {
    let w = time_weights(prev, cur, next)?;
    let geo = cur.geometry();
    Ok((0..geo.npts())
        .into_par_iter()
        .map(|idx| {
            let v = [
                prev.geometry().volume_density(idx),
                geo.volume_density(idx),
                next.geometry().volume_density(idx),
            ];
            let dv = w[0] * v[0] + w[1] * v[1] + w[2] * v[2];
            let h = geo.mean_curvature(idx);
            (dv + dot(h, h) * v[1]).abs()
        })
        .collect())
}

/// `(1/sqrt g) d_k (sqrt g g^kl d_l u)` on the periodic grid. Diagonal terms
/// use the compact three-point stencil with coefficients averaged to the
/// half-nodes; mixed terms are nested central differences.
pub fn laplace_beltrami(field: &[f64], geo: &GeometryField) -> Result<Vec<f64>> {
    if field.len() != geo.npts() {
        return Err(Error::GridMismatch);
    }
    let n = geo.n();
    let h = geo.spacing();
    let coeff = |idx: usize, k: usize, l: usize| geo.volume_density(idx) * geo.inverse_metric(idx, k, l);
    let central = |idx: usize, l: usize| {
        (field[geo.neighbor(idx, l, 1)] - field[geo.neighbor(idx, l, -1)]) / (2.0 * h[l])
    };
    Ok((0..geo.npts())
        .into_par_iter()
        .map(|idx| {
            let mut acc = 0.0;
            for k in 0..n {
                let p = geo.neighbor(idx, k, 1);
                let m = geo.neighbor(idx, k, -1);
                let c0 = coeff(idx, k, k);
                let cp = 0.5 * (c0 + coeff(p, k, k));
                let cm = 0.5 * (c0 + coeff(m, k, k));
                acc += (cp * (field[p] - field[idx]) - cm * (field[idx] - field[m])) / (h[k] * h[k]);
                for l in (0..n).filter(|&l| l != k) {
                    acc += (coeff(p, k, l) * central(p, l) - coeff(m, k, l) * central(m, l)) / (2.0 * h[k]);
                }
            }
            acc / geo.volume_density(idx)
        })
        .collect())
}

fn check_form(geo: &GeometryField, w: &OmegaForm) -> Result<()> {
    let base = w.base();
    if base.n() != geo.n() || base.ambient_dim() != geo.ambient_dim() {
        return Err(dim_mismatch(
            format!("G({}, {})", geo.n(), geo.ambient_dim() - geo.n()),
            format!("G({}, {})", base.n(), base.m()),
        ));
    }
    Ok(())
}

/// `Omega(gamma) = |det(Q^T E)|` per point.
pub fn omega_field(state: &FlowState, w: &OmegaForm) -> Result<Vec<f64>> {
    let geo = state.geometry();
    check_form(geo, w)?;
    let q = w.base().frame();
    let n = geo.n();
    Ok((0..geo.npts())
        .into_par_iter()
        .map(|idx| {
            let m = DMatrix::from_fn(n, n, |i, j| {
                (0..q.nrows()).map(|r| q[(r, i)] * geo.frame_vector(idx, j)[r]).sum::<f64>()
            });
            m.determinant().abs()
        })
        .collect())
}

pub fn min_omega(state: &FlowState, w: &OmegaForm) -> Result<f64> {
    Ok(omega_field(state, w)?.into_iter().fold(f64::INFINITY, f64::min))
}

/// `min Omega` at every state of a series.
pub fn min_omega_monitor(states: &[FlowState], w: &OmegaForm) -> Result<Vec<f64>> {
    states.iter().map(|s| min_omega(s, w)).collect()
}

/// True when no entry drops more than `tol` below its predecessor.
pub fn is_nondecreasing(series: &[f64], tol: f64) -> bool {
    series.windows(2).all(|p| p[1] >= p[0] - tol)
}

/// `rho = -ln Omega` per point; `OutOfChart` where `Omega <= 0.05`.
pub fn rho_field(state: &FlowState, w: &OmegaForm) -> Result<Vec<f64>> {
    let omega = omega_field(state, w)?;
    if let Some((index, &omega)) = omega.iter().enumerate().find(|(_, &o)| !(o > CHART_OMEGA)) {
        return Err(Error::OutOfChart { omega, index });
    }
    Ok(omega.iter().map(|o| -o.ln()).collect())
}

/// `(d/dt - Laplacian)(rho o gamma)` per point at the middle state.
pub fn corollary_a_check(
    prev: &FlowState,
    cur: &FlowState,
    next: &FlowState,
    w: &OmegaForm,
) -> Result<Vec<f64>> {
    let tw = time_weights(prev, cur, next)?;
    let r0 = rho_field(prev, w)?;
    let r1 = rho_field(cur, w)?;
    let r2 = rho_field(next, w)?;
    let lap = laplace_beltrami(&r1, cur.geometry())?;
    Ok((0..r1.len())
        .map(|i| tw[0] * r0[i] + tw[1] * r1[i] + tw[2] * r2[i] - lap[i])
        .collect())
}

/// `sum_k (ln Omega)''` along `d gamma(e_k)` at one point, where
/// `d gamma(e_k)` has entries `<A(e_k, e_i), c_a>` in the frame of the
/// Gauss plane and its complement.
pub fn hessian_sum(geo: &GeometryField, idx: usize, w: &OmegaForm) -> Result<f64> {
    let plane = geo.gauss_plane(idx)?;
    let n = geo.n();
    let c = plane.complement().clone();
    let mut total = 0.0;
    for k in 0..n {
        let rows: Vec<Vec<f64>> = (0..n).map(|i| geo.sff_orthonormal(idx, k, i)).collect();
        let mu = DMatrix::from_fn(n, c.ncols(), |i, a| {
            (0..c.nrows()).map(|r| rows[i][r] * c[(r, a)]).sum::<f64>()
        });
        let tangent = TangentMatrix::new(plane.clone(), mu)?;
        total += ln_omega_second_derivative(w, &tangent)?;
    }
    Ok(total)
}

/// `|(d/dt - Laplacian)(rho o gamma) - sum_k (ln Omega)''(d gamma(e_k))|`
/// per point: the defect of the composition formula for `rho = -ln Omega`.
pub fn identity22_residual(
    prev: &FlowState,
    cur: &FlowState,
    next: &FlowState,
    w: &OmegaForm,
) -> Result<Vec<f64>> {
    let lhs = corollary_a_check(prev, cur, next, w)?;
    let geo = cur.geometry();
    let rhs = collect_points(
        (0..geo.npts())
            .into_par_iter()
            .map(|idx| hessian_sum(geo, idx, w))
            .collect(),
    )?;
    Ok(lhs.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).collect())
}

/// `omega_std(u, v) = sum_k (u_{2k} v_{2k+1} - u_{2k+1} v_{2k})` in the
/// coordinate order `(x_1, y_1, ..., x_n, y_n)`.
pub fn symplectic_pairing(u: &[f64], v: &[f64]) -> f64 {
    (0..u.len() / 2)
        .map(|k| u[2 * k] * v[2 * k + 1] - u[2 * k + 1] * v[2 * k])
        .sum()
}

/// Per point, `max_{i<j} |omega_std(e_i, e_j)|`.
pub fn lagrangian_defects(state: &FlowState) -> Result<Vec<f64>> {
    let geo = state.geometry();
    let n = geo.n();
    let m = geo.ambient_dim() - n;
    if m != n {
        return Err(dim_mismatch("m = n", format!("n = {n}, m = {m}")));
    }
    Ok((0..geo.npts())
        .into_par_iter()
        .map(|idx| {
            let mut worst: f64 = 0.0;
            for i in 0..n {
                for j in (i + 1)..n {
                    let v = symplectic_pairing(geo.frame_vector(idx, i), geo.frame_vector(idx, j));
                    worst = worst.max(v.abs());
                }
            }
            worst
        })
        .collect())
}

pub fn lagrangian_monitor(state: &FlowState) -> Result<f64> {
    Ok(max_value(&lagrangian_defects(state)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::flow::{step, DEFAULT_CFL_FACTOR};
    use crate::mcf::grid::ImmersionGrid;
    use crate::mcf::presets::Preset;
    use std::f64::consts::TAU;

    fn triple(grid: ImmersionGrid, dt: f64) -> [FlowState; 3] {
        let a = FlowState::new(grid, 0.0).unwrap();
        let b = step(&a, dt, DEFAULT_CFL_FACTOR).unwrap();
        let c = step(&b, dt, DEFAULT_CFL_FACTOR).unwrap();
        [a, b, c]
    }

    #[test]
    fn unit_circle_gauss_map_is_unit_tangent() {
        let s = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[64]).unwrap(), 0.0).unwrap();
        let g = gauss_field(&s);
        for j in 0..64 {
            let th = j as f64 * TAU / 64.0;
            assert!((g[2 * j] + th.sin()).abs() < 1e-14 && (g[2 * j + 1] - th.cos()).abs() < 1e-14);
        }
    }

    #[test]
    fn plane_and_circle_residuals_vanish() {
        let [a, b, c] = triple(Preset::Plane.build(2, 2, &[16, 16]).unwrap(), 1e-3);
        let w = OmegaForm::coordinate(2, 2).unwrap();
        assert!(max_value(&theorem_a_residual(&a, &b, &c).unwrap()) < 1e-12);
        assert!(max_value(&volume_law_residual(&a, &b, &c).unwrap()) < 1e-12);
        assert!(max_value(&corollary_a_check(&a, &b, &c, &w).unwrap()).abs() < 1e-12);
        assert_eq!(min_omega(&b, &w).unwrap(), 1.0);

        let [a, b, c] = triple(Preset::Circle { r: 1.0 }.build(1, 1, &[128]).unwrap(), 1e-4);
        assert!(max_value(&theorem_a_residual(&a, &b, &c).unwrap()) < 1e-8);
        assert!(max_value(&volume_law_residual(&a, &b, &c).unwrap()) < 1e-6);
    }

    #[test]
    fn grid_mismatch_is_reported() {
        let a = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[32]).unwrap(), 0.0).unwrap();
        let b = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[64]).unwrap(), 0.1).unwrap();
        let c = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[32]).unwrap(), 0.2).unwrap();
        assert!(matches!(theorem_a_residual(&a, &b, &c), Err(Error::GridMismatch)));
        assert!(matches!(laplace_beltrami(&[0.0; 3], a.geometry()), Err(Error::GridMismatch)));
    }

    #[test]
    fn laplace_beltrami_examples() {
        let flat = FlowState::new(Preset::Plane.build(1, 1, &[128]).unwrap(), 0.0).unwrap();
        let h = TAU / 128.0;
        let u: Vec<f64> = (0..128).map(|j| (j as f64 * h).sin()).collect();
        let lap = laplace_beltrami(&u, flat.geometry()).unwrap();
        let err = (0..128).map(|j| (lap[j] + u[j]).abs()).fold(0.0, f64::max);
        assert!(err < h * h);

        let r = 2.5;
        let circle = FlowState::new(Preset::Circle { r }.build(1, 1, &[128]).unwrap(), 0.0).unwrap();
        let lap = laplace_beltrami(&u, circle.geometry()).unwrap();
        let err = (0..128).map(|j| (lap[j] + u[j] / (r * r)).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12);

        let torus = FlowState::new(Preset::Plane.build(2, 1, &[32, 32]).unwrap(), 0.0).unwrap();
        assert!(laplace_beltrami(&vec![3.0; 1024], torus.geometry()).unwrap().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn lagrangian_monitor_examples() {
        let torus = FlowState::new(Preset::ProductTorus { r1: 1.0, r2: 1.0 }.build(2, 2, &[32, 32]).unwrap(), 0.0).unwrap();
        assert!(lagrangian_monitor(&torus).unwrap() < 1e-12);
        let plane = FlowState::new(Preset::Plane.build(2, 2, &[8, 8]).unwrap(), 0.0).unwrap();
        assert!((lagrangian_monitor(&plane).unwrap() - 1.0).abs() < 1e-15);
        let curve = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 2, &[16]).unwrap(), 0.0).unwrap();
        assert!(matches!(lagrangian_monitor(&curve), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn vertical_gauss_image_is_out_of_chart() {
        let s = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[16]).unwrap(), 0.0).unwrap();
        let w = OmegaForm::coordinate(1, 1).unwrap();
        assert!(matches!(rho_field(&s, &w), Err(Error::OutOfChart { .. })));
    }

    #[test]
    fn nonuniform_time_weights_are_exact_for_quadratics() {
        let g = Preset::Plane.build(1, 1, &[8]).unwrap();
        let s = |t| FlowState::new(g.clone(), t).unwrap();
        let w = time_weights(&s(0.1), &s(0.3), &s(0.35)).unwrap();
        let f = |t: f64| 2.0 * t * t - t;
        let d = w[0] * f(0.1) + w[1] * f(0.3) + w[2] * f(0.35);
        assert!((d - (4.0 * 0.3 - 1.0)).abs() < 1e-12);
    }
}
