//! Independent oracles shared by the integration tests and the acceptance
//! harness. Nothing here calls the analytic formulas it is used to check.
#![allow(dead_code)]

use gaussflow::grassmann::{geodesic, geodesic_state, graph_plane, Plane, TangentMatrix};
use gaussflow::omega::{
    boundary_frame, first_variation_gradient, ln_omega_second_derivative, omega_value,
    splitting_form, OmegaForm,
};
use gaussflow::sampling::{boundary_plane, gaussian_matrix, graph_with_lambdas};
use nalgebra::DMatrix;
use rand::Rng;

/// Central second difference of `ln Omega` along the integrated geodesic.
pub fn fd_ln_omega_second(w: &OmegaForm, tangent: &TangentMatrix, step: f64) -> f64 {
    let f = |s: f64| omega_value(w, &geodesic(tangent, s).unwrap()).unwrap().ln();
    (f(step) - 2.0 * f(0.0) + f(-step)) / (step * step)
}

/// Relative error of the analytic Hessian against the finite difference,
/// scaled by `max(|value|, |M|^2)`.
pub fn hessian_relative_error(w: &OmegaForm, tangent: &TangentMatrix) -> f64 {
    let analytic = ln_omega_second_derivative(w, tangent).unwrap();
    let fd = fd_ln_omega_second(w, tangent, 1e-4);
    (analytic - fd).abs() / analytic.abs().max(tangent.norm().powi(2))
}

/// `f(s) = w(s)^2 (S_11 g_22 + S_22 g_11 - 2 S_12 g_12)` for the vectors
/// `v_i = e_i + z_ia(s) e_{n+a}` with `z` taken from the integrated geodesic
/// in the reordered adapted frame, and `w(s) = 1 - s^2 (|mu_1|^2 + |mu_2|^2)/2`.
pub fn boundary_f(p: &Plane, q: &Plane, tangent: &TangentMatrix, s: f64) -> f64 {
    let frame = boundary_frame(p, q, tangent).unwrap();
    let e = frame.plane.frame();
    let c = frame.plane.complement();
    let mu = frame.tangent.entries();
    let z = if s == 0.0 {
        DMatrix::zeros(mu.nrows(), mu.ncols())
    } else {
        geodesic_state(&frame.tangent, s).unwrap().z
    };
    let v = e + c * z.transpose();
    let j = splitting_form(q);
    let sm = v.transpose() * &j * &v;
    let g = v.transpose() * &v;
    let norms = mu.row(0).norm_squared() + mu.row(1).norm_squared();
    let w = 1.0 - s * s * norms / 2.0;
    w * w * (sm[(0, 0)] * g[(1, 1)] + sm[(1, 1)] * g[(0, 0)] - 2.0 * sm[(0, 1)] * g[(0, 1)])
}

/// Central first and second differences of [`boundary_f`].
pub fn fd_boundary(p: &Plane, q: &Plane, tangent: &TangentMatrix, step: f64) -> (f64, f64) {
    let fp = boundary_f(p, q, tangent, step);
    let f0 = boundary_f(p, q, tangent, 0.0);
    let fm = boundary_f(p, q, tangent, -step);
    ((fp - fm) / (2.0 * step), (fp - 2.0 * f0 + fm) / (step * step))
}

/// Boundary point of `Xi` over the coordinate plane.
pub fn random_boundary_point<R: Rng>(rng: &mut R, n: usize, m: usize) -> (Plane, Plane) {
    let q = Plane::coordinate(n, m).unwrap();
    (boundary_plane(rng, &q).unwrap(), q)
}

/// Random unit direction at `p` with `f'(0) = 0`.
pub fn tangent_with_vanishing_first_variation<R: Rng>(
    rng: &mut R,
    p: &Plane,
    q: &Plane,
) -> TangentMatrix {
    let grad = first_variation_gradient(p, q).unwrap();
    let mut mu = gaussian_matrix(rng, p.n(), p.m());
    let gg = grad.norm_squared();
    if gg > 0.0 {
        mu -= &grad * (grad.dot(&mu) / gg);
    }
    mu /= mu.norm();
    TangentMatrix::new(p.clone(), mu).unwrap()
}

/// Largest `(ln Omega)''` over unit directions found by an adaptive random
/// search: Gaussian perturbations of the best direction so far, with the
/// step size adapted by the one-fifth success rule. `evaluations` counts
/// every direction examined.
pub fn search_positive_direction<R: Rng>(
    rng: &mut R,
    w: &OmegaForm,
    p: &Plane,
    evaluations: usize,
) -> f64 {
    let (n, m) = (p.n(), p.m());
    let eval = |mu: &DMatrix<f64>| {
        let t = TangentMatrix::new(p.clone(), mu.clone()).unwrap();
        ln_omega_second_derivative(w, &t).unwrap()
    };
    let mut best = gaussian_matrix(rng, n, m);
    best /= best.norm();
    let mut best_value = eval(&best);
    let mut sigma = 0.5;
    for _ in 1..evaluations {
        if best_value > 0.0 {
            break;
        }
        let mut cand = &best + gaussian_matrix(rng, n, m) * sigma;
        cand /= cand.norm();
        let v = eval(&cand);
        if v > best_value {
            best = cand;
            best_value = v;
            sigma *= 1.5;
        } else {
            sigma *= 0.9;
        }
        sigma = sigma.clamp(1e-4, 2.0);
    }
    best_value
}

/// Random graph plane whose largest pair product of singular values lies in
/// `[lo, hi]`.
pub fn graph_with_pair_product<R: Rng>(rng: &mut R, q: &Plane, lo: f64, hi: f64) -> Plane {
    let k = q.n().min(q.m());
    let p = rng.random_range(lo..hi);
    let l1 = rng.random_range(p.sqrt()..p.sqrt() * 2.0);
    let mut lambdas = vec![l1, p / l1];
    for _ in 2..k {
        lambdas.push(rng.random_range(0.0..1.0) * p / l1);
    }
    graph_with_lambdas(rng, q, &lambdas).unwrap()
}

/// `Omega(graph(L)) = 1/sqrt(det(I + L L^T))`, computed from the graph map
/// only.
pub fn omega_from_graph(l: &DMatrix<f64>) -> f64 {
    let n = l.nrows();
    1.0 / (DMatrix::<f64>::identity(n, n) + l * l.transpose()).determinant().sqrt()
}

pub fn graph_over_coordinates(l: &DMatrix<f64>) -> Plane {
    let (n, m) = l.shape();
    graph_plane(&Plane::coordinate(n, m).unwrap(), l).unwrap()
}
