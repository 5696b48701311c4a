//! The function `Omega(P)` of a simple unit `n`-form, the second derivative
//! of `ln Omega` along geodesics, the region `Xi` of area-decreasing graphs
//! and its two characterizations, and the boundary second-variation test.
//!
//! Throughout, `Q` is the plane dual to `Omega` and `R^(n+m) = Q + Q^perp`
//! is the splitting used by the bilinear form
//! `S(X, Y) = <pi_1 X, pi_1 Y> - <pi_2 X, pi_2 Y>`.

use nalgebra::DMatrix;

use crate::error::{dim_mismatch, Error, Result};
use crate::grassmann::{
    distance, geodesic, graph_map, log_map, singular_values, Plane, TangentMatrix, RANK_TOL,
};
use crate::linalg::{combinations, full_svd, min_symmetric_eigenvalue, smallest_singular_value};

/// Tolerance on `|lambda_i lambda_j| <= 1` and on the sign of the smallest
/// eigenvalue of `sigma` on the wedge square.
pub const XI_TOL: f64 = 1e-10;
/// A plane counts as a boundary point of `Xi` when the smallest wedge
/// eigenvalue lies within this distance of zero.
pub const BOUNDARY_TOL: f64 = 1e-8;

/// A simple unit `n`-form, represented by its dual plane.
#[derive(Debug, Clone)]
pub struct OmegaForm {
    base: Plane,
}

impl OmegaForm {
    pub fn new(base: Plane) -> Self {
        Self { base }
    }

    /// `dx^1 ^ ... ^ dx^n` on `R^(n+m)`.
    pub fn coordinate(n: usize, m: usize) -> Result<Self> {
        Ok(Self::new(Plane::coordinate(n, m)?))
    }

    pub fn base(&self) -> &Plane {
        &self.base
    }
}

/// `Omega(P) = |det(Q^T F)|`; equals `1 / sqrt(prod(1 + lambda_i^2))` for
/// graphs and `0` for planes that are not graphs over `Q`.
pub fn omega_value(w: &OmegaForm, p: &Plane) -> Result<f64> {
    p.check_same_dims(&w.base)?;
    Ok((w.base.frame().transpose() * p.frame()).determinant().abs())
}

/// Singular-value adapted frames of a graph plane `P` over `Q`:
///
/// ```text
/// e_i     = (a_i + lambda_i a_{n+i}) / sqrt(1 + lambda_i^2)
/// e_{n+a} = (a_{n+a} - lambda_a a_a) / sqrt(1 + lambda_a^2)
/// ```
///
/// with `lambda_i = 0` past `min(n, m)`.
#[derive(Debug, Clone)]
pub struct AdaptedFrames {
    /// Descending, length `n`.
    pub lambdas: Vec<f64>,
    /// `P` with frame `e_i` and complement `e_{n+a}`.
    pub plane: Plane,
    /// `Q` with frame `a_i` and complement `a_{n+a}`.
    pub base: Plane,
}

pub fn adapted_frames(p: &Plane, q: &Plane) -> Result<AdaptedFrames> {
    let l = graph_map(p, q)?;
    let (n, m) = (p.n(), p.m());
    let k = n.min(m);
    let (u, sigma, v) = full_svd(&l);
    let a = q.frame() * &u;
    let b = q.complement() * &v;
    let mut lambdas = sigma.clone();
    lambdas.resize(n, 0.0);

    let d = n + m;
    let mut e = DMatrix::zeros(d, n);
    for i in 0..n {
        let col = if i < k {
            let lam = sigma[i];
            (a.column(i) + b.column(i) * lam) / (1.0 + lam * lam).sqrt()
        } else {
            a.column(i).into_owned()
        };
        e.set_column(i, &col);
    }
    let mut ec = DMatrix::zeros(d, m);
    for al in 0..m {
        let col = if al < k {
            let lam = sigma[al];
            (b.column(al) - a.column(al) * lam) / (1.0 + lam * lam).sqrt()
        } else {
            b.column(al).into_owned()
        };
        ec.set_column(al, &col);
    }
    Ok(AdaptedFrames {
        lambdas,
        plane: Plane::with_complement(e, ec)?,
        base: Plane::with_complement(a, b)?,
    })
}

/// Second derivative of `ln Omega` at `s = 0` along the geodesic leaving
/// `tangent.plane()` with initial velocity `tangent`.
///
/// In adapted frames with `mu` the tangent entries,
///
/// ```text
/// (ln p)'' = -sum mu_ia^2 - 2 sum_{i<j} mu_ij mu_ji lambda_i lambda_j
///            - sum_i (mu_ii lambda_i)^2
/// ```
pub fn ln_omega_second_derivative(w: &OmegaForm, tangent: &TangentMatrix) -> Result<f64> {
    let af = adapted_frames(tangent.plane(), w.base())?;
    let mu = tangent.entries_in(af.plane.frame(), af.plane.complement());
    Ok(ln_omega_hessian_adapted(&af.lambdas, &mu))
}

/// The quadratic form above, for `mu` already expressed in adapted frames.
pub fn ln_omega_hessian_adapted(lambdas: &[f64], mu: &DMatrix<f64>) -> f64 {
    let (n, m) = mu.shape();
    let k = n.min(m);
    let mut value = -mu.norm_squared();
    for i in 0..k {
        for j in (i + 1)..k {
            value -= 2.0 * mu[(i, j)] * mu[(j, i)] * lambdas[i] * lambdas[j];
        }
        let t = mu[(i, i)] * lambdas[i];
        value -= t * t;
    }
    value
}

/// Outcome of a `Xi` membership test.
#[derive(Debug, Clone, PartialEq)]
pub struct XiVerdict {
    pub is_member: bool,
    /// Singular values of the graph map; empty if `P` is not a graph.
    pub lambdas: Vec<f64>,
    /// `max_{i != j} |lambda_i lambda_j|` (filled by the singular-value test).
    pub worst_pair_product: Option<f64>,
    /// Smallest eigenvalue of `sigma` on the wedge square (filled by the
    /// `sigma` test when `n >= 2`).
    pub sigma_min_eigenvalue: Option<f64>,
}

fn is_graph(p: &Plane, q: &Plane) -> bool {
    smallest_singular_value(&(q.frame().transpose() * p.frame())) > RANK_TOL
}

/// Membership through `|lambda_i lambda_j| <= 1` for all `i != j`.
pub fn xi_membership_lambda(p: &Plane, q: &Plane) -> Result<XiVerdict> {
    p.check_same_dims(q)?;
    let lambdas = match singular_values(p, q) {
        Ok(l) => l,
        Err(Error::NotAGraph { .. }) => {
            return Ok(XiVerdict {
                is_member: false,
                lambdas: Vec::new(),
                worst_pair_product: None,
                sigma_min_eigenvalue: None,
            })
        }
        Err(e) => return Err(e),
    };
    // descending, so the worst pair is the top two
    let worst = if lambdas.len() >= 2 {
        (lambdas[0] * lambdas[1]).abs()
    } else {
        0.0
    };
    Ok(XiVerdict {
        is_member: worst <= 1.0 + XI_TOL,
        lambdas,
        worst_pair_product: Some(worst),
        sigma_min_eigenvalue: None,
    })
}

/// `S` restricted to a plane and the induced derivation on its wedge square.
#[derive(Debug, Clone)]
pub struct SigmaOperator {
    /// `S(e_i, e_j)` on the plane's orthonormal frame.
    pub s_matrix: DMatrix<f64>,
    /// `sigma` on `Lambda^2 P` in the basis `e_i ^ e_j`, `i < j`, lexicographic.
    pub sigma_on_wedge: DMatrix<f64>,
    /// Index pairs labelling the rows of `sigma_on_wedge`.
    pub pairs: Vec<(usize, usize)>,
}

/// Matrix of `X, Y -> S(X, Y)` on `R^(n+m)` for the splitting given by `q`.
pub fn splitting_form(q: &Plane) -> DMatrix<f64> {
    q.frame() * q.frame().transpose() - q.complement() * q.complement().transpose()
}

/// Derivation extension of a symmetric `n x n` matrix to `Lambda^2`.
pub fn wedge_extension(s: &DMatrix<f64>) -> (DMatrix<f64>, Vec<(usize, usize)>) {
    let n = s.nrows();
    let pairs: Vec<(usize, usize)> = combinations(n, 2).iter().map(|c| (c[0], c[1])).collect();
    let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
    let w = DMatrix::from_fn(pairs.len(), pairs.len(), |r, c| {
        let (i, j) = pairs[r];
        let (k, l) = pairs[c];
        s[(i, k)] * delta(j, l) + s[(j, l)] * delta(i, k)
            - s[(i, l)] * delta(j, k)
            - s[(j, k)] * delta(i, l)
    });
    (w, pairs)
}

pub fn sigma_operator(p: &Plane, q: &Plane) -> Result<SigmaOperator> {
    p.check_same_dims(q)?;
    let s_matrix = p.frame().transpose() * splitting_form(q) * p.frame();
    let (sigma_on_wedge, pairs) = wedge_extension(&s_matrix);
    Ok(SigmaOperator {
        s_matrix,
        sigma_on_wedge,
        pairs,
    })
}

/// Closed-form eigenvalues of `sigma` on the wedge square,
/// `2 (1 - lambda_i^2 lambda_j^2) / ((1 + lambda_i^2)(1 + lambda_j^2))`,
/// lexicographic in `i < j`.
pub fn wedge_eigenvalues_from_lambdas(lambdas: &[f64]) -> Vec<f64> {
    combinations(lambdas.len(), 2)
        .iter()
        .map(|c| {
            let (a, b) = (lambdas[c[0]] * lambdas[c[0]], lambdas[c[1]] * lambdas[c[1]]);
            2.0 * (1.0 - a * b) / ((1.0 + a) * (1.0 + b))
        })
        .collect()
}

pub(crate) fn xi_membership_sigma_tol(p: &Plane, q: &Plane, tol: f64) -> Result<XiVerdict> {
    p.check_same_dims(q)?;
    let graph = is_graph(p, q);
    if p.n() < 2 {
        return Ok(XiVerdict {
            is_member: graph,
            lambdas: Vec::new(),
            worst_pair_product: None,
            sigma_min_eigenvalue: None,
        });
    }
    let op = sigma_operator(p, q)?;
    let min_eig = min_symmetric_eigenvalue(&op.sigma_on_wedge);
    Ok(XiVerdict {
        is_member: graph && min_eig >= -tol,
        lambdas: Vec::new(),
        worst_pair_product: None,
        sigma_min_eigenvalue: Some(min_eig),
    })
}

/// Membership through nonnegativity of `sigma` on `Lambda^2 P`.
pub fn xi_membership_sigma(p: &Plane, q: &Plane) -> Result<XiVerdict> {
    xi_membership_sigma_tol(p, q, XI_TOL)
}

/// First and second derivative of `f(s) = <sigma(P_s) omega_s, omega_s>`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryVariation {
    pub f_prime: f64,
    pub f_double_prime: f64,
}

/// A boundary point of `Xi` in adapted frames, reordered so that the zero
/// eigenvector of `sigma` on the wedge square is `e_1 ^ e_2`.
#[derive(Debug, Clone)]
pub struct BoundaryFrame {
    pub plane: Plane,
    pub tangent: TangentMatrix,
    /// Positions of the two frame vectors in the unreordered adapted frame.
    pub pair: (usize, usize),
    pub lambdas: Vec<f64>,
    pub min_eigenvalue: f64,
}

pub fn boundary_frame(p: &Plane, q: &Plane, tangent: &TangentMatrix) -> Result<BoundaryFrame> {
    if !tangent.plane().same_span(p) {
        return Err(Error::InvalidInput("tangent is not attached to the plane".into()));
    }
    let n = p.n();
    if n < 2 {
        return Err(dim_mismatch("n >= 2", format!("n = {n}")));
    }
    let af = adapted_frames(p, q)?;
    let s = af.plane.frame().transpose() * splitting_form(q) * af.plane.frame();
    let mut best = (0, 1, f64::INFINITY);
    for c in combinations(n, 2) {
        let v = s[(c[0], c[0])] + s[(c[1], c[1])];
        if v < best.2 {
            best = (c[0], c[1], v);
        }
    }
    let (i, j, min_eigenvalue) = best;
    if min_eigenvalue.abs() > BOUNDARY_TOL {
        return Err(Error::NotBoundaryPoint { min_eigenvalue });
    }
    let mut order = vec![i, j];
    order.extend((0..n).filter(|&k| k != i && k != j));
    let e = af.plane.frame();
    let reordered = DMatrix::from_fn(e.nrows(), n, |r, c| e[(r, order[c])]);
    let plane = Plane::with_complement(reordered, af.plane.complement().clone())?;
    let tangent = tangent.rebased(&plane)?;
    Ok(BoundaryFrame {
        plane,
        tangent,
        pair: (i, j),
        lambdas: af.lambdas,
        min_eigenvalue,
    })
}

/// Analytic `f'(0)` and `f''(0)` at a boundary point of `Xi`.
///
/// The extension keeps `omega_s = w(s) (e_1 + z_1a e_{n+a}) ^ (e_2 + z_2b e_{n+b})`
/// with `w(0) = 1`, `w'(0) = 0` and `2 w''(0) = -g''_11 - g''_22`, so that
/// `|omega_s|^2` is constant to second order. With `mu` the tangent in the
/// reordered adapted frame:
///
/// ```text
/// S'_ij  = mu_ia S(e_{n+a}, e_j) + mu_ja S(e_i, e_{n+a})
/// S''_ij = 2 mu_ia mu_jb S(e_{n+a}, e_{n+b})
/// g''_ij = 2 mu_ia mu_ja
/// f'  = S'_11 + S'_22
/// f'' = S''_11 + S''_22 + S_11 g''_22 + S_22 g''_11 - 2 S_12 g''_12 + 2 w'' f(0)
/// ```
pub fn boundary_second_variation(
    p: &Plane,
    q: &Plane,
    tangent: &TangentMatrix,
) -> Result<BoundaryVariation> {
    let frame = boundary_frame(p, q, tangent)?;
    Ok(boundary_variation_in_frame(&frame, q))
}

/// Gradient of the linear functional `M -> f'(0)` at a boundary point, in the
/// entries of tangents attached to `p`. Directions orthogonal to it satisfy
/// the first-order condition `f'(0) = 0`.
pub fn first_variation_gradient(p: &Plane, q: &Plane) -> Result<DMatrix<f64>> {
    let (n, m) = (p.n(), p.m());
    let mut grad = DMatrix::zeros(n, m);
    for i in 0..n {
        for a in 0..m {
            let mut e = DMatrix::zeros(n, m);
            e[(i, a)] = 1.0;
            let t = TangentMatrix::new(p.clone(), e)?;
            grad[(i, a)] = boundary_second_variation(p, q, &t)?.f_prime;
        }
    }
    Ok(grad)
}

pub(crate) fn boundary_variation_in_frame(frame: &BoundaryFrame, q: &Plane) -> BoundaryVariation {
    let j = splitting_form(q);
    let e = frame.plane.frame();
    let c = frame.plane.complement();
    let mu = frame.tangent.entries();

    let s0 = e.transpose() * &j * e;
    let cross = c.transpose() * &j * e; // S(e_{n+a}, e_j)
    let normal = c.transpose() * &j * c; // S(e_{n+a}, e_{n+b})

    let mb = mu * &cross;
    let s1 = &mb + mb.transpose();
    let s2 = mu * &normal * mu.transpose() * 2.0;
    let g2 = mu * mu.transpose() * 2.0;

    let f0 = s0[(0, 0)] + s0[(1, 1)];
    let f_prime = s1[(0, 0)] + s1[(1, 1)];
    let w2 = -(g2[(0, 0)] + g2[(1, 1)]) / 2.0;
    let sigma2 = s2[(0, 0)] + s2[(1, 1)] + s0[(0, 0)] * g2[(1, 1)] + s0[(1, 1)] * g2[(0, 0)]
        - 2.0 * s0[(0, 1)] * g2[(0, 1)];
    BoundaryVariation {
        f_prime,
        f_double_prime: sigma2 + 2.0 * w2 * f0,
    }
}

/// Samples the connecting geodesic between two members of `Xi` and reports
/// whether every interior sample stays in `Xi` (wedge eigenvalue tolerance
/// `1e-8`). Local statement only: the planes must be within distance `0.5`.
pub fn convexity_probe(p1: &Plane, p2: &Plane, q: &Plane, samples: usize) -> Result<bool> {
    p1.check_same_dims(p2)?;
    p1.check_same_dims(q)?;
    let d = distance(p1, p2)?;
    if d > 0.5 {
        return Err(Error::InvalidInput(format!(
            "convexity probe needs distance <= 0.5, got {d}"
        )));
    }
    for (name, p) in [("first", p1), ("second", p2)] {
        if !xi_membership_sigma(p, q)?.is_member {
            return Err(Error::InvalidInput(format!("{name} endpoint is not in Xi")));
        }
    }
    if p1.same_span(p2) {
        return Ok(true);
    }
    let tangent = log_map(p1, p2)?;
    for k in 1..=samples {
        let s = k as f64 / (samples + 1) as f64;
        let mid = geodesic(&tangent, s)?;
        if !xi_membership_sigma_tol(&mid, q, BOUNDARY_TOL)?.is_member {
            return Ok(false);
        }
    }
    Ok(true)
}
