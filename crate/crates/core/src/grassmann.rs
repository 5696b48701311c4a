//! Points, tangent vectors and geodesics of the Grassmannian `G(n, m)` of
//! `n`-planes in `R^(n+m)`.
//!
//! A [`Plane`] is stored as an orthonormal frame together with a fixed
//! orthonormal frame of its complement. A [`TangentMatrix`] at a plane is an
//! `n x m` matrix `A` describing the homomorphism `P -> P^perp` that sends the
//! `i`-th frame vector to `sum_a A[i][a] c_a`; its squared length is the sum
//! of squared entries.
//!
//! Geodesics are traced in the graph chart over the start plane: the moving
//! plane is spanned by `e_i + z_ia(s) c_a`, and the graph matrix obeys
//!
//! ```text
//! Z'' = 2 Z' Z^T (I + Z Z^T)^-1 Z',   Z(0) = 0,   Z'(0) = A.
//! ```

use nalgebra::DMatrix;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{
    complement_frame, orthonormal_columns, smallest_singular_value, wedge_columns,
};

/// Rank threshold on singular values.
pub const RANK_TOL: f64 = 1e-10;
/// Orthonormality tolerance for frames.
pub const ORTHO_TOL: f64 = 1e-12;
/// Graph coordinates above this norm mean the geodesic has left the chart.
pub const CHART_LIMIT: f64 = 1e8;
/// Two planes whose principal angles are all below this are the same plane.
pub const SPAN_TOL: f64 = 1e-10;

/// An `n`-dimensional subspace of `R^(n+m)`.
#[derive(Debug, Clone)]
pub struct Plane {
    n: usize,
    m: usize,
    frame: DMatrix<f64>,
    complement: DMatrix<f64>,
}

impl Plane {
    /// Wraps an orthonormal frame; the complement frame is derived
    /// deterministically from it.
    pub fn from_frame(frame: DMatrix<f64>) -> Result<Self> {
        let (d, n) = frame.shape();
        if n == 0 || n >= d {
            return Err(dim_mismatch("0 < n < n + m", format!("n = {n}, n + m = {d}")));
        }
        check_orthonormal(&frame)?;
        let complement = complement_frame(&frame);
        Ok(Self {
            n,
            m: d - n,
            frame,
            complement,
        })
    }

    /// Wraps a frame together with an explicit frame of the complement.
    pub fn with_complement(frame: DMatrix<f64>, complement: DMatrix<f64>) -> Result<Self> {
        let (d, n) = frame.shape();
        if complement.nrows() != d || complement.ncols() + n != d || n == 0 || n >= d {
            return Err(dim_mismatch(
                format!("{d} x {} complement", d.saturating_sub(n)),
                format!("{} x {}", complement.nrows(), complement.ncols()),
            ));
        }
        let mut full = DMatrix::zeros(d, d);
        full.columns_mut(0, n).copy_from(&frame);
        full.columns_mut(n, d - n).copy_from(&complement);
        check_orthonormal(&full)?;
        Ok(Self {
            n,
            m: d - n,
            frame,
            complement,
        })
    }

    /// `span{e_1, ..., e_n}` in `R^(n+m)`.
    pub fn coordinate(n: usize, m: usize) -> Result<Self> {
        Self::from_frame(DMatrix::identity(n + m, n))
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn ambient_dim(&self) -> usize {
        self.n + self.m
    }

    pub fn frame(&self) -> &DMatrix<f64> {
        &self.frame
    }

    pub fn complement(&self) -> &DMatrix<f64> {
        &self.complement
    }

    /// Orthogonal projector onto the plane.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.frame * self.frame.transpose()
    }

    /// Span equality: every principal angle below [`SPAN_TOL`].
    pub fn same_span(&self, other: &Plane) -> bool {
        self.n == other.n
            && self.m == other.m
            && principal_angles(self, other)
                .map(|a| a.iter().all(|&t| t < SPAN_TOL))
                .unwrap_or(false)
    }

    pub(crate) fn check_same_dims(&self, other: &Plane) -> Result<()> {
        if self.n != other.n || self.m != other.m {
            return Err(dim_mismatch(
                format!("G({}, {})", self.n, self.m),
                format!("G({}, {})", other.n, other.m),
            ));
        }
        Ok(())
    }
}

impl PartialEq for Plane {
    fn eq(&self, other: &Self) -> bool {
        self.same_span(other)
    }
}

fn check_orthonormal(frame: &DMatrix<f64>) -> Result<()> {
    let gram = frame.transpose() * frame;
    let err = (gram - DMatrix::identity(frame.ncols(), frame.ncols())).amax();
    if err > ORTHO_TOL {
        return Err(Error::InvalidInput(format!(
            "frame is not orthonormal (max deviation {err:e})"
        )));
    }
    Ok(())
}

/// A tangent vector to `G(n, m)` at a plane, as an `n x m` matrix in the
/// plane's frame and complement frame.
#[derive(Debug, Clone)]
pub struct TangentMatrix {
    entries: DMatrix<f64>,
    plane: Plane,
}

impl TangentMatrix {
    pub fn new(plane: Plane, entries: DMatrix<f64>) -> Result<Self> {
        if entries.shape() != (plane.n, plane.m) {
            return Err(dim_mismatch(
                format!("{} x {}", plane.n, plane.m),
                format!("{} x {}", entries.nrows(), entries.ncols()),
            ));
        }
        Ok(Self { entries, plane })
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn plane(&self) -> &Plane {
        &self.plane
    }

    /// Length in the homogeneous metric, `sqrt(sum A_ia^2)`.
    pub fn norm(&self) -> f64 {
        self.entries.norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            entries: &self.entries * factor,
            plane: self.plane.clone(),
        }
    }

    /// Velocity of the frame vectors, `C A^T` (columns are the images of the
    /// frame vectors in `R^(n+m)`).
    pub fn frame_velocity(&self) -> DMatrix<f64> {
        self.plane.complement() * self.entries.transpose()
    }

    /// Entries of the same tangent vector with respect to another orthonormal
    /// frame of the plane and another frame of its complement.
    pub fn entries_in(&self, frame: &DMatrix<f64>, complement: &DMatrix<f64>) -> DMatrix<f64> {
        (frame.transpose() * self.plane.frame()) * &self.entries
            * (self.plane.complement().transpose() * complement)
    }

    /// Re-expresses the tangent vector at a different representation of the
    /// same plane.
    pub fn rebased(&self, plane: &Plane) -> Result<Self> {
        if !self.plane.same_span(plane) {
            return Err(Error::InvalidInput(
                "tangent vector rebased onto a different plane".into(),
            ));
        }
        let entries = self.entries_in(plane.frame(), plane.complement());
        Self::new(plane.clone(), entries)
    }
}

/// Point of a geodesic in the graph chart over its start plane.
#[derive(Debug, Clone)]
pub struct GeodesicState {
    pub z: DMatrix<f64>,
    pub zdot: DMatrix<f64>,
    pub s: f64,
}

impl GeodesicState {
    fn start(tangent: &TangentMatrix) -> Self {
        let (n, m) = tangent.entries.shape();
        Self {
            z: DMatrix::zeros(n, m),
            zdot: tangent.entries.clone(),
            s: 0.0,
        }
    }
}

/// Orthonormalizes raw columns into a plane spanning the same subspace.
pub fn orthonormalize(raw_columns: &DMatrix<f64>) -> Result<Plane> {
    let smallest = smallest_singular_value(raw_columns);
    if smallest <= RANK_TOL {
        return Err(Error::RankDeficient { smallest });
    }
    Plane::from_frame(orthonormal_columns(raw_columns))
}

/// Plane spanned by `a_i + sum_a graph[i][a] b_a` where `a_i` is the frame of
/// `base` and `b_a` its complement frame.
pub fn graph_plane(base: &Plane, graph: &DMatrix<f64>) -> Result<Plane> {
    if graph.shape() != (base.n, base.m) {
        return Err(dim_mismatch(
            format!("{} x {}", base.n, base.m),
            format!("{} x {}", graph.nrows(), graph.ncols()),
        ));
    }
    orthonormalize(&(base.frame() + base.complement() * graph.transpose()))
}

/// Graph matrix `L` (`n x m`) of `p` over `base`, i.e. `p` is spanned by
/// `a_i + L_ia b_a`.
pub fn graph_map(p: &Plane, base: &Plane) -> Result<DMatrix<f64>> {
    p.check_same_dims(base)?;
    let x = base.frame().transpose() * p.frame();
    let smallest = smallest_singular_value(&x);
    if smallest <= RANK_TOL {
        return Err(Error::NotAGraph { smallest });
    }
    let y = base.complement().transpose() * p.frame();
    let x_inv = x.try_inverse().ok_or(Error::NotAGraph { smallest })?;
    Ok((y * x_inv).transpose())
}

/// Singular values of the graph map of `p` over `base`, descending, padded
/// with zeros to length `n`.
pub fn singular_values(p: &Plane, base: &Plane) -> Result<Vec<f64>> {
    let l = graph_map(p, base)?;
    let mut lambdas: Vec<f64> = l.singular_values().iter().copied().collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas.resize(p.n, 0.0);
    Ok(lambdas)
}

/// Plane spanned by `e_i + z_ia c_a` over `p`.
pub fn plane_from_graph(p: &Plane, z: &DMatrix<f64>) -> Result<Plane> {
    graph_plane(p, z)
}

fn geodesic_rhs(z: &DMatrix<f64>, zdot: &DMatrix<f64>) -> DMatrix<f64> {
    let n = z.nrows();
    let gram = DMatrix::identity(n, n) + z * z.transpose();
    let solved = gram
        .cholesky()
        .expect("I + Z Z^T is positive definite")
        .solve(zdot);
    zdot * (z.transpose() * solved) * 2.0
}

/// Integrates the geodesic equation from `Z(0) = 0`, `Z'(0) = tangent` up to
/// parameter `s` with classical RK4 and step `min(1e-3, |s| / 100)`.
pub fn geodesic_state(tangent: &TangentMatrix, s: f64) -> Result<GeodesicState> {
    if !s.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite geodesic parameter {s}")));
    }
    let mut state = GeodesicState::start(tangent);
    if s == 0.0 {
        return Ok(state);
    }
    let h_max = (1e-3f64).min(s.abs() / 100.0);
    let steps = (s.abs() / h_max).ceil() as usize;
    let h = s / steps as f64;
    let (mut z, mut v) = (state.z, state.zdot);
    for k in 0..steps {
        let a1 = geodesic_rhs(&z, &v);
        let z2 = &z + &v * (h / 2.0);
        let v2 = &v + &a1 * (h / 2.0);
        let a2 = geodesic_rhs(&z2, &v2);
        let z3 = &z + &v2 * (h / 2.0);
        let v3 = &v + &a2 * (h / 2.0);
        let a3 = geodesic_rhs(&z3, &v3);
        let z4 = &z + &v3 * h;
        let v4 = &v + &a3 * h;
        let a4 = geodesic_rhs(&z4, &v4);
        z += (&v + &v2 * 2.0 + &v3 * 2.0 + &v4) * (h / 6.0);
        v += (a1 + a2 * 2.0 + a3 * 2.0 + a4) * (h / 6.0);
        let z_norm = z.norm();
        if !z_norm.is_finite() || z_norm > CHART_LIMIT {
            return Err(Error::GraphChartExit {
                s: h * (k + 1) as f64,
                z_norm,
            });
        }
    }
    state = GeodesicState { z, zdot: v, s };
    Ok(state)
}

/// Plane reached by the integrated geodesic at parameter `s`.
pub fn geodesic(tangent: &TangentMatrix, s: f64) -> Result<Plane> {
    let state = geodesic_state(tangent, s)?;
    plane_from_graph(tangent.plane(), &state.z)
}

/// Graph matrix of the geodesic in closed form, `U tan(s Theta) V^T` where
/// `U Theta V^T` is a singular value decomposition of the tangent.
pub fn geodesic_closed_form_graph(tangent: &TangentMatrix, s: f64) -> Result<DMatrix<f64>> {
    let (n, m) = tangent.entries.shape();
    if s == 0.0 {
        return Ok(DMatrix::zeros(n, m));
    }
    let svd = tangent.entries.clone().svd(true, true);
    let theta_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    if (s * theta_max).abs() >= std::f64::consts::FRAC_PI_2 - 1e-6 {
        return Err(Error::GraphChartExit {
            s,
            z_norm: f64::INFINITY,
        });
    }
    let u = svd.u.expect("u requested");
    let v_t = svd.v_t.expect("v requested");
    let tan = DMatrix::from_diagonal(&svd.singular_values.map(|t| (s * t).tan()));
    Ok(u * tan * v_t)
}

/// Closed-form geodesic; agrees with [`geodesic`] inside the chart.
pub fn geodesic_closed_form(tangent: &TangentMatrix, s: f64) -> Result<Plane> {
    let z = geodesic_closed_form_graph(tangent, s)?;
    plane_from_graph(tangent.plane(), &z)
}

/// Principal angles between two planes, ascending.
///
/// Cosines come from `F1^T F2` and sines from `C1^T F2`; pairing the largest
/// cosine with the smallest sine and taking `atan2` keeps small angles
/// accurate.
pub fn principal_angles(p1: &Plane, p2: &Plane) -> Result<Vec<f64>> {
    p1.check_same_dims(p2)?;
    let n = p1.n;
    let mut cosines: Vec<f64> = (p1.frame().transpose() * p2.frame())
        .singular_values()
        .iter()
        .copied()
        .collect();
    cosines.sort_by(|a, b| b.total_cmp(a));
    let mut sines: Vec<f64> = (p1.complement().transpose() * p2.frame())
        .singular_values()
        .iter()
        .copied()
        .collect();
    sines.sort_by(|a, b| a.total_cmp(b));
    let mut padded = vec![0.0; n.saturating_sub(sines.len())];
    padded.extend(sines);
    Ok(cosines
        .iter()
        .zip(&padded)
        .map(|(&c, &s)| s.atan2(c).clamp(0.0, std::f64::consts::FRAC_PI_2))
        .collect())
}

/// Geodesic distance `sqrt(sum theta_i^2)` over the principal angles.
pub fn distance(p1: &Plane, p2: &Plane) -> Result<f64> {
    Ok(principal_angles(p1, p2)?
        .iter()
        .map(|t| t * t)
        .sum::<f64>()
        .sqrt())
}

/// Unit simple `n`-vector `f_1 ^ ... ^ f_n` of the frame, lexicographic
/// coordinates in `Lambda^n R^(n+m)`.
pub fn plane_to_nvector(p: &Plane) -> Vec<f64> {
    wedge_columns(p.frame())
}

/// Tangent at `from` whose geodesic reaches `to` at `s = 1`.
///
/// The graph matrix of `to` over `from` is `U tan(Theta) V^T`, so the closed
/// form is inverted directly; a Newton shooting on the closed form takes
/// over if the direct inverse misses the target by more than `1e-8`.
pub fn log_map(from: &Plane, to: &Plane) -> Result<TangentMatrix> {
    let target = graph_map(to, from)?;
    let svd = target.clone().svd(true, true);
    let u = svd.u.clone().expect("u requested");
    let v_t = svd.v_t.clone().expect("v requested");
    let theta = DMatrix::from_diagonal(&svd.singular_values.map(f64::atan));
    let direct = TangentMatrix::new(from.clone(), u * theta * v_t)?;
    let reached = geodesic_closed_form(&direct, 1.0)?;
    if distance(&reached, to)? <= 1e-8 {
        return Ok(direct);
    }
    shoot(from, &target, direct.entries().clone())
}

fn shoot(from: &Plane, target: &DMatrix<f64>, mut guess: DMatrix<f64>) -> Result<TangentMatrix> {
    let (n, m) = target.shape();
    let k = n * m;
    let residual = |g: &DMatrix<f64>| -> Result<DMatrix<f64>> {
        let t = TangentMatrix::new(from.clone(), g.clone())?;
        Ok(geodesic_closed_form_graph(&t, 1.0)? - target)
    };
    let mut r = residual(&guess)?;
    for _ in 0..100 {
        if r.norm() <= 1e-8 {
            return TangentMatrix::new(from.clone(), guess);
        }
        let eps = 1e-7;
        let mut jac = DMatrix::zeros(k, k);
        for c in 0..k {
            let mut g = guess.clone();
            g[c] += eps;
            let rc = residual(&g)?;
            jac.column_mut(c)
                .copy_from_slice(((rc - &r) / eps).as_slice());
        }
        let rhs = nalgebra::DVector::from_column_slice(r.as_slice());
        let step = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::NoGeodesicFound { residual: r.norm() })?;
        for c in 0..k {
            guess[c] -= step[c];
        }
        r = residual(&guess)?;
    }
    if r.norm() <= 1e-8 {
        return TangentMatrix::new(from.clone(), guess);
    }
    Err(Error::NoGeodesicFound { residual: r.norm() })
}
