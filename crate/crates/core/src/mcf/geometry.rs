//! Discrete geometry of a periodic grid.
//!
//! Tangents, second derivatives and the normal derivative of `H` are central
//! differences. The diagonal metric entries average the two one-sided edge
//! lengths, `g_kk = (|D+_k F|^2 + |D-_k F|^2)/2`, and the off-diagonal entry
//! is `<D0_1 F, D0_2 F>`. With this choice the curvature of a sampled circle
//! (and of a product of circles) is exact, so those surfaces evolve by the
//! exact radius law up to time-stepping error.

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grassmann::Plane;

use super::grid::{ImmersionGrid, MAX_AMBIENT};

/// Smallest admissible Gram determinant of the discrete tangents.
pub const GRAM_TOL: f64 = 1e-10;

type Vector = [f64; MAX_AMBIENT];

#[derive(Clone, Copy)]
struct Local {
    tangents: [Vector; 2],
    frame: [Vector; 2],
    coeffs: [[f64; 2]; 2],
    metric: [[f64; 2]; 2],
    inverse: [[f64; 2]; 2],
    det: f64,
    sff: [[Vector; 2]; 2],
    h: Vector,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn project_normal(v: &mut [f64], frame: &[Vector], n: usize) {
    for e in frame.iter().take(n) {
        let c = dot(v, &e[..v.len()]);
        for (x, y) in v.iter_mut().zip(e) {
            *x -= c * y;
        }
    }
}

fn local(grid: &ImmersionGrid, idx: usize) -> Local {
    let n = grid.n();
    let d = grid.ambient_dim();
    let [i1, i2] = grid.multi_index(idx);
    let (i1, i2) = (i1 as isize, i2 as isize);
    let steps: [(isize, isize); 2] = [(1, 0), (0, 1)];
    let mut f0 = [0.0; MAX_AMBIENT];
    grid.point(i1, i2, &mut f0);

    let mut out = Local {
        tangents: [[0.0; MAX_AMBIENT]; 2],
        frame: [[0.0; MAX_AMBIENT]; 2],
        coeffs: [[0.0; 2]; 2],
        metric: [[0.0; 2]; 2],
        inverse: [[0.0; 2]; 2],
        det: 0.0,
        sff: [[[0.0; MAX_AMBIENT]; 2]; 2],
        h: [0.0; MAX_AMBIENT],
    };
    let mut second = [[[0.0; MAX_AMBIENT]; 2]; 2];
    for k in 0..n {
        let hk = grid.spacing(k);
        let (a, b) = steps[k];
        let mut fp = [0.0; MAX_AMBIENT];
        let mut fm = [0.0; MAX_AMBIENT];
        grid.point(i1 + a, i2 + b, &mut fp);
        grid.point(i1 - a, i2 - b, &mut fm);
        let (mut plus, mut minus) = (0.0, 0.0);
        for c in 0..d {
            out.tangents[k][c] = (fp[c] - fm[c]) / (2.0 * hk);
            second[k][k][c] = (fp[c] - 2.0 * f0[c] + fm[c]) / (hk * hk);
            plus += (fp[c] - f0[c]).powi(2);
            minus += (f0[c] - fm[c]).powi(2);
        }
        out.metric[k][k] = 0.5 * (plus + minus) / (hk * hk);
    }
    if n == 2 {
        let (h1, h2) = (grid.spacing(0), grid.spacing(1));
        let mut corners = [[0.0; MAX_AMBIENT]; 4];
        for (slot, (a, b)) in corners.iter_mut().zip([(1, 1), (1, -1), (-1, 1), (-1, -1)]) {
            grid.point(i1 + a, i2 + b, slot);
        }
        for c in 0..d {
            let v = (corners[0][c] - corners[1][c] - corners[2][c] + corners[3][c]) / (4.0 * h1 * h2);
            second[0][1][c] = v;
            second[1][0][c] = v;
        }
        let g12 = dot(&out.tangents[0][..d], &out.tangents[1][..d]);
        out.metric[0][1] = g12;
        out.metric[1][0] = g12;
    }

    if n == 1 {
        out.det = out.metric[0][0];
        out.inverse[0][0] = 1.0 / out.det;
    } else {
        let g = out.metric;
        out.det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
        out.inverse = [
            [g[1][1] / out.det, -g[0][1] / out.det],
            [-g[1][0] / out.det, g[0][0] / out.det],
        ];
    }

    // Gram-Schmidt on the central tangents; `coeffs[k][i]` is the
    // coefficient of `D0_k F` in `e_i`.
    let r11 = dot(&out.tangents[0][..d], &out.tangents[0][..d]).sqrt();
    for c in 0..d {
        out.frame[0][c] = out.tangents[0][c] / r11;
    }
    out.coeffs[0][0] = 1.0 / r11;
    if n == 2 {
        let r12 = dot(&out.frame[0][..d], &out.tangents[1][..d]);
        let mut v = out.tangents[1];
        for c in 0..d {
            v[c] -= r12 * out.frame[0][c];
        }
        let r22 = dot(&v[..d], &v[..d]).sqrt();
        for c in 0..d {
            out.frame[1][c] = v[c] / r22;
        }
        out.coeffs[0][1] = -r12 / (r11 * r22);
        out.coeffs[1][1] = 1.0 / r22;
    }

    for k in 0..n {
        for l in 0..n {
            let mut a = second[k][l];
            project_normal(&mut a[..d], &out.frame, n);
            out.sff[k][l] = a;
            let w = out.inverse[k][l];
            for c in 0..d {
                out.h[c] += w * a[c];
            }
        }
    }
    out
}

fn check_gram(dets: impl Iterator<Item = f64>) -> Result<()> {
    for (index, det) in dets.enumerate() {
        if !(det > GRAM_TOL) {
            return Err(Error::DegenerateMetric { det, index });
        }
    }
    Ok(())
}

/// Mean curvature vectors only, `d` entries per point.
pub fn mean_curvature(grid: &ImmersionGrid) -> Result<Vec<f64>> {
    let d = grid.ambient_dim();
    let stride = d + 1;
    let mut buf = vec![0.0; grid.npts() * stride];
    buf.par_chunks_mut(stride).enumerate().for_each(|(idx, out)| {
        let l = local(grid, idx);
        out[..d].copy_from_slice(&l.h[..d]);
        out[d] = l.det;
    });
    check_gram(buf.chunks(stride).map(|c| c[d]))?;
    Ok(buf.chunks(stride).flat_map(|c| c[..d].iter().copied()).collect())
}

/// Per-point induced geometry of an [`ImmersionGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeometryField {
    n: usize,
    d: usize,
    resolution: Vec<usize>,
    spacing: Vec<f64>,
    layout: Layout,
    data: Vec<f64>,
    nabla_h: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layout {
    tangents: usize,
    frame: usize,
    coeffs: usize,
    metric: usize,
    inverse: usize,
    volume: usize,
    sff: usize,
    h: usize,
    stride: usize,
}

impl Layout {
    fn new(n: usize, d: usize) -> Self {
        let tangents = 0;
        let frame = tangents + n * d;
        let coeffs = frame + n * d;
        let metric = coeffs + n * n;
        let inverse = metric + n * n;
        let volume = inverse + n * n;
        let sff = volume + 1;
        let h = sff + n * n * d;
        Self {
            tangents,
            frame,
            coeffs,
            metric,
            inverse,
            volume,
            sff,
            h,
            stride: h + d,
        }
    }
}

pub fn compute_geometry(grid: &ImmersionGrid) -> Result<GeometryField> {
    let n = grid.n();
    let d = grid.ambient_dim();
    let layout = Layout::new(n, d);
    let mut data = vec![0.0; grid.npts() * layout.stride];
    let mut dets = vec![0.0; grid.npts()];
    data.par_chunks_mut(layout.stride)
        .zip(dets.par_iter_mut())
        .enumerate()
        .for_each(|(idx, (out, det))| {
            let l = local(grid, idx);
            *det = l.det;
            for k in 0..n {
                out[layout.tangents + k * d..][..d].copy_from_slice(&l.tangents[k][..d]);
                out[layout.frame + k * d..][..d].copy_from_slice(&l.frame[k][..d]);
                for i in 0..n {
                    out[layout.coeffs + k * n + i] = l.coeffs[k][i];
                    out[layout.metric + k * n + i] = l.metric[k][i];
                    out[layout.inverse + k * n + i] = l.inverse[k][i];
                    out[layout.sff + (k * n + i) * d..][..d].copy_from_slice(&l.sff[k][i][..d]);
                }
            }
            out[layout.volume] = l.det.max(0.0).sqrt();
            out[layout.h..][..d].copy_from_slice(&l.h[..d]);
        });
    check_gram(dets.into_iter())?;

    let mut field = GeometryField {
        n,
        d,
        resolution: grid.resolution().to_vec(),
        spacing: (0..n).map(|k| grid.spacing(k)).collect(),
        layout,
        data,
        nabla_h: Vec::new(),
    };
    field.nabla_h = field.normal_derivative_of_h();
    Ok(field)
}

impl GeometryField {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn npts(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn spacing(&self) -> &[f64] {
        &self.spacing
    }

    fn chunk(&self, idx: usize) -> &[f64] {
        &self.data[idx * self.layout.stride..(idx + 1) * self.layout.stride]
    }

    pub(crate) fn neighbor(&self, idx: usize, axis: usize, offset: isize) -> usize {
        let n1 = self.resolution[0];
        let mut ij = [(idx % n1) as isize, (idx / n1) as isize];
        ij[axis] += offset;
        let a = ij[0].rem_euclid(n1 as isize) as usize;
        if self.n == 1 {
            a
        } else {
            a + n1 * ij[1].rem_euclid(self.resolution[1] as isize) as usize
        }
    }

    /// Central-difference tangent `D0_k F`.
    pub fn tangent(&self, idx: usize, k: usize) -> &[f64] {
        &self.chunk(idx)[self.layout.tangents + k * self.d..][..self.d]
    }

    /// Orthonormal frame vector `e_i` (Gram-Schmidt of the tangents).
    pub fn frame_vector(&self, idx: usize, i: usize) -> &[f64] {
        &self.chunk(idx)[self.layout.frame + i * self.d..][..self.d]
    }

    /// Coefficient of `D0_k F` in `e_i`.
    pub fn frame_coefficient(&self, idx: usize, k: usize, i: usize) -> f64 {
        self.chunk(idx)[self.layout.coeffs + k * self.n + i]
    }

    pub fn metric(&self, idx: usize, k: usize, l: usize) -> f64 {
        self.chunk(idx)[self.layout.metric + k * self.n + l]
    }

    pub fn inverse_metric(&self, idx: usize, k: usize, l: usize) -> f64 {
        self.chunk(idx)[self.layout.inverse + k * self.n + l]
    }

    /// `sqrt(det g)`.
    pub fn volume_density(&self, idx: usize) -> f64 {
        self.chunk(idx)[self.layout.volume]
    }

    /// `A(d_k, d_l)`, the normal part of the second difference.
    pub fn second_fundamental_form(&self, idx: usize, k: usize, l: usize) -> &[f64] {
        &self.chunk(idx)[self.layout.sff + (k * self.n + l) * self.d..][..self.d]
    }

    /// `A(e_i, e_j)` in the orthonormal frame.
    pub fn sff_orthonormal(&self, idx: usize, i: usize, j: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for k in 0..self.n {
            for l in 0..self.n {
                let w = self.frame_coefficient(idx, k, i) * self.frame_coefficient(idx, l, j);
                if w != 0.0 {
                    for (o, a) in out.iter_mut().zip(self.second_fundamental_form(idx, k, l)) {
                        *o += w * a;
                    }
                }
            }
        }
        out
    }

    pub fn mean_curvature(&self, idx: usize) -> &[f64] {
        &self.chunk(idx)[self.layout.h..][..self.d]
    }

    /// All mean curvature vectors, point-major.
    pub fn mean_curvature_field(&self) -> Vec<f64> {
        (0..self.npts()).flat_map(|i| self.mean_curvature(i).iter().copied()).collect()
    }

    /// `nabla_{d_k} H`: normal part of the central difference of `H`.
    pub fn normal_connection_h_coordinate(&self, idx: usize, k: usize) -> &[f64] {
        &self.nabla_h[(idx * self.n + k) * self.d..][..self.d]
    }

    /// `nabla_{e_i} H` in the orthonormal frame.
    pub fn normal_connection_h(&self, idx: usize, i: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.d];
        for k in 0..self.n {
            let w = self.frame_coefficient(idx, k, i);
            for (o, v) in out.iter_mut().zip(self.normal_connection_h_coordinate(idx, k)) {
                *o += w * v;
            }
        }
        out
    }

    /// Orthonormal frame of the tangent plane as a `(n + m) x n` matrix.
    pub fn frame_matrix(&self, idx: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.d, self.n, |r, c| self.frame_vector(idx, c)[r])
    }

    /// The tangent plane, oriented by the coordinate order.
    pub fn gauss_plane(&self, idx: usize) -> Result<Plane> {
        Plane::from_frame(self.frame_matrix(idx))
    }

    pub fn min_volume_density(&self) -> f64 {
        (0..self.npts()).map(|i| self.volume_density(i)).fold(f64::INFINITY, f64::min)
    }

    /// `sum sqrt(g) dx`, summed in index order.
    pub fn total_area(&self) -> f64 {
        let cell: f64 = self.spacing.iter().product();
        (0..self.npts()).map(|i| self.volume_density(i)).sum::<f64>() * cell
    }

    fn normal_derivative_of_h(&self) -> Vec<f64> {
        let (n, d) = (self.n, self.d);
        let mut out = vec![0.0; self.npts() * n * d];
        out.par_chunks_mut(n * d).enumerate().for_each(|(idx, chunk)| {
            let frame: Vec<Vector> = (0..n)
                .map(|i| {
                    let mut v = [0.0; MAX_AMBIENT];
                    v[..d].copy_from_slice(self.frame_vector(idx, i));
                    v
                })
                .collect();
            for k in 0..n {
                let hp = self.mean_curvature(self.neighbor(idx, k, 1));
                let hm = self.mean_curvature(self.neighbor(idx, k, -1));
                let slot = &mut chunk[k * d..(k + 1) * d];
                for c in 0..d {
                    slot[c] = (hp[c] - hm[c]) / (2.0 * self.spacing[k]);
                }
                project_normal(slot, &frame, n);
            }
        });
        out
    }
}
