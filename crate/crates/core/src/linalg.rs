//! Small dense helpers shared by the Grassmannian modules.

use nalgebra::{DMatrix, DVector};

/// Orthonormalizes the columns of `raw` by QR with the sign of each column
/// fixed so that `R` has a positive diagonal. The frame therefore keeps the
/// orientation and the flag of the input columns.
pub(crate) fn orthonormal_columns(raw: &DMatrix<f64>) -> DMatrix<f64> {
    let qr = raw.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..q.ncols() {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

pub(crate) fn smallest_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().copied().fold(f64::INFINITY, f64::min)
}

/// Orthonormal basis of the orthogonal complement of the column span of
/// `frame` (which must have orthonormal columns).
///
/// Standard basis vectors are projected off the current span and the one
/// with the largest residual is appended, so coordinate-aligned planes get
/// coordinate-aligned complements with positive signs.
pub(crate) fn complement_frame(frame: &DMatrix<f64>) -> DMatrix<f64> {
    let dim = frame.nrows();
    let k = dim - frame.ncols();
    let mut basis: Vec<DVector<f64>> = frame.column_iter().map(|c| c.into_owned()).collect();
    let mut chosen = Vec::with_capacity(k);
    let mut used = vec![false; dim];
    for _ in 0..k {
        let mut best: Option<(usize, DVector<f64>, f64)> = None;
        for j in (0..dim).filter(|&j| !used[j]) {
            let mut r = DVector::zeros(dim);
            r[j] = 1.0;
            // two passes of classical Gram-Schmidt
            for _ in 0..2 {
                for b in &basis {
                    let c = b.dot(&r);
                    r.axpy(-c, b, 1.0);
                }
            }
            let norm = r.norm();
            if best.as_ref().is_none_or(|(_, _, bn)| norm > *bn) {
                best = Some((j, r, norm));
            }
        }
        let (j, r, norm) = best.expect("complement exists");
        used[j] = true;
        let v = r / norm;
        basis.push(v.clone());
        chosen.push(v);
    }
    if chosen.is_empty() {
        DMatrix::zeros(dim, 0)
    } else {
        DMatrix::from_columns(&chosen)
    }
}

/// Full singular value decomposition `a = u * diag(sigma) * v^T` with square
/// orthogonal `u` (rows x rows) and `v` (cols x cols); `sigma` is sorted in
/// descending order and has `min(rows, cols)` entries.
pub(crate) fn full_svd(a: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (rows, cols) = a.shape();
    let k = rows.min(cols);
    if k == 0 {
        return (
            DMatrix::identity(rows, rows),
            Vec::new(),
            DMatrix::identity(cols, cols),
        );
    }
    let svd = a.clone().svd(true, true);
    let u_thin = svd.u.expect("u requested");
    let v_thin = svd.v_t.expect("v requested").transpose();
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    (complete(&u_thin), sigma, complete(&v_thin))
}

fn complete(thin: &DMatrix<f64>) -> DMatrix<f64> {
    if thin.ncols() == thin.nrows() {
        return thin.clone();
    }
    let rest = complement_frame(thin);
    let mut full = DMatrix::zeros(thin.nrows(), thin.nrows());
    full.columns_mut(0, thin.ncols()).copy_from(thin);
    full.columns_mut(thin.ncols(), rest.ncols()).copy_from(&rest);
    full
}

/// All `k`-element subsets of `0..n` in lexicographic order.
pub fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(k);
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            if n - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    rec(0, n, k, &mut current, &mut out);
    out
}

/// Coordinates of the wedge of the columns of `cols` in the canonical basis
/// of the exterior power, lexicographic index order. Each coordinate is the
/// minor on the corresponding rows.
pub(crate) fn wedge_columns(cols: &DMatrix<f64>) -> Vec<f64> {
    let (d, n) = cols.shape();
    combinations(d, n)
        .iter()
        .map(|rows| {
            let minor = DMatrix::from_fn(n, n, |i, j| cols[(rows[i], j)]);
            minor.determinant()
        })
        .collect()
}

/// Minimum eigenvalue of a symmetric matrix.
pub(crate) fn min_symmetric_eigenvalue(m: &DMatrix<f64>) -> f64 {
    m.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_of_coordinate_plane_is_coordinate_aligned() {
        let f = DMatrix::from_column_slice(4, 2, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        let c = complement_frame(&f);
        let expected =
            DMatrix::from_column_slice(4, 2, &[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]);
        assert!((c - expected).norm() < 1e-15);
    }

    #[test]
    fn combinations_are_lexicographic() {
        let c = combinations(4, 2);
        assert_eq!(
            c,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(combinations(5, 3).len(), 10);
    }

    #[test]
    fn full_svd_reconstructs() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.5, -0.3, 0.7, 1.1]);
        let (u, s, v) = full_svd(&a);
        let mut sig = DMatrix::zeros(2, 3);
        for (i, x) in s.iter().enumerate() {
            sig[(i, i)] = *x;
        }
        assert!((&u * sig * v.transpose() - &a).norm() < 1e-12);
        assert!((u.transpose() * &u - DMatrix::identity(2, 2)).norm() < 1e-12);
        assert!((v.transpose() * &v - DMatrix::identity(3, 3)).norm() < 1e-12);
        assert!(s[0] >= s[1]);
    }

    #[test]
    fn qr_orthonormalization_keeps_orientation() {
        let raw = DMatrix::from_column_slice(3, 2, &[0.0, 2.0, 0.0, 1.0, 1.0, 0.0]);
        let q = orthonormal_columns(&raw);
        assert!(q[(1, 0)] > 0.0);
        // second column points towards +x after removing the first
        assert!(q[(0, 1)] > 0.0);
    }
}
