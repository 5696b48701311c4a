use crate::error::{Error, Result};

/// Largest ambient dimension `n + m` handled by the grid kernels.
pub const MAX_AMBIENT: usize = 8;

/// A periodic grid of points in `R^(n+m)` sampling an immersion of an
/// `n`-torus (`n` is 1 or 2).
///
/// Each axis carries a translation vector: stepping `N_k` points along axis
/// `k` lands on `F + translation_k`. Closed curves and tori use zero
/// translations; graphs over a flat torus use the lattice vectors of the
/// base, which keeps them compact in the quotient of `R^(n+m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImmersionGrid {
    n: usize,
    m: usize,
    resolution: Vec<usize>,
    periods: Vec<f64>,
    translations: Vec<Vec<f64>>,
    positions: Vec<f64>,
}

impl ImmersionGrid {
    /// `positions` holds one point per grid node, axis 0 fastest.
    pub fn new(
        n: usize,
        m: usize,
        resolution: Vec<usize>,
        periods: Vec<f64>,
        translations: Vec<Vec<f64>>,
        positions: Vec<f64>,
    ) -> Result<Self> {
        let d = n + m;
        if !(1..=2).contains(&n) || m == 0 || d > MAX_AMBIENT {
            return Err(Error::InvalidInput(format!(
                "grid needs n in {{1, 2}}, m >= 1 and n + m <= {MAX_AMBIENT}; got n = {n}, m = {m}"
            )));
        }
        if resolution.len() != n || periods.len() != n || translations.len() != n {
            return Err(Error::InvalidInput("one resolution, period and translation per axis".into()));
        }
        if resolution.iter().any(|&r| r < 4) {
            return Err(Error::InvalidInput("each axis needs at least 4 points".into()));
        }
        if periods.iter().any(|&p| !(p.is_finite() && p > 0.0)) {
            return Err(Error::InvalidInput("periods must be positive".into()));
        }
        if translations.iter().any(|t| t.len() != d) {
            return Err(Error::InvalidInput("translations must live in R^(n+m)".into()));
        }
        let npts: usize = resolution.iter().product();
        if positions.len() != npts * d {
            return Err(Error::InvalidInput(format!(
                "expected {} coordinates, got {}",
                npts * d,
                positions.len()
            )));
        }
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite grid position".into()));
        }
        Ok(Self {
            n,
            m,
            resolution,
            periods,
            translations,
            positions,
        })
    }

    /// Samples `f` at the nodes `x_k = j_k * period_k / N_k`.
    pub fn from_fn(
        n: usize,
        m: usize,
        resolution: Vec<usize>,
        periods: Vec<f64>,
        translations: Vec<Vec<f64>>,
        f: impl Fn(&[f64]) -> Vec<f64>,
    ) -> Result<Self> {
        let npts: usize = resolution.iter().product();
        let mut positions = Vec::with_capacity(npts * (n + m));
        let mut x = vec![0.0; n];
        for idx in 0..npts {
            let mut rest = idx;
            for k in 0..n {
                x[k] = (rest % resolution[k]) as f64 * periods[k] / resolution[k] as f64;
                rest /= resolution[k];
            }
            let p = f(&x);
            if p.len() != n + m {
                return Err(Error::InvalidInput("parametrization returned wrong dimension".into()));
            }
            positions.extend(p);
        }
        Self::new(n, m, resolution, periods, translations, positions)
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

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn periods(&self) -> &[f64] {
        &self.periods
    }

    pub fn translations(&self) -> &[Vec<f64>] {
        &self.translations
    }

    pub fn npts(&self) -> usize {
        self.resolution.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.periods[axis] / self.resolution[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.n).map(|k| self.spacing(k)).fold(f64::INFINITY, f64::min)
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn position(&self, idx: usize) -> &[f64] {
        let d = self.ambient_dim();
        &self.positions[idx * d..(idx + 1) * d]
    }

    /// Same grid with new node positions.
    pub fn with_positions(&self, positions: Vec<f64>) -> Result<Self> {
        Self::new(
            self.n,
            self.m,
            self.resolution.clone(),
            self.periods.clone(),
            self.translations.clone(),
            positions,
        )
    }

    /// Grid multi-index of a flat node index.
    pub fn multi_index(&self, idx: usize) -> [usize; 2] {
        let n1 = self.resolution[0];
        [idx % n1, idx / n1]
    }

    pub fn flat_index(&self, i1: isize, i2: isize) -> usize {
        let n1 = self.resolution[0] as isize;
        let a = i1.rem_euclid(n1) as usize;
        if self.n == 1 {
            return a;
        }
        let n2 = self.resolution[1] as isize;
        a + self.resolution[0] * i2.rem_euclid(n2) as usize
    }

    /// Writes `F(i1, i2)` for an unwrapped multi-index, adding the axis
    /// translations for every period crossed.
    pub fn point(&self, i1: isize, i2: isize, out: &mut [f64]) {
        let d = self.ambient_dim();
        let idx = self.flat_index(i1, i2);
        out[..d].copy_from_slice(self.position(idx));
        let wraps = [
            i1.div_euclid(self.resolution[0] as isize),
            if self.n == 2 {
                i2.div_euclid(self.resolution[1] as isize)
            } else {
                0
            },
        ];
        for (k, &w) in wraps.iter().enumerate().take(self.n) {
            if w != 0 {
                for (o, t) in out[..d].iter_mut().zip(&self.translations[k]) {
                    *o += w as f64 * t;
                }
            }
        }
    }

    pub fn same_layout(&self, other: &Self) -> bool {
        self.n == other.n
            && self.m == other.m
            && self.resolution == other.resolution
            && self.periods == other.periods
            && self.translations == other.translations
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    #[test]
    fn periodic_indexing_adds_translation() {
        let g = ImmersionGrid::from_fn(
            1,
            1,
            vec![8],
            vec![TAU],
            vec![vec![TAU, 0.0]],
            |x| vec![x[0], x[0].sin()],
        )
        .unwrap();
        let mut a = [0.0; 2];
        let mut b = [0.0; 2];
        g.point(9, 0, &mut a);
        g.point(1, 0, &mut b);
        assert!((a[0] - b[0] - TAU).abs() < 1e-15 && (a[1] - b[1]).abs() < 1e-15);
        g.point(-1, 0, &mut a);
        g.point(7, 0, &mut b);
        assert!((b[0] - a[0] - TAU).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(ImmersionGrid::new(3, 1, vec![4; 3], vec![1.0; 3], vec![vec![0.0; 4]; 3], vec![0.0; 256]).is_err());
        assert!(ImmersionGrid::new(1, 1, vec![4], vec![1.0], vec![vec![0.0; 2]], vec![0.0; 7]).is_err());
        assert!(ImmersionGrid::new(1, 1, vec![2], vec![1.0], vec![vec![0.0; 2]], vec![0.0; 4]).is_err());
    }

    #[test]
    fn flat_index_wraps_both_axes() {
        let g = ImmersionGrid::from_fn(2, 1, vec![4, 5], vec![1.0, 1.0], vec![vec![0.0; 3]; 2], |x| {
            vec![x[0], x[1], 0.0]
        })
        .unwrap();
        assert_eq!(g.flat_index(-1, -1), 3 + 4 * 4);
        assert_eq!(g.multi_index(g.flat_index(5, 7)), [1, 2]);
    }
}
