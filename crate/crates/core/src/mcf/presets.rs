//! Initial surfaces. All parameters run over `[0, 2pi)` on every axis.
//!
//! | preset | n | m | `F` |
//! |---|---|---|---|
//! | `plane` | 1 or 2 | any | `(x, 0)` or `(x, y, 0)`, translation-periodic |
//! | `circle{r}` | 1 | any | `(r cos x, r sin x, 0, ...)` |
//! | `ellipse{a,b}` | 1 | any | `(a cos x, b sin x, 0, ...)` |
//! | `product_torus{r1,r2}` | 2 | 2 | `(r1 cos x, r1 sin x, r2 cos y, r2 sin y)` |
//! | `graph_torus{amp,modes}` | 2 | 2 | `(x, y, amp sin(k x), amp cos(k y))`, `k = modes` |
//! | `lagrangian_graph{amp,kx,ky}` | 2 | 2 | `(x, f_x, y, f_y)`, `f = amp sin(kx x + ky y)` |
//!
//! The graph presets are periodic up to the translations `2pi e_x`, `2pi e_y`
//! of the base coordinates. `lagrangian_graph` is the graph of `grad f` in
//! `C^2 = (x1, y1, x2, y2)`, hence exactly Lagrangian, but unlike the product
//! torus its discrete tangent planes are Lagrangian only up to `O(h^2)`.

use std::f64::consts::TAU;

use crate::error::{Error, Result};

use super::grid::ImmersionGrid;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Preset {
    Plane,
    Circle { r: f64 },
    Ellipse { a: f64, b: f64 },
    ProductTorus { r1: f64, r2: f64 },
    GraphTorus { amp: f64, modes: u32 },
    LagrangianGraph { amp: f64, kx: i32, ky: i32 },
}

impl Preset {
    pub fn name(&self) -> &'static str {
        match self {
            Preset::Plane => "plane",
            Preset::Circle { .. } => "circle",
            Preset::Ellipse { .. } => "ellipse",
            Preset::ProductTorus { .. } => "product_torus",
            Preset::GraphTorus { .. } => "graph_torus",
            Preset::LagrangianGraph { .. } => "lagrangian_graph",
        }
    }

    /// Intrinsic dimension, or `None` if the preset accepts both.
    pub fn intrinsic_dim(&self) -> Option<usize> {
        match self {
            Preset::Plane => None,
            Preset::Circle { .. } | Preset::Ellipse { .. } => Some(1),
            _ => Some(2),
        }
    }

    /// Samples the preset on a grid with `resolution[k]` points per axis.
    pub fn build(&self, n: usize, m: usize, resolution: &[usize]) -> Result<ImmersionGrid> {
        let d = n + m;
        if let Some(k) = self.intrinsic_dim() {
            if k != n {
                return Err(Error::InvalidInput(format!(
                    "preset {} needs n = {k}, got n = {n}",
                    self.name()
                )));
            }
        }
        let fixed_m = matches!(
            self,
            Preset::ProductTorus { .. } | Preset::GraphTorus { .. } | Preset::LagrangianGraph { .. }
        );
        if fixed_m && m != 2 {
            return Err(Error::InvalidInput(format!("preset {} needs m = 2, got m = {m}", self.name())));
        }
        self.check_params()?;
        if resolution.len() != n {
            return Err(Error::InvalidInput(format!(
                "expected {n} grid resolutions, got {}",
                resolution.len()
            )));
        }
        let periods = vec![TAU; n];
        let axis = |k: usize| {
            let mut t = vec![0.0; d];
            t[k] = TAU;
            t
        };
        let zero = vec![vec![0.0; d]; n];
        let pad = |mut v: Vec<f64>| {
            v.resize(d, 0.0);
            v
        };
        let res = resolution.to_vec();
        match *self {
            Preset::Plane => {
                let translations = (0..n).map(axis).collect();
                ImmersionGrid::from_fn(n, m, res, periods, translations, |x| pad(x.to_vec()))
            }
            Preset::Circle { r } => ImmersionGrid::from_fn(n, m, res, periods, zero, |x| {
                pad(vec![r * x[0].cos(), r * x[0].sin()])
            }),
            Preset::Ellipse { a, b } => ImmersionGrid::from_fn(n, m, res, periods, zero, |x| {
                pad(vec![a * x[0].cos(), b * x[0].sin()])
            }),
            Preset::ProductTorus { r1, r2 } => ImmersionGrid::from_fn(n, m, res, periods, zero, |x| {
                vec![r1 * x[0].cos(), r1 * x[0].sin(), r2 * x[1].cos(), r2 * x[1].sin()]
            }),
            Preset::GraphTorus { amp, modes } => {
                let k = modes as f64;
                let translations = vec![axis(0), axis(1)];
                ImmersionGrid::from_fn(n, m, res, periods, translations, |x| {
                    vec![x[0], x[1], amp * (k * x[0]).sin(), amp * (k * x[1]).cos()]
                })
            }
            Preset::LagrangianGraph { amp, kx, ky } => {
                let (kx, ky) = (kx as f64, ky as f64);
                let translations = vec![axis(0), axis(2)];
                ImmersionGrid::from_fn(n, m, res, periods, translations, |x| {
                    let c = amp * (kx * x[0] + ky * x[1]).cos();
                    vec![x[0], kx * c, x[1], ky * c]
                })
            }
        }
    }

    fn check_params(&self) -> Result<()> {
        let ok = match *self {
            Preset::Plane => true,
            Preset::Circle { r } => r.is_finite() && r > 0.0,
            Preset::Ellipse { a, b } => a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0,
            Preset::ProductTorus { r1, r2 } => r1.is_finite() && r2.is_finite() && r1 > 0.0 && r2 > 0.0,
            Preset::GraphTorus { amp, modes } => amp.is_finite() && modes > 0,
            Preset::LagrangianGraph { amp, kx, ky } => amp.is_finite() && (kx != 0 || ky != 0),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("invalid parameters for preset {}: {self:?}", self.name())))
        }
    }
}
