use rayon::prelude::*;

use crate::error::{Error, Result};

use super::geometry::{compute_geometry, mean_curvature, GeometryField};
use super::grid::ImmersionGrid;

pub const DEFAULT_CFL_FACTOR: f64 = 0.2;

/// A surface at one time together with its geometry.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    time: f64,
    surface: ImmersionGrid,
    geometry: GeometryField,
}

impl FlowState {
    pub fn new(surface: ImmersionGrid, time: f64) -> Result<Self> {
        let geometry = compute_geometry(&surface)?;
        Ok(Self {
            time,
            surface,
            geometry,
        })
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn surface(&self) -> &ImmersionGrid {
        &self.surface
    }

    pub fn geometry(&self) -> &GeometryField {
        &self.geometry
    }
}

/// Largest step allowed by `dt <= cfl_factor * h_min^2`.
pub fn cfl_limit(surface: &ImmersionGrid, cfl_factor: f64) -> f64 {
    let h = surface.min_spacing();
    cfl_factor * h * h
}

pub fn check_cfl(surface: &ImmersionGrid, dt: f64, cfl_factor: f64) -> Result<()> {
    let limit = cfl_limit(surface, cfl_factor);
    if !(dt > 0.0 && dt.is_finite()) || dt > limit * (1.0 + 1e-12) {
        return Err(Error::CflViolation { dt, limit });
    }
    Ok(())
}

fn axpy(base: &[f64], a: f64, k: &[f64]) -> Vec<f64> {
    base.par_iter().zip(k.par_iter()).map(|(x, y)| x + a * y).collect()
}

/// One classical Runge-Kutta step of `dF/dt = H`.
pub fn step(state: &FlowState, dt: f64, cfl_factor: f64) -> Result<FlowState> {
    check_cfl(&state.surface, dt, cfl_factor)?;
    let f0 = state.surface.positions();
    let k1 = state.geometry.mean_curvature_field();
    let k2 = mean_curvature(&state.surface.with_positions(axpy(f0, 0.5 * dt, &k1))?)?;
    let k3 = mean_curvature(&state.surface.with_positions(axpy(f0, 0.5 * dt, &k2))?)?;
    let k4 = mean_curvature(&state.surface.with_positions(axpy(f0, dt, &k3))?)?;
    let next: Vec<f64> = (0..f0.len())
        .into_par_iter()
        .map(|i| f0[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect();
    FlowState::new(state.surface.with_positions(next)?, state.time + dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mcf::presets::Preset;

    #[test]
    fn plane_is_stationary() {
        let s = FlowState::new(Preset::Plane.build(2, 1, &[8, 8]).unwrap(), 0.0).unwrap();
        let dt = 0.1 * s.surface().min_spacing().powi(2);
        let t = step(&s, dt, DEFAULT_CFL_FACTOR).unwrap();
        assert_eq!(t.surface().positions(), s.surface().positions());
        assert_eq!(t.time(), dt);
    }

    #[test]
    fn cfl_guard() {
        let s = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[64]).unwrap(), 0.0).unwrap();
        let limit = cfl_limit(s.surface(), 0.2);
        assert!(matches!(step(&s, 1.01 * limit, 0.2), Err(Error::CflViolation { .. })));
        assert!(matches!(step(&s, 0.0, 0.2), Err(Error::CflViolation { .. })));
        assert!(step(&s, limit, 0.2).is_ok());
    }

    #[test]
    fn circle_shrinks_by_radius_law() {
        let mut s = FlowState::new(Preset::Circle { r: 1.0 }.build(1, 1, &[32]).unwrap(), 0.0).unwrap();
        let dt = 1e-3;
        for _ in 0..100 {
            s = step(&s, dt, DEFAULT_CFL_FACTOR).unwrap();
        }
        let p = s.surface().position(5);
        let r = (p[0] * p[0] + p[1] * p[1]).sqrt();
        assert!((r - (1.0 - 2.0 * s.time()).sqrt()).abs() < 1e-10);
    }
}
