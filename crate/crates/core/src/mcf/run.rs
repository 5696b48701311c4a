use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::omega::OmegaForm;

use super::flow::{check_cfl, step, FlowState};
use super::grid::ImmersionGrid;
use super::probes::{
    corollary_a_check, identity22_residual, lagrangian_monitor, max_value, min_omega,
    theorem_a_residual, volume_law_residual,
};

/// Runs stop once `min sqrt(g)` falls below this.
pub const SINGULARITY_DENSITY: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Probe {
    ThmA,
    VolumeLaw,
    CorA,
    Identity22,
    Lagrangian,
    MinOmega,
}

impl Probe {
    pub const ALL: [Probe; 6] = [
        Probe::ThmA,
        Probe::VolumeLaw,
        Probe::CorA,
        Probe::Identity22,
        Probe::Lagrangian,
        Probe::MinOmega,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Probe::ThmA => "thmA",
            Probe::VolumeLaw => "volume_law",
            Probe::CorA => "corA",
            Probe::Identity22 => "identity22",
            Probe::Lagrangian => "lagrangian",
            Probe::MinOmega => "min_omega",
        }
    }
}

impl fmt::Display for Probe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Probe {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Probe::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::InvalidInput(format!("unknown probe {s:?}")))
    }
}

/// Pass thresholds for the probes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbeTolerances {
    pub thm_a: f64,
    pub volume_law: f64,
    pub cor_a: f64,
    pub identity22: f64,
    /// Allowed drop of `min Omega` between consecutive records.
    pub min_omega_step: f64,
    /// The Lagrangian monitor may grow to this multiple of its initial value.
    pub lagrangian_factor: f64,
}

impl Default for ProbeTolerances {
    fn default() -> Self {
        Self {
            thm_a: 1e-4,
            volume_law: 1e-4,
            cor_a: 1e-2,
            identity22: 1e-2,
            min_omega_step: 1e-4,
            lagrangian_factor: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowParams {
    pub dt: f64,
    pub t_end: f64,
    pub cfl_factor: f64,
    /// Keep a record every this many steps (the last state is always kept).
    pub record_every: usize,
    pub probes: Vec<Probe>,
    pub tolerances: ProbeTolerances,
}

/// One row of diagnostics. Fields of disabled probes are `None`, as are the
/// three-state probes at the first and last recorded times.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub total_area: f64,
    pub min_omega: f64,
    pub max_thm_a_residual: Option<f64>,
    pub max_volume_law_residual: Option<f64>,
    pub max_cor_a_value: Option<f64>,
    pub max_identity22_residual: Option<f64>,
    pub max_lagrangian_defect: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeOutcome {
    pub probe: Probe,
    /// Worst observed value (largest residual, or largest drop of `min Omega`).
    pub worst: f64,
    pub limit: f64,
    pub pass: bool,
}

#[derive(Debug, Clone)]
pub struct FlowRun {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: FlowState,
    /// The run stopped before `t_end` because `min sqrt(g)` became too small.
    pub halted_early: bool,
    pub outcomes: Vec<ProbeOutcome>,
}

impl FlowRun {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.pass)
    }
}

pub fn validate_params(surface: &ImmersionGrid, params: &FlowParams) -> Result<()> {
    if !(params.t_end.is_finite() && params.t_end >= 0.0) {
        return Err(Error::InvalidInput("t_end must be finite and nonnegative".into()));
    }
    if !(params.cfl_factor.is_finite() && params.cfl_factor > 0.0) {
        return Err(Error::InvalidInput("cfl_factor must be positive".into()));
    }
    if params.record_every == 0 {
        return Err(Error::InvalidInput("record_every must be at least 1".into()));
    }
    check_cfl(surface, params.dt, params.cfl_factor)?;
    if params.probes.contains(&Probe::Lagrangian) && surface.m() != surface.n() {
        return Err(crate::error::dim_mismatch(
            "m = n for the lagrangian probe",
            format!("n = {}, m = {}", surface.n(), surface.m()),
        ));
    }
    Ok(())
}

fn record(
    window: [Option<&FlowState>; 3],
    params: &FlowParams,
    w: &OmegaForm,
) -> Result<DiagnosticsRecord> {
    let cur = window[1].expect("current state");
    let geo = cur.geometry();
    let on = |p| params.probes.contains(&p);
    let mut rec = DiagnosticsRecord {
        time: cur.time(),
        total_area: geo.total_area(),
        min_omega: min_omega(cur, w)?,
        max_thm_a_residual: None,
        max_volume_law_residual: None,
        max_cor_a_value: None,
        max_identity22_residual: None,
        max_lagrangian_defect: None,
    };
    if on(Probe::Lagrangian) {
        rec.max_lagrangian_defect = Some(lagrangian_monitor(cur)?);
    }
    if let [Some(prev), _, Some(next)] = window {
        if on(Probe::ThmA) {
            rec.max_thm_a_residual = Some(max_value(&theorem_a_residual(prev, cur, next)?));
        }
        if on(Probe::VolumeLaw) {
            rec.max_volume_law_residual = Some(max_value(&volume_law_residual(prev, cur, next)?));
        }
        if on(Probe::CorA) {
            rec.max_cor_a_value = Some(max_value(&corollary_a_check(prev, cur, next, w)?));
        }
        if on(Probe::Identity22) {
            rec.max_identity22_residual = Some(max_value(&identity22_residual(prev, cur, next, w)?));
        }
    }
    Ok(rec)
}

fn worst_of(records: &[DiagnosticsRecord], field: impl Fn(&DiagnosticsRecord) -> Option<f64>) -> f64 {
    let values: Vec<f64> = records.iter().filter_map(field).collect();
    if values.is_empty() {
        0.0
    } else {
        max_value(&values)
    }
}

/// Evaluates each enabled probe over a finished series of records.
pub fn evaluate_probes(records: &[DiagnosticsRecord], params: &FlowParams) -> Vec<ProbeOutcome> {
    let tol = &params.tolerances;
    let mut probes = params.probes.clone();
    probes.sort();
    probes.dedup();
    probes
        .into_iter()
        .map(|probe| {
            let (worst, limit) = match probe {
                Probe::ThmA => (worst_of(records, |r| r.max_thm_a_residual), tol.thm_a),
                Probe::VolumeLaw => (worst_of(records, |r| r.max_volume_law_residual), tol.volume_law),
                Probe::CorA => (worst_of(records, |r| r.max_cor_a_value), tol.cor_a),
                Probe::Identity22 => (worst_of(records, |r| r.max_identity22_residual), tol.identity22),
                Probe::Lagrangian => {
                    let initial = records.first().and_then(|r| r.max_lagrangian_defect).unwrap_or(0.0);
                    (
                        worst_of(records, |r| r.max_lagrangian_defect),
                        tol.lagrangian_factor * initial + 1e-12,
                    )
                }
                Probe::MinOmega => {
                    let drop = records
                        .windows(2)
                        .map(|p| p[0].min_omega - p[1].min_omega)
                        .fold(0.0, f64::max);
                    (drop, tol.min_omega_step)
                }
            };
            ProbeOutcome {
                probe,
                worst,
                limit,
                pass: worst <= limit,
            }
        })
        .collect()
}

/// Flows `initial` to `params.t_end` (or until `min sqrt(g)` drops below
/// [`SINGULARITY_DENSITY`]), recording diagnostics with respect to `w`.
pub fn run_flow(initial: ImmersionGrid, params: &FlowParams, w: &OmegaForm) -> Result<FlowRun> {
    validate_params(&initial, params)?;
    let mut prev: Option<FlowState> = None;
    let mut cur = FlowState::new(initial, 0.0)?;
    let mut records = Vec::new();
    let mut steps = 0usize;
    let mut halted_early = false;
    loop {
        let remaining = params.t_end - cur.time();
        let done = remaining <= 1e-12 * params.t_end.max(1.0);
        if !done && cur.geometry().min_volume_density() < SINGULARITY_DENSITY {
            halted_early = true;
        }
        let next = if done || halted_early {
            None
        } else {
            Some(step(&cur, params.dt.min(remaining), params.cfl_factor)?)
        };
        if steps % params.record_every == 0 || next.is_none() {
            records.push(record([prev.as_ref(), Some(&cur), next.as_ref()], params, w)?);
        }
        match next {
            Some(n) => {
                prev = Some(std::mem::replace(&mut cur, n));
                steps += 1;
            }
            None => break,
        }
    }
    let outcomes = evaluate_probes(&records, params);
    Ok(FlowRun {
        records,
        final_state: cur,
        halted_early,
        outcomes,
    })
}
