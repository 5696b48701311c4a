use std::collections::BTreeMap;
use std::path::Path;

use clap::Subcommand;
use gaussflow::mcf::{Preset, Probe, ProbeTolerances, DEFAULT_CFL_FACTOR};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Subcommand)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// Trace a geodesic from the coordinate plane and compare the ODE with the closed form.
    Geodesic,
    /// Compare the two membership tests for Xi on random graph planes.
    Xi,
    /// Sample the Hessian of -ln Omega and check its sign on Xi.
    HessianScan,
    /// Sample the boundary second variation in directions with f'(0) = 0.
    BoundaryScan,
    /// Run mean curvature flow from a preset and record the probes.
    Flow,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Geodesic => "geodesic",
            Command::Xi => "xi",
            Command::HessianScan => "hessian-scan",
            Command::BoundaryScan => "boundary-scan",
            Command::Flow => "flow",
        }
    }

    fn is_sampled(&self) -> bool {
        matches!(self, Command::Xi | Command::HessianScan | Command::BoundaryScan)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    pub n: usize,
    pub m: usize,
    #[serde(default)]
    pub probes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<GridConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flow: Option<FlowConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scan: Option<ScanConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub geodesic: Option<GeodesicConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<TolConfig>,
    #[serde(default)]
    pub out: OutConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(rename = "N1")]
    pub n1: usize,
    #[serde(rename = "N2", default, skip_serializing_if = "Option::is_none")]
    pub n2: Option<usize>,
}

fn default_cfl() -> f64 {
    DEFAULT_CFL_FACTOR
}

fn default_record_every() -> usize {
    1
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_end: f64,
    #[serde(default = "default_cfl")]
    pub cfl_factor: f64,
    pub preset: String,
    #[serde(default)]
    pub preset_params: BTreeMap<String, f64>,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
}

fn default_scale() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub samples: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Standard deviation of the Gaussian graph entries for `xi` and `hessian-scan`.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_s_end() -> f64 {
    1.0
}

fn default_steps() -> usize {
    10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeodesicConfig {
    #[serde(default = "default_s_end")]
    pub s_end: f64,
    #[serde(default = "default_steps")]
    pub steps: usize,
    /// Rows of the `n x m` tangent at the coordinate plane; random unit
    /// tangent from the seed if absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tangent: Option<Vec<Vec<f64>>>,
}

impl Default for GeodesicConfig {
    fn default() -> Self {
        Self {
            s_end: default_s_end(),
            steps: default_steps(),
            tangent: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TolConfig {
    #[serde(rename = "thmA", default, skip_serializing_if = "Option::is_none")]
    pub thm_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub volume_law: Option<f64>,
    #[serde(rename = "corA", default, skip_serializing_if = "Option::is_none")]
    pub cor_a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub identity22: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_omega_step: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lagrangian_factor: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub json: Option<String>,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn positive(name: &str, v: f64) -> Result<(), CliError> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(config_err(format!("{name} must be positive, got {v}")))
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_err(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Reconciles the subcommand and seed override with the file and checks
    /// the fields the command needs.
    pub fn resolve(mut self, command: Command, seed: Option<u64>) -> Result<Self, CliError> {
        match self.command {
            Some(c) if c != command => {
                return Err(config_err(format!(
                    "config is for command {:?}, invoked as {:?}",
                    c.name(),
                    command.name()
                )))
            }
            _ => self.command = Some(command),
        }
        if let Some(seed) = seed {
            match self.scan.as_mut() {
                Some(scan) => scan.seed = Some(seed),
                None if command == Command::Flow => {}
                None => {
                    self.scan = Some(ScanConfig {
                        samples: 0,
                        seed: Some(seed),
                        scale: default_scale(),
                    })
                }
            }
        }
        self.validate()?;
        Ok(self)
    }

    pub fn command(&self) -> Command {
        self.command.expect("resolved config")
    }

    pub fn seed(&self) -> Option<u64> {
        self.scan.as_ref().and_then(|s| s.seed)
    }

    fn validate(&self) -> Result<(), CliError> {
        let command = self.command();
        if self.n == 0 || self.m == 0 {
            return Err(config_err("n and m must be at least 1"));
        }
        if command.is_sampled() {
            let scan = self.scan.as_ref().ok_or_else(|| config_err("missing [scan] table"))?;
            if scan.samples == 0 {
                return Err(config_err("scan.samples must be at least 1"));
            }
            positive("scan.scale", scan.scale)?;
            if scan.seed.is_none() {
                return Err(config_err("scan.seed (or --seed) is required for sampled scans"));
            }
        }
        match command {
            Command::BoundaryScan if self.n < 2 || self.m < 2 => {
                return Err(config_err("boundary-scan needs n, m >= 2"));
            }
            Command::Geodesic => {
                let g = self.geodesic_config();
                positive("geodesic.s_end", g.s_end)?;
                if g.steps == 0 {
                    return Err(config_err("geodesic.steps must be at least 1"));
                }
                match &g.tangent {
                    Some(rows) => {
                        if rows.len() != self.n || rows.iter().any(|r| r.len() != self.m) {
                            return Err(config_err(format!(
                                "geodesic.tangent must be {} rows of {} entries",
                                self.n, self.m
                            )));
                        }
                    }
                    None if self.seed().is_none() => {
                        return Err(config_err(
                            "a random tangent needs scan.seed (or --seed); give geodesic.tangent otherwise",
                        ));
                    }
                    None => {}
                }
            }
            Command::Flow => {
                let f = self.flow.as_ref().ok_or_else(|| config_err("missing [flow] table"))?;
                let grid = self.grid.as_ref().ok_or_else(|| config_err("missing [grid] table"))?;
                if self.n > 2 {
                    return Err(config_err("flow supports n = 1 or n = 2"));
                }
                if grid.n1 == 0 || grid.n2 == Some(0) {
                    return Err(config_err("grid resolutions must be positive"));
                }
                positive("flow.dt", f.dt)?;
                positive("flow.cfl_factor", f.cfl_factor)?;
                if !(f.t_end.is_finite() && f.t_end >= 0.0) {
                    return Err(config_err("flow.t_end must be finite and nonnegative"));
                }
                if f.record_every == 0 {
                    return Err(config_err("flow.record_every must be at least 1"));
                }
                self.preset()?;
                self.probe_list()?;
                self.tolerances()?;
            }
            _ => {}
        }
        Ok(())
    }

    pub fn geodesic_config(&self) -> GeodesicConfig {
        self.geodesic.clone().unwrap_or_default()
    }

    pub fn resolution(&self) -> Vec<usize> {
        let grid = self.grid.as_ref().expect("validated grid");
        if self.n == 1 {
            vec![grid.n1]
        } else {
            vec![grid.n1, grid.n2.unwrap_or(grid.n1)]
        }
    }

    pub fn probe_list(&self) -> Result<Vec<Probe>, CliError> {
        self.probes
            .iter()
            .map(|s| s.parse::<Probe>().map_err(|e| config_err(e.to_string())))
            .collect()
    }

    pub fn tolerances(&self) -> Result<ProbeTolerances, CliError> {
        let mut t = ProbeTolerances::default();
        if let Some(c) = &self.tol {
            let fields = [
                ("tol.thmA", c.thm_a, &mut t.thm_a),
                ("tol.volume_law", c.volume_law, &mut t.volume_law),
                ("tol.corA", c.cor_a, &mut t.cor_a),
                ("tol.identity22", c.identity22, &mut t.identity22),
                ("tol.min_omega_step", c.min_omega_step, &mut t.min_omega_step),
                ("tol.lagrangian_factor", c.lagrangian_factor, &mut t.lagrangian_factor),
            ];
            for (name, value, slot) in fields {
                if let Some(v) = value {
                    positive(name, v)?;
                    *slot = v;
                }
            }
        }
        Ok(t)
    }

    pub fn preset(&self) -> Result<Preset, CliError> {
        let f = self.flow.as_ref().ok_or_else(|| config_err("missing [flow] table"))?;
        let params = &f.preset_params;
        let allowed: &[&str] = match f.preset.as_str() {
            "plane" => &[],
            "circle" => &["r"],
            "ellipse" => &["a", "b"],
            "product_torus" => &["r1", "r2"],
            "graph_torus" => &["amp", "modes"],
            "lagrangian_graph" => &["amp", "kx", "ky"],
            other => return Err(config_err(format!("unknown preset {other:?}"))),
        };
        if let Some(k) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(config_err(format!("preset {} has no parameter {k:?}", f.preset)));
        }
        let get = |k: &str, default: Option<f64>| -> Result<f64, CliError> {
            params
                .get(k)
                .copied()
                .or(default)
                .ok_or_else(|| config_err(format!("flow.preset_params.{k} is required for {}", f.preset)))
        };
        let int = |k: &str, default: f64| -> Result<f64, CliError> {
            let v = get(k, Some(default))?;
            if v.fract() != 0.0 || v.abs() > 1e6 {
                return Err(config_err(format!("flow.preset_params.{k} must be an integer")));
            }
            Ok(v)
        };
        let preset = match f.preset.as_str() {
            "plane" => Preset::Plane,
            "circle" => Preset::Circle { r: get("r", None)? },
            "ellipse" => Preset::Ellipse { a: get("a", None)?, b: get("b", None)? },
            "product_torus" => Preset::ProductTorus {
                r1: get("r1", None)?,
                r2: get("r2", None)?,
            },
            "graph_torus" => {
                let modes = int("modes", 1.0)?;
                if modes < 1.0 {
                    return Err(config_err("flow.preset_params.modes must be at least 1"));
                }
                Preset::GraphTorus {
                    amp: get("amp", None)?,
                    modes: modes as u32,
                }
            }
            _ => Preset::LagrangianGraph {
                amp: get("amp", None)?,
                kx: int("kx", 1.0)? as i32,
                ky: int("ky", 2.0)? as i32,
            },
        };
        for (k, v) in params {
            if !v.is_finite() {
                return Err(config_err(format!("flow.preset_params.{k} must be finite")));
            }
        }
        Ok(preset)
    }

    /// SHA-256 of the canonical JSON form of the resolved config.
    pub fn hash(&self) -> String {
        let canonical = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&canonical)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flow(params: &str) -> RunConfig {
        let text = format!(
            "n = 2\nm = 2\n[grid]\nN1 = 16\n[flow]\ndt = 1e-3\nt_end = 0.1\npreset = \"graph_torus\"\npreset_params = {params}\n"
        );
        RunConfig::parse(&text).unwrap()
    }

    #[test]
    fn presets_parse_with_defaults() {
        let c = flow("{ amp = 0.2 }").resolve(Command::Flow, None).unwrap();
        assert_eq!(c.preset().unwrap(), Preset::GraphTorus { amp: 0.2, modes: 1 });
        assert_eq!(c.resolution(), vec![16, 16]);
        assert!(flow("{ amp = 0.2, modes = 1.5 }").resolve(Command::Flow, None).is_err());
        assert!(flow("{ amp = 0.2, r = 1 }").resolve(Command::Flow, None).is_err());
    }

    #[test]
    fn hash_depends_on_content_only() {
        let a = flow("{ amp = 0.2 }").resolve(Command::Flow, None).unwrap();
        let b = flow("{amp=0.2}").resolve(Command::Flow, None).unwrap();
        let c = flow("{ amp = 0.3 }").resolve(Command::Flow, None).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
    }

    #[test]
    fn tolerance_overrides_apply() {
        let mut c = flow("{ amp = 0.2 }");
        c.tol = Some(TolConfig { cor_a: Some(5e-2), ..Default::default() });
        let t = c.resolve(Command::Flow, None).unwrap().tolerances().unwrap();
        assert_eq!(t.cor_a, 5e-2);
        assert_eq!(t.thm_a, ProbeTolerances::default().thm_a);
    }
}
