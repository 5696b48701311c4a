use gaussflow::grassmann::{distance, geodesic, geodesic_closed_form, Plane, TangentMatrix};
use gaussflow::mcf::{run_flow, validate_params, FlowParams, FlowState};
use gaussflow::omega::{
    boundary_frame, boundary_second_variation, first_variation_gradient,
    ln_omega_second_derivative, omega_value, xi_membership_lambda, xi_membership_sigma, OmegaForm,
};
use gaussflow::sampling::{boundary_plane, gaussian_matrix, random_graph_plane, random_unit_tangent};
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

use crate::config::{Command, RunConfig};
use crate::error::CliError;
use crate::report::{Cell, Check, Report};

/// Largest admissible distance between the integrated and closed-form geodesic.
pub const GEODESIC_TOL: f64 = 1e-8;
/// Sign tolerance for the Hessian on `Xi` and for the boundary second variation.
pub const SIGN_TOL: f64 = 1e-10;

pub fn run(config: &RunConfig) -> Result<Report, CliError> {
    match config.command() {
        Command::Geodesic => geodesic_trace(config),
        Command::Xi => xi_scan(config),
        Command::HessianScan => hessian_scan(config),
        Command::BoundaryScan => boundary_scan(config),
        Command::Flow => flow(config),
    }
}

fn rng(config: &RunConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(config.seed().unwrap_or(0))
}

fn check(name: &str, worst: f64, limit: f64) -> Check {
    Check {
        name: name.into(),
        worst,
        limit,
        pass: worst <= limit,
    }
}

fn geodesic_trace(config: &RunConfig) -> Result<Report, CliError> {
    let g = config.geodesic_config();
    let start = Plane::coordinate(config.n, config.m)?;
    let tangent = match &g.tangent {
        Some(rows) => {
            let entries = DMatrix::from_fn(config.n, config.m, |i, a| rows[i][a]);
            TangentMatrix::new(start.clone(), entries)?
        }
        None => random_unit_tangent(&mut rng(config), &start)?,
    };
    let w = OmegaForm::new(start.clone());
    let speed = tangent.norm();
    let mut report = Report::new(vec!["s", "distance", "expected_distance", "ode_vs_closed_form", "omega"]);
    let (mut worst_ode, mut worst_speed) = (0.0f64, 0.0f64);
    for k in 0..=g.steps {
        let s = g.s_end * k as f64 / g.steps as f64;
        let closed = geodesic_closed_form(&tangent, s)?;
        let ode = geodesic(&tangent, s)?;
        let d = distance(&start, &closed)?;
        let gap = distance(&ode, &closed)?;
        worst_ode = worst_ode.max(gap);
        worst_speed = worst_speed.max((d - s * speed).abs());
        report.rows.push(vec![
            Cell::Float(Some(s)),
            Cell::Float(Some(d)),
            Cell::Float(Some(s * speed)),
            Cell::Float(Some(gap)),
            Cell::Float(Some(omega_value(&w, &closed)?)),
        ]);
    }
    report.checks.push(check("ode_vs_closed_form", worst_ode, GEODESIC_TOL));
    report.checks.push(check("distance", worst_speed, GEODESIC_TOL));
    report.summary.insert("tangent_norm".into(), Value::from(speed));
    Ok(report)
}

fn scan_params(config: &RunConfig) -> (usize, f64) {
    let scan = config.scan.as_ref().expect("validated scan");
    (scan.samples, scan.scale)
}

fn xi_scan(config: &RunConfig) -> Result<Report, CliError> {
    let (samples, scale) = scan_params(config);
    let q = Plane::coordinate(config.n, config.m)?;
    let mut r = rng(config);
    let mut report = Report::new(vec![
        "index",
        "lambda_member",
        "sigma_member",
        "agreement",
        "worst_pair_product",
        "sigma_min_eigenvalue",
        "omega",
    ]);
    let w = OmegaForm::new(q.clone());
    let (mut disagreements, mut members) = (0u64, 0u64);
    for i in 0..samples {
        let p = random_graph_plane(&mut r, &q, scale)?;
        let lam = xi_membership_lambda(&p, &q)?;
        let sig = xi_membership_sigma(&p, &q)?;
        let agree = lam.is_member == sig.is_member;
        disagreements += u64::from(!agree);
        members += u64::from(lam.is_member);
        report.rows.push(vec![
            Cell::Int(i as u64),
            Cell::Bool(lam.is_member),
            Cell::Bool(sig.is_member),
            Cell::Bool(agree),
            Cell::Float(lam.worst_pair_product),
            Cell::Float(sig.sigma_min_eigenvalue),
            Cell::Float(Some(omega_value(&w, &p)?)),
        ]);
    }
    report.checks.push(check("agreement", disagreements as f64, 0.0));
    report.summary.insert("members".into(), Value::from(members));
    report.summary.insert("disagreements".into(), Value::from(disagreements));
    Ok(report)
}

fn hessian_scan(config: &RunConfig) -> Result<Report, CliError> {
    let (samples, scale) = scan_params(config);
    let q = Plane::coordinate(config.n, config.m)?;
    let w = OmegaForm::new(q.clone());
    let mut r = rng(config);
    let mut report = Report::new(vec!["index", "omega", "in_xi", "hessian", "sign_ok"]);
    let mut worst_on_xi = f64::NEG_INFINITY;
    let mut positive_off_xi = 0u64;
    for i in 0..samples {
        let p = random_graph_plane(&mut r, &q, scale)?;
        let t = random_unit_tangent(&mut r, &p)?;
        let in_xi = xi_membership_lambda(&p, &q)?.is_member;
        let value = ln_omega_second_derivative(&w, &t)?;
        if in_xi {
            worst_on_xi = worst_on_xi.max(value);
        } else if value > SIGN_TOL {
            positive_off_xi += 1;
        }
        report.rows.push(vec![
            Cell::Int(i as u64),
            Cell::Float(Some(omega_value(&w, &p)?)),
            Cell::Bool(in_xi),
            Cell::Float(Some(value)),
            Cell::Bool(!in_xi || value <= SIGN_TOL),
        ]);
    }
    report.checks.push(check("hessian_sign_on_xi", worst_on_xi.max(0.0), SIGN_TOL));
    report.summary.insert("positive_off_xi".into(), Value::from(positive_off_xi));
    Ok(report)
}

fn boundary_scan(config: &RunConfig) -> Result<Report, CliError> {
    let (samples, _) = scan_params(config);
    let q = Plane::coordinate(config.n, config.m)?;
    let mut r = rng(config);
    let mut report = Report::new(vec![
        "index",
        "min_eigenvalue",
        "f_prime",
        "f_double_prime",
        "sign_ok",
    ]);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..samples {
        let p = boundary_plane(&mut r, &q)?;
        let grad = first_variation_gradient(&p, &q)?;
        let mut mu = gaussian_matrix(&mut r, config.n, config.m);
        let gg = grad.norm_squared();
        if gg > 0.0 {
            mu -= &grad * (grad.dot(&mu) / gg);
        }
        mu /= mu.norm();
        let t = TangentMatrix::new(p.clone(), mu)?;
        let frame = boundary_frame(&p, &q, &t)?;
        let v = boundary_second_variation(&p, &q, &t)?;
        worst = worst.max(v.f_double_prime);
        report.rows.push(vec![
            Cell::Int(i as u64),
            Cell::Float(Some(frame.min_eigenvalue)),
            Cell::Float(Some(v.f_prime)),
            Cell::Float(Some(v.f_double_prime)),
            Cell::Bool(v.f_double_prime <= SIGN_TOL),
        ]);
    }
    report.checks.push(check("boundary_second_variation_sign", worst.max(0.0), SIGN_TOL));
    Ok(report)
}

fn mean_radius(state: &FlowState) -> f64 {
    let g = state.surface();
    let (npts, d) = (g.npts(), g.ambient_dim());
    let mut centroid = vec![0.0; d];
    for i in 0..npts {
        for (c, x) in centroid.iter_mut().zip(g.position(i)) {
            *c += x / npts as f64;
        }
    }
    (0..npts)
        .map(|i| {
            g.position(i)
                .iter()
                .zip(&centroid)
                .map(|(x, c)| (x - c).powi(2))
                .sum::<f64>()
                .sqrt()
        })
        .sum::<f64>()
        / npts as f64
}

fn flow(config: &RunConfig) -> Result<Report, CliError> {
    let f = config.flow.as_ref().expect("validated flow");
    let params = FlowParams {
        dt: f.dt,
        t_end: f.t_end,
        cfl_factor: f.cfl_factor,
        record_every: f.record_every,
        probes: config.probe_list()?,
        tolerances: config.tolerances()?,
    };
    let as_config = |e: gaussflow::Error| CliError::Config(e.to_string());
    let initial = config
        .preset()?
        .build(config.n, config.m, &config.resolution())
        .map_err(as_config)?;
    validate_params(&initial, &params).map_err(as_config)?;
    let w = OmegaForm::coordinate(config.n, config.m)?;
    let run = run_flow(initial, &params, &w)?;

    let mut report = Report::new(vec![
        "t",
        "area",
        "min_omega",
        "max_thmA",
        "max_vol_law",
        "max_corA",
        "max_identity22",
        "max_lagrangian",
    ]);
    for r in &run.records {
        report.rows.push(vec![
            Cell::Float(Some(r.time)),
            Cell::Float(Some(r.total_area)),
            Cell::Float(Some(r.min_omega)),
            Cell::Float(r.max_thm_a_residual),
            Cell::Float(r.max_volume_law_residual),
            Cell::Float(r.max_cor_a_value),
            Cell::Float(r.max_identity22_residual),
            Cell::Float(r.max_lagrangian_defect),
        ]);
    }
    for o in &run.outcomes {
        report.checks.push(check(o.probe.name(), o.worst, o.limit));
    }
    let s = &mut report.summary;
    s.insert("final_time".into(), Value::from(run.final_state.time()));
    s.insert("final_mean_radius".into(), Value::from(mean_radius(&run.final_state)));
    s.insert("halted_early".into(), Value::from(run.halted_early));
    Ok(report)
}
