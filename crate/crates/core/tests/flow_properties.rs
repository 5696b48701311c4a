use gaussflow::mcf::probes::{
    gauss_vector, hessian_sum, max_value, min_omega, symplectic_pairing, tension_vector,
};
use gaussflow::mcf::{
    compute_geometry, gauss_field, lagrangian_monitor, laplace_beltrami, run_flow, step,
    FlowParams, FlowState, Preset, Probe, ProbeTolerances,
};
use gaussflow::omega::OmegaForm;
use gaussflow::selfdual::lagrangian_defect;
use proptest::prelude::*;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn params(dt: f64, t_end: f64, probes: Vec<Probe>) -> FlowParams {
    FlowParams {
        dt,
        t_end,
        cfl_factor: 0.2,
        record_every: 1,
        probes,
        tolerances: ProbeTolerances::default(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn geometry_invariants_on_graph_tori(amp in 0.0f64..0.6, modes in 1u32..3, n in 12usize..40) {
        let g = Preset::GraphTorus { amp, modes }.build(2, 2, &[n, n + 3]).unwrap();
        let geo = compute_geometry(&g).unwrap();
        for idx in 0..geo.npts() {
            let h = geo.mean_curvature(idx);
            let hn = dot(h, h).sqrt();
            for k in 0..2 {
                let t = geo.tangent(idx, k);
                prop_assert!(dot(h, t).abs() <= 1e-8 * hn * dot(t, t).sqrt() + 1e-14);
            }
            let gv = gauss_vector(&geo, idx);
            prop_assert!((dot(&gv, &gv) - 1.0).abs() < 1e-12);
            let e1 = geo.frame_vector(idx, 0);
            let e2 = geo.frame_vector(idx, 1);
            let from_pairing = symplectic_pairing(e1, e2).abs();
            let from_forms = 2f64.sqrt() * lagrangian_defect(&geo.gauss_plane(idx).unwrap(), 1).unwrap();
            prop_assert!((from_pairing - from_forms).abs() < 1e-12);
        }
    }

    #[test]
    fn area_decreases_along_the_flow(a in 0.6f64..1.5, b in 0.6f64..1.5) {
        let g = Preset::Ellipse { a, b }.build(1, 2, &[48]).unwrap();
        let h = g.min_spacing();
        let run = run_flow(g, &params(0.05 * h * h, 0.02, vec![]), &OmegaForm::coordinate(1, 2).unwrap()).unwrap();
        prop_assert!(run.records.windows(2).all(|p| p[1].total_area < p[0].total_area + 1e-10));
    }
}

#[test]
fn circle_geometry_converges_and_flow_follows_radius_law() {
    let r = 0.8;
    for n in [32usize, 64] {
        let g = Preset::Circle { r }.build(1, 1, &[n]).unwrap();
        let geo = compute_geometry(&g).unwrap();
        let h = g.min_spacing();
        // sqrt(g) is the chord-averaged speed: r (2 sin(h/2) / h).
        let expected = r * 2.0 * (h / 2.0).sin() / h;
        assert!((geo.volume_density(3) - expected).abs() < 1e-13);
        assert!((geo.volume_density(3) - r).abs() < r * h * h / 20.0);
    }
    let mut s = FlowState::new(Preset::Circle { r }.build(1, 1, &[64]).unwrap(), 0.0).unwrap();
    for _ in 0..200 {
        s = step(&s, 5e-4, 0.2).unwrap();
    }
    let p = s.surface().position(0);
    assert!(((p[0] * p[0] + p[1] * p[1]).sqrt() - (r * r - 2.0 * s.time()).sqrt()).abs() < 1e-9);
}

#[test]
fn circle_gauss_field_is_unit_tangent_and_tension_vanishes() {
    let s = FlowState::new(Preset::Circle { r: 1.3 }.build(1, 1, &[50]).unwrap(), 0.0).unwrap();
    let g = gauss_field(&s);
    for j in 0..50 {
        let th = j as f64 * std::f64::consts::TAU / 50.0;
        assert!((g[2 * j] + th.sin()).abs() < 1e-14);
        assert!((g[2 * j + 1] - th.cos()).abs() < 1e-14);
        assert!(tension_vector(s.geometry(), j).iter().all(|v| v.abs() < 1e-12));
    }
}

#[test]
fn flat_plane_has_constant_omega_and_no_hessian_terms() {
    let s = FlowState::new(Preset::Plane.build(2, 3, &[8, 8]).unwrap(), 0.0).unwrap();
    let w = OmegaForm::coordinate(2, 3).unwrap();
    assert_eq!(min_omega(&s, &w).unwrap(), 1.0);
    assert!(hessian_sum(s.geometry(), 10, &w).unwrap().abs() < 1e-15);
}

#[test]
fn laplace_beltrami_converges_on_a_graph_torus() {
    // Laplacian of the immersion is H, so each coordinate function checks
    // one component.
    let mut errors = Vec::new();
    for n in [32usize, 64] {
        let g = Preset::GraphTorus { amp: 0.3, modes: 1 }.build(2, 2, &[n, n]).unwrap();
        let geo = compute_geometry(&g).unwrap();
        let u: Vec<f64> = (0..geo.npts()).map(|i| g.position(i)[2]).collect();
        let lap = laplace_beltrami(&u, &geo).unwrap();
        let err = (0..geo.npts())
            .map(|i| (lap[i] - geo.mean_curvature(i)[2]).abs())
            .fold(0.0, f64::max);
        errors.push(err);
    }
    assert!(errors[1] < errors[0] / 3.0, "{errors:?}");
}

#[test]
fn lagrangian_defect_constant_is_stable_under_dt_refinement() {
    let n = 32;
    let g = Preset::LagrangianGraph { amp: 0.2, kx: 1, ky: 2 }.build(2, 2, &[n, n]).unwrap();
    let h = g.min_spacing();
    let w = OmegaForm::coordinate(2, 2).unwrap();
    let mut values = Vec::new();
    for factor in [0.1, 0.05] {
        let steps = (0.1 / (factor * h * h)).ceil();
        let run = run_flow(g.clone(), &params(0.1 / steps, 0.1, vec![Probe::Lagrangian]), &w).unwrap();
        values.push(lagrangian_monitor(&run.final_state).unwrap() / (h * h));
    }
    assert!((values[0] - values[1]).abs() < 1e-3 * values[0], "{values:?}");
}

#[test]
fn runs_are_deterministic() {
    let g = Preset::GraphTorus { amp: 0.1, modes: 1 }.build(2, 2, &[24, 24]).unwrap();
    let h = g.min_spacing();
    let mut p = params(0.1 * h * h, 0.01, Probe::ALL.to_vec());
    // The volume-law residual is O(h^2); N = 24 is coarse.
    p.tolerances.volume_law = 1e-3;
    let w = OmegaForm::coordinate(2, 2).unwrap();
    let a = run_flow(g.clone(), &p, &w).unwrap();
    let b = run_flow(g, &p, &w).unwrap();
    assert_eq!(a.records, b.records);
    assert!(a.passed(), "{:?}", a.outcomes);
    assert!(a.records[1..a.records.len() - 1].iter().all(|r| r.max_identity22_residual.is_some()));
    assert!(max_value(&[1.0, f64::NAN]).is_nan());
}
