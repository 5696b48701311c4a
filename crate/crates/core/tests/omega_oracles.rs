mod common;

use gaussflow::grassmann::{geodesic_closed_form, log_map, Plane, TangentMatrix};
use gaussflow::omega::{
    boundary_second_variation, convexity_probe, ln_omega_second_derivative, omega_value,
    xi_membership_lambda, xi_membership_sigma, OmegaForm,
};
use gaussflow::sampling::{graph_with_lambdas, random_graph_plane, random_unit_tangent};
use gaussflow::Error;
use nalgebra::DMatrix;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hessian_matches_finite_differences(seed in any::<u64>(), n in 1usize..=3, m in 1usize..=3, scale in 0.05f64..1.0) {
        let mut r = rng(seed);
        let w = OmegaForm::coordinate(n, m).unwrap();
        let p = random_graph_plane(&mut r, w.base(), scale).unwrap();
        prop_assume!(omega_value(&w, &p).unwrap() > 0.05);
        let t = random_unit_tangent(&mut r, &p).unwrap();
        prop_assert!(hessian_relative_error(&w, &t) <= 1e-5);
    }

    #[test]
    fn lambda_and_sigma_tests_agree(seed in any::<u64>(), shape in 0usize..3, scale in 0.1f64..2.0) {
        let (n, m) = [(2, 2), (2, 3), (3, 3)][shape];
        let mut r = rng(seed);
        let q = Plane::coordinate(n, m).unwrap();
        let p = random_graph_plane(&mut r, &q, scale).unwrap();
        prop_assert_eq!(
            xi_membership_lambda(&p, &q).unwrap().is_member,
            xi_membership_sigma(&p, &q).unwrap().is_member
        );
    }

    #[test]
    fn hessian_is_nonpositive_on_xi(seed in any::<u64>(), shape in 0usize..3, l1 in 0.0f64..3.0, u in 0.0f64..=1.0) {
        let (n, m) = [(2, 2), (2, 3), (3, 3)][shape];
        let mut r = rng(seed);
        let q = Plane::coordinate(n, m).unwrap();
        let cap = if l1 > 0.0 { l1.min(1.0 / l1) } else { 1.0 };
        let p = graph_with_lambdas(&mut r, &q, &[l1, u * cap, 0.5 * u * cap]).unwrap();
        let w = OmegaForm::new(q);
        for _ in 0..20 {
            let t = random_unit_tangent(&mut r, &p).unwrap();
            prop_assert!(ln_omega_second_derivative(&w, &t).unwrap() <= 1e-10);
        }
    }
}

#[test]
fn boundary_variation_matches_finite_differences() {
    let mut r = rng(21);
    for shape in [(2, 2), (2, 3), (3, 3)] {
        for _ in 0..40 {
            let (p, q) = random_boundary_point(&mut r, shape.0, shape.1);
            let t = random_unit_tangent(&mut r, &p).unwrap();
            let a = boundary_second_variation(&p, &q, &t).unwrap();
            let (d1, d2) = fd_boundary(&p, &q, &t, 1e-3);
            assert!((a.f_prime - d1).abs() <= 1e-5 * a.f_prime.abs().max(1.0));
            assert!((a.f_double_prime - d2).abs() <= 1e-5 * a.f_double_prime.abs().max(1.0));

            let t = tangent_with_vanishing_first_variation(&mut r, &p, &q);
            let v = boundary_second_variation(&p, &q, &t).unwrap();
            assert!(v.f_prime.abs() <= 1e-10);
            assert!(v.f_double_prime <= 1e-10);
        }
    }
}

#[test]
fn two_by_two_boundary_is_flat_to_second_order() {
    // For n = m = 2 every direction with f'(0) = 0 has f''(0) = 0 as well.
    let mut r = rng(22);
    for _ in 0..50 {
        let (p, q) = random_boundary_point(&mut r, 2, 2);
        let t = tangent_with_vanishing_first_variation(&mut r, &p, &q);
        let v = boundary_second_variation(&p, &q, &t).unwrap();
        assert!(v.f_double_prime.abs() < 1e-10);
    }
}

#[test]
fn boundary_rejects_interior_points() {
    let q = Plane::coordinate(2, 2).unwrap();
    let p = graph_over_coordinates(&DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5]));
    let t = TangentMatrix::new(p.clone(), DMatrix::from_element(2, 2, 0.5)).unwrap();
    assert!(matches!(
        boundary_second_variation(&p, &q, &t),
        Err(Error::NotBoundaryPoint { .. })
    ));
}

#[test]
fn nearby_members_stay_connected_in_xi() {
    let mut r = rng(23);
    let mut tested = 0;
    while tested < 100 {
        let (n, m) = [(2, 2), (2, 3), (3, 3)][tested % 3];
        let q = Plane::coordinate(n, m).unwrap();
        let l1: f64 = r.random_range(0.0..2.0);
        let cap = if l1 > 0.0 { l1.min(1.0 / l1) } else { 1.0 };
        let l2 = r.random_range(0.0..1.0) * cap;
        let p1 = graph_with_lambdas(&mut r, &q, &[l1, l2, 0.0]).unwrap();
        let t = random_unit_tangent(&mut r, &p1).unwrap().scaled(r.random_range(0.05..0.45));
        let p2 = geodesic_closed_form(&t, 1.0).unwrap();
        if !xi_membership_sigma(&p2, &q).unwrap().is_member {
            continue;
        }
        assert!(convexity_probe(&p1, &p2, &q, 8).unwrap());
        tested += 1;
    }
}

#[test]
fn log_map_round_trip_reaches_members() {
    let mut r = rng(24);
    let q = Plane::coordinate(2, 3).unwrap();
    for _ in 0..50 {
        let a = random_graph_plane(&mut r, &q, 0.3).unwrap();
        let b = random_graph_plane(&mut r, &q, 0.3).unwrap();
        let t = log_map(&a, &b).unwrap();
        let reached = geodesic_closed_form(&t, 1.0).unwrap();
        assert!(reached.same_span(&b));
    }
}
