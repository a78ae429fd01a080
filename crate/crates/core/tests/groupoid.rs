mod common;

use std::sync::Arc;

use common::*;
use fedosov_core::fedosov_solver::{lift, solve_fundamental, SolveOptions};
use fedosov_core::groupoid_builder::{
    build_change_of_variables, canonical_bracket, change_of_variables_residual, groupoid_checks, separation_check,
    source_target, validate_pq, PQTensors,
};
use fedosov_core::nonlinear_connections::tensor2_is_zero;
use fedosov_core::poisson_geometry::{Connection, LieAlgebraData, PoissonStructure};
use fedosov_core::{BasePolynomial, Error, FibreSeries, FundamentalSolution};

fn solve(c: &Connection, order: u32) -> FundamentalSolution {
    solve_fundamental(c, c, SolveOptions::order(order)).unwrap()
}

#[test]
fn flat_source_and_target_are_half_shifts() {
    let sol = solve(&flat(), 8);
    let maps = build_change_of_variables(&sol, &PQTensors::half_identity(2)).unwrap();
    assert!(maps.is_identity());
    let (s, t) = source_target(&sol, &maps, &x(2, 0)).unwrap();
    let half_xi2 = xi(2, 1).scale(&fedosov_core::Scalar::ratio(1, 2));
    assert_eq!(s.value, &lift_poly(&x(2, 0)) + &half_xi2);
    assert_eq!(t.value, &lift_poly(&x(2, 0)) - &half_xi2);
    let rep = groupoid_checks(&sol, &maps, &[x(2, 0), x(2, 1), &x(2, 0) * &x(2, 1)]).unwrap();
    assert!(rep.passed());
}

#[test]
fn canonical_bracket_examples() {
    assert_eq!(
        canonical_bracket(&xi(2, 0), &lift_poly(&x(2, 0))),
        FibreSeries::constant(2, 1.into(), FibreSeries::EXACT)
    );
    assert!(canonical_bracket(&lift_poly(&x(2, 0)), &lift_poly(&x(2, 1))).is_zero());
    let half = fedosov_core::Scalar::ratio(1, 2);
    let sx1 = &lift_poly(&x(2, 0)) + &xi(2, 1).scale(&half);
    let tx2 = &lift_poly(&x(2, 1)) + &xi(2, 0).scale(&half);
    assert!(canonical_bracket(&sx1, &tx2).is_zero());
}

#[test]
fn pq_validation_examples() {
    let rep = validate_pq(&kahler(fubini_like()), &PQTensors::half_identity(2)).unwrap();
    assert!(rep.passed());
    let k = kahler_data(fubini_like());
    assert!(validate_pq(&kahler(fubini_like()), &PQTensors::kahler(&k)).unwrap().passed());
    // P = [[0,1],[0,0]], Q = I − P
    let bad = PQTensors::new(nilpotent_p(), nilpotent_q()).unwrap();
    let rep = validate_pq(&flat(), &bad).unwrap();
    assert!(rep.sum_ok());
    assert!(!rep.compatible());
    let sol = solve(&flat(), 3);
    assert!(matches!(build_change_of_variables(&sol, &bad), Err(Error::Precondition(_))));
}

fn nilpotent_p() -> Vec<Vec<BasePolynomial>> {
    vec![vec![c(2, 0), c(2, 1)], vec![c(2, 0), c(2, 0)]]
}

fn nilpotent_q() -> Vec<Vec<BasePolynomial>> {
    vec![vec![c(2, 1), c(2, -1)], vec![c(2, 0), c(2, 1)]]
}

#[test]
fn kahler_projectors_give_the_identity_change_of_variables() {
    for g in [c(2, 1), fubini_like(), quadratic_metric()] {
        let k = kahler_data(g);
        let sol = solve(&kahler(k.g(0, 0).clone()), 5);
        let maps = build_change_of_variables(&sol, &PQTensors::kahler(&k)).unwrap();
        assert!(maps.is_identity());
    }
}

#[test]
fn separation_of_variables_for_fubini_like_metric() {
    let k = kahler_data(fubini_like());
    let sol = solve(&kahler(fubini_like()), 6);
    let maps = build_change_of_variables(&sol, &PQTensors::kahler(&k)).unwrap();
    let rep = separation_check(&sol, &maps, &k).unwrap();
    assert!(rep.passed(), "{rep:?}");
    let z = x(2, 0);
    let zb = x(2, 1);
    let rep = groupoid_checks(&sol, &maps, &[z.clone(), zb.clone(), &z * &zb]).unwrap();
    assert!(rep.passed());
}

#[test]
fn flat_kahler_source_of_z() {
    let k = kahler_data(c(2, 1));
    let sol = solve(&kahler(c(2, 1)), 4);
    let maps = build_change_of_variables(&sol, &PQTensors::kahler(&k)).unwrap();
    let (s, _) = source_target(&sol, &maps, &x(2, 0)).unwrap();
    assert_eq!(s.value, lift_poly(&x(2, 0)).truncate(4));
    assert!(separation_check(&sol, &maps, &k).unwrap().passed());
}

#[test]
fn separation_fails_without_kahler_projectors() {
    let sol = solve(&flat(), 4);
    let maps = build_change_of_variables(&sol, &PQTensors::half_identity(2)).unwrap();
    let (s, _) = source_target(&sol, &maps, &x(2, 0)).unwrap();
    assert_ne!(s.value, lift_poly(&x(2, 0)).truncate(4));
}

#[test]
fn abelian_images_are_the_functions_themselves() {
    let sol = solve(&lie(&LieAlgebraData::abelian(2)), 5);
    let maps = build_change_of_variables(&sol, &PQTensors::half_identity(2)).unwrap();
    assert!(maps.is_identity());
    let f = &x(2, 0) * &x(2, 1);
    let (s, t) = source_target(&sol, &maps, &f).unwrap();
    assert_eq!(s.value, lift_poly(&f).truncate(5));
    assert_eq!(t.value, lift_poly(&f).truncate(5));
    let rep = groupoid_checks(&sol, &maps, &[x(2, 0), f]).unwrap();
    assert!(rep.checks.iter().all(|c| c.residual.is_zero()));
}

#[test]
fn groupoid_identities_hold_on_all_demos() {
    let mut rng = seeded(7);
    for (name, conn) in demos() {
        let sol = solve(&conn, 4);
        let maps = build_change_of_variables(&sol, &PQTensors::half_identity(2)).unwrap();
        assert!(tensor2_is_zero(&change_of_variables_residual(sol.poisson(), &maps)), "{name}");
        let fns: Vec<BasePolynomial> = (0..3).map(|_| random_poly(&mut rng, 2, 2)).collect();
        let rep = groupoid_checks(&sol, &maps, &fns).unwrap();
        for check in &rep.checks {
            assert!(check.residual.is_zero(), "{name}: {:?} on ({}, {})", check.kind, check.f, check.g);
        }
        assert!(rep.zero_section_ok, "{name}");
        for (s, t) in &rep.images {
            assert!(s.is_valid(sol.poisson()) && t.is_valid(sol.poisson()), "{name}");
        }
    }
}

#[test]
fn source_and_target_differ_off_the_zero_section() {
    let sol = solve(&lie(&LieAlgebraData::aff1()), 4);
    let maps = build_change_of_variables(&sol, &PQTensors::half_identity(2)).unwrap();
    let (s, t) = source_target(&sol, &maps, &x(2, 0)).unwrap();
    let diff = &s.value - &t.value;
    assert!(!diff.is_zero());
    assert!(diff.zero_section().is_zero());
}

#[test]
fn swapping_p_and_q_reflects_source_into_target() {
    let k = kahler_data(fubini_like());
    let sol = solve(&kahler(fubini_like()), 4);
    let pq = PQTensors::kahler(&k);
    let maps = build_change_of_variables(&sol, &pq).unwrap();
    let swapped = build_change_of_variables(&sol, &pq.swapped()).unwrap();
    for f in [x(2, 0), x(2, 1), &x(2, 0) * &x(2, 1)] {
        let (_, t) = source_target(&sol, &maps, &f).unwrap();
        let (s_swapped, _) = source_target(&sol, &swapped, &f).unwrap();
        assert_eq!(s_swapped.value.reflect(), t.value);
    }
}

#[test]
fn source_and_target_do_not_depend_on_the_potential_gauge() {
    // R³ with π^{12} = 1; dx^3 spans the kernel of π
    let one = c(3, 1);
    let z = c(3, 0);
    let pi = PoissonStructure::new(vec![
        vec![z.clone(), one.clone(), z.clone()],
        vec![-&one, z.clone(), z.clone()],
        vec![z.clone(), z.clone(), z.clone()],
    ])
    .unwrap();
    let conn = Connection::trivial(Arc::new(pi));
    let sol = solve(&conn, 4);
    let cubic = FibreSeries::xi(3, 2, FibreSeries::EXACT).mul_xi(2).mul_xi(2);
    let zero = FibreSeries::zero(3, FibreSeries::EXACT);
    let gauged = sol.with_potential_gauge(&[zero.clone(), zero.clone(), cubic]).unwrap();
    let pq = PQTensors::half_identity(3);
    let maps = build_change_of_variables(&sol, &pq).unwrap();
    let gauged_maps = build_change_of_variables(&gauged, &pq).unwrap();
    assert!(!gauged_maps.is_identity());
    for f in [x(3, 0), x(3, 2), &x(3, 0) * &x(3, 2)] {
        let (s, t) = source_target(&sol, &maps, &f).unwrap();
        let (gs, gt) = source_target(&gauged, &gauged_maps, &f).unwrap();
        assert_eq!(s.value, gs.value);
        assert_eq!(t.value, gt.value);
    }
    let not_kernel = [xi(3, 0).mul_xi(0), zero.clone(), zero];
    assert!(gauged.with_potential_gauge(&not_kernel).is_err());
}

#[test]
fn lifts_lie_in_the_expected_ideals() {
    let sol = solve(&kahler(quadratic_metric()), 5);
    let theta = lift(&sol, &x(2, 0), 5).unwrap();
    assert!((&theta.value - &lift_poly(&x(2, 0))).in_ideal(&[1]));
    let theta = lift(&sol, &x(2, 1), 5).unwrap();
    assert!((&theta.value - &lift_poly(&x(2, 1))).in_ideal(&[0]));
}
