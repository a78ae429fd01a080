mod common;

use common::*;
use fedosov_core::series_core::linsolve::{LinearSolution, LinearSystem};
use fedosov_core::series_core::monomials_of_degree;
use fedosov_core::{FibreMap, FibreSeries, Scalar, SeriesMatrix};
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn random_series(rng: &mut ChaCha8Rng, n: usize, min_deg: u32, max_deg: u32, order: u32) -> FibreSeries {
    let terms = (min_deg..=max_deg)
        .flat_map(|d| monomials_of_degree(n, d))
        .filter_map(|m| rng.random_bool(0.6).then(|| (m, random_poly(rng, n, 2))))
        .collect::<Vec<_>>();
    FibreSeries::from_terms(n, order, terms)
}

fn random_scalar(rng: &mut ChaCha8Rng) -> Scalar {
    let re = Scalar::ratio(rng.random_range(-5..=5), rng.random_range(1..=4));
    let im = Scalar::ratio(rng.random_range(-5..=5), rng.random_range(1..=4));
    &re + &(&im * &Scalar::i())
}

fn random_invertible(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<Scalar>> {
    loop {
        let m: Vec<Vec<Scalar>> =
            (0..n).map(|_| (0..n).map(|_| Scalar::from_int(rng.random_range(-2..=2))).collect()).collect();
        if fedosov_core::series_core::linsolve::invert_matrix(&m).is_some() {
            return m;
        }
    }
}

fn random_fibre_map(rng: &mut ChaCha8Rng, n: usize, order: u32) -> FibreMap {
    let l = random_invertible(rng, n);
    let comps = (0..n)
        .map(|p| {
            let mut c = random_series(rng, n, 2, order, order);
            for (m, lpm) in l[p].iter().enumerate() {
                c = &c + &FibreSeries::xi(n, m, order).scale(lpm);
            }
            c
        })
        .collect();
    FibreMap::new(comps).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn scalar_field_laws(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let (a, b, c) = (random_scalar(&mut rng), random_scalar(&mut rng), random_scalar(&mut rng));
        prop_assert_eq!(&(&a + &b) * &c, &(&a * &c) + &(&b * &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(a.conj().conj(), a.clone());
        if let Some(inv) = b.inv() {
            prop_assert_eq!(&(&a / &b) * &b, a.clone());
            prop_assert!((&inv * &b).is_one());
        } else {
            prop_assert!(b.is_zero());
        }
    }

    #[test]
    fn series_ring_laws(seed in any::<u64>(), order in 1u32..5) {
        let mut rng = seeded(seed);
        let a = random_series(&mut rng, 2, 0, 4, order);
        let b = random_series(&mut rng, 2, 0, 4, order);
        let c = random_series(&mut rng, 2, 0, 4, order + 1);
        prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&a - &a).is_zero());
        prop_assert_eq!((&a * &b).order(), order);
    }

    #[test]
    fn derivations_satisfy_leibniz(seed in any::<u64>()) {
        let mut rng = seeded(seed);
        let a = random_series(&mut rng, 2, 0, 3, FibreSeries::EXACT);
        let b = random_series(&mut rng, 2, 0, 3, FibreSeries::EXACT);
        let ab = &a * &b;
        for i in 0..2 {
            prop_assert_eq!(ab.partial_x(i), &(&a.partial_x(i) * &b) + &(&a * &b.partial_x(i)));
            prop_assert_eq!(ab.partial_xi(i), &(&a.partial_xi(i) * &b) + &(&a * &b.partial_xi(i)));
        }
    }

    #[test]
    fn graded_product_agrees_with_the_exact_product(seed in any::<u64>(), oa in 1u32..5, ob in 1u32..5) {
        let mut rng = seeded(seed);
        let a = random_series(&mut rng, 2, 0, 5, FibreSeries::EXACT);
        let b = random_series(&mut rng, 2, 1, 5, FibreSeries::EXACT);
        let g = a.truncate(oa).mul_graded(&b.truncate(ob)).unwrap();
        prop_assert!(g.order() >= oa.min(ob));
        let expected = (&a * &b).truncate(g.order());
        prop_assert_eq!(g, expected);
    }

    #[test]
    fn substitution_round_trip(seed in any::<u64>(), order in 2u32..5) {
        let mut rng = seeded(seed);
        let phi = random_fibre_map(&mut rng, 2, order);
        let psi = phi.invert().unwrap();
        prop_assert_eq!(phi.compose(&psi).unwrap(), FibreMap::identity(2, order));
        prop_assert_eq!(psi.compose(&phi).unwrap(), FibreMap::identity(2, order));
        let f = random_series(&mut rng, 2, 0, order, order);
        prop_assert_eq!(psi.apply(&phi.apply(&f).unwrap()).unwrap(), f.clone());
        let chi = random_fibre_map(&mut rng, 2, order);
        prop_assert_eq!(chi.apply(&phi.apply(&f).unwrap()).unwrap(), phi.compose(&chi).unwrap().apply(&f).unwrap());
    }

    #[test]
    fn series_matrix_inverse(seed in any::<u64>(), order in 1u32..5) {
        let mut rng = seeded(seed);
        let l = random_invertible(&mut rng, 2);
        let rows = (0..2)
            .map(|i| {
                (0..2)
                    .map(|j| &FibreSeries::constant(2, l[i][j].clone(), order) + &random_series(&mut rng, 2, 1, order, order))
                    .collect()
            })
            .collect();
        let m = SeriesMatrix::new(rows).unwrap();
        let inv = m.inverse().unwrap();
        prop_assert_eq!(m.mul(&inv).unwrap(), SeriesMatrix::identity(2, order));
        prop_assert_eq!(inv.mul(&m).unwrap(), SeriesMatrix::identity(2, order));
    }

    #[test]
    fn linear_solutions_and_certificates_check_out(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..6) {
        let mut rng = seeded(seed);
        let mut sys = LinearSystem::new(cols);
        for _ in 0..rows {
            let mut entries = Vec::new();
            for c in 0..cols {
                if rng.random_bool(0.5) {
                    entries.push((c, random_scalar(&mut rng)));
                }
            }
            sys.push_row(entries, random_scalar(&mut rng));
        }
        let tracked = sys.solve();
        match &tracked {
            LinearSolution::Solved { values, .. } => prop_assert!(sys.residual(values).iter().all(Scalar::is_zero)),
            LinearSolution::Inconsistent(cert) => prop_assert!(cert.verify(&sys)),
        }
        match (sys.solve_fast(), tracked) {
            (LinearSolution::Solved { values, .. }, LinearSolution::Solved { values: v2, .. }) => prop_assert_eq!(values, v2),
            (LinearSolution::Inconsistent(_), LinearSolution::Inconsistent(_)) => {}
            _ => prop_assert!(false, "fast and tracked elimination disagree"),
        }
    }
}

#[test]
fn duplicated_rows_with_different_values_are_inconsistent() {
    let mut sys = LinearSystem::new(3);
    sys.push_row([(0, Scalar::one()), (2, Scalar::ratio(1, 2))], Scalar::one());
    sys.push_row([(1, Scalar::one())], Scalar::zero());
    sys.push_row([(0, Scalar::from_int(2)), (2, Scalar::one())], Scalar::one());
    let LinearSolution::Inconsistent(cert) = sys.solve() else { panic!("expected an inconsistency") };
    assert!(cert.verify(&sys));
    let mut tampered = cert.clone();
    tampered.value = &tampered.value + &Scalar::one();
    assert!(!tampered.verify(&sys));
}

#[test]
fn partial_xi_lowers_the_known_order() {
    let f = random_series(&mut seeded(3), 2, 0, 4, 4);
    assert_eq!(f.partial_xi(0).order(), 3);
    assert_eq!(f.partial_x(0).order(), 4);
    assert_eq!(xi(2, 0).partial_xi(0).order(), FibreSeries::EXACT);
}
