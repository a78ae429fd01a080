#![allow(dead_code)]

use std::sync::Arc;

use fedosov_core::poisson_geometry::{
    kahler_connection, lie_poisson_connection_solve, Connection, KahlerData, LieAlgebraData, LieConnectionOutcome,
    PoissonStructure,
};
use fedosov_core::{BasePolynomial, FibreSeries, MultiIndex, Scalar};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn x(n: usize, i: usize) -> BasePolynomial {
    BasePolynomial::var(n, i)
}

pub fn c(n: usize, v: i64) -> BasePolynomial {
    BasePolynomial::constant(n, Scalar::from_int(v))
}

pub fn q(n: usize, num: i64, den: i64) -> BasePolynomial {
    BasePolynomial::constant(n, Scalar::ratio(num, den))
}

pub fn xi(n: usize, j: usize) -> FibreSeries {
    FibreSeries::xi(n, j, FibreSeries::EXACT)
}

pub fn lift_poly(p: &BasePolynomial) -> FibreSeries {
    FibreSeries::from_poly(p.clone(), FibreSeries::EXACT)
}

pub fn flat() -> Connection {
    Connection::trivial(Arc::new(PoissonStructure::standard_symplectic()))
}

pub fn kahler_data(g: BasePolynomial) -> KahlerData {
    KahlerData::new(vec![vec![g]]).unwrap()
}

pub fn kahler(g: BasePolynomial) -> Connection {
    kahler_connection(&kahler_data(g)).unwrap().1
}

/// `1 + z·z̄`
pub fn fubini_like() -> BasePolynomial {
    &c(2, 1) + &(&x(2, 0) * &x(2, 1))
}

pub fn quadratic_metric() -> BasePolynomial {
    let g = fubini_like();
    &g * &g
}

pub fn lie(l: &LieAlgebraData) -> Connection {
    match lie_poisson_connection_solve(l).unwrap() {
        LieConnectionOutcome::Feasible(c) => c,
        LieConnectionOutcome::Infeasible(_) => panic!("expected a connection"),
    }
}

/// The demo connections exercised by the property tests, all self-associated.
pub fn demos() -> Vec<(&'static str, Connection)> {
    vec![
        ("flat-symplectic", flat()),
        ("abelian", lie(&LieAlgebraData::abelian(2))),
        ("aff1", lie(&LieAlgebraData::aff1())),
        ("kahler-flat", kahler(c(2, 1))),
        ("kahler-fubini-like", kahler(fubini_like())),
        ("kahler-quadratic", kahler(quadratic_metric())),
    ]
}

/// Random polynomial of degree ≤ `deg` with small rational coefficients.
pub fn random_poly(rng: &mut ChaCha8Rng, n: usize, deg: u32) -> BasePolynomial {
    let mut out = BasePolynomial::zero(n);
    for d in 0..=deg {
        for m in fedosov_core::series_core::monomials_of_degree(n, d) {
            if rng.random_bool(0.5) {
                let num = rng.random_range(-4i64..=4);
                let den = rng.random_range(1i64..=3);
                out.add_assign_ref(&BasePolynomial::monomial(m, Scalar::ratio(num, den)));
            }
        }
    }
    out
}

pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// `f(x − π ξ)` expanded monomial by monomial: the closed-form lift for a
/// constant Poisson structure with vanishing Christoffel symbols.
pub fn shifted_by_sharp(pi: &PoissonStructure, f: &BasePolynomial) -> FibreSeries {
    let n = pi.dim();
    let shifted: Vec<FibreSeries> = (0..n)
        .map(|s| {
            let mut acc = lift_poly(&x(n, s));
            for j in 0..n {
                acc = &acc - &xi(n, j).mul_poly(pi.get(s, j));
            }
            acc
        })
        .collect();
    let mut out = FibreSeries::zero(n, FibreSeries::EXACT);
    for (m, coeff) in f.terms() {
        let mut term = FibreSeries::constant(n, coeff.clone(), FibreSeries::EXACT);
        for (s, &e) in m.exponents().iter().enumerate() {
            for _ in 0..e {
                term = &term * &shifted[s];
            }
        }
        out = &out + &term;
    }
    out
}

pub fn mono(exps: &[u32]) -> MultiIndex {
    MultiIndex::from_slice(exps)
}
