//! Fixtures shared by the benchmarks.

use std::sync::Arc;

use fedosov_core::poisson_geometry::{kahler_connection, lie_poisson_connection_solve, LieConnectionOutcome};
use fedosov_core::{BasePolynomial, Connection, KahlerData, LieAlgebraData, PoissonStructure, Scalar};

pub fn flat() -> Connection {
    Connection::trivial(Arc::new(PoissonStructure::standard_symplectic()))
}

pub fn aff1() -> Connection {
    match lie_poisson_connection_solve(&LieAlgebraData::aff1()).expect("aff(1) solves") {
        LieConnectionOutcome::Feasible(c) => c,
        LieConnectionOutcome::Infeasible(_) => unreachable!("aff(1) admits a connection"),
    }
}

/// `1 + z·z̄` raised to `power`, with its Kähler data.
pub fn kahler(power: u32) -> (KahlerData, Connection) {
    let one = BasePolynomial::constant(2, Scalar::one());
    let base = &one + &(&BasePolynomial::var(2, 0) * &BasePolynomial::var(2, 1));
    let mut g = one;
    for _ in 0..power {
        g = &g * &base;
    }
    let k = KahlerData::new(vec![vec![g]]).expect("scalar metric");
    let c = kahler_connection(&k).expect("Kähler connection").1;
    (k, c)
}
