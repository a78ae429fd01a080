use std::sync::Arc;

use super::connection::{conn_analyze, Connection};
use super::structure::PoissonStructure;
use crate::error::{Error, Result};
use crate::series_core::linsolve::{InconsistencyCertificate, LinearSolution, LinearSystem};
use crate::series_core::{BasePolynomial, Scalar};

/// Structure constants `c[i][j][k] = c^{ij}_k` with `[X^i, X^j] = c^{ij}_k X^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraData {
    n: usize,
    c: Vec<Vec<Vec<Scalar>>>,
}

impl LieAlgebraData {
    /// Checks shape, antisymmetry and the Jacobi identity.
    pub fn new(c: Vec<Vec<Vec<Scalar>>>) -> Result<Self> {
        let n = c.len();
        if c.iter().any(|a| a.len() != n || a.iter().any(|b| b.len() != n)) {
            return Err(Error::DimensionMismatch { expected: n, got: c.len() });
        }
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if !(&c[i][j][k] + &c[j][i][k]).is_zero() {
                        return Err(Error::Precondition(format!(
                            "structure constants not antisymmetric at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                for l in 0..n {
                    for m in 0..n {
                        let mut acc = Scalar::zero();
                        for k in 0..n {
                            acc += &(&c[i][j][k] * &c[k][l][m]);
                            acc += &(&c[j][l][k] * &c[k][i][m]);
                            acc += &(&c[l][i][k] * &c[k][j][m]);
                        }
                        if !acc.is_zero() {
                            return Err(Error::Precondition(format!(
                                "Jacobi identity fails at ({i},{j},{l}) component {m}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(Self { n, c })
    }

    pub fn abelian(n: usize) -> Self {
        Self { n, c: vec![vec![vec![Scalar::zero(); n]; n]; n] }
    }

    /// `[X^1, X^2] = X^2`.
    pub fn aff1() -> Self {
        let mut c = vec![vec![vec![Scalar::zero(); 2]; 2]; 2];
        c[0][1][1] = Scalar::one();
        c[1][0][1] = Scalar::from_int(-1);
        Self { n: 2, c }
    }

    /// `c^{ij}_k = ε_{ijk}`.
    pub fn su2() -> Self {
        let mut c = vec![vec![vec![Scalar::zero(); 3]; 3]; 3];
        for (i, j, k) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            c[i][j][k] = Scalar::one();
            c[j][i][k] = Scalar::from_int(-1);
        }
        Self { n: 3, c }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn structure_constants(&self) -> &[Vec<Vec<Scalar>>] {
        &self.c
    }

    pub fn poisson(&self) -> PoissonStructure {
        PoissonStructure::lie_poisson(&self.c).expect("square")
    }
}

/// Infeasibility of the origin system, with the system itself so the
/// certificate can be replayed.
#[derive(Clone, Debug)]
pub struct ObstructionCertificate {
    pub system: LinearSystem,
    /// Human-readable origin of each row.
    pub row_labels: Vec<String>,
    pub certificate: InconsistencyCertificate,
}

impl ObstructionCertificate {
    pub fn verify(&self) -> bool {
        self.certificate.verify(&self.system)
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum LieConnectionOutcome {
    Feasible(Connection),
    Infeasible(ObstructionCertificate),
}

fn col(n: usize, i: usize, j: usize, k: usize) -> usize {
    (i * n + j) * n + k
}

/// Searches for a constant-coefficient torsion-free Poisson connection on
/// the dual of a Lie algebra by solving for `Γ^{ij}_k(0)`:
/// `−Γ^{ij}_k + Γ^{ji}_k = c^{ij}_k` and `c^{ik}_s Γ^{jl}_k = c^{jk}_s Γ^{il}_k`.
pub fn lie_poisson_connection_solve(l: &LieAlgebraData) -> Result<LieConnectionOutcome> {
    let n = l.n;
    let c = &l.c;
    let mut sys = LinearSystem::new(n * n * n);
    let mut labels = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                sys.push_row(
                    [(col(n, i, j, k), Scalar::from_int(-1)), (col(n, j, i, k), Scalar::one())],
                    c[i][j][k].clone(),
                );
                labels.push(format!("torsion ({},{}) component {}", i + 1, j + 1, k + 1));
            }
        }
    }
    for i in 0..n {
        for j in i + 1..n {
            for ll in 0..n {
                for s in 0..n {
                    let mut entries = Vec::new();
                    for k in 0..n {
                        if !c[i][k][s].is_zero() {
                            entries.push((col(n, j, ll, k), c[i][k][s].clone()));
                        }
                        if !c[j][k][s].is_zero() {
                            entries.push((col(n, i, ll, k), -&c[j][k][s]));
                        }
                    }
                    if entries.is_empty() {
                        continue;
                    }
                    sys.push_row(entries, Scalar::zero());
                    labels.push(format!("association ({},{}) l={} s={}", i + 1, j + 1, ll + 1, s + 1));
                }
            }
        }
    }
    match sys.solve() {
        LinearSolution::Inconsistent(certificate) => Ok(LieConnectionOutcome::Infeasible(ObstructionCertificate {
            system: sys,
            row_labels: labels,
            certificate,
        })),
        LinearSolution::Solved { values, .. } => {
            let pi = Arc::new(l.poisson());
            let gamma = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| (0..n).map(|k| BasePolynomial::constant(n, values[col(n, i, j, k)].clone())).collect())
                        .collect()
                })
                .collect();
            let conn = Connection::new(pi, gamma)?;
            let rep = conn_analyze(&conn, None)?;
            if !rep.torsion_free || !rep.respects_poisson {
                return Err(Error::Invariant(
                    "origin solution does not extend to a torsion-free Poisson connection".into(),
                ));
            }
            Ok(LieConnectionOutcome::Feasible(conn))
        }
    }
}
