use std::sync::Arc;

use super::connection::{zero_tensor3, Connection};
use super::structure::PoissonStructure;
use crate::error::{Error, Result};
use crate::series_core::BasePolynomial;

/// A type-(1,1) Poisson tensor `g^{l̄k}` on `C^m`, with coordinates ordered
/// `z^1..z^m, z̄^1..z̄^m`; `metric[l][k] = g^{l̄k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct KahlerData {
    m: usize,
    metric: Vec<Vec<BasePolynomial>>,
}

impl KahlerData {
    pub fn new(metric: Vec<Vec<BasePolynomial>>) -> Result<Self> {
        let m = metric.len();
        for row in &metric {
            if row.len() != m {
                return Err(Error::DimensionMismatch { expected: m, got: row.len() });
            }
            if let Some(p) = row.iter().find(|p| p.dim() != 2 * m) {
                return Err(Error::DimensionMismatch { expected: 2 * m, got: p.dim() });
            }
        }
        Ok(Self { m, metric })
    }

    pub fn complex_dim(&self) -> usize {
        self.m
    }

    pub fn dim(&self) -> usize {
        2 * self.m
    }

    /// `g^{l̄k}`.
    pub fn g(&self, l: usize, k: usize) -> &BasePolynomial {
        &self.metric[l][k]
    }

    /// Residuals of the two Jacobi identities
    /// `g^{t̄s} ∂_{z^s} g^{l̄k} = g^{l̄s} ∂_{z^s} g^{t̄k}` (indexed `[t][l][k]`) and
    /// `g^{t̄s} ∂_{z̄^t} g^{l̄k} = g^{t̄k} ∂_{z̄^t} g^{l̄s}` (indexed `[s][l][k]`),
    /// keeping only the nonzero entries.
    pub fn jacobi_residuals(&self) -> Vec<(&'static str, [usize; 3], BasePolynomial)> {
        let m = self.m;
        let n = 2 * m;
        let mut out = Vec::new();
        for t in 0..m {
            for l in 0..m {
                for k in 0..m {
                    let mut acc = BasePolynomial::zero(n);
                    for s in 0..m {
                        acc.add_assign_ref(&(&self.metric[t][s] * &self.metric[l][k].partial(s)));
                        acc.sub_assign_ref(&(&self.metric[l][s] * &self.metric[t][k].partial(s)));
                    }
                    if !acc.is_zero() {
                        out.push(("holomorphic", [t, l, k], acc));
                    }
                }
            }
        }
        for s in 0..m {
            for l in 0..m {
                for k in 0..m {
                    let mut acc = BasePolynomial::zero(n);
                    for t in 0..m {
                        acc.add_assign_ref(&(&self.metric[t][s] * &self.metric[l][k].partial(m + t)));
                        acc.sub_assign_ref(&(&self.metric[t][k] * &self.metric[l][s].partial(m + t)));
                    }
                    if !acc.is_zero() {
                        out.push(("antiholomorphic", [s, l, k], acc));
                    }
                }
            }
        }
        out
    }

    /// `π^{l̄k} = g^{l̄k}`, `π^{kl̄} = −g^{l̄k}`, all other blocks zero.
    pub fn poisson(&self) -> PoissonStructure {
        let m = self.m;
        let n = 2 * m;
        let mut entries = vec![vec![BasePolynomial::zero(n); n]; n];
        for l in 0..m {
            for k in 0..m {
                entries[m + l][k] = self.metric[l][k].clone();
                entries[k][m + l] = -&self.metric[l][k];
            }
        }
        PoissonStructure::new(entries).expect("square")
    }

    /// Block projectors: `P` keeps the holomorphic coordinates, `Q = I − P`.
    pub fn projectors(&self) -> (Vec<Vec<BasePolynomial>>, Vec<Vec<BasePolynomial>>) {
        let n = 2 * self.m;
        let diag = |hol: bool| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            if i == j && ((i < self.m) == hol) {
                                BasePolynomial::one(n)
                            } else {
                                BasePolynomial::zero(n)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        (diag(true), diag(false))
    }
}

/// The Kähler-Poisson connection: `Γ^{l̄k}_m = −∂g^{l̄k}/∂z^m`,
/// `Γ^{kl̄}_{n̄} = ∂g^{l̄k}/∂z̄^n`, all other symbols zero.
pub fn kahler_connection(k: &KahlerData) -> Result<(Arc<PoissonStructure>, Connection)> {
    let res = k.jacobi_residuals();
    if let Some((kind, idx, p)) = res.first() {
        return Err(Error::Precondition(format!(
            "metric violates the {kind} Jacobi identity at {idx:?}: residual {p} ({} nonzero residuals)",
            res.len()
        )));
    }
    let m = k.m;
    let pi = Arc::new(k.poisson());
    let mut gamma = zero_tensor3(2 * m);
    for l in 0..m {
        for kk in 0..m {
            let g = &k.metric[l][kk];
            for a in 0..m {
                gamma[m + l][kk][a] = -&g.partial(a);
                gamma[kk][m + l][m + a] = g.partial(m + a);
            }
        }
    }
    let c = Connection::new(pi.clone(), gamma)?;
    Ok((pi, c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poisson_geometry::connection::{conn_analyze, conn_apply};
    use crate::poisson_geometry::structure::OneForm;

    fn fubini_like() -> KahlerData {
        let z = BasePolynomial::var(2, 0);
        let zb = BasePolynomial::var(2, 1);
        KahlerData::new(vec![vec![&BasePolynomial::one(2) + &(&z * &zb)]]).unwrap()
    }

    #[test]
    fn christoffel_symbols() {
        let (_, c) = kahler_connection(&fubini_like()).unwrap();
        let z = BasePolynomial::var(2, 0);
        let zb = BasePolynomial::var(2, 1);
        assert_eq!(c.get(1, 0, 0), &-&zb);
        assert_eq!(c.get(0, 1, 1), &z);
        assert!(c.get(0, 0, 0).is_zero() && c.get(1, 1, 1).is_zero() && c.get(1, 0, 1).is_zero());
        // ∇^{dz̄} dz = z̄ dz
        let r = conn_apply(&c, &OneForm::basis(2, 1), &OneForm::basis(2, 0));
        assert_eq!(r, OneForm(vec![zb, BasePolynomial::zero(2)]));
        let rep = conn_analyze(&c, None).unwrap();
        assert!(rep.torsion_free && rep.respects_poisson && rep.associated);
    }

    #[test]
    fn flat_metric_gives_zero_symbols() {
        let k = KahlerData::new(vec![vec![BasePolynomial::one(2)]]).unwrap();
        let (_, c) = kahler_connection(&k).unwrap();
        assert!(c.christoffel().iter().flatten().flatten().all(BasePolynomial::is_zero));
    }

    #[test]
    fn jacobi_failure_is_reported() {
        // two complex dimensions, g^{1̄1} = z^2 only: ∂_{z^2} g^{1̄1} is hit by g^{1̄2}=1
        let n = 4;
        let z2 = BasePolynomial::var(n, 1);
        let one = BasePolynomial::one(n);
        let zero = BasePolynomial::zero(n);
        let k = KahlerData::new(vec![vec![z2, one.clone()], vec![zero, one]]).unwrap();
        assert!(!k.jacobi_residuals().is_empty());
        assert!(matches!(kahler_connection(&k), Err(Error::Precondition(_))));
    }
}
