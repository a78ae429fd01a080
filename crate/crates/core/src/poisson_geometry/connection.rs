use std::sync::Arc;

use rayon::prelude::*;

use super::structure::{koszul_bracket, OneForm, PoissonStructure};
use crate::error::{Error, Result};
use crate::series_core::{BasePolynomial, Scalar};

/// `t[i][j][k]`, each entry a polynomial.
pub type Tensor3 = Vec<Vec<Vec<BasePolynomial>>>;
/// `t[i][j][k][l]`.
pub type Tensor4 = Vec<Vec<Vec<Vec<BasePolynomial>>>>;

pub fn zero_tensor3(n: usize) -> Tensor3 {
    vec![vec![vec![BasePolynomial::zero(n); n]; n]; n]
}

fn build3(n: usize, f: impl Fn(usize, usize, usize) -> BasePolynomial + Sync) -> Tensor3 {
    (0..n).into_par_iter().map(|i| (0..n).map(|j| (0..n).map(|k| f(i, j, k)).collect()).collect()).collect()
}

/// Nonzero entries of a 3-tensor in index order.
pub fn nonzero_entries3(t: &Tensor3) -> Vec<([usize; 3], BasePolynomial)> {
    let mut out = Vec::new();
    for (i, a) in t.iter().enumerate() {
        for (j, b) in a.iter().enumerate() {
            for (k, p) in b.iter().enumerate() {
                if !p.is_zero() {
                    out.push(([i, j, k], p.clone()));
                }
            }
        }
    }
    out
}

pub fn is_zero3(t: &Tensor3) -> bool {
    t.iter().flatten().flatten().all(BasePolynomial::is_zero)
}

/// A contravariant connection with `∇^{dx^i} dx^j = −Γ^{ij}_k dx^k`;
/// `gamma[i][j][k] = Γ^{ij}_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Connection {
    pi: Arc<PoissonStructure>,
    gamma: Tensor3,
}

impl Connection {
    pub fn new(pi: Arc<PoissonStructure>, gamma: Tensor3) -> Result<Self> {
        let n = pi.dim();
        if gamma.len() != n || gamma.iter().any(|a| a.len() != n || a.iter().any(|b| b.len() != n)) {
            return Err(Error::DimensionMismatch { expected: n, got: gamma.len() });
        }
        if let Some(p) = gamma.iter().flatten().flatten().find(|p| p.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: p.dim() });
        }
        Ok(Self { pi, gamma })
    }

    /// `Γ = 0`.
    pub fn trivial(pi: Arc<PoissonStructure>) -> Self {
        let n = pi.dim();
        Self { pi, gamma: zero_tensor3(n) }
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }

    pub fn poisson(&self) -> &PoissonStructure {
        &self.pi
    }

    pub fn poisson_arc(&self) -> &Arc<PoissonStructure> {
        &self.pi
    }

    /// `Γ^{ij}_k`.
    pub fn get(&self, i: usize, j: usize, k: usize) -> &BasePolynomial {
        &self.gamma[i][j][k]
    }

    pub fn christoffel(&self) -> &Tensor3 {
        &self.gamma
    }

    /// Contravariant derivative of a (1,1)-tensor `P^j_k`:
    /// `∇^{dx^i} P^j_k = π^{is} ∂_s P^j_k + Γ^{ij}_s P^s_k − Γ^{is}_k P^j_s`.
    pub fn derivative_11(&self, p: &[Vec<BasePolynomial>]) -> Tensor3 {
        let n = self.dim();
        build3(n, |i, j, k| {
            let mut acc = self.pi.contract_grad(i, &p[j][k]);
            for s in 0..n {
                acc.add_assign_ref(&(&self.gamma[i][j][s] * &p[s][k]));
                acc.sub_assign_ref(&(&self.gamma[i][s][k] * &p[j][s]));
            }
            acc
        })
    }
}

/// `(∇^α β)_k = α_i (π^{is} ∂_s β_k − Γ^{is}_k β_s)`.
pub fn conn_apply(c: &Connection, alpha: &OneForm, beta: &OneForm) -> OneForm {
    let n = c.dim();
    let pi = c.poisson();
    OneForm(
        (0..n)
            .map(|k| {
                let mut acc = BasePolynomial::zero(n);
                for i in 0..n {
                    if alpha.0[i].is_zero() {
                        continue;
                    }
                    let mut inner = pi.contract_grad(i, &beta.0[k]);
                    for s in 0..n {
                        if !beta.0[s].is_zero() {
                            inner.sub_assign_ref(&(&c.gamma[i][s][k] * &beta.0[s]));
                        }
                    }
                    acc.add_assign_ref(&(&alpha.0[i] * &inner));
                }
                acc
            })
            .collect(),
    )
}

/// `T^{ij}_k = −Γ^{ij}_k + Γ^{ji}_k − ∂_k π^{ij}`.
pub fn torsion(c: &Connection) -> Tensor3 {
    let pi = c.poisson();
    build3(c.dim(), |i, j, k| &(&c.gamma[j][i][k] - &c.gamma[i][j][k]) - pi.d(k, i, j))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionTensors {
    pub torsion: Tensor3,
    /// `curvature[i][j][k][l] = (∇^{dx^i}∇^{dx^j}dx^k − ∇^{dx^j}∇^{dx^i}dx^k − ∇^{[dx^i,dx^j]}dx^k)_l`.
    pub curvature: Tensor4,
}

/// Curvature evaluated on basis covectors by nesting [`conn_apply`].
pub fn curvature(c: &Connection) -> Tensor4 {
    let n = c.dim();
    let pi = c.poisson();
    let basis: Vec<OneForm> = (0..n).map(|i| OneForm::basis(n, i)).collect();
    // first[j][k] = ∇^{dx^j} dx^k
    let first: Vec<Vec<OneForm>> =
        (0..n).map(|j| (0..n).map(|k| conn_apply(c, &basis[j], &basis[k])).collect()).collect();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    let br = koszul_bracket(pi, &basis[i], &basis[j]);
                    (0..n)
                        .map(|k| {
                            let a = conn_apply(c, &basis[i], &first[j][k]);
                            let b = conn_apply(c, &basis[j], &first[i][k]);
                            let d = conn_apply(c, &br, &basis[k]);
                            a.sub(&b).sub(&d).0
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn conn_tensors(c: &Connection) -> ConnectionTensors {
    ConnectionTensors { torsion: torsion(c), curvature: curvature(c) }
}

/// `∇^{dx^m} π^{ij} = π^{ms} ∂_s π^{ij} + Γ^{mi}_k π^{kj} + Γ^{mj}_k π^{ik}`, indexed `[m][i][j]`.
pub fn poisson_residual(c: &Connection) -> Tensor3 {
    let n = c.dim();
    let pi = c.poisson();
    build3(n, |m, i, j| {
        let mut acc = pi.contract_grad(m, pi.get(i, j));
        for k in 0..n {
            acc.add_assign_ref(&(&c.gamma[m][i][k] * pi.get(k, j)));
            acc.add_assign_ref(&(&c.gamma[m][j][k] * pi.get(i, k)));
        }
        acc
    })
}

/// `π^{ik} Γ^{jl}_k − π^{jk} †Γ^{il}_k`, indexed `[i][j][l]`.
pub fn association_residual(c: &Connection, dagger: &Connection) -> Tensor3 {
    let n = c.dim();
    let pi = c.poisson();
    build3(n, |i, j, l| {
        let mut acc = BasePolynomial::zero(n);
        for k in 0..n {
            acc.add_assign_ref(&(pi.get(i, k) * &c.gamma[j][l][k]));
            acc.sub_assign_ref(&(pi.get(j, k) * &dagger.gamma[i][l][k]));
        }
        acc
    })
}

/// `ᵗΓ^{ij}_k = Γ^{ji}_k − ∂_k π^{ij}`, so that `ᵗ∇^α β = ∇^β α + [α, β]`.
pub fn transpose(c: &Connection) -> Connection {
    let pi = c.poisson();
    let gamma = build3(c.dim(), |i, j, k| &c.gamma[j][i][k] - pi.d(k, i, j));
    Connection { pi: c.pi.clone(), gamma }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionReport {
    pub torsion: Tensor3,
    pub torsion_free: bool,
    pub poisson_residual: Tensor3,
    pub respects_poisson: bool,
    pub association_residual: Tensor3,
    pub associated: bool,
    pub dagger_torsion: Tensor3,
    pub dagger_torsion_free: bool,
    pub transpose: Connection,
}

/// Reports torsion, Poisson compatibility, association with `dagger`
/// (defaulting to `c` itself) and the transposed connection.
pub fn conn_analyze(c: &Connection, dagger: Option<&Connection>) -> Result<ConnectionReport> {
    let dagger = dagger.unwrap_or(c);
    if dagger.poisson() != c.poisson() {
        return Err(Error::Precondition("connections are over different Poisson structures".into()));
    }
    let torsion = torsion(c);
    let poisson_residual = poisson_residual(c);
    let association_residual = association_residual(c, dagger);
    let dagger_torsion = self::torsion(dagger);
    Ok(ConnectionReport {
        torsion_free: is_zero3(&torsion),
        torsion,
        respects_poisson: is_zero3(&poisson_residual),
        poisson_residual,
        associated: is_zero3(&association_residual),
        association_residual,
        dagger_torsion_free: is_zero3(&dagger_torsion),
        dagger_torsion,
        transpose: transpose(c),
    })
}

/// `Γ̂^{ij}_k = (Γ^{ij}_k + Γ^{ji}_k + ∂_k π^{ji} + †Γ^{ij}_k)/3`. Requires the
/// pair to be associated with `dagger` torsion-free; the result is checked to
/// be torsion-free and Poisson before it is returned.
pub fn conn_symmetrize(c: &Connection, dagger: &Connection) -> Result<Connection> {
    let pre = conn_analyze(c, Some(dagger))?;
    if !pre.associated || !pre.dagger_torsion_free {
        return Err(Error::Precondition(format!(
            "symmetrization needs an associated pair with torsion-free dagger (association residuals: {}, dagger torsion residuals: {})",
            nonzero_entries3(&pre.association_residual).len(),
            nonzero_entries3(&pre.dagger_torsion).len()
        )));
    }
    let pi = c.poisson();
    let third = Scalar::ratio(1, 3);
    let gamma = build3(c.dim(), |i, j, k| {
        let mut acc = &c.gamma[i][j][k] + &c.gamma[j][i][k];
        acc.add_assign_ref(pi.d(k, j, i));
        acc.add_assign_ref(&dagger.gamma[i][j][k]);
        acc.scale(&third)
    });
    let out = Connection { pi: c.pi.clone(), gamma };
    let post = conn_analyze(&out, None)?;
    if !post.torsion_free || !post.respects_poisson {
        return Err(Error::Invariant("symmetrized connection is not torsion-free and Poisson".into()));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series_core::MultiIndex;

    fn su2() -> Arc<PoissonStructure> {
        let x = |i| BasePolynomial::var(3, i);
        let z = BasePolynomial::zero(3);
        Arc::new(
            PoissonStructure::new(vec![
                vec![z.clone(), x(2), -&x(1)],
                vec![-&x(2), z.clone(), x(0)],
                vec![x(1), -&x(0), z],
            ])
            .unwrap(),
        )
    }

    #[test]
    fn flat_connection_annihilates_coordinate_forms() {
        let pi = Arc::new(PoissonStructure::standard_symplectic());
        let c = Connection::trivial(pi);
        let beta = OneForm(vec![BasePolynomial::var(2, 0), BasePolynomial::zero(2)]);
        assert!(conn_apply(&c, &OneForm::basis(2, 0), &beta).is_zero());
        let t = conn_tensors(&c);
        assert!(is_zero3(&t.torsion));
        assert!(t.curvature.iter().flatten().flatten().flatten().all(BasePolynomial::is_zero));
        let rep = conn_analyze(&c, None).unwrap();
        assert!(rep.torsion_free && rep.respects_poisson && rep.associated);
    }

    #[test]
    fn trivial_connection_on_su2() {
        let c = Connection::trivial(su2());
        let t = torsion(&c);
        // T(dx1, dx2) = −dx3
        assert_eq!(t[0][1][2], BasePolynomial::constant(3, Scalar::from_int(-1)));
        assert!(t[0][1][0].is_zero() && t[0][1][1].is_zero());
        let rep = conn_analyze(&c, None).unwrap();
        assert!(!rep.respects_poisson);
        assert_eq!(rep.poisson_residual[0][0][1], -&BasePolynomial::var(3, 1));
    }

    #[test]
    fn transpose_is_an_involution_and_matches_definition() {
        let pi = su2();
        let x = |i| BasePolynomial::var(3, i);
        let mut g = zero_tensor3(3);
        g[0][1][2] = x(0);
        g[2][2][1] = BasePolynomial::monomial(MultiIndex::from_slice(&[0, 1, 1]), Scalar::ratio(2, 3));
        let c = Connection::new(pi.clone(), g).unwrap();
        let t = transpose(&c);
        assert_eq!(transpose(&t), c);
        let alpha = OneForm(vec![x(1), BasePolynomial::one(3), BasePolynomial::zero(3)]);
        let beta = OneForm(vec![BasePolynomial::zero(3), x(2), x(0)]);
        let lhs = conn_apply(&t, &alpha, &beta);
        let rhs = conn_apply(&c, &beta, &alpha).add(&koszul_bracket(&pi, &alpha, &beta));
        assert_eq!(lhs, rhs);
    }
}
