use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::series_core::{BasePolynomial, MultiIndex, Scalar};

/// `π^{ij}(x)` together with its first partial derivatives.
#[derive(Clone, Debug, PartialEq)]
pub struct PoissonStructure {
    dim: usize,
    entries: Vec<Vec<BasePolynomial>>,
    // dpi[k][i][j] = ∂_k π^{ij}
    dpi: Vec<Vec<Vec<BasePolynomial>>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PoissonReport {
    pub antisymmetric: bool,
    /// Nonzero `π^{ij} + π^{ji}` for `i ≤ j`.
    pub antisymmetry_residuals: Vec<((usize, usize), BasePolynomial)>,
    /// Nonzero `J^{ijk}` for `i < j < k`.
    pub jacobi_residuals: Vec<((usize, usize, usize), BasePolynomial)>,
}

impl PoissonReport {
    pub fn passed(&self) -> bool {
        self.antisymmetric && self.jacobi_residuals.is_empty()
    }
}

impl PoissonStructure {
    /// Wraps a square polynomial matrix. Only shapes are checked here; the
    /// bivector conditions are reported by [`validate_poisson`].
    pub fn new(entries: Vec<Vec<BasePolynomial>>) -> Result<Self> {
        let dim = entries.len();
        for row in &entries {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: row.len() });
            }
            for p in row {
                if p.dim() != dim {
                    return Err(Error::DimensionMismatch { expected: dim, got: p.dim() });
                }
            }
        }
        let dpi =
            (0..dim).map(|k| entries.iter().map(|row| row.iter().map(|p| p.partial(k)).collect()).collect()).collect();
        Ok(Self { dim, entries, dpi })
    }

    pub fn zero(dim: usize) -> Self {
        Self::new(vec![vec![BasePolynomial::zero(dim); dim]; dim]).expect("square")
    }

    pub fn constant(m: &[Vec<Scalar>]) -> Result<Self> {
        let dim = m.len();
        Self::new(m.iter().map(|r| r.iter().map(|c| BasePolynomial::constant(dim, c.clone())).collect()).collect())
    }

    /// `π^{12} = 1` on R².
    pub fn standard_symplectic() -> Self {
        let one = Scalar::one();
        Self::constant(&[vec![Scalar::zero(), one.clone()], vec![-&one, Scalar::zero()]]).expect("square")
    }

    /// `π^{ij} = c^{ij}_k x^k`; `c[i][j][k] = c^{ij}_k`.
    pub fn lie_poisson(c: &[Vec<Vec<Scalar>>]) -> Result<Self> {
        let n = c.len();
        let entries = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        BasePolynomial::from_terms(n, (0..n).map(|k| (MultiIndex::unit(n, k), c[i][j][k].clone())))
                    })
                    .collect()
            })
            .collect();
        Self::new(entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> &BasePolynomial {
        &self.entries[i][j]
    }

    pub fn entries(&self) -> &[Vec<BasePolynomial>] {
        &self.entries
    }

    /// `∂_k π^{ij}`.
    pub fn d(&self, k: usize, i: usize, j: usize) -> &BasePolynomial {
        &self.dpi[k][i][j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(BasePolynomial::is_zero)
    }

    /// `Σ_s π^{is} ∂_s f`, the Hamiltonian-type derivative along `#dx^i`.
    pub fn contract_grad(&self, i: usize, f: &BasePolynomial) -> BasePolynomial {
        let mut acc = BasePolynomial::zero(self.dim);
        for s in 0..self.dim {
            if !self.entries[i][s].is_zero() {
                acc.add_assign_ref(&(&self.entries[i][s] * &f.partial(s)));
            }
        }
        acc
    }

    pub fn jacobi(&self, i: usize, j: usize, k: usize) -> BasePolynomial {
        let mut acc = BasePolynomial::zero(self.dim);
        for s in 0..self.dim {
            acc.add_assign_ref(&(&self.entries[i][s] * &self.dpi[s][j][k]));
            acc.add_assign_ref(&(&self.entries[j][s] * &self.dpi[s][k][i]));
            acc.add_assign_ref(&(&self.entries[k][s] * &self.dpi[s][i][j]));
        }
        acc
    }
}

pub fn validate_poisson(pi: &PoissonStructure) -> PoissonReport {
    let n = pi.dim();
    let mut antisymmetry_residuals = Vec::new();
    for i in 0..n {
        for j in i..n {
            let r = pi.get(i, j) + pi.get(j, i);
            if !r.is_zero() {
                antisymmetry_residuals.push(((i, j), r));
            }
        }
    }
    let triples: Vec<(usize, usize, usize)> =
        (0..n).flat_map(|i| (i + 1..n).flat_map(move |j| (j + 1..n).map(move |k| (i, j, k)))).collect();
    let jacobi_residuals = triples
        .into_par_iter()
        .filter_map(|(i, j, k)| {
            let r = pi.jacobi(i, j, k);
            (!r.is_zero()).then_some(((i, j, k), r))
        })
        .collect();
    PoissonReport { antisymmetric: antisymmetry_residuals.is_empty(), antisymmetry_residuals, jacobi_residuals }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OneForm(pub Vec<BasePolynomial>);

#[derive(Clone, Debug, PartialEq)]
pub struct PolyVectorField(pub Vec<BasePolynomial>);

impl OneForm {
    pub fn zero(dim: usize) -> Self {
        Self(vec![BasePolynomial::zero(dim); dim])
    }

    /// `dx^i`.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut f = Self::zero(dim);
        f.0[i] = BasePolynomial::one(dim);
        f
    }

    pub fn exact(f: &BasePolynomial) -> Self {
        Self((0..f.dim()).map(|k| f.partial(k)).collect())
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(BasePolynomial::is_zero)
    }

    pub fn scale_by(&self, f: &BasePolynomial) -> Self {
        Self(self.0.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    /// `α(X) = α_i X^i`.
    pub fn pair(&self, x: &PolyVectorField) -> BasePolynomial {
        let mut acc = BasePolynomial::zero(self.dim());
        for (a, b) in self.0.iter().zip(&x.0) {
            acc.add_assign_ref(&(a * b));
        }
        acc
    }

    /// `(L_X α)_k = X^s ∂_s α_k + α_s ∂_k X^s`.
    pub fn lie_derivative(&self, x: &PolyVectorField) -> Self {
        let n = self.dim();
        Self(
            (0..n)
                .map(|k| {
                    let mut acc = x.apply(&self.0[k]);
                    for s in 0..n {
                        acc.add_assign_ref(&(&self.0[s] * &x.0[s].partial(k)));
                    }
                    acc
                })
                .collect(),
        )
    }
}

impl PolyVectorField {
    pub fn zero(dim: usize) -> Self {
        Self(vec![BasePolynomial::zero(dim); dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(BasePolynomial::is_zero)
    }

    /// `X(f) = X^s ∂_s f`.
    pub fn apply(&self, f: &BasePolynomial) -> BasePolynomial {
        let mut acc = BasePolynomial::zero(f.dim());
        for (s, xs) in self.0.iter().enumerate() {
            if !xs.is_zero() {
                acc.add_assign_ref(&(xs * &f.partial(s)));
            }
        }
        acc
    }

    /// `[X, Y]^j = X(Y^j) − Y(X^j)`.
    pub fn lie_bracket(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(xj, yj)| &self.apply(yj) - &other.apply(xj)).collect())
    }
}

/// `(#α)^j = α_i π^{ij}`.
pub fn sharp(pi: &PoissonStructure, alpha: &OneForm) -> PolyVectorField {
    let n = pi.dim();
    PolyVectorField(
        (0..n)
            .map(|j| {
                let mut acc = BasePolynomial::zero(n);
                for i in 0..n {
                    if !alpha.0[i].is_zero() && !pi.get(i, j).is_zero() {
                        acc.add_assign_ref(&(&alpha.0[i] * pi.get(i, j)));
                    }
                }
                acc
            })
            .collect(),
    )
}

/// `Π(α, β) = α_i π^{ij} β_j`.
pub fn bivector_pair(pi: &PoissonStructure, alpha: &OneForm, beta: &OneForm) -> BasePolynomial {
    beta.pair(&sharp(pi, alpha))
}

/// `{f, g} = ∂_i f π^{ij} ∂_j g`.
pub fn poisson_bracket(pi: &PoissonStructure, f: &BasePolynomial, g: &BasePolynomial) -> BasePolynomial {
    bivector_pair(pi, &OneForm::exact(f), &OneForm::exact(g))
}

/// `[α, β] = L_{#α} β − L_{#β} α − d Π(α, β)`.
pub fn koszul_bracket(pi: &PoissonStructure, alpha: &OneForm, beta: &OneForm) -> OneForm {
    let a = beta.lie_derivative(&sharp(pi, alpha));
    let b = alpha.lie_derivative(&sharp(pi, beta));
    let c = OneForm::exact(&bivector_pair(pi, alpha, beta));
    a.sub(&b).sub(&c)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> BasePolynomial {
        BasePolynomial::var(3, i)
    }

    pub(crate) fn su2() -> PoissonStructure {
        let z = BasePolynomial::zero(3);
        PoissonStructure::new(vec![vec![z.clone(), x(2), -&x(1)], vec![-&x(2), z.clone(), x(0)], vec![x(1), -&x(0), z]])
            .unwrap()
    }

    #[test]
    fn validation_examples() {
        assert!(validate_poisson(&PoissonStructure::standard_symplectic()).passed());
        assert!(validate_poisson(&su2()).passed());
        let z = BasePolynomial::zero(3);
        let broken = PoissonStructure::new(vec![
            vec![z.clone(), x(0), z.clone()],
            vec![-&x(0), z.clone(), x(1)],
            vec![z.clone(), -&x(1), z],
        ])
        .unwrap();
        let rep = validate_poisson(&broken);
        assert!(!rep.passed());
        assert_eq!(rep.jacobi_residuals, vec![((0, 1, 2), x(0))]);
    }

    #[test]
    fn sharp_and_brackets() {
        let pi = su2();
        assert_eq!(sharp(&pi, &OneForm::basis(3, 0)), PolyVectorField(vec![BasePolynomial::zero(3), x(2), -&x(1)]));
        assert_eq!(poisson_bracket(&pi, &x(0), &x(1)), x(2));
        let f = &(&x(0) * &x(1)) + &x(2);
        assert!(poisson_bracket(&pi, &f, &f).is_zero());
        assert_eq!(koszul_bracket(&pi, &OneForm::basis(3, 0), &OneForm::basis(3, 1)), OneForm::basis(3, 2));
        assert!(sharp(&PoissonStructure::zero(2), &OneForm::basis(2, 0)).is_zero());
        let sym = PoissonStructure::standard_symplectic();
        let one = BasePolynomial::one(2);
        assert_eq!(poisson_bracket(&sym, &BasePolynomial::var(2, 0), &BasePolynomial::var(2, 1)), one);
    }

    #[test]
    fn koszul_homomorphism_on_symplectic_plane() {
        let pi = PoissonStructure::standard_symplectic();
        let alpha = OneForm(vec![BasePolynomial::var(2, 0), BasePolynomial::zero(2)]);
        let beta = OneForm::basis(2, 1);
        let br = koszul_bracket(&pi, &alpha, &beta);
        assert_eq!(sharp(&pi, &br), sharp(&pi, &alpha).lie_bracket(&sharp(&pi, &beta)));
    }
}
