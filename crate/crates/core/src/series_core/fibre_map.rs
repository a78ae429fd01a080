//! Formal changes of fibre variables `ξ = φ(x, ζ)` fixing the zero section.

use super::index::MultiIndex;
use super::linsolve::invert_matrix;
use super::scalar::Scalar;
use super::series::FibreSeries;
use crate::error::{Error, Result};

/// A tuple of series `φ_1..φ_n` with no ξ-degree-0 part and a constant
/// invertible linear part, so that it can be inverted as a formal map.
#[derive(Clone, Debug, PartialEq)]
pub struct FibreMap {
    components: Vec<FibreSeries>,
    linear: Vec<Vec<Scalar>>,
}

impl FibreMap {
    pub fn new(components: Vec<FibreSeries>) -> Result<Self> {
        let n = components.len();
        let mut linear = vec![vec![Scalar::zero(); n]; n];
        for (p, c) in components.iter().enumerate() {
            if c.dim() != n {
                return Err(Error::DimensionMismatch { expected: n, got: c.dim() });
            }
            if !c.zero_section().is_zero() {
                return Err(Error::NonzeroConstantPart(p));
            }
            for (m, row) in linear[p].iter_mut().enumerate() {
                let coeff = c.coeff(&MultiIndex::unit(n, m));
                *row = coeff.as_constant().ok_or(Error::NonConstantLinearPart)?;
            }
        }
        if invert_matrix(&linear).is_none() {
            return Err(Error::NotInvertible);
        }
        Ok(Self { components, linear })
    }

    pub fn identity(dim: usize, order: u32) -> Self {
        Self::new((0..dim).map(|j| FibreSeries::xi(dim, j, order)).collect()).expect("identity is invertible")
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> u32 {
        self.components.iter().map(FibreSeries::order).min().unwrap_or(0)
    }

    pub fn components(&self) -> &[FibreSeries] {
        &self.components
    }

    /// The constant matrix `L` with `φ_p = L_pm ζ_m + O(ζ²)`.
    pub fn linear_part(&self) -> &[Vec<Scalar>] {
        &self.linear
    }

    /// `F(x, φ(x, ζ))`.
    pub fn apply(&self, f: &FibreSeries) -> Result<FibreSeries> {
        f.substitute(&self.components)
    }

    /// `self ∘ other`, i.e. `ζ ↦ φ(ψ(ζ))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        let comps = self.components.iter().map(|c| c.substitute(&other.components)).collect::<Result<Vec<_>>>()?;
        Self::new(comps)
    }

    /// The formal inverse `ψ` with `φ(ψ(ξ)) = ξ`, by the fixed-point
    /// iteration `ψ ← L⁻¹(ξ − h(ψ))` where `h = φ − Lζ`.
    pub fn invert(&self) -> Result<Self> {
        let n = self.dim();
        let order = self.order();
        let l_inv = invert_matrix(&self.linear).ok_or(Error::NotInvertible)?;
        let h: Vec<FibreSeries> = self
            .components
            .iter()
            .map(|c| {
                let mut h = c.truncate(order);
                for d in 0..=1 {
                    h = &h - &c.xi_component(d).truncate(order);
                }
                h
            })
            .collect();
        let xi: Vec<FibreSeries> = (0..n).map(|j| FibreSeries::xi(n, j, order)).collect();
        let apply_l_inv = |v: &[FibreSeries]| -> Vec<FibreSeries> {
            (0..n)
                .map(|m| {
                    let mut acc = FibreSeries::zero(n, order);
                    for (p, vp) in v.iter().enumerate() {
                        acc = &acc + &vp.scale(&l_inv[m][p]);
                    }
                    acc
                })
                .collect()
        };
        let mut psi = apply_l_inv(&xi);
        for _ in 1..order {
            let hp = h.iter().map(|hc| hc.substitute(&psi)).collect::<Result<Vec<_>>>()?;
            let rhs: Vec<FibreSeries> = xi.iter().zip(&hp).map(|(a, b)| a - b).collect();
            psi = apply_l_inv(&rhs);
        }
        Self::new(psi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series_core::poly::BasePolynomial;

    #[test]
    fn inverse_round_trip() {
        let n = 5;
        let z0 = FibreSeries::xi(2, 0, n);
        let z1 = FibreSeries::xi(2, 1, n);
        let x = FibreSeries::from_poly(BasePolynomial::var(2, 0), n);
        let phi = FibreMap::new(vec![
            &(&z0 + &z1.scale(&Scalar::from_int(2))) + &(&(&z0 * &z1) * &x),
            &(&z1 - &(&z0 * &z0)) + &(&z1 * &(&z1 * &z1)).scale(&Scalar::ratio(1, 3)),
        ])
        .unwrap();
        let psi = phi.invert().unwrap();
        assert_eq!(phi.compose(&psi).unwrap(), FibreMap::identity(2, n));
        assert_eq!(psi.compose(&phi).unwrap(), FibreMap::identity(2, n));
    }

    #[test]
    fn rejects_degenerate_maps() {
        let n = 3;
        let z0 = FibreSeries::xi(2, 0, n);
        let x = FibreSeries::from_poly(BasePolynomial::var(2, 0), n);
        assert!(matches!(FibreMap::new(vec![z0.clone(), z0.clone()]), Err(Error::NotInvertible)));
        assert!(matches!(FibreMap::new(vec![&z0 * &x, z0.clone()]), Err(Error::NonConstantLinearPart)));
        assert!(matches!(FibreMap::new(vec![&z0 + &x, z0]), Err(Error::NonzeroConstantPart(0))));
    }
}
