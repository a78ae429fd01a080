//! Square matrices whose entries are fibre series.

use super::linsolve::invert_matrix;
use super::scalar::Scalar;
use super::series::FibreSeries;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct SeriesMatrix {
    rows: Vec<Vec<FibreSeries>>,
}

impl SeriesMatrix {
    pub fn new(rows: Vec<Vec<FibreSeries>>) -> Result<Self> {
        let n = rows.len();
        for r in &rows {
            if r.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(dim: usize, order: u32) -> Self {
        let rows = (0..dim)
            .map(|i| {
                (0..dim)
                    .map(|j| {
                        if i == j {
                            FibreSeries::constant(dim, Scalar::one(), order)
                        } else {
                            FibreSeries::zero(dim, order)
                        }
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    pub fn get(&self, i: usize, j: usize) -> &FibreSeries {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<FibreSeries>] {
        &self.rows
    }

    pub fn truncate(&self, order: u32) -> Self {
        Self { rows: self.rows.iter().map(|r| r.iter().map(|x| x.truncate(order)).collect()).collect() }
    }

    pub fn order(&self) -> u32 {
        self.rows.iter().flatten().map(FibreSeries::order).min().unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        let n = self.size();
        if other.size() != n {
            return Err(Error::DimensionMismatch { expected: n, got: other.size() });
        }
        let order = self.order().min(other.order());
        let dim = self.rows.first().and_then(|r| r.first()).map_or(0, FibreSeries::dim);
        let mut rows = vec![vec![FibreSeries::zero(dim, order); n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                for k in 0..n {
                    *out = &*out + &self.rows[i][k].poly_mul(&other.rows[k][j])?;
                }
            }
        }
        Ok(Self { rows })
    }

    fn sub(&self, other: &Self) -> Self {
        let rows =
            self.rows.iter().zip(&other.rows).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x - y).collect()).collect();
        Self { rows }
    }

    fn add(&self, other: &Self) -> Self {
        let rows =
            self.rows.iter().zip(&other.rows).map(|(a, b)| a.iter().zip(b).map(|(x, y)| x + y).collect()).collect();
        Self { rows }
    }

    /// Inverse as a formal series. The ξ-degree-0 part must be a constant
    /// invertible matrix; the rest is inverted by a Neumann series.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.size();
        let order = self.order();
        let dim = self.rows.first().and_then(|r| r.first()).map_or(0, FibreSeries::dim);
        let mut m0 = vec![vec![Scalar::zero(); n]; n];
        for i in 0..n {
            for j in 0..n {
                m0[i][j] = self.rows[i][j].zero_section().as_constant().ok_or(Error::NonConstantLinearPart)?;
            }
        }
        let m0_inv = invert_matrix(&m0).ok_or(Error::NotInvertible)?;
        let m0_inv = Self {
            rows: m0_inv
                .into_iter()
                .map(|r| r.into_iter().map(|c| FibreSeries::constant(dim, c, order)).collect())
                .collect(),
        };
        let id = Self::identity(dim, order);
        // M0⁻¹·M = I + F with F of ξ-valuation ≥ 1
        let f = m0_inv.mul(self)?.sub(&id);
        let f_zero = f.rows.iter().flatten().all(FibreSeries::is_zero);
        if order >= FibreSeries::EXACT / 2 && !f_zero {
            return Err(Error::Precondition(
                "the inverse of a non-constant exact matrix needs a truncation order".into(),
            ));
        }
        let mut acc = id.clone();
        let mut power = id;
        for k in 1..=order {
            power = power.mul(&f)?;
            if power.rows.iter().flatten().all(FibreSeries::is_zero) {
                break;
            }
            let term = if k % 2 == 1 { power.neg() } else { power.clone() };
            acc = acc.add(&term);
        }
        acc.mul(&m0_inv)
    }

    fn neg(&self) -> Self {
        Self { rows: self.rows.iter().map(|r| r.iter().map(|x| -x).collect()).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series_core::poly::BasePolynomial;

    #[test]
    fn inverse_of_unipotent_series_matrix() {
        let n = 4;
        let one = FibreSeries::constant(2, Scalar::one(), n);
        let z = FibreSeries::zero(2, n);
        let xi = FibreSeries::xi(2, 0, n);
        let x = FibreSeries::from_poly(BasePolynomial::var(2, 1), n);
        let m = SeriesMatrix::new(vec![vec![one.clone(), &xi * &x], vec![xi.clone(), &one + &xi]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), SeriesMatrix::identity(2, n));
        assert_eq!(inv.mul(&m).unwrap(), SeriesMatrix::identity(2, n));
        let sing = SeriesMatrix::new(vec![vec![xi.clone(), z.clone()], vec![z, one]]).unwrap();
        assert!(matches!(sing.inverse(), Err(Error::NotInvertible)));
    }
}
