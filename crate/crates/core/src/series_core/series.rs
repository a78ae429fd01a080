//! Truncated formal series in the fibre variables `ξ_1..ξ_n` with polynomial
//! coefficients in the base coordinates.
//!
//! Every series carries its truncation order `N`: all terms of ξ-degree `> N`
//! are unknown and never stored. Binary operations work at the smaller of the
//! two orders. A fibre derivative lowers the order by one, since the degree-`N`
//! part of `∂F/∂ξ` depends on the unknown degree-`N+1` part of `F`; this keeps
//! the stored order equal to the order up to which the value is guaranteed.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::index::MultiIndex;
use super::poly::{default_names, monomial_string, signed_term, BasePolynomial};
use super::scalar::Scalar;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PartialKind {
    Base,
    Fibre,
}

#[derive(Clone)]
pub struct FibreSeries {
    dim: usize,
    order: u32,
    terms: BTreeMap<MultiIndex, BasePolynomial>,
}

impl FibreSeries {
    /// Order label for series that are exact polynomials in ξ (nothing is
    /// truncated). Large enough that degree arithmetic never reaches it.
    pub const EXACT: u32 = 1 << 30;

    pub fn zero(dim: usize, order: u32) -> Self {
        Self { dim, order, terms: BTreeMap::new() }
    }

    /// A ξ-independent series.
    pub fn from_poly(p: BasePolynomial, order: u32) -> Self {
        let dim = p.dim();
        Self::monomial(MultiIndex::zero(dim), p, order)
    }

    pub fn constant(dim: usize, c: Scalar, order: u32) -> Self {
        Self::from_poly(BasePolynomial::constant(dim, c), order)
    }

    /// `coeff(x)·ξ^xi`, truncated.
    pub fn monomial(xi: MultiIndex, coeff: BasePolynomial, order: u32) -> Self {
        let dim = coeff.dim();
        let mut s = Self::zero(dim, order);
        if !coeff.is_zero() && xi.degree() <= order {
            s.terms.insert(xi, coeff);
        }
        s
    }

    /// The fibre coordinate `ξ_j` (0-based).
    pub fn xi(dim: usize, j: usize, order: u32) -> Self {
        Self::monomial(MultiIndex::unit(dim, j), BasePolynomial::one(dim), order)
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, BasePolynomial)>>(dim: usize, order: u32, it: I) -> Self {
        let mut s = Self::zero(dim, order);
        for (m, p) in it {
            s.add_term(m, &p);
        }
        s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// True for series created with [`FibreSeries::EXACT`] order (or derived
    /// from such series without truncation).
    pub fn is_exact(&self) -> bool {
        self.order >= Self::EXACT / 2
    }

    /// Number of stored ξ-monomials.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &BasePolynomial)> {
        self.terms.iter()
    }

    pub fn coeff(&self, xi: &MultiIndex) -> BasePolynomial {
        self.terms.get(xi).cloned().unwrap_or_else(|| BasePolynomial::zero(self.dim))
    }

    /// Lowest ξ-degree present, `None` when zero.
    pub fn valuation(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).min()
    }

    /// Highest ξ-degree present, `None` when zero.
    pub fn xi_degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// Maximal total degree in the base coordinates over all coefficients.
    pub fn x_degree(&self) -> Option<u32> {
        self.terms.values().filter_map(BasePolynomial::degree).max()
    }

    fn add_term(&mut self, m: MultiIndex, p: &BasePolynomial) {
        if p.is_zero() || m.degree() > self.order {
            return;
        }
        debug_assert_eq!(m.dim(), self.dim);
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(p.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                e.get_mut().add_assign_ref(p);
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let mut out = self.truncate(other.order);
        for (m, p) in &other.terms {
            out.add_term(m.clone(), p);
        }
        Ok(out)
    }

    /// Exact product truncated at `min(order(a), order(b))`.
    pub fn poly_mul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let order = self.order.min(other.order);
        let mut out = Self::zero(self.dim, order);
        for (ma, pa) in &self.terms {
            let da = ma.degree();
            if da > order {
                continue;
            }
            for (mb, pb) in &other.terms {
                if da + mb.degree() > order {
                    continue;
                }
                out.add_term(ma.add(mb), &(pa * pb));
            }
        }
        Ok(out)
    }

    /// Product at the order that is actually guaranteed: a term of degree `d`
    /// is known whenever every split `d = p + q` with nonzero known factors
    /// stays within both truncations, i.e. up to
    /// `min(order(a) + val(b), order(b) + val(a))`.
    pub fn mul_graded(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        let va = self.valuation().unwrap_or(self.order + 1);
        let vb = other.valuation().unwrap_or(other.order + 1);
        let order = (self.order + vb).min(other.order + va).min(Self::EXACT);
        let mut out = Self::zero(self.dim, order);
        for (ma, pa) in &self.terms {
            for (mb, pb) in &other.terms {
                out.add_term(ma.add(mb), &(pa * pb));
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim, self.order);
        }
        Self {
            dim: self.dim,
            order: self.order,
            terms: self.terms.iter().map(|(m, p)| (m.clone(), p.scale(c))).collect(),
        }
    }

    /// Multiplies by a ξ-independent polynomial; the order is unchanged.
    pub fn mul_poly(&self, p: &BasePolynomial) -> Self {
        assert_eq!(self.dim, p.dim(), "dimension mismatch");
        if p.is_zero() {
            return Self::zero(self.dim, self.order);
        }
        Self::from_terms(self.dim, self.order, self.terms.iter().map(|(m, c)| (m.clone(), c * p)))
    }

    /// Multiplies by `ξ_j`. Known terms up to degree `N` determine the product
    /// up to degree `N+1`, so the order grows by one.
    pub fn mul_xi(&self, j: usize) -> Self {
        let unit = MultiIndex::unit(self.dim, j);
        Self {
            dim: self.dim,
            order: (self.order + 1).min(Self::EXACT),
            terms: self.terms.iter().map(|(m, p)| (m.add(&unit), p.clone())).collect(),
        }
    }

    /// `∂/∂x^i`, order unchanged.
    pub fn partial_x(&self, i: usize) -> Self {
        Self::from_terms(self.dim, self.order, self.terms.iter().map(|(m, p)| (m.clone(), p.partial(i))))
    }

    /// `∂/∂ξ_i`; the result is known to order `N−1`, exact series stay exact.
    pub fn partial_xi(&self, i: usize) -> Self {
        let order = if self.is_exact() { self.order } else { self.order.saturating_sub(1) };
        let mut out = Self::zero(self.dim, order);
        for (m, p) in &self.terms {
            if let Some((e, lowered)) = m.lower(i) {
                out.add_term(lowered, &p.scale(&Scalar::from_int(e as i64)));
            }
        }
        out
    }

    /// Checked partial derivative with a 0-based index.
    pub fn partial(&self, kind: PartialKind, index: usize) -> Result<Self> {
        if index >= self.dim {
            return Err(Error::IndexOutOfRange { index, dim: self.dim });
        }
        Ok(match kind {
            PartialKind::Base => self.partial_x(index),
            PartialKind::Fibre => self.partial_xi(index),
        })
    }

    /// Homogeneous component of ξ-degree exactly `s` (same order).
    pub fn xi_component(&self, s: u32) -> Self {
        Self {
            dim: self.dim,
            order: self.order,
            terms: self.terms.iter().filter(|(m, _)| m.degree() == s).map(|(m, p)| (m.clone(), p.clone())).collect(),
        }
    }

    /// The restriction to the zero section, `F(x, 0)`.
    pub fn zero_section(&self) -> BasePolynomial {
        self.coeff(&MultiIndex::zero(self.dim))
    }

    /// Drops all terms above `order` (never raises the order).
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        Self {
            dim: self.dim,
            order,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.degree() <= order)
                .map(|(m, p)| (m.clone(), p.clone()))
                .collect(),
        }
    }

    /// Re-labels the truncation order. Raising it asserts that every term of
    /// degree between the old and new order is known to be zero; the recursive
    /// solvers use this for homogeneous components they computed exactly.
    pub fn with_order(&self, order: u32) -> Self {
        self.truncate(order).relabel(order)
    }

    fn relabel(mut self, order: u32) -> Self {
        self.order = order;
        self
    }

    /// Sum of `c·F` over a list, at the minimum order involved.
    pub fn sum<'a, I: IntoIterator<Item = &'a FibreSeries>>(dim: usize, order: u32, it: I) -> Self {
        let mut out = Self::zero(dim, order);
        for s in it {
            out = &out + s;
        }
        out
    }

    /// Substitutes `ξ_p ← φ_p(x, ζ)`. The components may have polynomial
    /// coefficients in `x` but no ξ-degree-0 part; the result is a series in
    /// `ζ` at `min(order(F), min order(φ))`.
    pub fn substitute(&self, phi: &[FibreSeries]) -> Result<Self> {
        if phi.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: phi.len() });
        }
        for (p, c) in phi.iter().enumerate() {
            self.check_dim(c)?;
            if !c.zero_section().is_zero() {
                return Err(Error::NonzeroConstantPart(p));
            }
        }
        let order = phi.iter().map(FibreSeries::order).fold(self.order, u32::min);
        let phi: Vec<FibreSeries> = phi.iter().map(|c| c.truncate(order)).collect();
        // powers[p][e] = φ_p^e
        let max_deg = self.xi_degree().unwrap_or(0).min(order) as usize;
        let mut powers: Vec<Vec<FibreSeries>> = Vec::with_capacity(self.dim);
        for c in &phi {
            let mut pw = vec![FibreSeries::constant(self.dim, Scalar::one(), order)];
            for e in 1..=max_deg {
                let next = pw[e - 1].poly_mul(c)?;
                pw.push(next);
            }
            powers.push(pw);
        }
        let mut out = Self::zero(self.dim, order);
        for (m, coeff) in &self.terms {
            if m.degree() > order {
                continue;
            }
            let mut term = FibreSeries::from_poly(coeff.clone(), order);
            for (p, &e) in m.exponents().iter().enumerate() {
                if e > 0 {
                    term = term.poly_mul(&powers[p][e as usize])?;
                }
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Negates the fibre variables: `F(x, −ξ)`.
    pub fn reflect(&self) -> Self {
        Self::from_terms(
            self.dim,
            self.order,
            self.terms.iter().map(|(m, p)| (m.clone(), if m.degree() % 2 == 1 { -p } else { p.clone() })),
        )
    }

    /// True iff every stored term contains at least one of the listed fibre
    /// variables, i.e. the series lies in the ideal they generate.
    pub fn in_ideal(&self, vars: &[usize]) -> bool {
        self.terms.keys().all(|m| vars.iter().any(|&v| m.get(v) > 0))
    }

    pub fn map_coeffs(&self, f: impl Fn(&BasePolynomial) -> BasePolynomial) -> Self {
        Self::from_terms(self.dim, self.order, self.terms.iter().map(|(m, p)| (m.clone(), f(p))))
    }

    /// Renders with base-coordinate names; fibre variables are printed as
    /// `xi_<name>`.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let xi_names: Vec<String> = names.iter().map(|n| format!("xi_{n}")).collect();
        let mut out = String::new();
        let mut first = true;
        for (m, p) in &self.terms {
            let xi_mono = monomial_string(m, &xi_names);
            if p.len() == 1 {
                let (xm, c) = p.terms().next().unwrap();
                let x_mono = monomial_string(xm, names);
                let mono = match (x_mono, &xi_mono) {
                    (None, None) => None,
                    (Some(a), None) => Some(a),
                    (None, Some(b)) => Some(b.clone()),
                    (Some(a), Some(b)) => Some(format!("{a}*{b}")),
                };
                let (neg, body) = signed_term(c, mono.as_deref());
                push_signed(&mut out, &mut first, neg, &body);
            } else {
                let body = match &xi_mono {
                    None => p.display_with(names),
                    Some(b) => format!("({})*{b}", p.display_with(names)),
                };
                push_signed(&mut out, &mut first, false, &body);
            }
        }
        out
    }
}

fn push_signed(out: &mut String, first: &mut bool, neg: bool, body: &str) {
    if *first {
        if neg {
            out.push('-');
        }
        *first = false;
    } else {
        out.push_str(if neg { " - " } else { " + " });
    }
    out.push_str(body);
}

impl PartialEq for FibreSeries {
    /// Equal iff identical after truncating both to the smaller order.
    fn eq(&self, other: &Self) -> bool {
        if self.dim != other.dim {
            return false;
        }
        let order = self.order.min(other.order);
        let a = self.terms.iter().filter(|(m, _)| m.degree() <= order);
        let b = other.terms.iter().filter(|(m, _)| m.degree() <= order);
        a.eq(b)
    }
}

impl fmt::Display for FibreSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let body = self.display_with(&default_names("x", self.dim));
        if self.is_exact() {
            write!(f, "{body}")
        } else {
            write!(f, "{body} + O(xi^{})", self.order + 1)
        }
    }
}

impl fmt::Debug for FibreSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FibreSeries({self})")
    }
}

impl<'a> Add<&'a FibreSeries> for &'a FibreSeries {
    type Output = FibreSeries;
    fn add(self, rhs: &FibreSeries) -> FibreSeries {
        self.try_add(rhs).expect("dimension mismatch")
    }
}

impl<'a> Sub<&'a FibreSeries> for &'a FibreSeries {
    type Output = FibreSeries;
    fn sub(self, rhs: &FibreSeries) -> FibreSeries {
        self.try_add(&-rhs).expect("dimension mismatch")
    }
}

impl<'a> Mul<&'a FibreSeries> for &'a FibreSeries {
    type Output = FibreSeries;
    fn mul(self, rhs: &FibreSeries) -> FibreSeries {
        self.poly_mul(rhs).expect("dimension mismatch")
    }
}

impl Neg for &FibreSeries {
    type Output = FibreSeries;
    fn neg(self) -> FibreSeries {
        self.scale(&Scalar::from_int(-1))
    }
}

impl Neg for FibreSeries {
    type Output = FibreSeries;
    fn neg(self) -> FibreSeries {
        -(&self)
    }
}

macro_rules! forward_owned_series {
    ($tr:ident, $m:ident) => {
        impl $tr<FibreSeries> for FibreSeries {
            type Output = FibreSeries;
            fn $m(self, rhs: FibreSeries) -> FibreSeries {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a FibreSeries> for FibreSeries {
            type Output = FibreSeries;
            fn $m(self, rhs: &FibreSeries) -> FibreSeries {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned_series!(Add, add);
forward_owned_series!(Sub, sub);
forward_owned_series!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;

    fn xi(j: usize, n: u32) -> FibreSeries {
        FibreSeries::xi(2, j, n)
    }

    fn x(i: usize, n: u32) -> FibreSeries {
        FibreSeries::from_poly(BasePolynomial::var(2, i), n)
    }

    #[test]
    fn monomial_product() {
        let p = &xi(0, 3) * &xi(1, 3);
        assert_eq!(p.terms().count(), 1);
        assert_eq!(p.coeff(&MultiIndex::from_slice(&[1, 1])), BasePolynomial::one(2));
    }

    #[test]
    fn truncation_drops_high_terms() {
        let a = &x(0, 1) + &xi(0, 1);
        let sq = &a * &a;
        let expected = &(&x(0, 1) * &x(0, 1)) + &(&x(0, 1) * &xi(0, 1)).scale(&Scalar::from_int(2));
        assert_eq!(sq, expected);
        assert_eq!(sq.xi_degree(), Some(1));
    }

    #[test]
    fn rational_coefficients() {
        let a = xi(0, 2).scale(&Scalar::ratio(1, 2));
        let b = xi(0, 2).scale(&Scalar::ratio(1, 3));
        let p = &a * &b;
        assert_eq!(p.coeff(&MultiIndex::from_slice(&[2, 0])), BasePolynomial::constant(2, Scalar::ratio(1, 6)));
    }

    #[test]
    fn mixed_orders_truncate_to_smaller() {
        let a = &xi(0, 4) * &xi(0, 4);
        let b = xi(1, 1);
        let s = &a + &b;
        assert_eq!(s.order(), 1);
        assert!(s.xi_component(2).is_zero());
    }

    #[test]
    fn partials() {
        let p = &xi(0, 3) * &xi(1, 3);
        assert_eq!(p.partial(PartialKind::Fibre, 0).unwrap(), xi(1, 2));
        let q = &(&x(0, 2) * &x(0, 2)) * &xi(1, 2);
        assert_eq!(q.partial(PartialKind::Base, 0).unwrap(), (&x(0, 2) * &xi(1, 2)).scale(&Scalar::from_int(2)));
        assert!(x(0, 2).partial(PartialKind::Fibre, 1).unwrap().is_zero());
        assert!(matches!(x(0, 2).partial(PartialKind::Base, 2), Err(Error::IndexOutOfRange { .. })));
        assert_eq!(p.partial_xi(0).order(), 2);
    }

    #[test]
    fn components() {
        let f = &(&x(0, 3) + &xi(0, 3)) + &(&xi(0, 3) * &xi(1, 3));
        assert_eq!(f.xi_component(1), xi(0, 3));
        assert!(f.xi_component(3).is_zero());
    }

    #[test]
    fn substitution_examples() {
        let n = 4;
        // ξ1 ← ζ1 + ζ1ζ2
        let phi = vec![&xi(0, n) + &(&xi(0, n) * &xi(1, n)), xi(1, n)];
        assert_eq!(xi(0, n).substitute(&phi).unwrap(), phi[0]);
        // x1 − ξ2 under ξ ← −ζ/2
        let half = Scalar::ratio(-1, 2);
        let phi = vec![xi(0, n).scale(&half), xi(1, n).scale(&half)];
        let f = &x(0, n) - &xi(1, n);
        let expected = &x(0, n) + &xi(1, n).scale(&Scalar::ratio(1, 2));
        assert_eq!(f.substitute(&phi).unwrap(), expected);
        // independent of ξ
        assert_eq!(x(1, n).substitute(&phi).unwrap(), x(1, n));
        // nonzero constant part rejected
        let bad = vec![&xi(0, n) + &x(0, n), xi(1, n)];
        assert!(matches!(f.substitute(&bad), Err(Error::NonzeroConstantPart(0))));
    }

    #[test]
    fn display() {
        let f = &(&x(0, 3) + &xi(1, 3).scale(&Scalar::ratio(1, 2))) - &(&x(1, 3) * &xi(0, 3));
        let names = vec!["x1".to_string(), "x2".to_string()];
        assert_eq!(f.display_with(&names), "x1 - x2*xi_x1 + 1/2*xi_x2");
    }
}
