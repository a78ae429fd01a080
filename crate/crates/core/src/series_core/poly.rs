//! Sparse multivariate polynomials over the Gaussian rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use super::index::MultiIndex;
use super::scalar::Scalar;

/// A polynomial in the base coordinates `x^1..x^n`.
///
/// Zero coefficients are never stored, so the empty map is the zero
/// polynomial and derived equality is numeric equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BasePolynomial {
    dim: usize,
    terms: BTreeMap<MultiIndex, Scalar>,
}

impl BasePolynomial {
    pub fn zero(dim: usize) -> Self {
        Self { dim, terms: BTreeMap::new() }
    }

    pub fn constant(dim: usize, c: Scalar) -> Self {
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(MultiIndex::zero(dim), c);
        }
        p
    }

    pub fn one(dim: usize) -> Self {
        Self::constant(dim, Scalar::one())
    }

    /// The coordinate function `x^i` (0-based `i`).
    pub fn var(dim: usize, i: usize) -> Self {
        let mut p = Self::zero(dim);
        p.terms.insert(MultiIndex::unit(dim, i), Scalar::one());
        p
    }

    pub fn monomial(exps: MultiIndex, c: Scalar) -> Self {
        let dim = exps.dim();
        let mut p = Self::zero(dim);
        if !c.is_zero() {
            p.terms.insert(exps, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (MultiIndex, Scalar)>>(dim: usize, it: I) -> Self {
        let mut p = Self::zero(dim);
        for (m, c) in it {
            debug_assert_eq!(m.dim(), dim);
            p.add_term(m, &c);
        }
        p
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms in canonical (graded-lex) order.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &Scalar)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &MultiIndex) -> Scalar {
        self.terms.get(m).cloned().unwrap_or_else(Scalar::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(MultiIndex::degree).max()
    }

    /// The value if this polynomial is a constant (including zero).
    pub fn as_constant(&self) -> Option<Scalar> {
        match self.terms.len() {
            0 => Some(Scalar::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_zero().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub(crate) fn add_term(&mut self, m: MultiIndex, c: &Scalar) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn add_assign_ref(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), c);
        }
    }

    pub fn sub_assign_ref(&mut self, other: &Self) {
        for (m, c) in &other.terms {
            self.add_term(m.clone(), &-c);
        }
    }

    pub fn scale(&self, c: &Scalar) -> Self {
        if c.is_zero() {
            return Self::zero(self.dim);
        }
        Self { dim: self.dim, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// `∂/∂x^i` (0-based `i`).
    pub fn partial(&self, i: usize) -> Self {
        let mut out = Self::zero(self.dim);
        for (m, c) in &self.terms {
            if let Some((e, lowered)) = m.lower(i) {
                out.add_term(lowered, &(c * &Scalar::from_int(e as i64)));
            }
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.dim);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Applies `f` to every coefficient, dropping those that become zero.
    pub fn map_coeffs(&self, f: impl Fn(&Scalar) -> Scalar) -> Self {
        Self::from_terms(self.dim, self.terms.iter().map(|(m, c)| (m.clone(), f(c))))
    }

    /// Renders with the given coordinate names.
    pub fn display_with(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (idx, (m, c)) in self.terms.iter().enumerate() {
            let mono = monomial_string(m, names);
            let (neg, body) = signed_term(c, mono.as_deref());
            if idx == 0 {
                if neg {
                    out.push('-');
                }
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            out.push_str(&body);
        }
        out
    }
}

pub(crate) fn default_names(prefix: &str, dim: usize) -> Vec<String> {
    (1..=dim).map(|i| format!("{prefix}{i}")).collect()
}

/// `x1^2*x2`, or `None` for the unit monomial.
pub(crate) fn monomial_string(m: &MultiIndex, names: &[String]) -> Option<String> {
    let parts: Vec<String> = m
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| if e == 1 { names[i].clone() } else { format!("{}^{}", names[i], e) })
        .collect();
    (!parts.is_empty()).then(|| parts.join("*"))
}

/// Splits a coefficient into a sign and a printable body joined with the
/// monomial (if any).
pub(crate) fn signed_term(c: &Scalar, mono: Option<&str>) -> (bool, String) {
    use num_traits::{Signed, Zero};
    let neg = (c.im().is_zero() && c.re().is_negative()) || (c.re().is_zero() && c.im().is_negative());
    let mag = if neg { -c } else { c.clone() };
    let body = match mono {
        None => mag.to_string(),
        Some(mono) if mag.is_one() => mono.to_string(),
        Some(mono) => format!("{mag}*{mono}"),
    };
    (neg, body)
}

impl fmt::Display for BasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.display_with(&default_names("x", self.dim)))
    }
}

impl fmt::Debug for BasePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BasePolynomial({self})")
    }
}

impl<'a> Add<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn add(self, rhs: &BasePolynomial) -> BasePolynomial {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        out.add_assign_ref(rhs);
        out
    }
}

impl<'a> Sub<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn sub(self, rhs: &BasePolynomial) -> BasePolynomial {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = self.clone();
        out.sub_assign_ref(rhs);
        out
    }
}

impl<'a> Mul<&'a BasePolynomial> for &'a BasePolynomial {
    type Output = BasePolynomial;
    fn mul(self, rhs: &BasePolynomial) -> BasePolynomial {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let mut out = BasePolynomial::zero(self.dim);
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        if let Some(c) = self.as_constant() {
            return rhs.scale(&c);
        }
        if let Some(c) = rhs.as_constant() {
            return self.scale(&c);
        }
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.add(mb), &(ca * cb));
            }
        }
        out
    }
}

impl Neg for &BasePolynomial {
    type Output = BasePolynomial;
    fn neg(self) -> BasePolynomial {
        self.scale(&Scalar::from_int(-1))
    }
}

macro_rules! forward_owned_poly {
    ($tr:ident, $m:ident) => {
        impl $tr<BasePolynomial> for BasePolynomial {
            type Output = BasePolynomial;
            fn $m(self, rhs: BasePolynomial) -> BasePolynomial {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a BasePolynomial> for BasePolynomial {
            type Output = BasePolynomial;
            fn $m(self, rhs: &BasePolynomial) -> BasePolynomial {
                (&self).$m(rhs)
            }
        }
    };
}
forward_owned_poly!(Add, add);
forward_owned_poly!(Sub, sub);
forward_owned_poly!(Mul, mul);

impl Neg for BasePolynomial {
    type Output = BasePolynomial;
    fn neg(self) -> BasePolynomial {
        -(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: usize) -> BasePolynomial {
        BasePolynomial::var(2, i)
    }

    #[test]
    fn product_and_derivative() {
        let p = &(&x(0) + &BasePolynomial::one(2)) * &x(1);
        assert_eq!(p.to_string(), "x2 + x1*x2");
        let d = p.partial(0);
        assert_eq!(d, x(1));
        let sq = (&x(0) * &x(0)).scale(&Scalar::from_int(3));
        assert_eq!(sq.partial(0), x(0).scale(&Scalar::from_int(6)));
        assert!(sq.partial(1).is_zero());
    }

    #[test]
    fn cancellation_leaves_no_zero_terms() {
        let p = &x(0) - &x(0);
        assert!(p.is_zero());
        assert_eq!(p.len(), 0);
        assert_eq!(p.as_constant(), Some(Scalar::zero()));
    }

    #[test]
    fn display_signs() {
        let p = &(&x(0).scale(&Scalar::ratio(-1, 2)) + &BasePolynomial::constant(2, Scalar::i().neg()))
            + &x(1).scale(&Scalar::i());
        assert_eq!(p.to_string(), "-I - 1/2*x1 + I*x2");
    }
}
