use std::cmp::Ordering;

use smallvec::SmallVec;

/// Exponent vector of a monomial.
///
/// Ordered graded-lexicographically: lower total degree first, then ties are
/// broken so that `x1` sorts before `x2` (i.e. a larger leading exponent is
/// "smaller" in the canonical sequence).
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiIndex(SmallVec<[u32; 6]>);

impl MultiIndex {
    pub fn zero(dim: usize) -> Self {
        Self(SmallVec::from_elem(0, dim))
    }

    pub fn unit(dim: usize, i: usize) -> Self {
        let mut m = Self::zero(dim);
        m.0[i] = 1;
        m
    }

    pub fn from_slice(exps: &[u32]) -> Self {
        Self(SmallVec::from_slice(exps))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> u32 {
        self.0[i]
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(self.0.iter().zip(other.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// Lowers the exponent of variable `i` by one, returning the original
    /// exponent as the derivative factor, or `None` if it is zero.
    pub fn lower(&self, i: usize) -> Option<(u32, Self)> {
        let e = self.0[i];
        if e == 0 {
            return None;
        }
        let mut out = self.clone();
        out.0[i] -= 1;
        Some((e, out))
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// All multi-indices of length `dim` and total degree exactly `degree`, in
/// canonical order.
pub fn monomials_of_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    fn rec(dim: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
        if cur.len() + 1 == dim {
            cur.push(left);
            out.push(MultiIndex::from_slice(cur));
            cur.pop();
            return;
        }
        for e in (0..=left).rev() {
            cur.push(e);
            rec(dim, left - e, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if dim == 0 {
        if degree == 0 {
            out.push(MultiIndex::zero(0));
        }
        return out;
    }
    rec(dim, degree, &mut Vec::with_capacity(dim), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_lex_order() {
        let mut v = [
            MultiIndex::from_slice(&[0, 2]),
            MultiIndex::from_slice(&[1, 0]),
            MultiIndex::from_slice(&[0, 0]),
            MultiIndex::from_slice(&[1, 1]),
            MultiIndex::from_slice(&[0, 1]),
            MultiIndex::from_slice(&[2, 0]),
        ];
        v.sort();
        let got: Vec<_> = v.iter().map(|m| m.exponents().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![2, 0], vec![1, 1], vec![0, 2]]);
    }

    #[test]
    fn degree_enumeration_is_sorted() {
        let ms = monomials_of_degree(3, 2);
        assert_eq!(ms.len(), 6);
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
    }
}
