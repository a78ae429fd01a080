//! Direct elimination for `π^{ik} c_k = r^i`, one fibre monomial at a time.

use std::collections::{BTreeMap, BTreeSet};

use crate::poisson_geometry::PoissonStructure;
use crate::series_core::linsolve::{LinearSolution, LinearSystem};
use crate::series_core::{monomials_of_degree, BasePolynomial, FibreSeries, MultiIndex, Scalar};

/// Solves `Σ_k π^{ik} c_k = r^i` for exact series `c_k`. The coefficient of
/// each fibre monomial is searched among polynomials of growing degree, up to
/// two more than the right-hand side; free unknowns are set to zero.
pub(crate) fn solve_pi_system(pi: &PoissonStructure, rhs: &[FibreSeries]) -> Option<Vec<FibreSeries>> {
    let n = pi.dim();
    let pi_deg = pi.entries().iter().flatten().filter_map(BasePolynomial::degree).max().unwrap_or(0);
    let xi_monos: BTreeSet<MultiIndex> = rhs.iter().flat_map(|r| r.terms().map(|(m, _)| m.clone())).collect();
    let mut out = vec![FibreSeries::zero(n, FibreSeries::EXACT); n];
    for m in xi_monos {
        let r: Vec<BasePolynomial> = rhs.iter().map(|s| s.coeff(&m)).collect();
        let r_deg = r.iter().filter_map(BasePolynomial::degree).max().unwrap_or(0);
        let lo = r_deg.saturating_sub(pi_deg);
        let sol = (lo..=r_deg + 2).find_map(|d| solve_coefficient(pi, &r, d))?;
        for (k, c) in sol.into_iter().enumerate() {
            if !c.is_zero() {
                out[k] = &out[k] + &FibreSeries::monomial(m.clone(), c, FibreSeries::EXACT);
            }
        }
    }
    Some(out)
}

fn solve_coefficient(pi: &PoissonStructure, r: &[BasePolynomial], degree: u32) -> Option<Vec<BasePolynomial>> {
    let n = pi.dim();
    let basis: Vec<MultiIndex> = (0..=degree).flat_map(|d| monomials_of_degree(n, d)).collect();
    let nb = basis.len();
    // rows keyed by (equation i, x-monomial)
    let mut rows: BTreeMap<(usize, MultiIndex), Vec<(usize, Scalar)>> = BTreeMap::new();
    for i in 0..n {
        for k in 0..n {
            for (b, beta) in basis.iter().enumerate() {
                for (gamma, c) in pi.get(i, k).terms() {
                    rows.entry((i, gamma.add(beta))).or_default().push((k * nb + b, c.clone()));
                }
            }
        }
        for (gamma, _) in r[i].terms() {
            rows.entry((i, gamma.clone())).or_default();
        }
    }
    let mut sys = LinearSystem::new(n * nb);
    for ((i, gamma), entries) in rows {
        sys.push_row(entries, r[i].coeff(&gamma));
    }
    match sys.solve_fast() {
        LinearSolution::Solved { values, .. } => Some(
            (0..n)
                .map(|k| {
                    BasePolynomial::from_terms(
                        n,
                        basis.iter().enumerate().map(|(b, beta)| (beta.clone(), values[k * nb + b].clone())),
                    )
                })
                .collect(),
        ),
        LinearSolution::Inconsistent(_) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_degenerate_linear_poisson() {
        // π^{12} = x2
        let x2 = BasePolynomial::var(2, 1);
        let pi =
            PoissonStructure::new(vec![vec![BasePolynomial::zero(2), x2.clone()], vec![-&x2, BasePolynomial::zero(2)]])
                .unwrap();
        let xi = |j| FibreSeries::xi(2, j, FibreSeries::EXACT);
        let target = [xi(0).mul_poly(&(&x2 * &x2)), FibreSeries::zero(2, FibreSeries::EXACT)];
        let c = solve_pi_system(&pi, &target).unwrap();
        assert_eq!(c[1], xi(0).mul_poly(&x2));
        assert!(c[0].is_zero());
        // x1·ξ1 is not in the image of multiplication by x2
        let bad = [xi(0).mul_poly(&BasePolynomial::var(2, 0)), FibreSeries::zero(2, FibreSeries::EXACT)];
        assert!(solve_pi_system(&pi, &bad).is_none());
    }
}
