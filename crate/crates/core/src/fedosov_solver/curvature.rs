use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::nonlinear_connections::{exact, SeriesTensor2, SeriesTensor3};
use crate::poisson_geometry::{conn_analyze, nonzero_entries3, Connection};
use crate::series_core::{FibreSeries, Scalar};

/// `Σ_j Γ^{ij}_k ξ_j`, indexed `[i][k]`.
pub(crate) fn gamma_xi(c: &Connection) -> SeriesTensor2 {
    let n = c.dim();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|k| {
                    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                    for j in 0..n {
                        if !c.get(i, j, k).is_zero() {
                            acc = &acc + &FibreSeries::xi(n, j, FibreSeries::EXACT).mul_poly(c.get(i, j, k));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

/// `R̄^{ij}_k = π^{is}∂_sΓ^{jp}_k ξ_p − π^{js}∂_sΓ^{ip}_k ξ_p − ∂_sπ^{ij} Γ^{sp}_k ξ_p
///  − Γ^{iq}_k Γ^{jp}_q ξ_p + Γ^{jq}_k Γ^{ip}_q ξ_p`, homogeneous of ξ-degree 1.
pub fn bar_curvature(c: &Connection) -> SeriesTensor3 {
    let n = c.dim();
    let pi = c.poisson();
    (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                            for p in 0..n {
                                let mut coeff =
                                    &pi.contract_grad(i, c.get(j, p, k)) - &pi.contract_grad(j, c.get(i, p, k));
                                for s in 0..n {
                                    coeff.sub_assign_ref(&(pi.d(s, i, j) * c.get(s, p, k)));
                                    coeff.sub_assign_ref(&(c.get(i, s, k) * c.get(j, p, s)));
                                    coeff.add_assign_ref(&(c.get(j, s, k) * c.get(i, p, s)));
                                }
                                if !coeff.is_zero() {
                                    acc = &acc + &FibreSeries::xi(n, p, FibreSeries::EXACT).mul_poly(&coeff);
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Q̄^{ij} = ½ ξ_t π^{tk} R̄^{ij}_k` from a precomputed `R̄`.
pub(crate) fn bar_q_from(c: &Connection, rbar: &SeriesTensor3) -> SeriesTensor2 {
    let n = c.dim();
    let pi = c.poisson();
    let half = Scalar::ratio(1, 2);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                    for t in 0..n {
                        for k in 0..n {
                            if !pi.get(t, k).is_zero() && !rbar[i][j][k].is_zero() {
                                acc = &acc + &rbar[i][j][k].mul_xi(t).mul_poly(pi.get(t, k));
                            }
                        }
                    }
                    acc.scale(&half)
                })
                .collect()
        })
        .collect()
}

/// `π^{tk} R̄^{ij}_k − ∂Q̄^{ij}/∂ξ_t`, indexed `[i][j][t]`.
pub(crate) fn bar_q_hamiltonian_residual(c: &Connection, rbar: &SeriesTensor3, qbar: &SeriesTensor2) -> SeriesTensor3 {
    let n = c.dim();
    let pi = c.poisson();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|t| {
                            let mut acc = -qbar[i][j].partial_xi(t);
                            for k in 0..n {
                                acc = &acc + &rbar[i][j][k].mul_poly(pi.get(t, k));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

/// `Q̄^{ij}`; requires an associated pair with torsion-free dagger and checks
/// the Hamiltonian property `π^{tk} R̄^{ij}_k = ∂Q̄^{ij}/∂ξ_t`.
pub fn bar_q(c: &Connection, dagger: &Connection) -> Result<SeriesTensor2> {
    let rep = conn_analyze(c, Some(dagger))?;
    if !rep.associated || !rep.dagger_torsion_free {
        return Err(Error::Precondition(format!(
            "need an associated pair with torsion-free dagger ({} association and {} dagger torsion residuals)",
            nonzero_entries3(&rep.association_residual).len(),
            nonzero_entries3(&rep.dagger_torsion).len()
        )));
    }
    let rbar = bar_curvature(c);
    let q = bar_q_from(c, &rbar);
    let res = bar_q_hamiltonian_residual(c, &rbar, &q);
    if res.iter().flatten().flatten().any(|r| !r.is_zero()) {
        return Err(Error::Invariant("Q̄ is not a Hamiltonian function of π^{tk} R̄^{ij}_k".into()));
    }
    Ok(q)
}

/// The curvature oracle: `R̄^{ij}_k = −ξ_p (R^∇(dx^i, dx^j) dx^p)_k` with the
/// linear curvature evaluated by nesting the connection.
pub fn bar_curvature_from_linear(c: &Connection) -> SeriesTensor3 {
    let n = c.dim();
    let r = crate::poisson_geometry::curvature(c);
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                            for (p, rp) in r[i][j].iter().enumerate() {
                                acc = &acc - &exact(&rp[k]).mul_xi(p);
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}
