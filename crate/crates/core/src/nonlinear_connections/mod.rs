//! Nonlinear contravariant connections `D^{dx^i} = π^{is}∂_s − A^i_s ∂/∂ξ_s`
//! on the formal neighbourhood of the zero section, and the Poisson algebra
//! of Hamiltonian functions of the fibrewise form `½π^{ij} dξ_i∧dξ_j`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::poisson_geometry::{Connection, PoissonStructure};
use crate::series_core::linsolve::invert_matrix;
use crate::series_core::{BasePolynomial, FibreSeries, Scalar, SeriesMatrix};

pub type SeriesTensor2 = Vec<Vec<FibreSeries>>;
pub type SeriesTensor3 = Vec<Vec<Vec<FibreSeries>>>;

pub(crate) fn gm(a: &FibreSeries, b: &FibreSeries) -> FibreSeries {
    a.mul_graded(b).expect("dimension mismatch")
}

pub(crate) fn exact(p: &BasePolynomial) -> FibreSeries {
    FibreSeries::from_poly(p.clone(), FibreSeries::EXACT)
}

/// `Σ_s π^{is} ∂_s F`.
pub(crate) fn pi_grad(pi: &PoissonStructure, i: usize, f: &FibreSeries) -> FibreSeries {
    let mut acc = FibreSeries::zero(pi.dim(), f.order());
    for s in 0..pi.dim() {
        if !pi.get(i, s).is_zero() {
            acc = &acc + &f.partial_x(s).mul_poly(pi.get(i, s));
        }
    }
    acc
}

pub fn tensor3_is_zero(t: &SeriesTensor3) -> bool {
    t.iter().flatten().flatten().all(FibreSeries::is_zero)
}

pub fn tensor2_is_zero(t: &SeriesTensor2) -> bool {
    t.iter().flatten().all(FibreSeries::is_zero)
}

/// Smallest truncation order among the entries (exact entries excluded);
/// `None` when everything is exact.
pub fn guaranteed_order<'a, I: IntoIterator<Item = &'a FibreSeries>>(it: I) -> Option<u32> {
    it.into_iter().filter(|s| !s.is_exact()).map(FibreSeries::order).min()
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearConnection {
    pi: Arc<PoissonStructure>,
    // a[i][s] = A^i_s
    a: SeriesTensor2,
}

impl NonlinearConnection {
    pub fn new(pi: Arc<PoissonStructure>, a: SeriesTensor2) -> Result<Self> {
        let n = pi.dim();
        if a.len() != n || a.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: a.len() });
        }
        if let Some(s) = a.iter().flatten().find(|s| s.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: s.dim() });
        }
        Ok(Self { pi, a })
    }

    pub fn dim(&self) -> usize {
        self.pi.dim()
    }

    pub fn poisson(&self) -> &PoissonStructure {
        &self.pi
    }

    /// `A^i_s`.
    pub fn get(&self, i: usize, s: usize) -> &FibreSeries {
        &self.a[i][s]
    }

    pub fn matrix(&self) -> &SeriesTensor2 {
        &self.a
    }

    /// The ξ-degree-0 part of `A` if it is a constant matrix.
    pub fn psi(&self) -> Option<Vec<Vec<Scalar>>> {
        self.a.iter().map(|r| r.iter().map(|s| s.zero_section().as_constant()).collect::<Option<Vec<_>>>()).collect()
    }

    pub fn is_invertible(&self) -> bool {
        self.psi().is_some_and(|m| invert_matrix(&m).is_some())
    }

    /// Formal inverse of `(A^i_j)` as a series matrix.
    pub fn inverse_matrix(&self) -> Result<SeriesMatrix> {
        SeriesMatrix::new(self.a.clone())?.inverse()
    }
}

/// `A^i_s = −Γ^{ij}_s ξ_j`.
pub fn induce_bar(c: &Connection) -> NonlinearConnection {
    let n = c.dim();
    let a = (0..n)
        .map(|i| {
            (0..n)
                .map(|s| {
                    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                    for j in 0..n {
                        if !c.get(i, j, s).is_zero() {
                            acc = &acc - &FibreSeries::xi(n, j, FibreSeries::EXACT).mul_poly(c.get(i, j, s));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect();
    NonlinearConnection { pi: c.poisson_arc().clone(), a }
}

/// `D^{dx^i} F = π^{is} ∂_s F − A^i_s ∂F/∂ξ_s`, one series per `i`.
pub fn nc_apply(d: &NonlinearConnection, f: &FibreSeries) -> Vec<FibreSeries> {
    (0..d.dim()).map(|i| nc_apply_one(d, i, f)).collect()
}

pub fn nc_apply_one(d: &NonlinearConnection, i: usize, f: &FibreSeries) -> FibreSeries {
    let mut acc = pi_grad(&d.pi, i, f);
    for s in 0..d.dim() {
        if !d.a[i][s].is_zero() {
            acc = &acc - &gm(&d.a[i][s], &f.partial_xi(s));
        }
    }
    acc
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearReport {
    /// `[i][j][s]`: `∂A^i_s/∂ξ_j − ∂A^j_s/∂ξ_i − ∂_s π^{ij}`.
    pub torsion: SeriesTensor3,
    pub torsion_free: bool,
    /// `[m][i][j]`: `π^{ms}∂_sπ^{ij} − ∂A^m_s/∂ξ_i π^{sj} − ∂A^m_s/∂ξ_j π^{is}`.
    pub poisson_residual: SeriesTensor3,
    pub poisson: bool,
    /// `[i][j]`: `π^{is} A^j_s − π^{js} K^i_s`.
    pub association_residual: SeriesTensor2,
    pub associated: bool,
    pub invertible: bool,
}

pub fn nc_analyze(d: &NonlinearConnection, dagger: Option<&NonlinearConnection>) -> Result<NonlinearReport> {
    let dagger = dagger.unwrap_or(d);
    if dagger.pi != d.pi {
        return Err(Error::Precondition("connections are over different Poisson structures".into()));
    }
    let n = d.dim();
    let pi = d.poisson();
    // da[i][j][s] = ∂A^i_s/∂ξ_j
    let da: SeriesTensor3 =
        (0..n).map(|i| (0..n).map(|j| (0..n).map(|s| d.a[i][s].partial_xi(j)).collect()).collect()).collect();
    let torsion: SeriesTensor3 = (0..n)
        .into_par_iter()
        .map(|i| {
            (0..n).map(|j| (0..n).map(|s| &(&da[i][j][s] - &da[j][i][s]) - &exact(pi.d(s, i, j))).collect()).collect()
        })
        .collect();
    let poisson_residual: SeriesTensor3 = (0..n)
        .into_par_iter()
        .map(|m| {
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| {
                            let mut acc = exact(&pi.contract_grad(m, pi.get(i, j)));
                            for s in 0..n {
                                acc = &acc - &da[m][i][s].mul_poly(pi.get(s, j));
                                acc = &acc - &da[m][j][s].mul_poly(pi.get(i, s));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let association_residual: SeriesTensor2 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                    for s in 0..n {
                        acc = &acc + &d.a[j][s].mul_poly(pi.get(i, s));
                        acc = &acc - &dagger.a[i][s].mul_poly(pi.get(j, s));
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Ok(NonlinearReport {
        torsion_free: tensor3_is_zero(&torsion),
        torsion,
        poisson: tensor3_is_zero(&poisson_residual),
        poisson_residual,
        associated: tensor2_is_zero(&association_residual),
        association_residual,
        invertible: d.is_invertible(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearCurvature {
    /// `R^{ij}_k = −D^{dx^i}(A^j_k) + D^{dx^j}(A^i_k) + ∂_sπ^{ij} A^s_k`.
    pub r: SeriesTensor3,
    /// `[k][l][s]`: `R^{kl}_q π^{qs}`.
    pub flatness_residual: SeriesTensor3,
}

pub fn nc_curvature(d: &NonlinearConnection) -> NonlinearCurvature {
    let n = d.dim();
    let pi = d.poisson();
    // da[i][j][k] = D^{dx^i}(A^j_k)
    let da: SeriesTensor3 = (0..n)
        .into_par_iter()
        .map(|i| (0..n).map(|j| (0..n).map(|k| nc_apply_one(d, i, &d.a[j][k])).collect()).collect())
        .collect();
    let r: SeriesTensor3 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    (0..n)
                        .map(|k| {
                            let mut acc = &da[j][i][k] - &da[i][j][k];
                            for s in 0..n {
                                if !pi.d(s, i, j).is_zero() {
                                    acc = &acc + &d.a[s][k].mul_poly(pi.d(s, i, j));
                                }
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let flatness_residual = (0..n)
        .map(|k| {
            (0..n)
                .map(|l| {
                    (0..n)
                        .map(|s| {
                            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                            for q in 0..n {
                                acc = &acc + &r[k][l][q].mul_poly(pi.get(q, s));
                            }
                            acc
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    NonlinearCurvature { r, flatness_residual }
}

/// A function `F` with a potential `a` such that `∂F/∂ξ_i = π^{ij} a_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct HamiltonianElement {
    pub value: FibreSeries,
    pub potential: Vec<FibreSeries>,
}

impl HamiltonianElement {
    /// Checks the defining relation before wrapping.
    pub fn new(pi: &PoissonStructure, value: FibreSeries, potential: Vec<FibreSeries>) -> Result<Self> {
        let el = Self { value, potential };
        if el.potential.len() != pi.dim() {
            return Err(Error::DimensionMismatch { expected: pi.dim(), got: el.potential.len() });
        }
        let res = el.residual(pi);
        if let Some(i) = res.iter().position(|r| !r.is_zero()) {
            return Err(Error::Invariant(format!("potential does not match ∂F/∂ξ_{}", i + 1)));
        }
        Ok(el)
    }

    /// Wraps without checking; used where the relation holds by construction
    /// and is verified separately.
    pub fn new_unchecked(value: FibreSeries, potential: Vec<FibreSeries>) -> Self {
        Self { value, potential }
    }

    /// `∂F/∂ξ_i − π^{ij} a_j`, one series per `i`.
    pub fn residual(&self, pi: &PoissonStructure) -> Vec<FibreSeries> {
        let n = pi.dim();
        (0..n)
            .map(|i| {
                let mut acc = self.value.partial_xi(i);
                for j in 0..n {
                    if !pi.get(i, j).is_zero() {
                        acc = &acc - &self.potential[j].mul_poly(pi.get(i, j));
                    }
                }
                acc
            })
            .collect()
    }

    pub fn is_valid(&self, pi: &PoissonStructure) -> bool {
        self.residual(pi).iter().all(FibreSeries::is_zero)
    }

    pub fn truncate(&self, order: u32) -> Self {
        Self {
            value: self.value.truncate(order),
            potential: self.potential.iter().map(|a| a.truncate(order)).collect(),
        }
    }

    /// A ξ-independent constant-in-fibre element `f(x)` with zero potential.
    pub fn base(f: &BasePolynomial) -> Self {
        let n = f.dim();
        Self { value: exact(f), potential: vec![FibreSeries::zero(n, FibreSeries::EXACT); n] }
    }
}

/// `{F, G}_Ω = π^{ij} a_i b_j`, asserted equal to `a_i ∂G/∂ξ_i` and
/// `−b_i ∂F/∂ξ_i`.
pub fn omega_bracket(pi: &PoissonStructure, f: &HamiltonianElement, g: &HamiltonianElement) -> Result<FibreSeries> {
    let n = pi.dim();
    for (name, el) in [("first", f), ("second", g)] {
        if !el.is_valid(pi) {
            return Err(Error::Invariant(format!("{name} argument is not a Hamiltonian element")));
        }
    }
    let mut main = FibreSeries::zero(n, FibreSeries::EXACT);
    let mut via_g = FibreSeries::zero(n, FibreSeries::EXACT);
    let mut via_f = FibreSeries::zero(n, FibreSeries::EXACT);
    for i in 0..n {
        via_g = &via_g + &gm(&f.potential[i], &g.value.partial_xi(i));
        via_f = &via_f - &gm(&g.potential[i], &f.value.partial_xi(i));
        for j in 0..n {
            if !pi.get(i, j).is_zero() {
                main = &main + &gm(&f.potential[i], &g.potential[j]).mul_poly(pi.get(i, j));
            }
        }
    }
    if !(&main - &via_g).is_zero() || !(&main - &via_f).is_zero() {
        return Err(Error::Invariant("the three evaluations of the Ω-bracket disagree".into()));
    }
    Ok(main)
}

/// `{F, G}_Ω` together with the potential `c_j = a_i ∂b_j/∂ξ_i − b_i ∂a_j/∂ξ_i`.
pub fn omega_bracket_element(
    pi: &PoissonStructure,
    f: &HamiltonianElement,
    g: &HamiltonianElement,
) -> Result<HamiltonianElement> {
    let value = omega_bracket(pi, f, g)?;
    let n = pi.dim();
    let potential = (0..n)
        .map(|j| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for i in 0..n {
                acc = &acc + &gm(&f.potential[i], &g.potential[j].partial_xi(i));
                acc = &acc - &gm(&g.potential[i], &f.potential[j].partial_xi(i));
            }
            acc
        })
        .collect();
    Ok(HamiltonianElement { value, potential })
}

/// `D^{dx^i} F` with the potential
/// `b_t = π^{is}∂_s a_t − A^i_s ∂a_t/∂ξ_s + ∂A^i_t/∂ξ_k a_k`, valid for
/// Poisson connections.
pub fn nc_apply_element(d: &NonlinearConnection, i: usize, f: &HamiltonianElement) -> HamiltonianElement {
    let n = d.dim();
    let value = nc_apply_one(d, i, &f.value);
    let potential = (0..n)
        .map(|t| {
            let mut acc = nc_apply_one(d, i, &f.potential[t]);
            for k in 0..n {
                acc = &acc + &gm(&d.a[i][t].partial_xi(k), &f.potential[k]);
            }
            acc
        })
        .collect();
    HamiltonianElement { value, potential }
}

/// For `F` annihilated by `D`, the potential `a_j = −L^s_j ∂_s F` where `L` is
/// the formal inverse of the matrix `K` of the associated connection.
pub fn potential_from_kernel(
    d: &NonlinearConnection,
    dagger: &NonlinearConnection,
    f: &FibreSeries,
) -> Result<HamiltonianElement> {
    if let Some(i) = nc_apply(d, f).iter().position(|r| !r.is_zero()) {
        return Err(Error::Precondition(format!("function is not annihilated by D^{{dx^{}}}", i + 1)));
    }
    let l = dagger.inverse_matrix()?;
    let n = d.dim();
    let potential = (0..n)
        .map(|j| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for s in 0..n {
                acc = &acc - &gm(l.get(s, j), &f.partial_x(s));
            }
            acc
        })
        .collect();
    HamiltonianElement::new(d.poisson(), f.clone(), potential)
}

/// Solves `∂F/∂ξ_i = π^{ij} a_j` directly. Supported only when `π` is a
/// constant invertible matrix, or `π = 0` and `F` does not depend on ξ.
pub fn potential_by_solve(pi: &PoissonStructure, f: &FibreSeries) -> Result<HamiltonianElement> {
    let n = pi.dim();
    if pi.is_zero() {
        if (0..n).all(|i| f.partial_xi(i).is_zero()) {
            return Ok(HamiltonianElement {
                value: f.clone(),
                potential: vec![FibreSeries::zero(n, FibreSeries::EXACT); n],
            });
        }
        return Err(Error::Invariant("a ξ-dependent function has no potential for π = 0".into()));
    }
    let m: Option<Vec<Vec<Scalar>>> =
        pi.entries().iter().map(|r| r.iter().map(BasePolynomial::as_constant).collect()).collect();
    let inv = m
        .and_then(|m| invert_matrix(&m))
        .ok_or_else(|| Error::Unsupported("potentials are only solved for constant invertible π".into()))?;
    let grads: Vec<FibreSeries> = (0..n).map(|i| f.partial_xi(i)).collect();
    let potential = (0..n)
        .map(|j| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for (i, g) in grads.iter().enumerate() {
                acc = &acc + &g.scale(&inv[j][i]);
            }
            acc
        })
        .collect();
    HamiltonianElement::new(pi, f.clone(), potential)
}
