//! Source and target maps of the formal symplectic groupoid built from a
//! normalized solution and a pair of complementary tensors `P`, `Q`.
//!
//! Fibre coordinates of the groupoid are `ζ`; the change of variables
//! `ξ_p = u_p(x, −ζP) − u_p(x, ζQ)` is inverted as a formal map so that
//! every image is finally written in `ξ`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fedosov_solver::{lift, FundamentalSolution};
use crate::nonlinear_connections::{gm, HamiltonianElement, SeriesTensor2};
use crate::poisson_geometry::{is_zero3, poisson_bracket, Connection, KahlerData, PoissonStructure, Tensor3};
use crate::series_core::{BasePolynomial, FibreMap, FibreSeries, SeriesMatrix};

/// `P^i_j`, `Q^i_j` stored as `p[i][j]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PQTensors {
    pub p: Vec<Vec<BasePolynomial>>,
    pub q: Vec<Vec<BasePolynomial>>,
}

impl PQTensors {
    pub fn new(p: Vec<Vec<BasePolynomial>>, q: Vec<Vec<BasePolynomial>>) -> Result<Self> {
        let n = p.len();
        for m in [&p, &q] {
            if m.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: m.len() });
            }
            if let Some(r) = m.iter().find(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: r.len() });
            }
        }
        Ok(Self { p, q })
    }

    /// `P = Q = ½·I`.
    pub fn half_identity(n: usize) -> Self {
        let half = crate::series_core::Scalar::ratio(1, 2);
        let m: Vec<Vec<BasePolynomial>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| if i == j { BasePolynomial::constant(n, half.clone()) } else { BasePolynomial::zero(n) })
                    .collect()
            })
            .collect();
        Self { p: m.clone(), q: m }
    }

    /// Projectors onto the holomorphic (`P`) and antiholomorphic (`Q`) parts.
    pub fn kahler(k: &KahlerData) -> Self {
        let (p, q) = k.projectors();
        Self { p, q }
    }

    pub fn dim(&self) -> usize {
        self.p.len()
    }

    /// The same pair with the roles of `P` and `Q` exchanged.
    pub fn swapped(&self) -> Self {
        Self { p: self.q.clone(), q: self.p.clone() }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PqReport {
    /// `P^i_j + Q^i_j − δ^i_j`.
    pub sum_residual: Vec<Vec<BasePolynomial>>,
    /// `π^{ik} P^j_k − Q^i_k π^{kj}`, indexed `[i][j]`.
    pub compatibility_residual: Vec<Vec<BasePolynomial>>,
    pub p_derivative: Tensor3,
    pub q_derivative: Tensor3,
}

impl PqReport {
    pub fn sum_ok(&self) -> bool {
        self.sum_residual.iter().flatten().all(BasePolynomial::is_zero)
    }

    pub fn compatible(&self) -> bool {
        self.compatibility_residual.iter().flatten().all(BasePolynomial::is_zero)
    }

    pub fn parallel(&self) -> bool {
        is_zero3(&self.p_derivative) && is_zero3(&self.q_derivative)
    }

    pub fn passed(&self) -> bool {
        self.sum_ok() && self.compatible() && self.parallel()
    }
}

pub fn validate_pq(c: &Connection, pq: &PQTensors) -> Result<PqReport> {
    let n = c.dim();
    if pq.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: pq.dim() });
    }
    let pi = c.poisson();
    let sum_residual = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut r = &pq.p[i][j] + &pq.q[i][j];
                    if i == j {
                        r.sub_assign_ref(&BasePolynomial::one(n));
                    }
                    r
                })
                .collect()
        })
        .collect();
    let compatibility_residual = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    let mut r = BasePolynomial::zero(n);
                    for k in 0..n {
                        r.add_assign_ref(&(pi.get(i, k) * &pq.p[j][k]));
                        r.sub_assign_ref(&(&pq.q[i][k] * pi.get(k, j)));
                    }
                    r
                })
                .collect()
        })
        .collect();
    Ok(PqReport {
        sum_residual,
        compatibility_residual,
        p_derivative: c.derivative_11(&pq.p),
        q_derivative: c.derivative_11(&pq.q),
    })
}

/// The change of variables `ξ(ζ)`, its inverse, and the matrix
/// `A^i_k = Q^s_k v^i_s(x, −ζP) + P^s_k v^i_s(x, ζQ)` with inverse `B`
/// (both as functions of `ξ`).
#[derive(Clone, Debug)]
pub struct GroupoidMaps {
    order: u32,
    pq: PQTensors,
    xizeta: FibreMap,
    zetaxi: FibreMap,
    a_zeta: SeriesTensor2,
    a: SeriesMatrix,
    b: SeriesMatrix,
}

impl GroupoidMaps {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn pq(&self) -> &PQTensors {
        &self.pq
    }

    /// `ξ` as a series in `ζ`.
    pub fn xizeta(&self) -> &FibreMap {
        &self.xizeta
    }

    /// `ζ` as a series in `ξ`.
    pub fn zetaxi(&self) -> &FibreMap {
        &self.zetaxi
    }

    /// `A^i_k` as a function of `ζ`.
    pub fn a_zeta(&self) -> &SeriesTensor2 {
        &self.a_zeta
    }

    /// `A^i_k` as a function of `ξ`.
    pub fn a_matrix(&self) -> &SeriesMatrix {
        &self.a
    }

    pub fn b_matrix(&self) -> &SeriesMatrix {
        &self.b
    }

    /// True when `ξ = ζ` to the working order.
    pub fn is_identity(&self) -> bool {
        let n = self.xizeta.dim();
        self.xizeta.components().iter().enumerate().all(|(p, c)| (c - &FibreSeries::xi(n, p, c.order())).is_zero())
    }
}

/// `ζ ↦ sign·ζ_j M^j_p`, as substitution components.
fn fibre_linear(m: &[Vec<BasePolynomial>], sign: i64) -> Vec<FibreSeries> {
    let n = m.len();
    let s = crate::series_core::Scalar::from_int(sign);
    (0..n)
        .map(|p| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for (j, row) in m.iter().enumerate() {
                if !row[p].is_zero() {
                    acc = &acc + &FibreSeries::xi(n, j, FibreSeries::EXACT).mul_poly(&row[p].scale(&s));
                }
            }
            acc
        })
        .collect()
}

/// `π^{ik} ∂ξ_k/∂ζ_l − A^i_k π^{kl}`, indexed `[i][l]`.
pub fn change_of_variables_residual(pi: &PoissonStructure, maps: &GroupoidMaps) -> SeriesTensor2 {
    let n = pi.dim();
    let xi = maps.xizeta.components();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|l| {
                    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
                    for k in 0..n {
                        if !pi.get(i, k).is_zero() {
                            acc = &acc + &xi[k].partial_xi(l).mul_poly(pi.get(i, k));
                        }
                        if !pi.get(k, l).is_zero() {
                            acc = &acc - &maps.a_zeta[i][k].mul_poly(pi.get(k, l));
                        }
                    }
                    acc
                })
                .collect()
        })
        .collect()
}

pub fn build_change_of_variables(sol: &FundamentalSolution, pq: &PQTensors) -> Result<GroupoidMaps> {
    let n = sol.dim();
    let report = validate_pq(sol.connection(), pq)?;
    if !report.passed() {
        return Err(Error::Precondition(format!(
            "P/Q tensors rejected (sum {}, compatibility {}, parallel {})",
            report.sum_ok(),
            report.compatible(),
            report.parallel()
        )));
    }
    let order = sol.order();
    let minus_p = fibre_linear(&pq.p, -1);
    let plus_q = fibre_linear(&pq.q, 1);
    let comps = sol
        .u_low()
        .par_iter()
        .map(|u| Ok(&u.substitute(&minus_p)? - &u.substitute(&plus_q)?))
        .collect::<Result<Vec<_>>>()?;
    let xizeta = FibreMap::new(comps)?;
    let zetaxi = xizeta.invert()?;
    let v = sol.v();
    let a_zeta: SeriesTensor2 = (0..n)
        .into_par_iter()
        .map(|i| {
            let vm = v[i].iter().map(|s| s.substitute(&minus_p)).collect::<Result<Vec<_>>>()?;
            let vp = v[i].iter().map(|s| s.substitute(&plus_q)).collect::<Result<Vec<_>>>()?;
            Ok((0..n)
                .map(|k| {
                    let mut acc = FibreSeries::zero(n, order);
                    for s in 0..n {
                        acc = &acc + &vm[s].mul_poly(&pq.q[s][k]);
                        acc = &acc + &vp[s].mul_poly(&pq.p[s][k]);
                    }
                    acc
                })
                .collect())
        })
        .collect::<Result<_>>()?;
    let a_rows = a_zeta.iter().map(|r| r.iter().map(|s| zetaxi.apply(s)).collect()).collect::<Result<Vec<_>>>()?;
    let a = SeriesMatrix::new(a_rows)?;
    let b = a.inverse()?;
    let maps = GroupoidMaps { order, pq: pq.clone(), xizeta, zetaxi, a_zeta, a, b };
    if change_of_variables_residual(sol.poisson(), &maps).iter().flatten().any(|r| !r.is_zero()) {
        return Err(Error::Invariant("π^{ik} ∂ξ_k/∂ζ_l ≠ A^i_k π^{kl}".into()));
    }
    Ok(maps)
}

/// `(S f, T f)`: `θ(f)` evaluated at fibre argument `−ζP` and `ζQ`, written
/// in `ξ`, with potentials `a_j = −B^k_j Q^t_k b_t(−ζP)` and
/// `a_j = B^k_j P^t_k b_t(ζQ)` built from the potential `b` of `θ(f)`.
pub fn source_target(
    sol: &FundamentalSolution,
    maps: &GroupoidMaps,
    f: &BasePolynomial,
) -> Result<(HamiltonianElement, HamiltonianElement)> {
    if maps.order != sol.order() {
        return Err(Error::Precondition("solution and maps have different orders".into()));
    }
    let theta = lift(sol, f, sol.order())?;
    let s = image(sol, maps, &theta, &fibre_linear(&maps.pq.p, -1), &maps.pq.q, -1)?;
    let t = image(sol, maps, &theta, &fibre_linear(&maps.pq.q, 1), &maps.pq.p, 1)?;
    Ok((s, t))
}

fn image(
    sol: &FundamentalSolution,
    maps: &GroupoidMaps,
    theta: &HamiltonianElement,
    arg: &[FibreSeries],
    other: &[Vec<BasePolynomial>],
    sign: i64,
) -> Result<HamiltonianElement> {
    let n = sol.dim();
    let to_xi = |s: &FibreSeries| -> Result<FibreSeries> { maps.zetaxi.apply(&s.substitute(arg)?) };
    let value = to_xi(&theta.value)?;
    let b = theta.potential.iter().map(to_xi).collect::<Result<Vec<_>>>()?;
    let sign = crate::series_core::Scalar::from_int(sign);
    // c_k = ±M^t_k b_t
    let c: Vec<FibreSeries> = (0..n)
        .map(|k| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for (t, bt) in b.iter().enumerate() {
                if !other[t][k].is_zero() {
                    acc = &acc + &bt.mul_poly(&other[t][k]);
                }
            }
            acc.scale(&sign)
        })
        .collect();
    let potential = (0..n)
        .map(|j| {
            let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
            for (k, ck) in c.iter().enumerate() {
                acc = &acc + &gm(maps.b.get(k, j), ck);
            }
            acc
        })
        .collect();
    HamiltonianElement::new(sol.poisson(), value, potential)
}

/// `{F, G} = ∂F/∂ξ_k ∂G/∂x^k − ∂G/∂ξ_k ∂F/∂x^k`.
pub fn canonical_bracket(f: &FibreSeries, g: &FibreSeries) -> FibreSeries {
    let n = f.dim();
    let mut acc = FibreSeries::zero(n, FibreSeries::EXACT);
    for k in 0..n {
        acc = &acc + &gm(&f.partial_xi(k), &g.partial_x(k));
        acc = &acc - &gm(&g.partial_xi(k), &f.partial_x(k));
    }
    acc
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GroupoidCheckKind {
    /// `{Sf, Sg} − S{f, g}`.
    SourcePoisson,
    /// `{Tf, Tg} + T{f, g}`.
    TargetAntiPoisson,
    /// `{Sf, Tg}`.
    Commute,
}

impl GroupoidCheckKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::SourcePoisson => "{Sf,Sg} = S{f,g}",
            Self::TargetAntiPoisson => "{Tf,Tg} = -T{f,g}",
            Self::Commute => "{Sf,Tg} = 0",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidCheck {
    pub kind: GroupoidCheckKind,
    pub f: usize,
    pub g: usize,
    pub residual: FibreSeries,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupoidReport {
    /// `(S f, T f)` for each input function, in input order.
    pub images: Vec<(HamiltonianElement, HamiltonianElement)>,
    /// `S f − f` and `T f − f` restricted to the zero section.
    pub zero_section_ok: bool,
    pub checks: Vec<GroupoidCheck>,
}

impl GroupoidReport {
    pub fn passed(&self) -> bool {
        self.zero_section_ok && self.checks.iter().all(|c| c.residual.is_zero())
    }
}

/// Morphism and commutation checks over all pairs of `fns` (commutation over
/// all ordered pairs, including `f = g`).
pub fn groupoid_checks(
    sol: &FundamentalSolution,
    maps: &GroupoidMaps,
    fns: &[BasePolynomial],
) -> Result<GroupoidReport> {
    let pi = sol.poisson();
    let images = fns.par_iter().map(|f| source_target(sol, maps, f)).collect::<Result<Vec<_>>>()?;
    let zero_section_ok =
        fns.iter().zip(&images).all(|(f, (s, t))| &s.value.zero_section() == f && &t.value.zero_section() == f);
    let m = fns.len();
    let mut jobs = Vec::new();
    for a in 0..m {
        for b in 0..m {
            if a < b {
                jobs.push((GroupoidCheckKind::SourcePoisson, a, b));
                jobs.push((GroupoidCheckKind::TargetAntiPoisson, a, b));
            }
            jobs.push((GroupoidCheckKind::Commute, a, b));
        }
    }
    let checks = jobs
        .into_par_iter()
        .map(|(kind, a, b)| {
            let (sf, tf) = &images[a];
            let (sg, tg) = &images[b];
            let residual = match kind {
                GroupoidCheckKind::SourcePoisson => {
                    let (s_fg, _) = source_target(sol, maps, &poisson_bracket(pi, &fns[a], &fns[b]))?;
                    &canonical_bracket(&sf.value, &sg.value) - &s_fg.value
                }
                GroupoidCheckKind::TargetAntiPoisson => {
                    let (_, t_fg) = source_target(sol, maps, &poisson_bracket(pi, &fns[a], &fns[b]))?;
                    &canonical_bracket(&tf.value, &tg.value) + &t_fg.value
                }
                GroupoidCheckKind::Commute => canonical_bracket(&sf.value, &tg.value),
            };
            Ok(GroupoidCheck { kind, f: a, g: b, residual })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupoidReport { images, zero_section_ok, checks })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationReport {
    /// `S z^k − z^k` for each holomorphic coordinate.
    pub source_residuals: Vec<FibreSeries>,
    /// `T z̄^l − z̄^l` for each antiholomorphic coordinate.
    pub target_residuals: Vec<FibreSeries>,
    /// `θ(z^k) − z^k` lies in the ideal generated by the antiholomorphic
    /// fibre variables.
    pub holomorphic_lifts_in_ideal: bool,
    /// `θ(z̄^l) − z̄^l` lies in the ideal generated by the holomorphic
    /// fibre variables.
    pub antiholomorphic_lifts_in_ideal: bool,
    /// `u_k + ξ_k` lies in both ideals.
    pub potentials_in_both_ideals: bool,
}

impl SeparationReport {
    pub fn passed(&self) -> bool {
        self.source_residuals.iter().chain(&self.target_residuals).all(FibreSeries::is_zero)
            && self.holomorphic_lifts_in_ideal
            && self.antiholomorphic_lifts_in_ideal
            && self.potentials_in_both_ideals
    }
}

pub fn separation_check(sol: &FundamentalSolution, maps: &GroupoidMaps, k: &KahlerData) -> Result<SeparationReport> {
    let m = k.complex_dim();
    let n = k.dim();
    if sol.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sol.dim() });
    }
    let hol: Vec<usize> = (0..m).collect();
    let anti: Vec<usize> = (m..n).collect();
    let mut source_residuals = Vec::new();
    let mut target_residuals = Vec::new();
    let mut hol_ok = true;
    let mut anti_ok = true;
    for a in 0..n {
        let x = BasePolynomial::var(n, a);
        let xs = FibreSeries::from_poly(x.clone(), FibreSeries::EXACT);
        let (s, t) = source_target(sol, maps, &x)?;
        let theta = lift(sol, &x, sol.order())?;
        let rest = &theta.value - &xs;
        if a < m {
            source_residuals.push(&s.value - &xs);
            hol_ok &= rest.in_ideal(&anti);
        } else {
            target_residuals.push(&t.value - &xs);
            anti_ok &= rest.in_ideal(&hol);
        }
    }
    let potentials_in_both_ideals = sol.u_low().iter().enumerate().all(|(p, u)| {
        let r = u + &FibreSeries::xi(n, p, u.order());
        r.in_ideal(&hol) && r.in_ideal(&anti)
    });
    Ok(SeparationReport {
        source_residuals,
        target_residuals,
        holomorphic_lifts_in_ideal: hol_ok,
        antiholomorphic_lifts_in_ideal: anti_ok,
        potentials_in_both_ideals,
    })
}
