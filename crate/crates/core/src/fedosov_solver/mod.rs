//! The normalized solution of the Fundamental Equation
//! `π^{ij} = Q̄^{ij} − ∇̄^i u^j + ∇̄^j u^i + ∂_kπ^{ij} u^k + {u^i, u^j}_Ω`
//! together with its potentials, and the lift `f ↦ θ(f)`.
//!
//! Every graded component is computed as an exact polynomial; truncation
//! happens only when the result is assembled.

mod curvature;
mod fallback;

use rayon::prelude::*;

pub use curvature::{bar_curvature, bar_curvature_from_linear, bar_q};

use crate::error::{Error, Result};
use crate::nonlinear_connections::{
    exact, gm, nc_analyze, nc_curvature, omega_bracket, pi_grad, potential_from_kernel, HamiltonianElement,
    NonlinearConnection, SeriesTensor2, SeriesTensor3,
};
use crate::poisson_geometry::{conn_analyze, poisson_bracket, validate_poisson, Connection, PoissonStructure};
use crate::series_core::{BasePolynomial, FibreSeries, MultiIndex, Scalar};

use curvature::{bar_q_from, bar_q_hamiltonian_residual, gamma_xi};

pub const DEFAULT_ORDER: u32 = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SolveOptions {
    pub order: u32,
    /// Skip the closed-form potential recursion and solve for the potentials
    /// by elimination at every step.
    pub force_fallback: bool,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { order: DEFAULT_ORDER, force_fallback: false }
    }
}

impl SolveOptions {
    pub fn order(order: u32) -> Self {
        Self { order, ..Self::default() }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StepPath {
    Recursion,
    Elimination,
}

/// What was checked while producing the degree-`step` part of `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepAudit {
    pub step: u32,
    pub alpha_antisymmetric: bool,
    /// `π^{ik} A^j_{s;k} = α^{ij}_s`; `None` when the recursion was skipped.
    pub reconstruction: Option<bool>,
    /// `π^{jk} B^{il}_{s;k} = ∂α^{il}_s/∂ξ_j`.
    pub b_reconstruction: Option<bool>,
    /// `π^{ik} u_k = u^i` and `π^{jk} v^i_k = ∂u^i/∂ξ_j` for the recursion output.
    pub potentials_consistent: Option<bool>,
    pub path: StepPath,
}

/// `u^i`, its potentials `u_k` (`u^i = π^{ik} u_k`) and `v^i_k`
/// (`∂u^j/∂ξ_i = π^{is} v^j_s`). `u` and `u_low` are known to order `N + 1`,
/// `v` to order `N`, so that both assembled connections are good to order `N`.
#[derive(Clone, Debug)]
pub struct FundamentalSolution {
    order: u32,
    connection: Connection,
    dagger: Connection,
    u: Vec<FibreSeries>,
    u_low: Vec<FibreSeries>,
    v: SeriesTensor2,
    audit: Vec<StepAudit>,
}

impl FundamentalSolution {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.connection.dim()
    }

    pub fn poisson(&self) -> &PoissonStructure {
        self.connection.poisson()
    }

    pub fn connection(&self) -> &Connection {
        &self.connection
    }

    pub fn dagger(&self) -> &Connection {
        &self.dagger
    }

    pub fn u(&self) -> &[FibreSeries] {
        &self.u
    }

    pub fn u_low(&self) -> &[FibreSeries] {
        &self.u_low
    }

    pub fn v(&self) -> &SeriesTensor2 {
        &self.v
    }

    pub fn audit(&self) -> &[StepAudit] {
        &self.audit
    }

    /// `D^{dx^i} = π^{is}∂_s + Γ^{ij}_s ξ_j ∂/∂ξ_s − v^i_s ∂/∂ξ_s`.
    pub fn d_connection(&self) -> NonlinearConnection {
        let gx = gamma_xi(&self.connection);
        let a = self.v.iter().zip(&gx).map(|(vr, gr)| vr.iter().zip(gr).map(|(v, g)| v - g).collect()).collect();
        NonlinearConnection::new(self.connection.poisson_arc().clone(), a).expect("square by construction")
    }

    /// The associated connection with `K^i_s = ∂u_s/∂ξ_i − †Γ^{ij}_s ξ_j`.
    pub fn dagger_connection(&self) -> NonlinearConnection {
        let n = self.dim();
        let gdx = gamma_xi(&self.dagger);
        let k = (0..n).map(|i| (0..n).map(|s| &self.u_low[s].partial_xi(i) - &gdx[i][s]).collect()).collect();
        NonlinearConnection::new(self.connection.poisson_arc().clone(), k).expect("square by construction")
    }

    /// The same solution at a lower order; agrees with solving at that order.
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        Self {
            order,
            connection: self.connection.clone(),
            dagger: self.dagger.clone(),
            u: self.u.iter().map(|s| s.truncate(order + 1)).collect(),
            u_low: self.u_low.iter().map(|s| s.truncate(order + 1)).collect(),
            v: self.v.iter().map(|r| r.iter().map(|s| s.truncate(order)).collect()).collect(),
            audit: self.audit.iter().filter(|a| a.step <= order + 1).cloned().collect(),
        }
    }

    /// Adds `δ_k` to the potentials `u_k`, where `π^{ik} δ_k = 0` and `δ` has
    /// no terms of ξ-degree below 2. The functions `u^i` and `v^i_k` are
    /// unchanged; only the choice of local potential moves.
    pub fn with_potential_gauge(&self, delta: &[FibreSeries]) -> Result<Self> {
        let n = self.dim();
        if delta.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: delta.len() });
        }
        if delta.iter().any(|d| d.valuation().is_some_and(|v| v < 2)) {
            return Err(Error::Precondition("a gauge term must start at ξ-degree 2".into()));
        }
        if (0..n).any(|i| !pi_contract(self.poisson(), i, delta).is_zero()) {
            return Err(Error::Precondition("a gauge term must lie in the kernel of π".into()));
        }
        let mut out = self.clone();
        for (u, d) in out.u_low.iter_mut().zip(delta) {
            *u = &*u + d;
        }
        Ok(out)
    }

    /// Same data, ignoring the audit trail.
    pub fn same_series(&self, other: &Self) -> bool {
        self.order == other.order && self.u == other.u && self.u_low == other.u_low && self.v == other.v
    }
}

fn zero_exact(n: usize) -> FibreSeries {
    FibreSeries::zero(n, FibreSeries::EXACT)
}

fn xi_exact(n: usize, j: usize) -> FibreSeries {
    FibreSeries::xi(n, j, FibreSeries::EXACT)
}

/// `Σ_k π^{ik} c_k`.
fn pi_contract(pi: &PoissonStructure, i: usize, c: &[FibreSeries]) -> FibreSeries {
    let mut acc = FibreSeries::zero(pi.dim(), c.iter().map(FibreSeries::order).min().unwrap_or(FibreSeries::EXACT));
    for (k, ck) in c.iter().enumerate() {
        if !pi.get(i, k).is_zero() {
            acc = &acc + &ck.mul_poly(pi.get(i, k));
        }
    }
    acc
}

/// `Σ_j c_j ξ_j / d`.
fn contract_xi(c: &[FibreSeries], d: u32) -> FibreSeries {
    let n = c.len();
    let mut acc = zero_exact(n);
    for (j, cj) in c.iter().enumerate() {
        acc = &acc + &cj.mul_xi(j);
    }
    acc.scale(&Scalar::ratio(1, i64::from(d)))
}

fn par_square<T: Send>(n: usize, f: impl Fn(usize, usize) -> T + Sync) -> Vec<Vec<T>> {
    let flat: Vec<T> = (0..n * n).into_par_iter().map(|ij| f(ij / n, ij % n)).collect();
    let mut it = flat.into_iter();
    (0..n).map(|_| it.by_ref().take(n).collect()).collect()
}

/// `Ā^j_k = ½ ξ_pξ_q π^{jm}(∂_k†Γ^{pq}_m − ∂_m†Γ^{pq}_k) − ξ_pξ_q †Γ^{lp}_k Γ^{jq}_l`.
fn bar_a(c: &Connection, dagger: &Connection) -> SeriesTensor2 {
    let n = c.dim();
    let pi = c.poisson();
    let half = Scalar::ratio(1, 2);
    par_square(n, |j, k| {
        let mut acc = zero_exact(n);
        for p in 0..n {
            for q in 0..n {
                let mut coeff = BasePolynomial::zero(n);
                for m in 0..n {
                    if !pi.get(j, m).is_zero() {
                        let d = &dagger.get(p, q, m).partial(k) - &dagger.get(p, q, k).partial(m);
                        coeff.add_assign_ref(&(pi.get(j, m) * &d).scale(&half));
                    }
                }
                for l in 0..n {
                    coeff.sub_assign_ref(&(dagger.get(l, p, k) * c.get(j, q, l)));
                }
                if !coeff.is_zero() {
                    let m = MultiIndex::unit(n, p).add(&MultiIndex::unit(n, q));
                    acc = &acc + &FibreSeries::monomial(m, coeff, FibreSeries::EXACT);
                }
            }
        }
        acc
    })
}

/// Graded pieces of the recursion state; `u[i][s]` is `(u^i)^{(s)}`.
struct Components {
    u: Vec<Vec<FibreSeries>>,
    ul: Vec<Vec<FibreSeries>>,
    v: Vec<Vec<Vec<FibreSeries>>>,
}

struct Geometry<'a> {
    c: &'a Connection,
    pi: &'a PoissonStructure,
    gx: SeriesTensor2,
    gdx: SeriesTensor2,
    rbar: SeriesTensor3,
    qbar: SeriesTensor2,
    abar: SeriesTensor2,
}

impl Geometry<'_> {
    fn n(&self) -> usize {
        self.pi.dim()
    }

    /// `∇̄^i F = π^{ij}∂_j F + Γ^{ij}_k ξ_j ∂F/∂ξ_k`.
    fn nabla_bar(&self, i: usize, f: &FibreSeries) -> FibreSeries {
        let mut acc = pi_grad(self.pi, i, f);
        for k in 0..self.n() {
            if !self.gx[i][k].is_zero() {
                acc = &acc + &gm(&self.gx[i][k], &f.partial_xi(k));
            }
        }
        acc
    }
}

fn alpha_step(g: &Geometry, st: &Components, s: usize) -> SeriesTensor2 {
    let n = g.n();
    par_square(n, |i, j| {
        let mut acc = if s == 3 { g.qbar[i][j].clone() } else { zero_exact(n) };
        let ui = &st.u[i][s - 1];
        let uj = &st.u[j][s - 1];
        acc = &acc - &g.nabla_bar(i, uj);
        acc = &acc + &g.nabla_bar(j, ui);
        for k in 0..n {
            if !g.pi.d(k, i, j).is_zero() {
                acc = &acc + &st.u[k][s - 1].mul_poly(g.pi.d(k, i, j));
            }
        }
        for t in 1..=s.saturating_sub(2) {
            for k in 0..n {
                acc = &acc + &(&st.v[i][k][t] * &st.u[j][s - t].partial_xi(k));
            }
        }
        acc
    })
}

/// `A^j_{s;k}`, with the summation exponent read as `s − t − 1` so that the
/// result has ξ-degree `s − 1`.
fn a_step(g: &Geometry, st: &Components, s: usize) -> SeriesTensor2 {
    let n = g.n();
    par_square(n, |j, k| {
        let mut acc = if s == 3 { g.abar[j][k].clone() } else { zero_exact(n) };
        acc = &acc - &st.u[j][s - 1].partial_x(k);
        for m in 0..n {
            acc = &acc + &(&g.gdx[m][k] * &st.v[j][m][s - 2]);
        }
        let ulk = &st.ul[k][s - 1];
        acc = &acc + &pi_grad(g.pi, j, ulk);
        for l in 0..n {
            acc = &acc + &(&g.gx[j][l] * &ulk.partial_xi(l));
            if !g.pi.d(k, j, l).is_zero() {
                acc = &acc + &st.ul[l][s - 1].mul_poly(g.pi.d(k, j, l));
            }
        }
        for t in 1..=s - 2 {
            for l in 0..n {
                acc = &acc - &(&st.v[j][l][s - t - 1] * &st.ul[k][t + 1].partial_xi(l));
            }
        }
        acc
    })
}

/// `B^{il}_{s;k}`, indexed `[i][l][k]`.
fn b_step(g: &Geometry, st: &Components, s: usize) -> SeriesTensor3 {
    let n = g.n();
    let c = g.c;
    par_square(n, |i, l| {
        (0..n)
            .map(|k| {
                let mut acc = if s == 3 { g.rbar[i][l][k].clone() } else { zero_exact(n) };
                let vlk = &st.v[l][k][s - 2];
                let vik = &st.v[i][k][s - 2];
                acc = &acc - &pi_grad(g.pi, i, vlk);
                acc = &acc + &pi_grad(g.pi, l, vik);
                for m in 0..n {
                    acc = &acc - &(&g.gx[i][m] * &vlk.partial_xi(m));
                    acc = &acc + &(&g.gx[l][m] * &vik.partial_xi(m));
                    acc = &acc + &st.v[l][m][s - 2].mul_poly(c.get(i, m, k));
                    acc = &acc - &st.v[i][m][s - 2].mul_poly(c.get(l, m, k));
                    acc = &acc + &st.v[m][k][s - 2].mul_poly(g.pi.d(m, i, l));
                }
                for t in 1..=s - 2 {
                    for m in 0..n {
                        acc = &acc - &(&st.v[i][k][t].partial_xi(m) * &st.v[l][m][s - t - 1]);
                        acc = &acc + &(&st.v[i][m][t] * &st.v[l][k][s - t - 1].partial_xi(m));
                    }
                }
                acc
            })
            .collect::<Vec<_>>()
    })
}

fn check_geometry(c: &Connection, dagger: &Connection) -> Result<()> {
    if c.poisson() != dagger.poisson() {
        return Err(Error::Precondition("the two connections are over different Poisson structures".into()));
    }
    let report = validate_poisson(c.poisson());
    if !report.passed() {
        return Err(Error::Precondition("π is not a Poisson bivector".into()));
    }
    let rep = conn_analyze(c, Some(dagger))?;
    if !rep.associated {
        return Err(Error::Precondition("the connections are not associated".into()));
    }
    if !rep.dagger_torsion_free {
        return Err(Error::Precondition("the associated connection has torsion".into()));
    }
    Ok(())
}

/// Solves for `u`, `u_k`, `v^i_k` up to order `N` by the graded recursion.
/// At each step `s` the closed-form potentials are checked against the
/// defining identities; if any check fails, or elimination is forced, the
/// potentials of that step are obtained by solving `π^{ik} c_k = r^i`.
pub fn solve_fundamental(c: &Connection, dagger: &Connection, opts: SolveOptions) -> Result<FundamentalSolution> {
    if opts.order == 0 {
        return Err(Error::Precondition("the truncation order must be at least 1".into()));
    }
    check_geometry(c, dagger)?;
    let n = c.dim();
    let pi = c.poisson();
    let big_n = opts.order as usize;
    let rbar = bar_curvature(c);
    let qbar = bar_q_from(c, &rbar);
    if bar_q_hamiltonian_residual(c, &rbar, &qbar).iter().flatten().flatten().any(|r| !r.is_zero()) {
        return Err(Error::Invariant("Q̄ is not a Hamiltonian function of π^{tk} R̄^{ij}_k".into()));
    }
    let g = Geometry { c, pi, gx: gamma_xi(c), gdx: gamma_xi(dagger), rbar, qbar, abar: bar_a(c, dagger) };

    let z = zero_exact(n);
    let mut st = Components {
        u: vec![vec![z.clone(); big_n + 2]; n],
        ul: vec![vec![z.clone(); big_n + 2]; n],
        v: vec![vec![vec![z.clone(); big_n + 1]; n]; n],
    };
    let ul1: Vec<FibreSeries> = (0..n).map(|k| -xi_exact(n, k)).collect();
    for i in 0..n {
        st.ul[i][1] = ul1[i].clone();
        st.u[i][1] = pi_contract(pi, i, &ul1);
        st.v[i][i][0] = FibreSeries::constant(n, Scalar::one(), FibreSeries::EXACT);
    }

    let mut audit = Vec::with_capacity(big_n);
    for s in 2..=big_n + 1 {
        let alpha = alpha_step(&g, &st, s);
        let alpha_antisymmetric = (0..n).all(|i| (0..n).all(|j| (&alpha[i][j] + &alpha[j][i]).is_zero()));
        for i in 0..n {
            st.u[i][s] = contract_xi(&alpha[i], s as u32 + 1);
        }
        let mut entry = StepAudit {
            step: s as u32,
            alpha_antisymmetric,
            reconstruction: None,
            b_reconstruction: None,
            potentials_consistent: None,
            path: StepPath::Elimination,
        };
        let mut accepted = false;
        if !opts.force_fallback {
            let a = a_step(&g, &st, s);
            let rec = par_square(n, |i, j| pi_contract(pi, i, &a[j]) == alpha[i][j]).into_iter().flatten().all(|b| b);
            let ul_s: Vec<FibreSeries> = (0..n)
                .map(|k| contract_xi(&(0..n).map(|j| a[j][k].clone()).collect::<Vec<_>>(), s as u32 + 1))
                .collect();
            for k in 0..n {
                st.ul[k][s] = ul_s[k].clone();
            }
            let b = b_step(&g, &st, s);
            let b_rec = (0..n)
                .all(|i| (0..n).all(|l| (0..n).all(|j| pi_contract(pi, j, &b[i][l]) == alpha[i][l].partial_xi(j))));
            let v_s: SeriesTensor2 = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|k| {
                            let mut acc = -&a[i][k];
                            for l in 0..n {
                                acc = &acc + &b[i][l][k].mul_xi(l);
                            }
                            acc.scale(&Scalar::ratio(1, s as i64 + 1))
                        })
                        .collect()
                })
                .collect();
            let consistent = (0..n).all(|i| {
                pi_contract(pi, i, &ul_s) == st.u[i][s]
                    && (0..n).all(|j| pi_contract(pi, j, &v_s[i]) == st.u[i][s].partial_xi(j))
            });
            entry.reconstruction = Some(rec);
            entry.b_reconstruction = Some(b_rec);
            entry.potentials_consistent = Some(consistent);
            if rec && b_rec && consistent {
                for (i, row) in v_s.into_iter().enumerate() {
                    for (k, val) in row.into_iter().enumerate() {
                        st.v[i][k][s - 1] = val;
                    }
                }
                entry.path = StepPath::Recursion;
                accepted = true;
            }
        }
        if !accepted {
            let targets: Vec<FibreSeries> = (0..n).map(|i| st.u[i][s].clone()).collect();
            let ul_s = fallback::solve_pi_system(pi, &targets).ok_or_else(|| {
                Error::Inconsistent(format!("no polynomial potential u_k for the degree-{s} part of u"))
            })?;
            for (k, val) in ul_s.into_iter().enumerate() {
                st.ul[k][s] = val;
            }
            for i in 0..n {
                let targets: Vec<FibreSeries> = (0..n).map(|j| st.u[i][s].partial_xi(j)).collect();
                let v_i = fallback::solve_pi_system(pi, &targets).ok_or_else(|| {
                    Error::Inconsistent(format!("no polynomial potential v^{}_k at degree {}", i + 1, s - 1))
                })?;
                for (k, val) in v_i.into_iter().enumerate() {
                    st.v[i][k][s - 1] = val;
                }
            }
        }
        audit.push(entry);
    }

    let assemble = |parts: &[FibreSeries], order: u32| FibreSeries::sum(n, FibreSeries::EXACT, parts).truncate(order);
    let order = opts.order;
    Ok(FundamentalSolution {
        order,
        connection: c.clone(),
        dagger: dagger.clone(),
        u: st.u.iter().map(|p| assemble(p, order + 1)).collect(),
        u_low: st.ul.iter().map(|p| assemble(p, order + 1)).collect(),
        v: st.v.iter().map(|r| r.iter().map(|p| assemble(p, order)).collect()).collect(),
        audit,
    })
}

/// `π^{ij} − (Q̄^{ij} − ∇̄^i u^j + ∇̄^j u^i + ∂_kπ^{ij} u^k + {u^i, u^j}_Ω)`
/// for given `u` and bracket potentials `v`; the bracket is taken in the
/// antisymmetrized form `½(v^i_k ∂u^j/∂ξ_k − v^j_k ∂u^i/∂ξ_k)`.
pub fn fundamental_residual_of(c: &Connection, u: &[FibreSeries], v: &SeriesTensor2) -> SeriesTensor2 {
    let n = c.dim();
    let pi = c.poisson();
    let rbar = bar_curvature(c);
    let g = Geometry { c, pi, gx: gamma_xi(c), gdx: Vec::new(), qbar: bar_q_from(c, &rbar), rbar, abar: Vec::new() };
    let half = Scalar::ratio(1, 2);
    par_square(n, |i, j| {
        let mut rhs = &g.qbar[i][j] - &g.nabla_bar(i, &u[j]);
        rhs = &rhs + &g.nabla_bar(j, &u[i]);
        for k in 0..n {
            if !pi.d(k, i, j).is_zero() {
                rhs = &rhs + &u[k].mul_poly(pi.d(k, i, j));
            }
        }
        let mut br = zero_exact(n);
        for k in 0..n {
            br = &br + &gm(&v[i][k], &u[j].partial_xi(k));
            br = &br - &gm(&v[j][k], &u[i].partial_xi(k));
        }
        rhs = &rhs + &br.scale(&half);
        &exact(pi.get(i, j)) - &rhs
    })
}

pub fn fundamental_residual(sol: &FundamentalSolution) -> SeriesTensor2 {
    fundamental_residual_of(&sol.connection, &sol.u, &sol.v)
}

/// `θ(f)` to order `order ≤ N`: `F^{(0)} = f`,
/// `β^i_s = ∇̄^i F^{(s−1)} − Σ_{t=1}^{s−1} (v^i_k)^{(t)} ∂F^{(s−t)}/∂ξ_k`,
/// `F^{(s)} = β^i_s ξ_i / s`. The potential comes from the kernel of `D`.
pub fn lift(sol: &FundamentalSolution, f: &BasePolynomial, order: u32) -> Result<HamiltonianElement> {
    let n = sol.dim();
    if f.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: f.dim() });
    }
    if order > sol.order {
        return Err(Error::Precondition(format!("lift to order {order} needs a solution of order ≥ {order}")));
    }
    let value = lift_value(sol, f, order);
    let d = sol.d_connection();
    let dagger = sol.dagger_connection();
    let el = potential_from_kernel(&d, &dagger, &value)?;
    Ok(el.truncate(order))
}

fn lift_value(sol: &FundamentalSolution, f: &BasePolynomial, order: u32) -> FibreSeries {
    let n = sol.dim();
    let c = &sol.connection;
    let g = Geometry {
        c,
        pi: c.poisson(),
        gx: gamma_xi(c),
        gdx: Vec::new(),
        rbar: Vec::new(),
        qbar: Vec::new(),
        abar: Vec::new(),
    };
    let big_n = order as usize;
    let vcomp: Vec<Vec<Vec<FibreSeries>>> = sol
        .v
        .iter()
        .map(|r| {
            r.iter()
                .map(|s| (0..=big_n).map(|t| s.xi_component(t as u32).with_order(FibreSeries::EXACT)).collect())
                .collect()
        })
        .collect();
    let mut parts = vec![exact(f)];
    for s in 1..=big_n {
        let beta: Vec<FibreSeries> = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut acc = g.nabla_bar(i, &parts[s - 1]);
                for t in 1..s {
                    for k in 0..n {
                        acc = &acc - &(&vcomp[i][k][t] * &parts[s - t].partial_xi(k));
                    }
                }
                acc
            })
            .collect();
        parts.push(contract_xi(&beta, s as u32));
    }
    FibreSeries::sum(n, FibreSeries::EXACT, &parts).truncate(order)
}

/// `θ({f, g}) − {θ(f), θ(g)}_Ω`.
pub fn poisson_morphism_residual(
    sol: &FundamentalSolution,
    f: &BasePolynomial,
    g: &BasePolynomial,
    order: u32,
) -> Result<FibreSeries> {
    let pi = sol.poisson();
    let tf = lift(sol, f, order)?;
    let tg = lift(sol, g, order)?;
    let tfg = lift(sol, &poisson_bracket(pi, f, g), order)?;
    Ok(&tfg.value - &omega_bracket(pi, &tf, &tg)?)
}

/// One named invariant of a solution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Number of nonzero residual components.
    pub failures: usize,
}

fn check(name: &'static str, residuals: impl IntoIterator<Item = FibreSeries>) -> InvariantCheck {
    let failures = residuals.into_iter().filter(|r| !r.is_zero()).count();
    InvariantCheck { name, passed: failures == 0, failures }
}

/// The structural invariants of a solution, each with its residual count.
pub fn check_invariants(sol: &FundamentalSolution) -> Result<Vec<InvariantCheck>> {
    let n = sol.dim();
    let pi = sol.poisson();
    let mut out = Vec::new();

    let mut norm = zero_exact(n);
    for (i, ui) in sol.u.iter().enumerate() {
        norm = &norm + &ui.mul_xi(i);
    }
    out.push(check("normalization u^i ξ_i = 0", [norm]));

    let mut leading = Vec::new();
    for k in 0..n {
        leading.push(&sol.u_low[k].truncate(2) + &FibreSeries::xi(n, k, 2));
        for i in 0..n {
            let delta = if i == k { Scalar::one() } else { Scalar::zero() };
            leading.push(&sol.v[i][k].truncate(1) - &FibreSeries::constant(n, delta, 1));
        }
    }
    out.push(check("leading terms u_k = -ξ_k, v^i_k = δ^i_k", leading));

    out.push(check("compatibility u^i = π^{ik} u_k", (0..n).map(|i| &sol.u[i] - &pi_contract(pi, i, &sol.u_low))));
    out.push(check(
        "potential relation ∂u^j/∂ξ_i = π^{is} v^j_s",
        (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| &sol.u[j].partial_xi(i) - &pi_contract(pi, i, &sol.v[j])),
    ));
    out.push(check("fundamental equation", fundamental_residual(sol).into_iter().flatten()));

    let d = sol.d_connection();
    let dd = sol.dagger_connection();
    let curv = nc_curvature(&d);
    out.push(check("flatness R^{kl}_q π^{qs} = 0", curv.flatness_residual.into_iter().flatten().flatten()));
    let rep = nc_analyze(&d, Some(&dd))?;
    out.push(check("D and †D associated", rep.association_residual.into_iter().flatten()));
    out.push(InvariantCheck {
        name: "α^{ij}_s antisymmetric",
        passed: sol.audit.iter().all(|a| a.alpha_antisymmetric),
        failures: sol.audit.iter().filter(|a| !a.alpha_antisymmetric).count(),
    });
    let bad_rec = sol.audit.iter().filter(|a| a.reconstruction == Some(false)).count();
    out.push(InvariantCheck {
        name: "reconstruction π^{ik} A^j_{s;k} = α^{ij}_s",
        passed: bad_rec == 0,
        failures: bad_rec,
    });
    Ok(out)
}
