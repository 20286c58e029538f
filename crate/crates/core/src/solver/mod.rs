//! Reconstruction of first-order Lagrangians
//! `f = f̄ + Σ A^j_i (w^j_i - c^j_i) + A` for the cases `m = 1`, `n = 1` and
//! `m = 2`.
//!
//! Every case runs the same pipeline. `f̄` is the particular solution of the
//! Hessian system vanishing to first order on the level set. The residual
//! `ρ^j = F^j - E^j[f̄]` is then affine in the first-order variables. Its
//! linear part is the two-form whose potential gives `A^j_i`, and its value on
//! the level set, corrected by `A^j_i`, is the one-form whose potential is
//! `A`. Each potential is verified against its defining equation, and the
//! final Lagrangian against the input data.

mod homotopy;
mod skew;

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{free_vars, pdiff, substitute, Expr, Poly, VarRef};
use crate::helmholtz::{conditions_m1, conditions_m2, conditions_n1};
use crate::jet::JetContext;
use crate::report::ConditionSetReport;
use crate::tables::{Grid, PairTable};
use crate::variational::{el_split_first_order, InverseProblemData};
use crate::zero::{is_zero, ZeroStatus, ZeroTestConfig};

use homotopy::{integrate_unit, one_form_potential, segment, two_form_potential};
pub use skew::build_g_m2;

pub const DEFAULT_ANSATZ_DEGREE: usize = 4;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub zero: ZeroTestConfig,
    /// Total degree bound of the polynomial ansatz for `C_{ii'}`.
    pub ansatz_degree: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { zero: ZeroTestConfig::default(), ansatz_degree: DEFAULT_ANSATZ_DEGREE }
    }
}

/// `c^j_i` (rows `j`, columns `i`) and the base point `c^j` of the
/// order-zero homotopies.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceFunctions {
    pub c2: Grid,
    pub c0: Vec<Expr>,
}

impl ReferenceFunctions {
    pub fn zeros(n: usize, m: usize) -> Self {
        ReferenceFunctions { c2: Grid::zeros(m, n), c0: vec![Expr::zero(); m] }
    }

    /// `c2` may depend on `w` only when `allow_w`; `c0` depends on `x` only.
    fn validate(&self, ctx: &JetContext, allow_w: bool) -> Result<()> {
        if self.c2.rows() != ctx.m() || self.c2.cols() != ctx.n() || self.c0.len() != ctx.m() {
            return Err(Error::WrongShape("reference functions do not match the context".into()));
        }
        let legal = |v: &VarRef, w_ok: bool| match v {
            VarRef::Independent(i) => !i.is_t() && ctx.is_legal(v),
            VarRef::Jet { .. } => w_ok && v.order() == Some(0) && ctx.is_legal(v),
        };
        for (_, _, e) in self.c2.iter() {
            if let Some(v) = free_vars(e).into_iter().find(|v| !legal(v, allow_w)) {
                return Err(Error::InvalidReference(format!("c2 entry {e} depends on {v}")));
            }
        }
        for e in &self.c0 {
            if let Some(v) = free_vars(e).into_iter().find(|v| !legal(v, false)) {
                return Err(Error::InvalidReference(format!("c0 entry {e} depends on {v}")));
            }
        }
        Ok(())
    }

    /// `w^j_i ↦ c^j_i`.
    pub fn level_set(&self) -> BTreeMap<VarRef, Expr> {
        self.c2.iter().map(|(j, i, c)| (VarRef::w(j, &[i]), c.clone())).collect()
    }
}

/// `Ḡ^{12}_{ii'}` and `C_{ii'}`; `G^{12} = Ḡ + C` and `G^{21}_{ii'} = -G^{12}_{ii'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct SkewCorrection {
    pub gbar: Grid,
    pub c: Grid,
}

impl SkewCorrection {
    pub fn zeros(n: usize) -> Self {
        SkewCorrection { gbar: Grid::zeros(n, n), c: Grid::zeros(n, n) }
    }

    pub fn total(&self, i: usize, ip: usize) -> Expr {
        self.gbar.get(i, ip) + self.c.get(i, ip)
    }

    pub fn is_skew(&self) -> bool {
        self.gbar.is_skew() && self.c.is_skew()
    }
}

/// `F^{j'j}_{i'}`, stored by `(j', j, i')`.
#[derive(Clone, Debug, PartialEq)]
pub struct MixedData {
    m: usize,
    n: usize,
    data: Vec<Expr>,
}

impl MixedData {
    pub fn get(&self, jp: usize, j: usize, ip: usize) -> &Expr {
        &self.data[((jp - 1) * self.m + (j - 1)) * self.n + (ip - 1)]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Expr::is_zero)
    }
}

#[derive(Clone, Debug, Default)]
pub struct Diagnostics {
    /// Solvability conditions checked before solving.
    pub conditions: ConditionSetReport,
    /// `E1[j]`, `E2[j,j',i,i']`: output decomposition minus input data;
    /// `B[j',j,i']`, `B[j]`: linear and level-set parts of `F^j - E^j[f]`.
    pub contract: ConditionSetReport,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct LagrangianSolution {
    pub f: Expr,
    pub fbar: Expr,
    /// `A^j_i`, rows `j`, columns `i`.
    pub a1: Grid,
    pub a0: Expr,
    pub g: Option<SkewCorrection>,
    pub c: ReferenceFunctions,
    pub diagnostics: Diagnostics,
}

impl fmt::Display for LagrangianSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "f = {}", self.f)?;
        writeln!(f, "fbar = {}", self.fbar)?;
        for (j, i, a) in self.a1.iter() {
            writeln!(f, "A{j}[{i}] = {a}")?;
        }
        writeln!(f, "A = {}", self.a0)?;
        if let Some(g) = &self.g {
            for (i, ip, e) in g.gbar.iter().filter(|(i, ip, _)| i < ip) {
                writeln!(f, "Gbar[{i},{ip}] = {e}")?;
                writeln!(f, "C[{i},{ip}] = {}", g.c.get(i, ip))?;
            }
        }
        writeln!(f, "contract: {}", self.diagnostics.contract.weakest().label())?;
        for note in &self.diagnostics.notes {
            writeln!(f, "note: {note}")?;
        }
        Ok(())
    }
}

fn p(j: usize, i: usize) -> VarRef {
    VarRef::w(j, &[i])
}

/// `F + G` as a full table over ordered pairs of first-order variables.
fn hessian(data: &InverseProblemData, g: Option<&SkewCorrection>) -> PairTable {
    let mut h = data.f2.clone();
    if let (Some(g), 2) = (g, data.m) {
        for i in 1..=data.n {
            for ip in 1..=data.n {
                let gi = g.total(i, ip);
                if gi.is_zero() {
                    continue;
                }
                h.set(1, 2, i, ip, data.f2.get(1, 2, i, ip) + &gi);
                h.set(2, 1, i, ip, data.f2.get(2, 1, i, ip) - &gi);
            }
        }
    }
    h
}

/// `F^{j'j}_{i'} = (F^j)_{w^{j'}_{i'}} + Σ_i D⁰_i (F + G)^{jj'}_{ii'}`.
pub fn compute_mixed(data: &InverseProblemData, g: Option<&SkewCorrection>) -> Result<MixedData> {
    data.validate()?;
    let (n, m) = (data.n, data.m);
    if g.is_none() && m == 2 && n >= 2 {
        let varying = (1..=n).any(|i| (1..=n).any(|ip| !free_vars(data.f2.get(1, 2, i, ip)).is_empty()));
        if varying {
            return Err(Error::MissingG);
        }
    }
    let ctx = JetContext::new(n, m)?;
    let h = hessian(data, g);
    let mut out = Vec::with_capacity(m * m * n);
    for jp in 1..=m {
        for j in 1..=m {
            for ip in 1..=n {
                let mut acc = Poly::of(&pdiff(&data.f1[j - 1], &p(jp, ip)));
                for i in 1..=n {
                    acc.add_assign(Poly::of(&ctx.truncated_derivative(h.get(j, jp, i, ip), i)));
                }
                out.push(acc.into_expr());
            }
        }
    }
    Ok(MixedData { m, n, data: out })
}

fn first_order_pairs(n: usize, m: usize) -> Vec<(usize, usize)> {
    (1..=m).flat_map(|j| (1..=n).map(move |i| (j, i))).collect()
}

/// `f̄ = Σ_{a,b} ∫₀¹ (1-t) H_{ab}(c + t(p - c)) dt (p_a - c_a)(p_b - c_b)` over
/// first-order variables `p`, verified against the Hessian system.
pub fn build_fbar(
    data: &InverseProblemData,
    g: Option<&SkewCorrection>,
    refs: &ReferenceFunctions,
    cfg: &ZeroTestConfig,
) -> Result<Expr> {
    data.validate()?;
    let (n, m) = (data.n, data.m);
    let h = hessian(data, g);
    let pairs = first_order_pairs(n, m);
    let line = segment(&pairs.iter().map(|&(j, i)| (p(j, i), refs.c2.get(j, i).clone())).collect::<Vec<_>>());
    let q = |(j, i): (usize, usize)| &Expr::w(j, &[i]) - refs.c2.get(j, i);
    let weight = &Expr::one() - &Expr::t();
    let mut acc = Poly::zero();
    for (a, &u) in pairs.iter().enumerate() {
        for &v in &pairs[a..] {
            let hab = h.get(u.0, v.0, u.1, v.1);
            if hab.is_zero() {
                continue;
            }
            let k = integrate_unit(&(&weight * &substitute(hab, &line)), "particular solution")?;
            let mult = if u == v { Expr::one() } else { Expr::int(2) };
            acc.add_assign(Poly::of(&(&(&mult * &k) * &(&q(u) * &q(v)))));
        }
    }
    let fbar = acc.into_expr();
    for (a, &u) in pairs.iter().enumerate() {
        let grad = pdiff(&fbar, &p(u.0, u.1));
        for &v in &pairs[a..] {
            let r = &pdiff(&grad, &p(v.0, v.1)) - h.get(u.0, v.0, u.1, v.1);
            if is_zero(&r, cfg)?.is_nonzero() {
                return Err(Error::IncompatibleHessian(format!(
                    "second derivative by {} and {} differs from the data by {r}",
                    p(u.0, u.1),
                    p(v.0, v.1)
                )));
            }
        }
    }
    Ok(fbar)
}

/// `ρ^j = F^j - E^j[f̄]`.
fn residual(data: &InverseProblemData, fbar: &Expr, ctx: &JetContext) -> Result<Vec<Expr>> {
    let e1 = el_split_first_order(fbar, ctx)?.e1;
    Ok(data.f1.iter().zip(&e1).map(|(fj, ej)| fj - ej).collect())
}

/// `M^{(i)}_{kj} = ∂ρ^k/∂w^j_i` on the level set.
fn linear_part(rho: &[Expr], sigma: &BTreeMap<VarRef, Expr>, n: usize) -> Vec<Vec<Vec<Expr>>> {
    let m = rho.len();
    (1..=n)
        .map(|i| {
            (0..m).map(|k| (1..=m).map(|j| substitute(&pdiff(&rho[k], &p(j, i)), sigma)).collect()).collect()
        })
        .collect()
}

/// `∂β_2/∂w^1 - ∂β_1/∂w^2` for `m = 2`, written without the potentials
/// `A^j_i` (valid for `c^j_i` depending on `x` only).
pub(crate) fn closure_residual(rho: &[Expr], refs: &ReferenceFunctions) -> Expr {
    let n = refs.c2.cols();
    let sigma = refs.level_set();
    let rl: Vec<Expr> = rho.iter().map(|r| substitute(r, &sigma)).collect();
    let w = |j: usize| VarRef::w(j, &[]);
    let mut acc = Poly::of(&pdiff(&rl[1], &w(1)));
    acc.add_assign(Poly::of(&-pdiff(&rl[0], &w(2))));
    for i in 1..=n {
        let m12 = substitute(&pdiff(&rho[0], &p(2, i)), &sigma);
        acc.add_assign(Poly::of(&pdiff(&m12, &VarRef::x(i))));
        for j in 1..=2 {
            acc.add_assign(Poly::of(&(refs.c2.get(j, i) * &pdiff(&m12, &w(j)))));
        }
    }
    acc.into_expr()
}

fn check(report: &mut ConditionSetReport, id: String, r: Expr, cfg: &ZeroTestConfig) -> Result<()> {
    report.check(id, r, cfg)
}

/// Output decomposition against the input data.
fn contract(f: &Expr, data: &InverseProblemData, refs: &ReferenceFunctions, ctx: &JetContext, cfg: &ZeroTestConfig) -> Result<ConditionSetReport> {
    let (n, m) = (data.n, data.m);
    let dec = el_split_first_order(f, ctx)?;
    let sigma = refs.level_set();
    let mut report = ConditionSetReport::default();
    for j in 1..=m {
        for jp in j..=m {
            for i in 1..=n {
                for ip in 1..=n {
                    if j == jp && ip < i {
                        continue;
                    }
                    let r = dec.e2.get(j, jp, i, ip) - data.f2.get(j, jp, i, ip);
                    check(&mut report, format!("E2[{j},{jp},{i},{ip}]"), r, cfg)?;
                }
            }
        }
    }
    for j in 1..=m {
        let d = &data.f1[j - 1] - &dec.e1[j - 1];
        for jp in 1..=m {
            for ip in 1..=n {
                check(&mut report, format!("B[{jp},{j},{ip}]"), pdiff(&d, &p(jp, ip)), cfg)?;
            }
        }
        check(&mut report, format!("B[{j}]"), substitute(&d, &sigma), cfg)?;
        check(&mut report, format!("E1[{j}]"), d, cfg)?;
    }
    Ok(report)
}

fn fail_on(report: &ConditionSetReport) -> Result<()> {
    if report.has_failure() {
        return Err(Error::ConditionsFailed(Box::new(report.clone())));
    }
    Ok(())
}

/// The shared pipeline once `G` is fixed.
fn assemble(
    data: &InverseProblemData,
    g: Option<SkewCorrection>,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    cfg: &ZeroTestConfig,
    conditions: ConditionSetReport,
) -> Result<LagrangianSolution> {
    let (n, m) = (data.n, data.m);
    let fbar = build_fbar(data, g.as_ref(), refs, cfg)?;
    let rho = residual(data, &fbar, ctx)?;
    let sigma = refs.level_set();
    let mut a1 = Grid::zeros(m, n);
    if m >= 2 {
        let lin = linear_part(&rho, &sigma, n);
        for (idx, big_m) in lin.iter().enumerate() {
            let i = idx + 1;
            let alpha = two_form_potential(big_m, &refs.c0)?;
            for k in 1..=m {
                for j in k..=m {
                    let wk = VarRef::w(k, &[]);
                    let wj = VarRef::w(j, &[]);
                    let r = &(&pdiff(&alpha[j - 1], &wk) - &pdiff(&alpha[k - 1], &wj)) - &big_m[k - 1][j - 1];
                    if is_zero(&r, cfg)?.is_nonzero() {
                        return Err(Error::PotentialVerificationFailed(format!(
                            "first-order potential for i = {i} misses the two-form component ({k},{j}) by {r}"
                        )));
                    }
                }
            }
            for (j, a) in alpha.into_iter().enumerate() {
                a1.set(j + 1, i, a);
            }
        }
    }
    let beta: Vec<Expr> = (1..=m)
        .map(|j| {
            let mut acc = Poly::of(&substitute(&rho[j - 1], &sigma));
            for i in 1..=n {
                let a = a1.get(j, i);
                acc.add_assign(Poly::of(&pdiff(a, &VarRef::x(i))));
                for jpp in 1..=m {
                    acc.add_assign(Poly::of(&(refs.c2.get(jpp, i) * &pdiff(a, &VarRef::w(jpp, &[])))));
                }
            }
            acc.into_expr()
        })
        .collect();
    let a0 = one_form_potential(&beta, &refs.c0)?;
    for (j, b) in beta.iter().enumerate() {
        let r = &pdiff(&a0, &VarRef::w(j + 1, &[])) - b;
        if is_zero(&r, cfg)?.is_nonzero() {
            return Err(Error::PotentialVerificationFailed(format!(
                "order-zero potential misses component {} by {r}",
                j + 1
            )));
        }
    }
    let mut f = Poly::of(&fbar);
    for (j, i, a) in a1.iter() {
        f.add_assign(Poly::of(&(a * &(&Expr::w(j, &[i]) - refs.c2.get(j, i)))));
    }
    f.add_assign(Poly::of(&a0));
    let f = f.into_expr();
    let contract = contract(&f, data, refs, ctx, cfg)?;
    if contract.has_failure() {
        return Err(Error::PotentialVerificationFailed(format!(
            "the reconstructed Lagrangian misses the data at {}",
            contract.failed_ids().join(", ")
        )));
    }
    let mut notes = Vec::new();
    if conditions.weakest() != ZeroStatus::Zero {
        notes.push("some solvability conditions hold only probabilistically".to_string());
    }
    if contract.weakest() != ZeroStatus::Zero {
        notes.push("the residual contract holds only probabilistically".to_string());
    }
    Ok(LagrangianSolution {
        f,
        fbar,
        a1,
        a0,
        g,
        c: refs.clone(),
        diagnostics: Diagnostics { conditions, contract, notes },
    })
}

fn expect_shape(data: &InverseProblemData, ctx: &JetContext) -> Result<()> {
    data.validate()?;
    if data.n != ctx.n() || data.m != ctx.m() {
        return Err(Error::WrongShape(format!(
            "data has n = {}, m = {} but the context has n = {}, m = {}",
            data.n,
            data.m,
            ctx.n(),
            ctx.m()
        )));
    }
    Ok(())
}

/// One dependent variable. `A^1_i = 0`; `c^1_i` may depend on `x` and `w`.
pub fn solve_m1(
    data: &InverseProblemData,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    opts: &SolverOptions,
) -> Result<LagrangianSolution> {
    expect_shape(data, ctx)?;
    if data.m != 1 {
        return Err(Error::WrongShape(format!("m = 1 solver applied to m = {}", data.m)));
    }
    refs.validate(ctx, true)?;
    let conditions = conditions_m1(data, &opts.zero)?;
    fail_on(&conditions)?;
    assemble(data, None, refs, ctx, &opts.zero, conditions)
}

/// One independent variable; `c^j_1` depend on `x` only.
pub fn solve_n1(
    data: &InverseProblemData,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    opts: &SolverOptions,
) -> Result<LagrangianSolution> {
    expect_shape(data, ctx)?;
    if data.n != 1 {
        return Err(Error::WrongShape(format!("n = 1 solver applied to n = {}", data.n)));
    }
    refs.validate(ctx, false)?;
    let c: Vec<Expr> = (1..=data.m).map(|j| refs.c2.get(j, 1).clone()).collect();
    let conditions = conditions_n1(data, &c, &opts.zero)?;
    fail_on(&conditions)?;
    assemble(data, None, refs, ctx, &opts.zero, conditions)
}

/// Two dependent variables; `c^j_i` depend on `x` only.
pub fn solve_m2(
    data: &InverseProblemData,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    opts: &SolverOptions,
) -> Result<LagrangianSolution> {
    expect_shape(data, ctx)?;
    if data.m != 2 {
        return Err(Error::WrongShape(format!("m = 2 solver applied to m = {}", data.m)));
    }
    refs.validate(ctx, false)?;
    let conditions = conditions_m2(data, &opts.zero)?;
    fail_on(&conditions)?;
    let g = build_g_m2(data, refs, ctx, opts)?;
    assemble(data, Some(g), refs, ctx, &opts.zero, conditions)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverCase {
    M1,
    N1,
    M2,
}

impl SolverCase {
    /// `m = 1` first, then `n = 1`, then `m = 2`.
    pub fn for_shape(n: usize, m: usize) -> Option<SolverCase> {
        match (n, m) {
            (_, 1) => Some(SolverCase::M1),
            (1, _) => Some(SolverCase::N1),
            (_, 2) => Some(SolverCase::M2),
            _ => None,
        }
    }
}

pub fn solve(
    data: &InverseProblemData,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    case: Option<SolverCase>,
    opts: &SolverOptions,
) -> Result<LagrangianSolution> {
    let case = case
        .or_else(|| SolverCase::for_shape(data.n, data.m))
        .ok_or_else(|| Error::WrongShape(format!("no solver for n = {}, m = {}", data.n, data.m)))?;
    match case {
        SolverCase::M1 => solve_m1(data, refs, ctx, opts),
        SolverCase::N1 => solve_n1(data, refs, ctx, opts),
        SolverCase::M2 => solve_m2(data, refs, ctx, opts),
    }
}
