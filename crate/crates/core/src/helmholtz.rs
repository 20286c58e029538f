//! Variationality checks: the general test in the extended jet space and the
//! first-order solvability condition sets for `m = 1`, `n = 1` and `m = 2`.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{free_vars, pdiff, rat, substitute, sum, Expr, Poly, VarRef};
use crate::jet::JetContext;
use crate::report::ConditionSetReport;
use crate::variational::{euler_lagrange, InverseProblemData};
use crate::zero::{is_zero, Witness, ZeroStatus, ZeroTestConfig};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Verdict {
    Variational,
    LikelyVariational,
    NotVariational,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Variational => "Variational",
            Verdict::LikelyVariational => "LikelyVariational",
            Verdict::NotVariational => "NotVariational",
        })
    }
}

/// Coefficient of the variation `variation` in the extended Euler–Lagrange
/// expression `e^j[Σ e^k w^k_t]`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelmholtzResidual {
    pub j: usize,
    pub variation: VarRef,
    pub coefficient: Expr,
    pub status: ZeroStatus,
}

impl HelmholtzResidual {
    pub fn id(&self) -> String {
        format!("e{}:{}", self.j, self.variation)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HelmholtzReport {
    pub verdict: Verdict,
    /// Sorted by `(j, variation)`.
    pub residuals: Vec<HelmholtzResidual>,
    /// First failing residual in key order.
    pub witness: Option<(String, Witness)>,
}

impl HelmholtzReport {
    /// Zero-tests the coefficients in any order; the report depends only on
    /// the set of `(j, variation, coefficient)` triples.
    pub fn assemble(
        coefficients: impl IntoIterator<Item = (usize, VarRef, Expr)>,
        cfg: &ZeroTestConfig,
    ) -> Result<Self> {
        let mut sorted: BTreeMap<(usize, VarRef), Expr> = BTreeMap::new();
        for (j, v, c) in coefficients {
            let slot = sorted.entry((j, v)).or_insert_with(Expr::zero);
            *slot = &*slot + &c;
        }
        let mut residuals = Vec::with_capacity(sorted.len());
        for ((j, variation), coefficient) in sorted {
            if coefficient.is_zero() {
                continue;
            }
            let status = is_zero(&coefficient, cfg)?;
            residuals.push(HelmholtzResidual { j, variation, coefficient, status });
        }
        let witness = residuals.iter().find_map(|r| match &r.status {
            ZeroStatus::NonZero(w) => Some((r.id(), (**w).clone())),
            _ => None,
        });
        let verdict = if witness.is_some() {
            Verdict::NotVariational
        } else if residuals.iter().all(|r| r.status == ZeroStatus::Zero) {
            Verdict::Variational
        } else {
            Verdict::LikelyVariational
        };
        Ok(HelmholtzReport { verdict, residuals, witness })
    }
}

impl fmt::Display for HelmholtzReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "verdict: {}", self.verdict)?;
        for r in &self.residuals {
            writeln!(f, "{} = {} : {}", r.id(), r.coefficient, r.status.label())?;
        }
        if let Some((id, w)) = &self.witness {
            writeln!(f, "witness: {id} at {w}")?;
        }
        Ok(())
    }
}

/// Builds `F = Σ e^j w^j_t` in the extended context and splits each
/// `e^j[F]` into coefficients of the variations.
pub fn helmholtz_check(e: &[Expr], ctx: &JetContext, cfg: &ZeroTestConfig) -> Result<HelmholtzReport> {
    if e.len() != ctx.m() {
        return Err(Error::WrongShape(format!("expected {} expressions, got {}", ctx.m(), e.len())));
    }
    for ej in e {
        ctx.validate(ej)?;
    }
    let ext = ctx.extend()?;
    let products: Vec<Expr> =
        e.iter().enumerate().map(|(k, ek)| ek * &Expr::Var(VarRef::variation(k + 1, &[]))).collect();
    let big_f = sum(&products);
    let el = euler_lagrange(&big_f, &ext)?;
    let mut coefficients = Vec::new();
    for (idx, r) in el.iter().enumerate() {
        let j = idx + 1;
        let mut rest = Poly::of(r);
        for v in free_vars(r).into_iter().filter(VarRef::is_variation) {
            let c = pdiff(r, &v);
            if free_vars(&c).iter().any(VarRef::is_variation) {
                return Err(Error::MalformedResidual { j, residual: r.to_string() });
            }
            rest.add_assign(Poly::of(&-(&c * &Expr::Var(v.clone()))));
            coefficients.push((j, v, c));
        }
        if !rest.is_zero() {
            return Err(Error::MalformedResidual { j, residual: r.to_string() });
        }
    }
    HelmholtzReport::assemble(coefficients, cfg)
}

fn p(j: usize, i: usize) -> VarRef {
    VarRef::w(j, &[i])
}

fn w0(j: usize) -> VarRef {
    VarRef::w(j, &[])
}

fn dp(e: &Expr, j: usize, i: usize) -> Expr {
    pdiff(e, &p(j, i))
}

fn dw(e: &Expr, j: usize) -> Expr {
    pdiff(e, &w0(j))
}

fn dx(e: &Expr, i: usize) -> Expr {
    pdiff(e, &VarRef::x(i))
}

fn ids(xs: &[usize]) -> String {
    xs.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn expect_data(data: &InverseProblemData, n: Option<usize>, m: Option<usize>) -> Result<()> {
    data.validate()?;
    if n.is_some_and(|n| n != data.n) || m.is_some_and(|m| m != data.m) {
        return Err(Error::WrongShape(format!("condition set does not apply to n = {}, m = {}", data.n, data.m)));
    }
    Ok(())
}

/// `F^{j'j}_{i'} = (F^j)_{w^{j'}_{i'}} + Σ_i D⁰_i F^{jj'}_{ii'}` with the
/// truncated total derivative `D⁰_i`; skew correction terms are not included.
pub(crate) fn mixed_from_symmetric(data: &InverseProblemData, ctx: &JetContext, jp: usize, j: usize, ip: usize) -> Expr {
    let mut acc = Poly::of(&dp(&data.f1[j - 1], jp, ip));
    for i in 1..=data.n {
        acc.add_assign(Poly::of(&ctx.truncated_derivative(data.f2.get(j, jp, i, ip), i)));
    }
    acc.into_expr()
}

/// Conditions for `m = 1`: ids `(3.2)[i,i',i'']` with `i' < i''` and `(3.3)[i']`.
pub fn conditions_m1(data: &InverseProblemData, cfg: &ZeroTestConfig) -> Result<ConditionSetReport> {
    expect_data(data, None, Some(1))?;
    let n = data.n;
    let f = |i, ip| data.f2.get(1, 1, i, ip);
    let mut report = ConditionSetReport::default();
    for i in 1..=n {
        for ip in 1..=n {
            for ipp in ip + 1..=n {
                let r = &dp(f(i, ip), 1, ipp) - &dp(f(i, ipp), 1, ip);
                report.check(format!("(3.2)[{}]", ids(&[i, ip, ipp])), r, cfg)?;
            }
        }
    }
    let ctx = JetContext::new(n, 1)?;
    for ip in 1..=n {
        report.check(format!("(3.3)[{ip}]"), mixed_from_symmetric(data, &ctx, 1, 1, ip), cfg)?;
    }
    Ok(report)
}

/// Substitution `w^j_i := c^j_i` onto the level set.
pub(crate) fn level_set(c1: &[Vec<Expr>]) -> BTreeMap<VarRef, Expr> {
    let mut map = BTreeMap::new();
    for (j, row) in c1.iter().enumerate() {
        for (i, c) in row.iter().enumerate() {
            map.insert(p(j + 1, i + 1), c.clone());
        }
    }
    map
}

/// Conditions for `n = 1` with reference functions `c^j = c^j_1(x)`, which
/// must have length `m`.
///
/// `(4.4)` components are emitted only for `m ≥ 3`, where a two-form in the
/// dependent variables can fail to be closed. `(4.5)[k,j]` is the closedness
/// of the one-form defining the order-zero correction, evaluated on the level
/// set; it includes the contribution of the particular solution when `c`
/// depends on `x`.
pub fn conditions_n1(data: &InverseProblemData, c: &[Expr], cfg: &ZeroTestConfig) -> Result<ConditionSetReport> {
    expect_data(data, Some(1), None)?;
    let m = data.m;
    if c.len() != m {
        return Err(Error::WrongShape(format!("expected {m} reference functions, got {}", c.len())));
    }
    check_x_only(c)?;
    let ctx = JetContext::new(1, m)?;
    let f2 = |j, jp| data.f2.get(j, jp, 1, 1);
    let mut report = ConditionSetReport::default();
    for j in 1..=m {
        for jp in 1..=m {
            for jpp in jp + 1..=m {
                let r = &dp(f2(j, jp), jpp, 1) - &dp(f2(j, jpp), jp, 1);
                report.check(format!("(4.2)[{}]", ids(&[j, jp, jpp])), r, cfg)?;
            }
        }
    }
    // mixed[(jp, j)] = F^{j'j}_1
    let mut mixed = BTreeMap::new();
    for jp in 1..=m {
        for j in 1..=m {
            mixed.insert((jp, j), mixed_from_symmetric(data, &ctx, jp, j, 1));
        }
    }
    for j in 1..=m {
        for jp in j..=m {
            report.check(format!("(4.3a)[{j},{jp}]"), &mixed[&(jp, j)] + &mixed[&(j, jp)], cfg)?;
        }
    }
    for j in 1..=m {
        for jp in (1..=m).filter(|&jp| jp != j) {
            for jpp in 1..=m {
                let r = &(&dp(&mixed[&(jp, j)], jpp, 1) - &dw(f2(jp, jpp), j)) + &dw(f2(j, jpp), jp);
                report.check(format!("(4.3b)[{}]", ids(&[j, jp, jpp])), r, cfg)?;
            }
        }
    }
    let sigma = level_set(&c.iter().map(|cj| vec![cj.clone()]).collect::<Vec<_>>());
    // M_{kj} = F^{jk}_1 on the level set: the coefficient of w^j_1 in the
    // order-zero residual of equation k.
    let big_m = |k: usize, j: usize| substitute(&mixed[&(j, k)], &sigma);
    if m >= 3 {
        for a in 1..=m {
            for b in a + 1..=m {
                for d in b + 1..=m {
                    let r = sum(&[dw(&big_m(b, d), a), dw(&big_m(d, a), b), dw(&big_m(a, b), d)]);
                    report.check(format!("(4.4)[{}]", ids(&[a, b, d])), r, cfg)?;
                }
            }
        }
    }
    // Order-zero residual ρ^j = F^j - E^j[f̄] on the level set.
    let rho: Vec<Expr> = (1..=m)
        .map(|j| {
            let mut acc = Poly::of(&substitute(&data.f1[j - 1], &sigma));
            for jp in 1..=m {
                let term = &substitute(f2(j, jp), &sigma) * &dx(&c[jp - 1], 1);
                acc.add_assign(Poly::of(&-term));
            }
            acc.into_expr()
        })
        .collect();
    for k in 1..=m {
        for j in k + 1..=m {
            let mkj = big_m(k, j);
            let mut acc = Poly::of(&(&dw(&rho[j - 1], k) - &dw(&rho[k - 1], j)));
            acc.add_assign(Poly::of(&dx(&mkj, 1)));
            for jpp in 1..=m {
                acc.add_assign(Poly::of(&(&c[jpp - 1] * &dw(&mkj, jpp))));
            }
            report.check(format!("(4.5)[{k},{j}]"), acc.into_expr(), cfg)?;
        }
    }
    Ok(report)
}

pub(crate) fn check_x_only(c: &[Expr]) -> Result<()> {
    for e in c {
        if let Some(v) = free_vars(e).into_iter().find(|v| !matches!(v, VarRef::Independent(i) if !i.is_t())) {
            return Err(Error::InvalidReference(format!("{e} depends on {v}")));
        }
    }
    Ok(())
}

/// Right-hand sides `∂G^{12}_{ii'}/∂w^1_k` (`P`) and `∂G^{12}_{ii'}/∂w^2_k`
/// (`Q`) of the first-order system for the skew part of the Hessian.
pub(crate) fn skew_gradient(data: &InverseProblemData, i: usize, ip: usize, j: usize, k: usize) -> Expr {
    let f = |a, b, r, s| data.f2.get(a, b, r, s);
    if i == ip {
        return Expr::zero();
    }
    match j {
        1 => &dp(f(1, 1, i, k), 2, ip) - &dp(f(1, 2, i, ip), 1, k),
        _ => &dp(f(1, 2, i, ip), 2, k) - &dp(f(2, 2, i, k), 1, ip),
    }
}

/// Conditions for `m = 2`. None of them involve reference functions.
///
/// * `(5.3)[j,i,j',i',j'',i'']`: symmetric third derivatives not involving
///   the skew part, for `(j',i') < (j'',i'')`.
/// * `(5.5)[j,j',i']` for `j ≤ j'`.
/// * `(5.6)[i',j'',i'']`: the mixed-function identity for the pair `(1,2)`
///   with every derivative of the skew part replaced by its gradient.
/// * `(5.8a)[i,i',k]`, `(5.8b)[i,i',k]` for `i ≤ i'`.
/// * `(5.10a)[i,i',k,k']`, `(5.10b)[i,i',k,k']`, `(5.10c)[i,i',k,k']`:
///   integrability of the gradient system for `i < i'`.
/// * `(5.7)`: closedness of the one-form defining the order-zero correction,
///   on the level set `w^j_i = 0`. There the skew part enters only through
///   `Σ_{i,k} ∂_i ∂_k C_{ki} = 0`, so no choice of it can repair a failure.
pub fn conditions_m2(data: &InverseProblemData, cfg: &ZeroTestConfig) -> Result<ConditionSetReport> {
    expect_data(data, None, Some(2))?;
    let n = data.n;
    let ctx = JetContext::new(n, 2)?;
    let f = |a, b, r, s| data.f2.get(a, b, r, s);
    let mut report = ConditionSetReport::default();

    let pairs: Vec<(usize, usize)> = (1..=2).flat_map(|j| (1..=n).map(move |i| (j, i))).collect();
    let skew_free = |j: usize, i: usize, (jp, ip): (usize, usize)| jp == j || ip == i;
    for j in 1..=2 {
        for i in 1..=n {
            for (a, &u) in pairs.iter().enumerate() {
                for &v in &pairs[a + 1..] {
                    if !(skew_free(j, i, u) && skew_free(j, i, v)) {
                        continue;
                    }
                    let r = &dp(f(j, u.0, i, u.1), v.0, v.1) - &dp(f(j, v.0, i, v.1), u.0, u.1);
                    report.check(format!("(5.3)[{}]", ids(&[j, i, u.0, u.1, v.0, v.1])), r, cfg)?;
                }
            }
        }
    }

    for j in 1..=2 {
        for jp in j..=2 {
            for ip in 1..=n {
                let r = &mixed_from_symmetric(data, &ctx, jp, j, ip) + &mixed_from_symmetric(data, &ctx, j, jp, ip);
                report.check(format!("(5.5)[{}]", ids(&[j, jp, ip])), r, cfg)?;
            }
        }
    }

    for ip in 1..=n {
        let base = mixed_from_symmetric(data, &ctx, 1, 2, ip);
        for jpp in 1..=2 {
            for ipp in 1..=n {
                let mut acc = Poly::of(&dp(&base, jpp, ipp));
                for k in 1..=n {
                    // ∂G^{21}_{ki'}/∂w^{j''}_{i''} = -∂G^{12}_{ki'}/∂w^{j''}_{i''}
                    let g = skew_gradient(data, k, ip, jpp, ipp);
                    acc.add_assign(Poly::of(&-ctx.truncated_derivative(&g, k)));
                }
                acc.add_assign(Poly::of(&-dw(f(1, jpp, ip, ipp), 2)));
                acc.add_assign(Poly::of(&dw(f(2, jpp, ip, ipp), 1)));
                report.check(format!("(5.6)[{}]", ids(&[ip, jpp, ipp])), acc.into_expr(), cfg)?;
            }
        }
    }

    for i in 1..=n {
        for ip in i..=n {
            for k in 1..=n {
                let a = &(&dp(f(1, 1, i, k), 2, ip) + &dp(f(1, 1, ip, k), 2, i)) - &dp(f(1, 2, i, ip), 1, k).scale(&rat(2, 1));
                report.check(format!("(5.8a)[{}]", ids(&[i, ip, k])), a, cfg)?;
                let b = &(&dp(f(2, 2, i, k), 1, ip) + &dp(f(2, 2, ip, k), 1, i)) - &dp(f(1, 2, i, ip), 2, k).scale(&rat(2, 1));
                report.check(format!("(5.8b)[{}]", ids(&[i, ip, k])), b, cfg)?;
            }
        }
    }

    for i in 1..=n {
        for ip in i + 1..=n {
            let pk = |k| skew_gradient(data, i, ip, 1, k);
            let qk = |k| skew_gradient(data, i, ip, 2, k);
            for k in 1..=n {
                for kp in 1..=n {
                    let r = &dp(&pk(k), 2, kp) - &dp(&qk(kp), 1, k);
                    report.check(format!("(5.10a)[{}]", ids(&[i, ip, k, kp])), r, cfg)?;
                }
                for kp in k + 1..=n {
                    let r = &dp(&pk(k), 1, kp) - &dp(&pk(kp), 1, k);
                    report.check(format!("(5.10b)[{}]", ids(&[i, ip, k, kp])), r, cfg)?;
                    let r = &dp(&qk(k), 2, kp) - &dp(&qk(kp), 2, k);
                    report.check(format!("(5.10c)[{}]", ids(&[i, ip, k, kp])), r, cfg)?;
                }
            }
        }
    }
    let zero_level: BTreeMap<VarRef, Expr> =
        (1..=2).flat_map(|j| (1..=n).map(move |i| (p(j, i), Expr::zero()))).collect();
    let mut acc = Poly::of(&dw(&substitute(&data.f1[1], &zero_level), 1));
    acc.add_assign(Poly::of(&-dw(&substitute(&data.f1[0], &zero_level), 2)));
    for i in 1..=n {
        let mixed = substitute(&mixed_from_symmetric(data, &ctx, 2, 1, i), &zero_level);
        acc.add_assign(Poly::of(&dx(&mixed, i)));
    }
    report.check("(5.7)", acc.into_expr(), cfg)?;
    Ok(report)
}
