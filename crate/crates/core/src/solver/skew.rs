//! The skew correction `G^{12}_{ii'} = Ḡ_{ii'} + C_{ii'}` for `m = 2`.
//!
//! `Ḡ` is the potential of the skew gradients `(P, Q)`, vanishing on the
//! level set. `C` depends on `x` and `w` only; it shifts `f̄` by
//! `L = Σ_{i<i'} C_{ii'} (q^1_i q^2_{i'} - q^1_{i'} q^2_i)` with
//! `q^j_i = w^j_i - c^j_i`, so the closure residual of the order-zero
//! one-form is affine in `C` and polynomial `C` is found by exact
//! coefficient matching. Since `L` is itself a Lagrangian, the linear part
//! vanishes identically: `C = 0` whenever any `C` works, and the fit fails
//! exactly when the data-only closure condition does.

use std::collections::BTreeMap;

use num_traits::{One, Zero};

use super::homotopy::{integrate_unit, segment};
use super::{build_fbar, closure_residual, residual, ReferenceFunctions, SkewCorrection, SolverOptions};
use crate::error::{Error, Result};
use crate::expr::{pdiff, substitute, Expr, Mono, Poly, Rational, VarRef};
use crate::helmholtz::{conditions_m2, skew_gradient};
use crate::jet::JetContext;
use crate::report::ConditionSetReport;
use crate::tables::Grid;
use crate::variational::{el_split_first_order, InverseProblemData};
use crate::zero::{is_zero, ZeroTestConfig};

fn p(j: usize, i: usize) -> VarRef {
    VarRef::w(j, &[i])
}

fn q(refs: &ReferenceFunctions, j: usize, i: usize) -> Expr {
    &Expr::w(j, &[i]) - refs.c2.get(j, i)
}

fn gbar_grid(data: &InverseProblemData, refs: &ReferenceFunctions, cfg: &ZeroTestConfig) -> Result<Grid> {
    let n = data.n;
    let pairs: Vec<(VarRef, Expr)> =
        (1..=2).flat_map(|j| (1..=n).map(move |i| (j, i))).map(|(j, i)| (p(j, i), refs.c2.get(j, i).clone())).collect();
    let line = segment(&pairs);
    let mut gbar = Grid::zeros(n, n);
    for i in 1..=n {
        for ip in i + 1..=n {
            let grads: Vec<(usize, usize, Expr)> = (1..=n)
                .flat_map(|k| [(1, k, skew_gradient(data, i, ip, 1, k)), (2, k, skew_gradient(data, i, ip, 2, k))])
                .collect();
            let mut integrand = Poly::zero();
            for (j, k, g) in &grads {
                if !g.is_zero() {
                    integrand.add_assign(Poly::of(&(&substitute(g, &line) * &q(refs, *j, *k))));
                }
            }
            let g = integrate_unit(&integrand.into_expr(), "skew correction")?;
            for (j, k, grad) in &grads {
                let r = &pdiff(&g, &p(*j, *k)) - grad;
                if is_zero(&r, cfg)?.is_nonzero() {
                    return Err(Error::PotentialVerificationFailed(format!(
                        "Gbar[{i},{ip}] misses its gradient along {} by {r}",
                        p(*j, *k)
                    )));
                }
            }
            gbar.set(ip, i, -&g);
            gbar.set(i, ip, g);
        }
    }
    Ok(gbar)
}

/// Exponent vectors of total degree at most `d` in `k` variables.
fn exponents(k: usize, d: usize) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for e in 0..=d {
        for mut rest in exponents(k - 1, d - e) {
            rest.insert(0, e as u32);
            out.push(rest);
        }
    }
    out
}

/// Some solution of `A a = b`, free unknowns set to 0; `None` when inconsistent.
fn solve_linear(mut rows: Vec<(Vec<Rational>, Rational)>, unknowns: usize) -> Option<Vec<Rational>> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(found) = (r..rows.len()).find(|&k| !rows[k].0[col].is_zero()) else {
            continue;
        };
        rows.swap(r, found);
        let inv = Rational::one() / rows[r].0[col].clone();
        let (lhs, rhs) = &mut rows[r];
        lhs.iter_mut().for_each(|v| *v *= inv.clone());
        *rhs *= inv;
        let pivot = rows[r].clone();
        for (k, row) in rows.iter_mut().enumerate() {
            if k == r || row.0[col].is_zero() {
                continue;
            }
            let factor = row.0[col].clone();
            for (v, pv) in row.0.iter_mut().zip(&pivot.0) {
                *v -= factor.clone() * pv;
            }
            row.1 -= factor * &pivot.1;
        }
        pivots.push(col);
        r += 1;
    }
    if rows[r..].iter().any(|(_, rhs)| !rhs.is_zero()) {
        return None;
    }
    let mut sol = vec![Rational::zero(); unknowns];
    for (row, &col) in rows.iter().zip(&pivots) {
        sol[col] = row.1.clone();
    }
    Some(sol)
}

fn closure_of(
    data: &InverseProblemData,
    g: &SkewCorrection,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    cfg: &ZeroTestConfig,
) -> Result<Expr> {
    let fbar = build_fbar(data, Some(g), refs, cfg)?;
    Ok(closure_residual(&residual(data, &fbar, ctx)?, refs))
}

/// `C` of total degree at most `degree` in `(x, w)` cancelling the closure
/// residual `omega0`.
fn fit_c(
    omega0: &Expr,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    degree: usize,
) -> Result<Grid> {
    let n = ctx.n();
    let vars: Vec<Expr> = (1..=n).map(Expr::x).chain([Expr::w(1, &[]), Expr::w(2, &[])]).collect();
    let monomials: Vec<Expr> = exponents(vars.len(), degree)
        .into_iter()
        .map(|exps| vars.iter().zip(exps).fold(Expr::one(), |acc, (v, e)| &acc * &v.powi(e as i64)))
        .collect();
    let mut basis = Vec::new();
    let mut columns: Vec<Poly> = Vec::new();
    for a in 1..=n {
        for b in a + 1..=n {
            let wedge = &(&q(refs, 1, a) * &q(refs, 2, b)) - &(&q(refs, 1, b) * &q(refs, 2, a));
            for mu in &monomials {
                let rho: Vec<Expr> = el_split_first_order(&(mu * &wedge), ctx)?.e1.iter().map(|e| -e).collect();
                columns.push(Poly::of(&closure_residual(&rho, refs)));
                basis.push((a, b, mu.clone()));
            }
        }
    }
    let target = Poly::of(omega0);
    let mut keys: Vec<&Mono> = target.terms.keys().collect();
    for col in &columns {
        keys.extend(col.terms.keys());
    }
    keys.sort();
    keys.dedup();
    let rows: Vec<(Vec<Rational>, Rational)> = keys
        .iter()
        .map(|key| {
            let lhs = columns.iter().map(|c| c.terms.get(*key).cloned().unwrap_or_else(Rational::zero)).collect();
            let rhs = -target.terms.get(*key).cloned().unwrap_or_else(Rational::zero);
            (lhs, rhs)
        })
        .collect();
    let sol = solve_linear(rows, basis.len()).ok_or(Error::AnsatzFailed { degree })?;
    let mut acc: BTreeMap<(usize, usize), Poly> = BTreeMap::new();
    for ((a, b, mu), coeff) in basis.into_iter().zip(sol) {
        if !coeff.is_zero() {
            acc.entry((a, b)).or_default().add_assign(Poly::of(&mu.scale(&coeff)));
        }
    }
    let mut c = Grid::zeros(n, n);
    for ((a, b), poly) in acc {
        let e = poly.into_expr();
        c.set(b, a, -&e);
        c.set(a, b, e);
    }
    Ok(c)
}

/// `Ḡ` and `C` for `m = 2` data; `c^j_i` depend on `x` only.
pub fn build_g_m2(
    data: &InverseProblemData,
    refs: &ReferenceFunctions,
    ctx: &JetContext,
    opts: &SolverOptions,
) -> Result<SkewCorrection> {
    super::expect_shape(data, ctx)?;
    if data.m != 2 {
        return Err(Error::WrongShape(format!("the skew correction needs m = 2, found m = {}", data.m)));
    }
    refs.validate(ctx, false)?;
    let cfg = &opts.zero;
    let n = data.n;
    if n == 1 {
        return Ok(SkewCorrection::zeros(1));
    }
    let mut pre = ConditionSetReport::default();
    pre.entries = conditions_m2(data, cfg)?
        .entries
        .into_iter()
        .filter(|e| e.id.starts_with("(5.8") || e.id.starts_with("(5.10"))
        .collect();
    super::fail_on(&pre)?;
    let gbar = gbar_grid(data, refs, cfg)?;
    let mut g = SkewCorrection { gbar, c: Grid::zeros(n, n) };
    let omega0 = closure_of(data, &g, refs, ctx, cfg)?;
    if is_zero(&omega0, cfg)?.is_nonzero() {
        g.c = fit_c(&omega0, refs, ctx, opts.ansatz_degree)?;
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn closure_of_c(c: &Grid, refs: &ReferenceFunctions, ctx: &JetContext) -> Expr {
        let mut l = Expr::zero();
        for (a, b, e) in c.iter().filter(|(a, b, _)| a < b) {
            let wedge = &(&q(refs, 1, a) * &q(refs, 2, b)) - &(&q(refs, 1, b) * &q(refs, 2, a));
            l = &l + &(e * &wedge);
        }
        let rho: Vec<Expr> = el_split_first_order(&l, ctx).unwrap().e1.iter().map(|e| -e).collect();
        closure_residual(&rho, refs)
    }

    /// Every ansatz column is the closure residual of an Euler-Lagrange
    /// expression, hence zero: `C` never changes the closure residual.
    #[test]
    fn ansatz_columns_vanish_for_any_reference() {
        let ctx = JetContext::new(2, 2).unwrap();
        let mut c2 = Grid::zeros(2, 2);
        c2.set(1, 2, parse("x1").unwrap());
        c2.set(2, 1, parse("x2^2").unwrap());
        let refs = ReferenceFunctions { c2, c0: vec![Expr::zero(); 2] };
        for src in ["w1*x2 - 3*w2^2", "x1^3*w1*w2", "exp(x2)*w1"] {
            let mut planted = Grid::zeros(2, 2);
            let e = parse(src).unwrap();
            planted.set(2, 1, -&e);
            planted.set(1, 2, e);
            assert!(closure_of_c(&planted, &refs, &ctx).is_zero(), "C = {src}");
        }
    }

    #[test]
    fn build_g_reports_ansatz_failure_on_non_closed_data() {
        let ctx = JetContext::new(2, 2).unwrap();
        let mut data = InverseProblemData::zeros(2, 2);
        data.f1[1] = parse("7/3*w1*w2^2").unwrap();
        let refs = ReferenceFunctions::zeros(2, 2);
        let opts = SolverOptions::default();
        let err = build_g_m2(&data, &refs, &ctx, &opts).unwrap_err();
        assert!(matches!(err, Error::AnsatzFailed { degree: 4 }), "{err}");
    }

    #[test]
    fn fit_fails_on_a_nonzero_closure_residual() {
        let ctx = JetContext::new(2, 2).unwrap();
        let refs = ReferenceFunctions::zeros(2, 2);
        let omega0 = parse("w1*x1").unwrap();
        assert!(matches!(fit_c(&omega0, &refs, &ctx, 3), Err(Error::AnsatzFailed { degree: 3 })));
    }

    #[test]
    fn linear_solver_handles_rank_deficiency() {
        let r = |n: i64| Rational::from_integer(n.into());
        let rows = vec![(vec![r(1), r(2)], r(3)), (vec![r(2), r(4)], r(6))];
        assert_eq!(solve_linear(rows, 2), Some(vec![r(3), r(0)]));
        let rows = vec![(vec![r(1), r(2)], r(3)), (vec![r(2), r(4)], r(7))];
        assert_eq!(solve_linear(rows, 2), None);
    }
}
