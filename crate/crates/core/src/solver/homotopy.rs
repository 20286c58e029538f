//! Straight-line homotopy operators. The homotopy parameter is the formal
//! symbol `t`, which never occurs in problem data.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::expr::{substitute, Expr, Poly, VarRef};
use crate::tonti::integrate_polynomial_t;

pub(crate) fn integrate_unit(e: &Expr, what: &str) -> Result<Expr> {
    integrate_polynomial_t(e)
        .ok_or_else(|| Error::NotClosedFormIntegrable(format!("{what}: integrand {e} is not polynomial in the homotopy parameter")))
}

/// `v ↦ base + t (v - base)` for each listed variable.
pub(crate) fn segment(vars: &[(VarRef, Expr)]) -> BTreeMap<VarRef, Expr> {
    let t = Expr::t();
    vars.iter()
        .map(|(v, base)| (v.clone(), base + &(&t * &(&Expr::Var(v.clone()) - base))))
        .collect()
}

fn order_zero(base: &[Expr]) -> Vec<(VarRef, Expr)> {
    base.iter().enumerate().map(|(k, b)| (VarRef::w(k + 1, &[]), b.clone())).collect()
}

/// `A` with `∂A/∂w^j = β_j`, integrating from `w = base`.
pub(crate) fn one_form_potential(beta: &[Expr], base: &[Expr]) -> Result<Expr> {
    let line = segment(&order_zero(base));
    let mut acc = Poly::zero();
    for (j, b) in beta.iter().enumerate() {
        if b.is_zero() {
            continue;
        }
        let integral = integrate_unit(&substitute(b, &line), "order-zero potential")?;
        let dw = &Expr::w(j + 1, &[]) - &base[j];
        acc.add_assign(Poly::of(&(&integral * &dw)));
    }
    Ok(acc.into_expr())
}

/// `α_j` with `∂α_j/∂w^k - ∂α_k/∂w^j = M_{kj}` for a closed skew `M`,
/// integrating from `w = base`.
pub(crate) fn two_form_potential(big_m: &[Vec<Expr>], base: &[Expr]) -> Result<Vec<Expr>> {
    let m = base.len();
    let line = segment(&order_zero(base));
    let t = Expr::t();
    let mut out = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = Poly::zero();
        for k in 0..m {
            let mkj = &big_m[k][j];
            if mkj.is_zero() {
                continue;
            }
            let integral = integrate_unit(&(&t * &substitute(mkj, &line)), "first-order potential")?;
            let dw = &Expr::w(k + 1, &[]) - &base[k];
            acc.add_assign(Poly::of(&(&integral * &dw)));
        }
        out.push(acc.into_expr());
    }
    Ok(out)
}
