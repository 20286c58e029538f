//! Homotopy substitution, integration over the homotopy parameter and the
//! Tonti Lagrangian.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::expr::{depends_on, eval_f64, free_vars, substitute, EvalError, Expr, Poly, Rational, VarRef};
use crate::jet::JetContext;
use crate::quadrature::gauss_legendre_unit;
use crate::variational::check_reference;

pub const DEFAULT_QUAD_ORDER: usize = 32;

#[derive(Clone, Debug, PartialEq)]
pub struct HomotopyIntegrand {
    pub integrand: Expr,
    /// `t` occurs only as a factor `t^k` with `k >= 0`.
    pub t_polynomial: bool,
}

impl HomotopyIntegrand {
    pub fn new(integrand: Expr) -> Self {
        let t_polynomial = is_t_polynomial(&integrand);
        HomotopyIntegrand { integrand, t_polynomial }
    }
}

pub fn is_t_polynomial(e: &Expr) -> bool {
    let t = VarRef::t();
    let te = Expr::t();
    Poly::of(e).terms.keys().all(|mono| {
        mono.iter().all(|(b, q)| if *b == te { q.is_integer() && !q.is_negative() } else { !depends_on(b, &t) })
    })
}

/// `∫_0^1 e dt` for `e` polynomial in `t`.
pub fn integrate_polynomial_t(e: &Expr) -> Option<Expr> {
    if !is_t_polynomial(e) {
        return None;
    }
    let te = Expr::t();
    let mut out = Poly::zero();
    for (mono, c) in Poly::of(e).terms {
        let k = mono.iter().find(|(b, _)| *b == te).map(|(_, q)| q.clone()).unwrap_or_else(Rational::zero);
        let rest: Vec<(Expr, Rational)> = mono.into_iter().filter(|(b, _)| *b != te).collect();
        out.add_term(rest, c / (k + Rational::one()));
    }
    Some(out.into_expr())
}

/// Replaces every `w^j_I` by `t w^j_I + (1 - t) D_I c^j`.
pub fn homotopy_substitute(e: &Expr, c: &[Expr], ctx: &JetContext) -> Result<HomotopyIntegrand> {
    check_reference(c, ctx)?;
    let t = Expr::t();
    let s = &Expr::one() - &t;
    let mut bindings = BTreeMap::new();
    for v in free_vars(e) {
        match &v {
            VarRef::Jet { index, .. } if index.contains_t() => return Err(Error::IllegalVariable(v.to_string())),
            VarRef::Jet { j, index } => {
                let cd = ctx.total_derivative_multi(&c[*j as usize - 1], index)?;
                bindings.insert(v.clone(), &(&t * &Expr::Var(v.clone())) + &(&s * &cd));
            }
            VarRef::Independent(i) if i.is_t() => return Err(Error::IllegalVariable(v.to_string())),
            VarRef::Independent(_) => {}
        }
    }
    Ok(HomotopyIntegrand::new(substitute(e, &bindings)))
}

#[derive(Clone, Debug, PartialEq)]
pub enum TontiResult {
    ClosedForm(Expr),
    /// `∫_0^1 integrand dt`, evaluated by a Gauss–Legendre rule.
    QuadratureForm { integrand: Expr, order: usize },
}

impl TontiResult {
    pub fn eval_f64(&self, lookup: &dyn Fn(&VarRef) -> Option<f64>) -> Result<f64, EvalError> {
        match self {
            TontiResult::ClosedForm(e) => eval_f64(e, lookup),
            TontiResult::QuadratureForm { integrand, order } => {
                let t = VarRef::t();
                let mut acc = 0.0;
                for (node, weight) in gauss_legendre_unit(*order) {
                    acc += weight * eval_f64(integrand, &|v| if *v == t { Some(node) } else { lookup(v) })?;
                }
                Ok(acc)
            }
        }
    }

    pub fn closed_form(&self) -> Option<&Expr> {
        match self {
            TontiResult::ClosedForm(e) => Some(e),
            TontiResult::QuadratureForm { .. } => None,
        }
    }
}

impl fmt::Display for TontiResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TontiResult::ClosedForm(e) => write!(f, "{e}"),
            TontiResult::QuadratureForm { integrand, order } => write!(f, "quadrature[{order}] {integrand}"),
        }
    }
}

pub fn integrate_t(h: &HomotopyIntegrand, order: usize) -> TontiResult {
    match h.t_polynomial.then(|| integrate_polynomial_t(&h.integrand)).flatten() {
        Some(e) => TontiResult::ClosedForm(e),
        None => TontiResult::QuadratureForm { integrand: h.integrand.clone(), order },
    }
}

/// `f~ = Σ_j ∫_0^1 e^j(homotopy) dt (w^j - c^j)`.
pub fn tonti_lagrangian(e: &[Expr], c: &[Expr], ctx: &JetContext, order: usize) -> Result<TontiResult> {
    if e.len() != ctx.m() {
        return Err(Error::WrongShape(format!("expected {} equations, found {}", ctx.m(), e.len())));
    }
    let mut closed = Poly::zero();
    let mut integrand = Poly::zero();
    let mut all_closed = true;
    for (k, ej) in e.iter().enumerate() {
        let h = homotopy_substitute(ej, c, ctx)?;
        let dw = &Expr::w(k + 1, &[]) - &c[k];
        integrand.add_assign(Poly::of(&(&h.integrand * &dw)));
        match integrate_t(&h, order) {
            TontiResult::ClosedForm(i) => closed.add_assign(Poly::of(&(&i * &dw))),
            TontiResult::QuadratureForm { .. } => all_closed = false,
        }
    }
    Ok(if all_closed {
        TontiResult::ClosedForm(closed.into_expr())
    } else {
        TontiResult::QuadratureForm { integrand: integrand.into_expr(), order }
    })
}
