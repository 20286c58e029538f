//! Derivations, substitution and variable queries.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use num_traits::{One, Zero};

use super::canon::{func, normalize_term, pow, Poly};
use super::{Expr, FuncKind, Rational, VarRef};
use crate::error::Result;

/// Applies the derivation determined by its values on variables. `act`
/// returns `None` for variables the derivation annihilates.
pub fn derive_with<F>(e: &Expr, act: F) -> Result<Expr>
where
    F: FnMut(&VarRef) -> Result<Option<Expr>>,
{
    let mut d = Deriver { act, cache: HashMap::new() };
    Ok(d.expr(e)?.into_expr())
}

struct Deriver<F> {
    act: F,
    cache: HashMap<Expr, Poly>,
}

impl<F> Deriver<F>
where
    F: FnMut(&VarRef) -> Result<Option<Expr>>,
{
    fn expr(&mut self, e: &Expr) -> Result<Poly> {
        let p = Poly::of(e);
        let mut out = Poly::zero();
        for (mono, c) in &p.terms {
            for (b, q) in mono {
                let db = self.atom(b)?;
                if db.is_zero() {
                    continue;
                }
                let mut map: BTreeMap<Expr, Rational> = mono.iter().cloned().collect();
                *map.get_mut(b).unwrap() -= Rational::one();
                let t = normalize_term(c * q, map);
                out.add_assign(t.mul(&db));
            }
        }
        Ok(out)
    }

    fn atom(&mut self, b: &Expr) -> Result<Poly> {
        if let Some(p) = self.cache.get(b) {
            return Ok(p.clone());
        }
        let d = match b {
            Expr::Const(_) => Poly::zero(),
            Expr::Var(v) => match (self.act)(v)? {
                Some(e) => Poly::of(&e),
                None => Poly::zero(),
            },
            Expr::Func(kind, a) => {
                let da = self.expr(a)?;
                if da.is_zero() {
                    da
                } else {
                    let outer = match kind {
                        FuncKind::Exp => Poly::of(b),
                        FuncKind::Ln => Poly::of(&pow(a, &-Rational::one())?),
                        FuncKind::Sin => Poly::of(&func(FuncKind::Cos, (**a).clone())),
                        FuncKind::Cos => {
                            let mut s = Poly::of(&func(FuncKind::Sin, (**a).clone()));
                            s.scale(&-Rational::one());
                            s
                        }
                    };
                    outer.mul(&da)
                }
            }
            _ => self.expr(b)?,
        };
        self.cache.insert(b.clone(), d.clone());
        Ok(d)
    }
}

/// Partial derivative treating every distinct variable as independent.
pub fn pdiff(e: &Expr, v: &VarRef) -> Expr {
    if !depends_on(e, v) {
        return Expr::zero();
    }
    derive_with(e, |u| Ok((u == v).then(Expr::one))).expect("partial derivatives cannot overflow")
}

pub fn depends_on(e: &Expr, v: &VarRef) -> bool {
    match e {
        Expr::Const(_) => false,
        Expr::Var(u) => u == v,
        Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(|x| depends_on(x, v)),
        Expr::Power(b, _) | Expr::Func(_, b) => depends_on(b, v),
    }
}

pub fn free_vars(e: &Expr) -> BTreeSet<VarRef> {
    fn walk(e: &Expr, acc: &mut BTreeSet<VarRef>) {
        match e {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                acc.insert(v.clone());
            }
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().for_each(|x| walk(x, acc)),
            Expr::Power(b, _) | Expr::Func(_, b) => walk(b, acc),
        }
    }
    let mut acc = BTreeSet::new();
    walk(e, &mut acc);
    acc
}

/// Simultaneous substitution followed by canonicalization.
pub fn substitute(e: &Expr, bindings: &BTreeMap<VarRef, Expr>) -> Expr {
    match e {
        Expr::Const(_) => e.clone(),
        Expr::Var(v) => bindings.get(v).cloned().unwrap_or_else(|| e.clone()),
        Expr::Sum(ts) => {
            let mut p = Poly::zero();
            for t in ts.iter() {
                p.add_assign(Poly::of(&substitute(t, bindings)));
            }
            p.into_expr()
        }
        Expr::Product(fs) => {
            let mut p = Poly::constant(Rational::one());
            for f in fs.iter() {
                p = p.mul(&Poly::of(&substitute(f, bindings)));
                if p.is_zero() {
                    break;
                }
            }
            p.into_expr()
        }
        Expr::Power(b, q) => {
            let sb = substitute(b, bindings);
            pow(&sb, q).unwrap_or_else(|_| Expr::Power(Arc::new(sb), q.clone()))
        }
        Expr::Func(k, a) => func(*k, substitute(a, bindings)),
    }
}

impl Expr {
    /// True if some atom is an undefined power of zero.
    pub fn has_pole(&self) -> bool {
        match self {
            Expr::Const(_) | Expr::Var(_) => false,
            Expr::Power(b, q) => (b.is_zero() && q < &Rational::zero()) || b.has_pole(),
            Expr::Sum(xs) | Expr::Product(xs) => xs.iter().any(Expr::has_pole),
            Expr::Func(_, a) => a.has_pole(),
        }
    }
}
