//! Expanded Laurent-polynomial normal form over atoms.
//!
//! Atoms are variables, function applications, sums (with exponents that are
//! not positive integers) and constants (with non-integer exponents). A term
//! maps each atom to a nonzero rational exponent.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::{Expr, FuncKind, Rational};
use crate::error::{Error, Result};

pub(crate) type Mono = Vec<(Expr, Rational)>;

#[derive(Clone, Debug, Default, PartialEq)]
pub(crate) struct Poly {
    pub(crate) terms: BTreeMap<Mono, Rational>,
}

impl Poly {
    pub(crate) fn zero() -> Self {
        Poly::default()
    }

    pub(crate) fn constant(c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Vec::new(), c);
        p
    }

    pub(crate) fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn add_term(&mut self, mono: Mono, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(mono) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub(crate) fn add_assign(&mut self, other: Poly) {
        if self.terms.is_empty() {
            *self = other;
            return;
        }
        for (m, c) in other.terms {
            self.add_term(m, c);
        }
    }

    pub(crate) fn scale(&mut self, q: &Rational) {
        if q.is_zero() {
            self.terms.clear();
            return;
        }
        for c in self.terms.values_mut() {
            *c *= q;
        }
    }

    pub(crate) fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_assign(mul_monos(c1 * c2, m1, m2));
            }
        }
        out
    }

    pub(crate) fn powi(&self, mut k: u64) -> Poly {
        let mut base = self.clone();
        let mut acc = Poly::constant(Rational::one());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Reads a canonical expression.
    pub(crate) fn of(e: &Expr) -> Poly {
        let mut p = Poly::zero();
        match e {
            Expr::Sum(ts) => {
                for t in ts.iter() {
                    let (c, m) = term_parts(t);
                    p.add_term(m, c);
                }
            }
            other => {
                let (c, m) = term_parts(other);
                p.add_term(m, c);
            }
        }
        p
    }

    pub(crate) fn into_expr(self) -> Expr {
        let mut terms: Vec<Expr> = self.terms.into_iter().map(|(m, c)| term_expr(c, m)).collect();
        match terms.len() {
            0 => Expr::zero(),
            1 => terms.pop().unwrap(),
            _ => Expr::Sum(terms.into()),
        }
    }
}

fn term_parts(e: &Expr) -> (Rational, Mono) {
    match e {
        Expr::Const(c) => (c.clone(), Vec::new()),
        Expr::Product(fs) => {
            let mut coeff = Rational::one();
            let mut mono = Vec::with_capacity(fs.len());
            for f in fs.iter() {
                match f {
                    Expr::Const(c) => coeff *= c,
                    other => mono.push(factor_parts(other)),
                }
            }
            (coeff, mono)
        }
        other => (Rational::one(), vec![factor_parts(other)]),
    }
}

fn factor_parts(e: &Expr) -> (Expr, Rational) {
    match e {
        Expr::Power(b, q) => ((**b).clone(), q.clone()),
        other => (other.clone(), Rational::one()),
    }
}

fn term_expr(c: Rational, mono: Mono) -> Expr {
    if mono.is_empty() {
        return Expr::Const(c);
    }
    let mut fs = Vec::with_capacity(mono.len() + 1);
    if !c.is_one() {
        fs.push(Expr::Const(c));
    }
    for (b, q) in mono {
        fs.push(if q.is_one() { b } else { Expr::Power(Arc::new(b), q) });
    }
    if fs.len() == 1 {
        fs.pop().unwrap()
    } else {
        Expr::Product(fs.into())
    }
}

fn is_exp(b: &Expr) -> bool {
    matches!(b, Expr::Func(FuncKind::Exp, _))
}

fn needs_expansion(b: &Expr, q: &Rational) -> bool {
    matches!(b, Expr::Sum(_)) && q.is_integer() && q.is_positive()
}

fn mul_monos(c: Rational, m1: &Mono, m2: &Mono) -> Poly {
    let mut out: Mono = Vec::with_capacity(m1.len() + m2.len());
    let (mut a, mut b) = (m1.iter().peekable(), m2.iter().peekable());
    loop {
        match (a.peek(), b.peek()) {
            (Some(x), Some(y)) => match x.0.cmp(&y.0) {
                std::cmp::Ordering::Less => out.push(a.next().unwrap().clone()),
                std::cmp::Ordering::Greater => out.push(b.next().unwrap().clone()),
                std::cmp::Ordering::Equal => {
                    let (x, y) = (a.next().unwrap(), b.next().unwrap());
                    let q = &x.1 + &y.1;
                    if !q.is_zero() {
                        out.push((x.0.clone(), q));
                    }
                }
            },
            (Some(_), None) => out.push(a.next().unwrap().clone()),
            (None, Some(_)) => out.push(b.next().unwrap().clone()),
            (None, None) => break,
        }
    }
    let exps = out.iter().filter(|(b, _)| is_exp(b)).count();
    let special = exps > 1
        || out.iter().any(|(b, q)| {
            (is_exp(b) && !q.is_one()) || needs_expansion(b, q) || matches!(b, Expr::Const(_))
        });
    if special {
        normalize_term(c, out.into_iter().collect())
    } else {
        let mut p = Poly::zero();
        p.add_term(out, c);
        p
    }
}

/// Brings one term to normal form: folds constant powers, merges
/// exponentials and expands positive integer powers of sums.
pub(crate) fn normalize_term(mut coeff: Rational, mut factors: BTreeMap<Expr, Rational>) -> Poly {
    if coeff.is_zero() {
        return Poly::zero();
    }
    factors.retain(|_, q| !q.is_zero());

    let consts: Vec<Expr> = factors.keys().filter(|b| matches!(b, Expr::Const(_))).cloned().collect();
    for b in consts {
        let Expr::Const(c) = &b else { unreachable!() };
        if c.is_zero() {
            // An undefined 0^q with q < 0 survives as an opaque atom.
            continue;
        }
        let q = factors.remove(&b).unwrap();
        let k = q.floor();
        let r = &q - &k;
        coeff *= rat_powi(c, k.to_integer());
        if !r.is_zero() && !c.is_one() {
            factors.insert(b, r);
        }
    }

    let exps: Vec<Expr> = factors.keys().filter(|b| is_exp(b)).cloned().collect();
    if exps.len() > 1 || exps.first().is_some_and(|b| !factors[b].is_one()) {
        let mut arg = Poly::zero();
        for b in exps {
            let q = factors.remove(&b).unwrap();
            let Expr::Func(_, a) = &b else { unreachable!() };
            let mut pa = Poly::of(a);
            pa.scale(&q);
            arg.add_assign(pa);
        }
        if !arg.is_zero() {
            factors.insert(Expr::Func(FuncKind::Exp, Arc::new(arg.into_expr())), Rational::one());
        }
    }

    let expand: Vec<(Expr, Rational)> = factors
        .iter()
        .filter(|(b, q)| needs_expansion(b, q))
        .map(|(b, q)| (b.clone(), q.clone()))
        .collect();
    for (b, _) in &expand {
        factors.remove(b);
    }
    let mut out = Poly::zero();
    out.add_term(factors.into_iter().collect(), coeff);
    for (b, q) in expand {
        let k: u64 = q.to_integer().try_into().expect("exponent fits in u64");
        out = out.mul(&Poly::of(&b).powi(k));
    }
    out
}

fn rat_powi(c: &Rational, k: BigInt) -> Rational {
    let k: i32 = k.try_into().expect("exponent fits in i32");
    num_traits::Pow::pow(c, k)
}

/// Exact `n`-th root of a nonnegative integer, if one exists.
fn exact_root(v: &BigInt, n: u32) -> Option<BigInt> {
    let r = v.nth_root(n);
    (num_traits::Pow::pow(&r, n) == *v).then_some(r)
}

/// `c^q` for `c != 0` as a rational coefficient and an optional irrational
/// remainder `c^r` with `0 < r < 1`.
fn rational_power(c: &Rational, q: &Rational) -> Result<(Rational, Option<(Expr, Rational)>)> {
    if q.is_integer() {
        return Ok((rat_powi(c, q.to_integer()), None));
    }
    if c.is_negative() {
        return Err(Error::NonRealPower(format!("({c})^({q})")));
    }
    if let Ok(den) = u32::try_from(q.denom().clone()) {
        if let (Some(a), Some(b)) = (exact_root(c.numer(), den), exact_root(c.denom(), den)) {
            return Ok((rat_powi(&Rational::new(a, b), q.numer().clone()), None));
        }
    }
    let k = q.floor();
    let r = q - &k;
    Ok((rat_powi(c, k.to_integer()), Some((Expr::Const(c.clone()), r))))
}

pub(crate) fn pow(e: &Expr, q: &Rational) -> Result<Expr> {
    if q.is_zero() {
        return Ok(Expr::one());
    }
    if q.is_one() {
        return Ok(e.clone());
    }
    let p = Poly::of(e);
    if p.is_zero() {
        return if q.is_positive() { Ok(Expr::zero()) } else { Err(Error::DivisionByZero) };
    }
    if p.terms.len() == 1 {
        let (mono, c) = p.terms.into_iter().next().unwrap();
        let (coeff, extra) = rational_power(&c, q)?;
        let mut map = BTreeMap::new();
        for (b, eb) in mono {
            *map.entry(b).or_insert_with(Rational::zero) += eb * q;
        }
        if let Some((b, r)) = extra {
            *map.entry(b).or_insert_with(Rational::zero) += r;
        }
        return Ok(normalize_term(coeff, map).into_expr());
    }
    if q.is_integer() && q.is_positive() {
        let k: u64 = q.to_integer().try_into().expect("exponent fits in u64");
        return Ok(p.powi(k).into_expr());
    }
    // Leading coefficient taken from the first term in canonical order.
    let lc = p.terms.values().next().unwrap().clone();
    if q.is_integer() || lc.is_positive() {
        let (coeff, extra) = rational_power(&lc, q)?;
        let mut monic = p;
        monic.scale(&lc.recip());
        let mut map = BTreeMap::new();
        map.insert(monic.into_expr(), q.clone());
        if let Some((b, r)) = extra {
            map.insert(b, r);
        }
        return Ok(normalize_term(coeff, map).into_expr());
    }
    let mut map = BTreeMap::new();
    map.insert(p.into_expr(), q.clone());
    Ok(normalize_term(Rational::one(), map).into_expr())
}

pub(crate) fn func(kind: FuncKind, arg: Expr) -> Expr {
    match kind {
        FuncKind::Exp if arg.is_zero() => Expr::one(),
        FuncKind::Ln if arg.is_one() => Expr::zero(),
        FuncKind::Ln => match arg {
            Expr::Func(FuncKind::Exp, a) => (*a).clone(),
            a => Expr::Func(kind, Arc::new(a)),
        },
        FuncKind::Sin if arg.is_zero() => Expr::zero(),
        FuncKind::Cos if arg.is_zero() => Expr::one(),
        _ => Expr::Func(kind, Arc::new(arg)),
    }
}

pub(crate) fn simplify(e: &Expr) -> Expr {
    match e {
        Expr::Const(_) | Expr::Var(_) => e.clone(),
        Expr::Sum(ts) => {
            let mut p = Poly::zero();
            for t in ts.iter() {
                p.add_assign(Poly::of(&simplify(t)));
            }
            p.into_expr()
        }
        Expr::Product(fs) => {
            let mut p = Poly::constant(Rational::one());
            for f in fs.iter() {
                p = p.mul(&Poly::of(&simplify(f)));
            }
            p.into_expr()
        }
        // Integer exponents distribute over raw products and compose with
        // raw powers before any expansion, so (a + b)^-2 stays an atom.
        Expr::Power(b, q) if q.is_integer() => match &**b {
            Expr::Power(inner, q2) => simplify(&Expr::Power(inner.clone(), q2 * q)),
            Expr::Product(fs) => {
                let mut p = Poly::constant(Rational::one());
                for f in fs.iter() {
                    p = p.mul(&Poly::of(&simplify(&Expr::Power(Arc::new(f.clone()), q.clone()))));
                }
                p.into_expr()
            }
            _ => simplify_power(b, q),
        },
        Expr::Power(b, q) => simplify_power(b, q),
        Expr::Func(k, a) => func(*k, simplify(a)),
    }
}

fn simplify_power(b: &Expr, q: &Rational) -> Expr {
    let sb = simplify(b);
    pow(&sb, q).unwrap_or_else(|_| Expr::Power(Arc::new(sb), q.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;

    fn w(j: usize, i: &[usize]) -> Expr {
        Expr::w(j, i)
    }

    #[test]
    fn like_terms_collect() {
        let a = w(1, &[1]);
        assert_eq!(&a + &a, &Expr::int(2) * &a);
    }

    #[test]
    fn exponentials_cancel() {
        let e = w(1, &[]).exp();
        let f = (-w(1, &[])).exp();
        assert_eq!(&e * &f, Expr::one());
    }

    #[test]
    fn sum_powers_expand() {
        let s = &w(1, &[]) + &Expr::one();
        let sq = s.powi(2);
        let expected = &(&w(1, &[]).powi(2) + &(&Expr::int(2) * &w(1, &[]))) + &Expr::one();
        assert_eq!(sq, expected);
    }

    #[test]
    fn inverse_of_sum_is_monic_atom() {
        let s = &(&Expr::int(2) * &w(1, &[])) + &Expr::int(4);
        let inv = s.powi(-1);
        let Expr::Product(fs) = &inv else { panic!("{inv:?}") };
        assert_eq!(fs[0], Expr::rational(rat(1, 4)));
        assert_eq!(crate::expr::normalize_rational(&(&inv * &s)), Expr::one());
    }

    #[test]
    fn nested_integer_powers_compose() {
        let s = crate::expr::parse("1/(w1 + x1)^2").unwrap();
        let t = (&w(1, &[]) + &Expr::x(1)).powi(-2);
        assert_eq!(s, t);
    }

    #[test]
    fn rational_roots_are_exact() {
        assert_eq!(Expr::rational(rat(9, 4)).checked_pow(&rat(1, 2)).unwrap(), Expr::rational(rat(3, 2)));
        let r2 = Expr::int(2).checked_pow(&rat(1, 2)).unwrap();
        assert_eq!(&r2 * &r2, Expr::int(2));
        assert!(Expr::int(-2).checked_pow(&rat(1, 2)).is_err());
        assert!(Expr::zero().checked_pow(&rat(-1, 1)).is_err());
    }

    #[test]
    fn function_identities() {
        assert_eq!(Expr::zero().exp(), Expr::one());
        assert_eq!(Expr::one().ln(), Expr::zero());
        assert_eq!(w(1, &[]).exp().ln(), w(1, &[]));
        assert_eq!(Expr::zero().sin(), Expr::zero());
        assert_eq!(Expr::zero().cos(), Expr::one());
    }
}
