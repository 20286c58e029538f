//! Exact symbolic expressions over jet coordinates.
//!
//! Every public constructor and operator returns the canonical form: an
//! expanded sum of terms, each term a rational coefficient times a sorted
//! product of atoms raised to nonzero rational exponents. Raw trees exist
//! only as parser output and are brought to canonical form by [`simplify`].

mod canon;
mod diff;
mod eval;
mod normalize;
mod parse;
mod print;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};

pub(crate) use canon::{Mono, Poly};
pub use diff::{depends_on, derive_with, free_vars, pdiff, substitute};
pub use eval::{eval_f64, eval_value, EvalError, Interval, Value};
pub use normalize::normalize_rational;
pub use parse::{parse, parse_raw};

pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(n.into(), d.into())
}

/// One index of a multi-index: an independent variable `x_i` (1-based) or the
/// homotopy / variation parameter `t`, which sorts after every `x_i`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Index(u8);

impl Index {
    pub const T: Index = Index(u8::MAX);

    /// `i` must lie in `1..=254`.
    pub fn x(i: usize) -> Index {
        assert!((1..u8::MAX as usize).contains(&i), "independent index {i} out of range");
        Index(i as u8)
    }

    pub fn is_t(self) -> bool {
        self == Index::T
    }

    /// The 1-based position of `x_i`, `None` for `t`.
    pub fn position(self) -> Option<usize> {
        (!self.is_t()).then_some(self.0 as usize)
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.position() {
            Some(i) => write!(f, "{i}"),
            None => f.write_str("t"),
        }
    }
}

/// A sorted multiset of indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct MultiIndex(SmallVec<[Index; 6]>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(SmallVec::new())
    }

    pub fn new(indices: impl IntoIterator<Item = Index>) -> Self {
        let mut v: SmallVec<[Index; 6]> = indices.into_iter().collect();
        v.sort_unstable();
        MultiIndex(v)
    }

    pub fn from_positions(positions: &[usize]) -> Self {
        Self::new(positions.iter().map(|&i| Index::x(i)))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[Index] {
        &self.0
    }

    pub fn contains_t(&self) -> bool {
        self.0.last().is_some_and(|i| i.is_t())
    }

    /// Sorted insertion of one more index.
    pub fn with(&self, i: Index) -> Self {
        let mut v = self.0.clone();
        let at = v.partition_point(|&k| k <= i);
        v.insert(at, i);
        MultiIndex(v)
    }

    /// Removes one occurrence of `i`, if present.
    pub fn without(&self, i: Index) -> Option<Self> {
        let at = self.0.iter().position(|&k| k == i)?;
        let mut v = self.0.clone();
        v.remove(at);
        Some(MultiIndex(v))
    }

    pub fn last(&self) -> Option<Index> {
        self.0.last().copied()
    }
}

/// A coordinate of the (possibly extended) jet space.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarRef {
    Independent(Index),
    Jet { j: u16, index: MultiIndex },
}

impl VarRef {
    pub fn x(i: usize) -> Self {
        VarRef::Independent(Index::x(i))
    }

    pub fn t() -> Self {
        VarRef::Independent(Index::T)
    }

    /// `w^j_I` with `I` given as 1-based positions in any order.
    pub fn w(j: usize, positions: &[usize]) -> Self {
        VarRef::jet(j, MultiIndex::from_positions(positions))
    }

    pub fn jet(j: usize, index: MultiIndex) -> Self {
        assert!(j >= 1 && j <= u16::MAX as usize, "dependent index {j} out of range");
        VarRef::Jet { j: j as u16, index }
    }

    /// The variation `w^j_{It}`.
    pub fn variation(j: usize, positions: &[usize]) -> Self {
        VarRef::jet(j, MultiIndex::from_positions(positions).with(Index::T))
    }

    /// Jet order `|I|`, or `None` for independent variables.
    pub fn order(&self) -> Option<usize> {
        match self {
            VarRef::Jet { index, .. } => Some(index.len()),
            VarRef::Independent(_) => None,
        }
    }

    pub fn is_variation(&self) -> bool {
        matches!(self, VarRef::Jet { index, .. } if index.contains_t())
    }

    pub fn dependent(&self) -> Option<usize> {
        match self {
            VarRef::Jet { j, .. } => Some(*j as usize),
            VarRef::Independent(_) => None,
        }
    }

    pub fn multi_index(&self) -> Option<&MultiIndex> {
        match self {
            VarRef::Jet { index, .. } => Some(index),
            VarRef::Independent(_) => None,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum FuncKind {
    Exp,
    Ln,
    Sin,
    Cos,
}

impl FuncKind {
    pub fn name(self) -> &'static str {
        match self {
            FuncKind::Exp => "exp",
            FuncKind::Ln => "ln",
            FuncKind::Sin => "sin",
            FuncKind::Cos => "cos",
        }
    }
}

/// Expression tree. The derived order (constants, variables, sums, products,
/// powers, functions) is the canonical node order.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Expr {
    Const(Rational),
    Var(VarRef),
    Sum(Arc<[Expr]>),
    Product(Arc<[Expr]>),
    Power(Arc<Expr>, Rational),
    Func(FuncKind, Arc<Expr>),
}

impl Expr {
    pub fn zero() -> Self {
        Expr::Const(Rational::zero())
    }

    pub fn one() -> Self {
        Expr::Const(Rational::one())
    }

    pub fn int(k: i64) -> Self {
        Expr::Const(Rational::from_integer(k.into()))
    }

    pub fn rational(q: Rational) -> Self {
        Expr::Const(q)
    }

    pub fn var(v: VarRef) -> Self {
        Expr::Var(v)
    }

    pub fn x(i: usize) -> Self {
        Expr::Var(VarRef::x(i))
    }

    pub fn t() -> Self {
        Expr::Var(VarRef::t())
    }

    pub fn w(j: usize, positions: &[usize]) -> Self {
        Expr::Var(VarRef::w(j, positions))
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Const(c) if c.is_one())
    }

    pub fn as_const(&self) -> Option<&Rational> {
        match self {
            Expr::Const(c) => Some(c),
            _ => None,
        }
    }

    /// Canonical power; fails on `0^q` with `q < 0` and on non-integer powers
    /// of negative constants.
    pub fn checked_pow(&self, q: &Rational) -> Result<Expr> {
        canon::pow(self, q)
    }

    pub fn powi(&self, k: i64) -> Expr {
        self.checked_pow(&Rational::from_integer(k.into()))
            .expect("integer power of a nonzero expression")
    }

    pub fn checked_div(&self, rhs: &Expr) -> Result<Expr> {
        if rhs.is_zero() {
            return Err(Error::DivisionByZero);
        }
        Ok(self * &rhs.checked_pow(&-Rational::one())?)
    }

    pub fn exp(&self) -> Expr {
        canon::func(FuncKind::Exp, self.clone())
    }

    pub fn ln(&self) -> Expr {
        canon::func(FuncKind::Ln, self.clone())
    }

    pub fn sin(&self) -> Expr {
        canon::func(FuncKind::Sin, self.clone())
    }

    pub fn cos(&self) -> Expr {
        canon::func(FuncKind::Cos, self.clone())
    }

    pub fn scale(&self, q: &Rational) -> Expr {
        let mut p = Poly::of(self);
        p.scale(q);
        p.into_expr()
    }

    /// Terms of the canonical sum (a single term for non-sums, none for 0).
    pub fn terms(&self) -> Vec<Expr> {
        match self {
            Expr::Sum(ts) => ts.to_vec(),
            e if e.is_zero() => Vec::new(),
            e => vec![e.clone()],
        }
    }

    /// Highest jet order among the variables, `None` if no jet variable occurs.
    pub fn jet_order(&self) -> Option<usize> {
        free_vars(self).iter().filter_map(VarRef::order).max()
    }
}

/// Canonical form of an arbitrary (possibly raw) tree.
pub fn simplify(e: &Expr) -> Expr {
    canon::simplify(e)
}

/// Sum of canonical expressions.
pub fn sum<'a>(items: impl IntoIterator<Item = &'a Expr>) -> Expr {
    let mut p = Poly::zero();
    for e in items {
        p.add_assign(Poly::of(e));
    }
    p.into_expr()
}

impl From<i64> for Expr {
    fn from(k: i64) -> Self {
        Expr::int(k)
    }
}

impl From<Rational> for Expr {
    fn from(q: Rational) -> Self {
        Expr::Const(q)
    }
}

impl From<VarRef> for Expr {
    fn from(v: VarRef) -> Self {
        Expr::Var(v)
    }
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        let mut p = Poly::of(self);
        p.add_assign(Poly::of(rhs));
        p.into_expr()
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        let mut r = Poly::of(rhs);
        r.scale(&-Rational::one());
        let mut p = Poly::of(self);
        p.add_assign(r);
        p.into_expr()
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        Poly::of(self).mul(&Poly::of(rhs)).into_expr()
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { (&self).$m(&rhs) }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { (&self).$m(rhs) }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}
