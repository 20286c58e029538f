//! Jet contexts and total derivatives.

use crate::error::{Error, Result};
use crate::expr::{derive_with, free_vars, Expr, Index, MultiIndex, VarRef};

pub const DEFAULT_MAX_ORDER: usize = 6;

/// Numbers of independent and dependent variables, the jet-order cap and
/// whether `t` with its variations is admitted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JetContext {
    n: usize,
    m: usize,
    max_order: usize,
    extended: bool,
}

impl JetContext {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        Self::with_max_order(n, m, DEFAULT_MAX_ORDER)
    }

    pub fn with_max_order(n: usize, m: usize, max_order: usize) -> Result<Self> {
        if n == 0 || n >= u8::MAX as usize - 1 {
            return Err(Error::InvalidContext(format!("n = {n} must lie in 1..=253")));
        }
        if m == 0 || m > u16::MAX as usize {
            return Err(Error::InvalidContext(format!("m = {m} must be positive")));
        }
        if max_order < 2 {
            return Err(Error::InvalidContext(format!("max_order = {max_order} must be at least 2")));
        }
        Ok(JetContext { n, m, max_order, extended: false })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn max_order(&self) -> usize {
        self.max_order
    }

    pub fn is_extended(&self) -> bool {
        self.extended
    }

    /// Number of independent variables including `t` when extended.
    pub fn n_eff(&self) -> usize {
        self.n + usize::from(self.extended)
    }

    /// Position of `t` among the independent variables (`n + 1`).
    pub fn t_position(&self) -> Option<usize> {
        self.extended.then_some(self.n + 1)
    }

    /// Adds `t` and the variations; two more orders make room for `w_{Itt}`.
    pub fn extend(&self) -> Result<JetContext> {
        if self.extended {
            return Err(Error::AlreadyExtended);
        }
        Ok(JetContext { max_order: self.max_order + 2, extended: true, ..*self })
    }

    /// The indices `1..=n`, followed by `t` when extended.
    pub fn indices(&self) -> impl Iterator<Item = Index> + '_ {
        (1..=self.n).map(Index::x).chain(self.extended.then_some(Index::T))
    }

    fn index_legal(&self, i: Index) -> bool {
        match i.position() {
            Some(k) => k <= self.n,
            None => self.extended,
        }
    }

    pub fn is_legal(&self, v: &VarRef) -> bool {
        match v {
            VarRef::Independent(i) => self.index_legal(*i),
            VarRef::Jet { j, index } => {
                (1..=self.m).contains(&(*j as usize))
                    && index.len() <= self.max_order
                    && index.indices().iter().all(|&i| self.index_legal(i))
            }
        }
    }

    /// Rejects variables outside the context.
    pub fn validate(&self, e: &Expr) -> Result<()> {
        match free_vars(e).into_iter().find(|v| !self.is_legal(v)) {
            Some(v) => Err(Error::IllegalVariable(v.to_string())),
            None => Ok(()),
        }
    }

    /// `d/dx_i`, or `d/dt` for `Index::T` in an extended context.
    pub fn total_derivative(&self, e: &Expr, i: Index) -> Result<Expr> {
        if !self.index_legal(i) {
            return Err(Error::IllegalVariable(format!("total derivative index {i}")));
        }
        derive_with(e, |v| match v {
            VarRef::Independent(k) => Ok((*k == i).then(Expr::one)),
            VarRef::Jet { j, index } => {
                let next = index.with(i);
                let var = VarRef::jet(*j as usize, next);
                if index.len() + 1 > self.max_order {
                    return Err(Error::OrderOverflow { var: var.to_string(), max: self.max_order });
                }
                Ok(Some(Expr::Var(var)))
            }
        })
    }

    pub fn total_derivative_multi(&self, e: &Expr, index: &MultiIndex) -> Result<Expr> {
        index.indices().iter().try_fold(e.clone(), |acc, &i| self.total_derivative(&acc, i))
    }

    /// Truncated total derivative `∂/∂x_i + Σ_j w^j_i ∂/∂w^j`, acting on
    /// functions of `(x, w)` with first-order variables frozen.
    pub fn truncated_derivative(&self, e: &Expr, i: usize) -> Expr {
        let xi = Index::x(i);
        derive_with(e, |v| {
            Ok(match v {
                VarRef::Independent(k) => (*k == xi).then(Expr::one),
                VarRef::Jet { j, index } if index.is_empty() => Some(Expr::w(*j as usize, &[i])),
                VarRef::Jet { .. } => None,
            })
        })
        .expect("truncated derivatives cannot overflow")
    }
}
