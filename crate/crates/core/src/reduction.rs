//! Order reduction for one independent variable by iterated subtraction of
//! total derivatives: an `f` affine in the top-order variables `w^j_R`, with
//! coefficients `f^j` of order at most `R - 2`, is replaced by
//! `f - d/dx Σ f^j w^j_{R-1}`, which has order at most `R - 1` and the same
//! Euler-Lagrange expressions.

use std::fmt;

use crate::error::{Error, Result};
use crate::expr::{free_vars, pdiff, Expr, Index, VarRef};
use crate::jet::JetContext;

#[derive(Clone, Debug, PartialEq)]
pub enum TopOrder {
    /// No jet variables.
    Constant,
    NonlinearTop { order: usize },
    /// `f = f_0 + Σ f^j w^j_R` with every `f^j` free of order-`R` variables;
    /// `coeff_order` is the highest jet order in the `f^j`.
    LinearTop { order: usize, coeffs: Vec<Expr>, coeff_order: Option<usize> },
}

fn top(j: usize, order: usize) -> VarRef {
    VarRef::w(j, &vec![1; order])
}

pub fn classify_top_order(f: &Expr, ctx: &JetContext) -> TopOrder {
    let Some(order) = f.jet_order() else {
        return TopOrder::Constant;
    };
    let tops: Vec<VarRef> = (1..=ctx.m()).map(|j| top(j, order)).collect();
    let coeffs: Vec<Expr> = tops.iter().map(|v| pdiff(f, v)).collect();
    let affine = coeffs.iter().all(|c| free_vars(c).iter().all(|v| !tops.contains(v)));
    if !affine {
        return TopOrder::NonlinearTop { order };
    }
    let coeff_order = coeffs.iter().filter_map(Expr::jet_order).max();
    TopOrder::LinearTop { order, coeffs, coeff_order }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StopReason {
    Constant,
    NonlinearTop,
    /// Some coefficient `f^j` depends on variables of order `R - 1` or more,
    /// or `R = 0`.
    MixedDependence,
}

impl fmt::Display for StopReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StopReason::Constant => "constant",
            StopReason::NonlinearTop => "nonlinear in the top order",
            StopReason::MixedDependence => "coefficients of order above R - 2",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionStep {
    /// `d/dx Σ f^j w^j_{R-1}`.
    pub subtracted: Expr,
    pub result: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
    pub reduced: Expr,
    pub stop: StopReason,
}

impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, s) in self.steps.iter().enumerate() {
            writeln!(f, "step {}: subtract {}", k + 1, s.subtracted)?;
            writeln!(f, "  -> {}", s.result)?;
        }
        writeln!(f, "reduced = {}", self.reduced)?;
        writeln!(f, "stop: {}", self.stop)
    }
}

pub fn reduce_order(f: &Expr, ctx: &JetContext) -> Result<ReductionTrace> {
    if ctx.n() != 1 {
        return Err(Error::WrongShape(format!("order reduction needs n = 1, found n = {}", ctx.n())));
    }
    ctx.validate(f)?;
    let mut current = f.clone();
    let mut steps = Vec::new();
    let stop = loop {
        let (order, coeffs, coeff_order) = match classify_top_order(&current, ctx) {
            TopOrder::Constant => break StopReason::Constant,
            TopOrder::NonlinearTop { .. } => break StopReason::NonlinearTop,
            TopOrder::LinearTop { order, coeffs, coeff_order } => (order, coeffs, coeff_order),
        };
        // Coefficient order at most `R - 2`, with no coefficient order counted as -1.
        if coeff_order.map_or(order < 1, |k| k + 2 > order) {
            break StopReason::MixedDependence;
        }
        let potential = coeffs
            .iter()
            .enumerate()
            .fold(Expr::zero(), |acc, (j, c)| &acc + &(c * &Expr::var(top(j + 1, order - 1))));
        let subtracted = ctx.total_derivative(&potential, Index::x(1))?;
        current = &current - &subtracted;
        steps.push(ReductionStep { subtracted, result: current.clone() });
    };
    Ok(ReductionTrace { steps, reduced: current, stop })
}
