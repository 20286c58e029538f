//! Exact rational evaluation with a certified interval fallback for the
//! transcendental kernels, plus plain `f64` evaluation.

use std::f64::consts::PI;

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use super::{Expr, FuncKind, Rational, VarRef};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("variable {0:?} has no value")]
    Unbound(VarRef),
    #[error("pole")]
    Pole,
    #[error("argument outside the real domain")]
    Domain,
}

/// Closed interval `[lo, hi]` with outward-rounded endpoints.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

fn outward(lo: f64, hi: f64, ulps: u32) -> Interval {
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..ulps {
        lo = lo.next_down();
        hi = hi.next_up();
    }
    Interval { lo, hi }
}

impl Interval {
    pub fn of(q: &Rational) -> Interval {
        let v = q.to_f64().unwrap_or(f64::NAN);
        outward(v, v, 1)
    }

    pub fn contains_zero(&self) -> bool {
        !(self.lo > 0.0 || self.hi < 0.0)
    }

    fn is_finite(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    fn add(self, o: Interval) -> Interval {
        outward(self.lo + o.lo, self.hi + o.hi, 1)
    }

    fn mul(self, o: Interval) -> Interval {
        let ps = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        let lo = ps.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = ps.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        outward(lo, hi, 1)
    }

    fn recip(self) -> Result<Interval, EvalError> {
        if self.contains_zero() {
            return Err(EvalError::Pole);
        }
        Ok(outward(1.0 / self.hi, 1.0 / self.lo, 1))
    }

    fn powi(self, k: i64) -> Result<Interval, EvalError> {
        let mut acc = Interval { lo: 1.0, hi: 1.0 };
        let mut base = self;
        let mut e = k.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(base);
            }
        }
        if k < 0 {
            acc.recip()
        } else {
            Ok(acc)
        }
    }

    fn powf(self, r: f64) -> Result<Interval, EvalError> {
        if self.lo <= 0.0 {
            return Err(EvalError::Domain);
        }
        let (a, b) = (self.lo.powf(r), self.hi.powf(r));
        Ok(outward(a.min(b), a.max(b), 4))
    }

    fn exp(self) -> Interval {
        outward(self.lo.exp(), self.hi.exp(), 4)
    }

    fn ln(self) -> Result<Interval, EvalError> {
        if self.lo <= 0.0 {
            return Err(EvalError::Domain);
        }
        Ok(outward(self.lo.ln(), self.hi.ln(), 4))
    }

    /// Range of a 2π-periodic unit wave `f` with maximum at `max_at` and
    /// minimum half a period later. Extrema are detected with a small slack.
    fn periodic(self, f: fn(f64) -> f64, max_at: f64) -> Interval {
        if self.hi - self.lo >= 2.0 * PI {
            return Interval { lo: -1.0, hi: 1.0 };
        }
        let slack = 1e-9;
        let (a, b) = (f(self.lo), f(self.hi));
        let (mut lo, mut hi) = (a.min(b), a.max(b));
        let hits = |c: f64| {
            let k = ((self.lo - c) / (2.0 * PI)).ceil() - 1.0;
            (0..3).any(|d| {
                let p = c + 2.0 * PI * (k + d as f64);
                p >= self.lo - slack && p <= self.hi + slack
            })
        };
        if hits(max_at) {
            hi = 1.0;
        }
        if hits(max_at + PI) {
            lo = -1.0;
        }
        let r = outward(lo, hi, 4);
        Interval { lo: r.lo.max(-1.0), hi: r.hi.min(1.0) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(Interval),
}

impl Value {
    fn interval(&self) -> Interval {
        match self {
            Value::Exact(q) => Interval::of(q),
            Value::Approx(i) => *i,
        }
    }

    /// `Some(true)` if certainly zero, `Some(false)` if certainly nonzero.
    pub fn is_zero(&self) -> Option<bool> {
        match self {
            Value::Exact(q) => Some(q.is_zero()),
            Value::Approx(i) if !i.contains_zero() => Some(false),
            Value::Approx(_) => None,
        }
    }
}

fn approx(i: Interval) -> Result<Value, EvalError> {
    if i.is_finite() {
        Ok(Value::Approx(i))
    } else {
        Err(EvalError::Pole)
    }
}

fn exact_root(q: &Rational, r: &Rational) -> Option<Rational> {
    let den = u32::try_from(r.denom().clone()).ok()?;
    let root = |v: &num_bigint::BigInt| {
        let s = v.nth_root(den);
        (num_traits::Pow::pow(&s, den) == *v).then_some(s)
    };
    let base = Rational::new(root(q.numer())?, root(q.denom())?);
    let k: i32 = r.numer().try_into().ok()?;
    Some(num_traits::Pow::pow(&base, k))
}

/// Evaluates at exact rational values; transcendental kernels produce
/// certified enclosures.
pub fn eval_value(e: &Expr, lookup: &dyn Fn(&VarRef) -> Option<Rational>) -> Result<Value, EvalError> {
    Ok(match e {
        Expr::Const(c) => Value::Exact(c.clone()),
        Expr::Var(v) => Value::Exact(lookup(v).ok_or_else(|| EvalError::Unbound(v.clone()))?),
        Expr::Sum(ts) => {
            let mut acc = Value::Exact(Rational::zero());
            for t in ts.iter() {
                acc = match (acc, eval_value(t, lookup)?) {
                    (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
                    (a, b) => approx(a.interval().add(b.interval()))?,
                };
            }
            acc
        }
        Expr::Product(fs) => {
            let mut acc = Value::Exact(Rational::one());
            for f in fs.iter() {
                acc = match (acc, eval_value(f, lookup)?) {
                    (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
                    (a, b) => approx(a.interval().mul(b.interval()))?,
                };
            }
            acc
        }
        Expr::Power(b, q) => {
            let vb = eval_value(b, lookup)?;
            if q.is_integer() {
                let k: i64 = q.to_integer().try_into().map_err(|_| EvalError::Domain)?;
                match vb {
                    Value::Exact(c) if c.is_zero() && k < 0 => return Err(EvalError::Pole),
                    Value::Exact(c) => {
                        let k32: i32 = k.try_into().map_err(|_| EvalError::Domain)?;
                        Value::Exact(num_traits::Pow::pow(&c, k32))
                    }
                    Value::Approx(i) => approx(i.powi(k)?)?,
                }
            } else {
                match vb {
                    Value::Exact(c) if c.is_negative() => return Err(EvalError::Domain),
                    Value::Exact(c) if c.is_zero() => {
                        if q.is_positive() {
                            Value::Exact(c)
                        } else {
                            return Err(EvalError::Pole);
                        }
                    }
                    Value::Exact(c) => match exact_root(&c, q) {
                        Some(r) => Value::Exact(r),
                        None => approx(Interval::of(&c).powf(q.to_f64().unwrap())?)?,
                    },
                    Value::Approx(i) => approx(i.powf(q.to_f64().unwrap())?)?,
                }
            }
        }
        Expr::Func(kind, a) => {
            let va = eval_value(a, lookup)?;
            if let Value::Exact(c) = &va {
                match kind {
                    FuncKind::Exp | FuncKind::Cos if c.is_zero() => return Ok(Value::Exact(Rational::one())),
                    FuncKind::Sin if c.is_zero() => return Ok(Value::Exact(Rational::zero())),
                    FuncKind::Ln if c.is_one() => return Ok(Value::Exact(Rational::zero())),
                    FuncKind::Ln if !c.is_positive() => return Err(EvalError::Domain),
                    _ => {}
                }
            }
            let i = va.interval();
            approx(match kind {
                FuncKind::Exp => i.exp(),
                FuncKind::Ln => i.ln()?,
                FuncKind::Sin => i.periodic(f64::sin, PI / 2.0),
                FuncKind::Cos => i.periodic(f64::cos, 0.0),
            })?
        }
    })
}

/// Plain floating-point evaluation.
pub fn eval_f64(e: &Expr, lookup: &dyn Fn(&VarRef) -> Option<f64>) -> Result<f64, EvalError> {
    let v = match e {
        Expr::Const(c) => c.to_f64().unwrap_or(f64::NAN),
        Expr::Var(v) => lookup(v).ok_or_else(|| EvalError::Unbound(v.clone()))?,
        Expr::Sum(ts) => ts.iter().map(|t| eval_f64(t, lookup)).sum::<Result<f64, _>>()?,
        Expr::Product(fs) => fs.iter().map(|f| eval_f64(f, lookup)).product::<Result<f64, _>>()?,
        Expr::Power(b, q) => {
            let vb = eval_f64(b, lookup)?;
            if q.is_integer() {
                let k: i32 = q.to_integer().try_into().map_err(|_| EvalError::Domain)?;
                if vb == 0.0 && k < 0 {
                    return Err(EvalError::Pole);
                }
                vb.powi(k)
            } else {
                if vb < 0.0 {
                    return Err(EvalError::Domain);
                }
                vb.powf(q.to_f64().unwrap())
            }
        }
        Expr::Func(kind, a) => {
            let va = eval_f64(a, lookup)?;
            match kind {
                FuncKind::Exp => va.exp(),
                FuncKind::Ln if va <= 0.0 => return Err(EvalError::Domain),
                FuncKind::Ln => va.ln(),
                FuncKind::Sin => va.sin(),
                FuncKind::Cos => va.cos(),
            }
        }
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::Pole)
    }
}
