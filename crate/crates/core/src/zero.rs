//! Three-valued zero testing by canonicalization and random evaluation.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::expr::{eval_value, free_vars, normalize_rational, Expr, Interval, Rational, Value, VarRef};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZeroTestConfig {
    pub samples: usize,
    pub seed: u64,
    /// Try rational-function cancellation before sampling.
    pub normalize: bool,
}

impl Default for ZeroTestConfig {
    fn default() -> Self {
        ZeroTestConfig { samples: 8, seed: 0x5eed, normalize: true }
    }
}

/// Exact rational values for the variables of an expression.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Assignment(pub BTreeMap<VarRef, Rational>);

impl Assignment {
    pub fn get(&self, v: &VarRef) -> Option<&Rational> {
        self.0.get(v)
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(v, q)| format!("{v}={q}")).collect();
        write!(f, "{{{}}}", parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum WitnessValue {
    Exact(Rational),
    /// Certified enclosure excluding zero, for transcendental values.
    Enclosure(Interval),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub at: Assignment,
    pub value: WitnessValue,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            WitnessValue::Exact(q) => write!(f, "{} -> {q}", self.at),
            WitnessValue::Enclosure(i) => write!(f, "{} -> [{:e}, {:e}]", self.at, i.lo, i.hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ZeroStatus {
    Zero,
    LikelyZero,
    NonZero(Box<Witness>),
}

impl ZeroStatus {
    fn rank(&self) -> u8 {
        match self {
            ZeroStatus::Zero => 0,
            ZeroStatus::LikelyZero => 1,
            ZeroStatus::NonZero(_) => 2,
        }
    }

    /// The weaker of two statuses.
    pub fn weakest(self, other: ZeroStatus) -> ZeroStatus {
        if other.rank() > self.rank() {
            other
        } else {
            self
        }
    }

    pub fn is_nonzero(&self) -> bool {
        matches!(self, ZeroStatus::NonZero(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            ZeroStatus::Zero => "Zero",
            ZeroStatus::LikelyZero => "LikelyZero",
            ZeroStatus::NonZero(_) => "NonZero",
        }
    }
}

impl fmt::Display for ZeroStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ZeroStatus::NonZero(w) => write!(f, "NonZero at {w}"),
            other => f.write_str(other.label()),
        }
    }
}

fn sample(rng: &mut ChaCha8Rng) -> Rational {
    let q: i64 = rng.gen_range(1..=1024);
    let p: i64 = rng.gen_range(-3 * q..=3 * q);
    Rational::new(BigInt::from(p), BigInt::from(q))
}

/// `Zero` only for a literal canonical 0; otherwise samples exact rational
/// points, rejecting those where the expression is undefined.
pub fn is_zero(e: &Expr, cfg: &ZeroTestConfig) -> Result<ZeroStatus> {
    if e.is_zero() {
        return Ok(ZeroStatus::Zero);
    }
    if cfg.normalize && normalize_rational(e).is_zero() {
        return Ok(ZeroStatus::Zero);
    }
    let vars: Vec<VarRef> = free_vars(e).into_iter().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let wanted = cfg.samples.max(1);
    let budget = 100 * wanted;
    let mut good = 0;
    for _ in 0..budget {
        let at = Assignment(vars.iter().map(|v| (v.clone(), sample(&mut rng))).collect());
        let value = match eval_value(e, &|v| at.get(v).cloned()) {
            Ok(v) => v,
            Err(_) => continue,
        };
        match value {
            Value::Exact(q) if q != Rational::from_integer(0.into()) => {
                return Ok(ZeroStatus::NonZero(Box::new(Witness { at, value: WitnessValue::Exact(q) })));
            }
            Value::Approx(i) if !i.contains_zero() => {
                return Ok(ZeroStatus::NonZero(Box::new(Witness { at, value: WitnessValue::Enclosure(i) })));
            }
            _ => good += 1,
        }
        if good == wanted {
            return Ok(ZeroStatus::LikelyZero);
        }
    }
    Err(Error::PoleExhaustion { attempts: budget })
}

/// Weakest status over several expressions.
pub fn all_zero<'a>(es: impl IntoIterator<Item = &'a Expr>, cfg: &ZeroTestConfig) -> Result<ZeroStatus> {
    let mut acc = ZeroStatus::Zero;
    for e in es {
        acc = acc.weakest(is_zero(e, cfg)?);
        if acc.is_nonzero() {
            break;
        }
    }
    Ok(acc)
}
