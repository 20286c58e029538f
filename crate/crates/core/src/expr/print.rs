//! Deterministic printer emitting the parser's grammar.

use std::fmt;

use num_traits::{One, Signed};

use super::{Expr, Rational, VarRef};

impl fmt::Display for VarRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarRef::Independent(i) => match i.position() {
                Some(k) => write!(f, "x{k}"),
                None => f.write_str("t"),
            },
            VarRef::Jet { j, index } => {
                write!(f, "w{j}")?;
                if !index.is_empty() {
                    let parts: Vec<String> = index.indices().iter().map(|i| i.to_string()).collect();
                    write!(f, "[{}]", parts.join(","))?;
                }
                Ok(())
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render(self))
    }
}

fn render(e: &Expr) -> String {
    match e {
        Expr::Sum(ts) => {
            let mut s = String::new();
            for (k, t) in ts.iter().enumerate() {
                let (neg, body) = signed_term(t);
                match (k, neg) {
                    (0, true) => s.push('-'),
                    (0, false) => {}
                    (_, true) => s.push_str(" - "),
                    (_, false) => s.push_str(" + "),
                }
                s.push_str(&body);
            }
            s
        }
        other => {
            let (neg, body) = signed_term(other);
            if neg {
                format!("-{body}")
            } else {
                body
            }
        }
    }
}

/// Splits a term into its sign and the printed magnitude, moving negative
/// exponents and the coefficient's denominator below a single `/`.
fn signed_term(t: &Expr) -> (bool, String) {
    let one = Rational::one();
    let (coeff, factors): (&Rational, &[Expr]) = match t {
        Expr::Const(c) => (c, &[]),
        Expr::Product(fs) => match fs.first() {
            Some(Expr::Const(c)) => (c, &fs[1..]),
            _ => (&one, &fs[..]),
        },
        Expr::Sum(_) => return (false, format!("({})", render(t))),
        other => (&one, std::slice::from_ref(other)),
    };
    let neg = coeff.is_negative();
    let c = coeff.abs();
    let mut num = Vec::new();
    let mut den = Vec::new();
    for f in factors {
        match f {
            Expr::Power(b, q) if q.is_negative() => den.push(power(b, &-q)),
            other => num.push(factor(other)),
        }
    }
    if !c.numer().is_one() || num.is_empty() {
        num.insert(0, c.numer().to_string());
    }
    if !c.denom().is_one() {
        den.insert(0, c.denom().to_string());
    }
    let mut s = num.join("*");
    match den.len() {
        0 => {}
        1 => {
            s.push('/');
            s.push_str(&den[0]);
        }
        _ => {
            s.push_str("/(");
            s.push_str(&den.join("*"));
            s.push(')');
        }
    }
    (neg, s)
}

fn factor(e: &Expr) -> String {
    match e {
        Expr::Var(v) => v.to_string(),
        Expr::Func(k, a) => format!("{}({})", k.name(), render(a)),
        Expr::Power(b, q) => power(b, q),
        Expr::Const(c) if !c.is_negative() && c.is_integer() => c.to_string(),
        other => format!("({})", render(other)),
    }
}

fn power(b: &Expr, q: &Rational) -> String {
    let base = match b {
        Expr::Var(_) | Expr::Func(..) => factor(b),
        Expr::Const(c) if !c.is_negative() && c.is_integer() => c.to_string(),
        other => format!("({})", render(other)),
    };
    if q.is_one() {
        base
    } else if q.is_integer() && q.is_positive() {
        format!("{base}^{q}")
    } else {
        format!("{base}^({q})")
    }
}
