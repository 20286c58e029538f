//! Optional rational-function normalization: clears sum denominators and
//! cancels those that divide the numerator exactly.

use std::collections::BTreeMap;

use num_traits::{Signed, ToPrimitive, Zero};

use super::canon::{normalize_term, Mono, Poly};
use super::{Expr, Rational};

type Dense = BTreeMap<Vec<i64>, Rational>;

/// Returns an equal expression in which every sum denominator that divides
/// the cleared numerator has been cancelled. Expressions with non-integer
/// exponents are returned unchanged.
pub fn normalize_rational(e: &Expr) -> Expr {
    let p = Poly::of(e);
    let mut dens: BTreeMap<Expr, i64> = BTreeMap::new();
    for mono in p.terms.keys() {
        for (b, q) in mono {
            if !q.is_integer() {
                return e.clone();
            }
            if q.is_negative() {
                let k = (-q).to_integer().to_i64().unwrap_or(i64::MAX);
                let slot = dens.entry(b.clone()).or_insert(0);
                *slot = (*slot).max(k);
            }
        }
    }
    if !dens.keys().any(|b| matches!(b, Expr::Sum(_))) {
        return e.clone();
    }

    let numerator = shift(&p, &dens, 1);
    if numerator.is_zero() {
        return Expr::zero();
    }
    let Some((atoms, mut num)) = to_dense(&numerator, &dens) else {
        return e.clone();
    };

    let mut remaining = dens.clone();
    for (b, k) in remaining.iter_mut() {
        let divisor = match b {
            Expr::Sum(_) => match to_dense_with(&Poly::of(b), &atoms) {
                Some(d) => d,
                None => continue,
            },
            other => match to_dense_with(&Poly::of(other), &atoms) {
                Some(d) => d,
                None => continue,
            },
        };
        while *k > 0 {
            match divide(&num, &divisor) {
                Some(q) => {
                    num = q;
                    *k -= 1;
                }
                None => break,
            }
        }
    }
    let reduced = from_dense(&num, &atoms);
    shift(&reduced, &remaining, -1).into_expr()
}

/// Multiplies every term by `prod b^(sign*k)` before renormalizing, so that
/// denominators merge with their powers instead of being expanded first.
fn shift(p: &Poly, dens: &BTreeMap<Expr, i64>, sign: i64) -> Poly {
    let mut out = Poly::zero();
    for (mono, c) in &p.terms {
        let mut map: BTreeMap<Expr, Rational> = mono.iter().cloned().collect();
        for (b, k) in dens {
            if *k != 0 {
                *map.entry(b.clone()).or_insert_with(Rational::zero) += Rational::from_integer((sign * k).into());
            }
        }
        out.add_assign(normalize_term(c.clone(), map));
    }
    out
}

fn to_dense(p: &Poly, dens: &BTreeMap<Expr, i64>) -> Option<(Vec<Expr>, Dense)> {
    let mut atoms: Vec<Expr> = p.terms.keys().flat_map(|m| m.iter().map(|(b, _)| b.clone())).collect();
    for b in dens.keys() {
        match b {
            Expr::Sum(_) => {
                for m in Poly::of(b).terms.keys() {
                    atoms.extend(m.iter().map(|(a, _)| a.clone()));
                }
            }
            other => atoms.push(other.clone()),
        }
    }
    atoms.sort();
    atoms.dedup();
    let d = to_dense_with(p, &atoms)?;
    Some((atoms, d))
}

fn to_dense_with(p: &Poly, atoms: &[Expr]) -> Option<Dense> {
    let mut out = Dense::new();
    for (mono, c) in &p.terms {
        let mut v = vec![0i64; atoms.len()];
        for (b, q) in mono {
            if !q.is_integer() || q.is_negative() {
                return None;
            }
            let at = atoms.binary_search(b).ok()?;
            v[at] = q.to_integer().to_i64()?;
        }
        out.insert(v, c.clone());
    }
    Some(out)
}

fn from_dense(d: &Dense, atoms: &[Expr]) -> Poly {
    let mut p = Poly::zero();
    for (v, c) in d {
        let mono: Mono = v
            .iter()
            .zip(atoms)
            .filter(|(k, _)| **k != 0)
            .map(|(k, b)| (b.clone(), Rational::from_integer((*k).into())))
            .collect();
        p.add_term(mono, c.clone());
    }
    p
}

/// Exact quotient under lexicographic order, `None` if a remainder is left.
fn divide(num: &Dense, den: &Dense) -> Option<Dense> {
    let (lt_d, lc_d) = den.iter().next_back()?;
    let mut r = num.clone();
    let mut q = Dense::new();
    while let Some((lt_r, lc_r)) = r.iter().next_back() {
        if lt_r.iter().zip(lt_d).any(|(a, b)| a < b) {
            return None;
        }
        let shift: Vec<i64> = lt_r.iter().zip(lt_d).map(|(a, b)| a - b).collect();
        let coeff = lc_r / lc_d;
        for (m, c) in den {
            let key: Vec<i64> = m.iter().zip(&shift).map(|(a, b)| a + b).collect();
            let v = r.entry(key.clone()).or_insert_with(Rational::zero);
            *v -= c * &coeff;
            if v.is_zero() {
                r.remove(&key);
            }
        }
        *q.entry(shift).or_insert_with(Rational::zero) += coeff;
    }
    q.retain(|_, c| !c.is_zero());
    Some(q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    #[test]
    fn cancels_exact_factor() {
        let e = parse("(w1[1]^2 - 1)/(w1[1] - 1)").unwrap();
        assert_ne!(e, parse("w1[1] + 1").unwrap());
        assert_eq!(normalize_rational(&e), parse("w1[1] + 1").unwrap());
    }

    #[test]
    fn keeps_non_divisible_quotients() {
        let e = parse("(w1^2 + 1)/(w1 - 1)").unwrap();
        assert_eq!(normalize_rational(&e), e);
    }

    #[test]
    fn recognises_hidden_zero() {
        let e = parse("1/(w1 - 1) - w1/(w1^2 - w1)").unwrap();
        assert_eq!(normalize_rational(&e), Expr::zero());
    }
}
