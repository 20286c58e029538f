//! Seeded generators of random polynomial test data.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::expr::{rat, Expr, VarRef};

/// Shape of generated polynomials.
#[derive(Clone, Copy, Debug)]
pub struct PolyShape {
    pub n: usize,
    pub m: usize,
    /// Highest jet order of the variables used.
    pub order: usize,
    pub max_degree: usize,
    pub terms: usize,
    pub with_x: bool,
}

impl PolyShape {
    pub fn first_order(n: usize, m: usize, max_degree: usize) -> Self {
        PolyShape { n, m, order: 1, max_degree, terms: 4, with_x: true }
    }

    fn variables(&self) -> Vec<VarRef> {
        let mut vs = Vec::new();
        if self.with_x {
            vs.extend((1..=self.n).map(VarRef::x));
        }
        for j in 1..=self.m {
            for k in 0..=self.order {
                vs.extend(multi_indices(self.n, k).iter().map(|idx| VarRef::w(j, idx)));
            }
        }
        vs
    }
}

/// Sorted multi-indices of length `k` over `1..=n`.
fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for prefix in multi_indices(n, k - 1) {
        let from = prefix.last().copied().unwrap_or(1);
        for i in from..=n {
            let mut idx = prefix.clone();
            idx.push(i);
            out.push(idx);
        }
    }
    out
}

/// A nonzero rational in `[-3, 3]` with denominator at most 3.
pub fn coefficient<R: Rng>(rng: &mut R) -> Expr {
    let q: i64 = rng.gen_range(1..=3);
    loop {
        let p: i64 = rng.gen_range(-3 * q..=3 * q);
        if p != 0 {
            return Expr::rational(rat(p, q));
        }
    }
}

pub fn monomial<R: Rng>(rng: &mut R, vars: &[VarRef], degree: usize) -> Expr {
    let mut e = coefficient(rng);
    for _ in 0..degree {
        let v = vars.choose(rng).expect("nonempty variable pool");
        e = &e * &Expr::var(v.clone());
    }
    e
}

/// Sum of `shape.terms` random monomials of degree `1..=max_degree`.
pub fn polynomial<R: Rng>(rng: &mut R, shape: &PolyShape) -> Expr {
    let vars = shape.variables();
    let mut acc = Expr::zero();
    for _ in 0..shape.terms {
        let d = rng.gen_range(1..=shape.max_degree);
        acc = &acc + &monomial(rng, &vars, d);
    }
    acc
}

/// A polynomial that is guaranteed to involve at least one first-order
/// variable of degree two, so that the Hessian in the first-order variables
/// is not identically zero.
pub fn lagrangian<R: Rng>(rng: &mut R, shape: &PolyShape) -> Expr {
    let j = rng.gen_range(1..=shape.m);
    let i = rng.gen_range(1..=shape.n);
    let p = Expr::w(j, &[i]);
    let base = &coefficient(rng) * &(&p * &p);
    &base + &polynomial(rng, shape)
}

/// `f_0 + Σ_j f^j w^j_R` for `n = 1`, with `f_0` of order below `R` and the
/// coefficients `f^j` of order at most `R - 2`.
pub fn linear_top<R: Rng>(rng: &mut R, m: usize, order: usize, max_degree: usize) -> Expr {
    assert!(order >= 1, "linear top-order Lagrangians need order >= 1");
    let low = PolyShape { n: 1, m, order: order - 1, max_degree, terms: 3, with_x: true };
    let mut acc = polynomial(rng, &low);
    for j in 1..=m {
        let coeff = match order {
            1 => coefficient(rng),
            _ => polynomial(rng, &PolyShape { order: order - 2, terms: 2, ..low }),
        };
        acc = &acc + &(&coeff * &Expr::w(j, &vec![1; order]));
    }
    acc
}
