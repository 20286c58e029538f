//! The Euler–Lagrange operator and the first-order structure of
//! second-order systems.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::expr::{free_vars, pdiff, rat, substitute, sum, Expr, Index, MultiIndex, Poly, Rational, VarRef};
use crate::jet::JetContext;
use crate::tables::PairTable;
use crate::tonti::integrate_polynomial_t;
use crate::zero::{all_zero, is_zero, ZeroStatus, ZeroTestConfig};

fn check_no_variations(f: &Expr) -> Result<()> {
    match free_vars(f).into_iter().find(|v| v.is_variation() || *v == VarRef::t()) {
        Some(v) => Err(Error::IllegalVariable(v.to_string())),
        None => Ok(()),
    }
}

/// `e^j[f] = Σ_I (-1)^|I| D_I ∂f/∂w^j_I` over the distinct `I` occurring in `f`.
pub fn euler_lagrange(f: &Expr, ctx: &JetContext) -> Result<Vec<Expr>> {
    ctx.validate(f)?;
    let vars = free_vars(f);
    (1..=ctx.m())
        .map(|j| {
            let mut acc = Poly::zero();
            for v in vars.iter().filter(|v| v.dependent() == Some(j)) {
                let index = v.multi_index().unwrap();
                let mut g = pdiff(f, v);
                for &i in index.indices().iter().rev() {
                    g = ctx.total_derivative(&g, i)?;
                }
                if index.len() % 2 == 1 {
                    g = -g;
                }
                acc.add_assign(Poly::of(&g));
            }
            Ok(acc.into_expr())
        })
        .collect()
}

/// `d/dt f = Σ e^j w^j_t + Σ D_i F_i` in the extended jet space.
#[derive(Clone, Debug, PartialEq)]
pub struct VariationSplit {
    pub el_coeffs: Vec<Expr>,
    /// `F_i`, each linear in the variations.
    pub divergence_terms: Vec<Expr>,
}

pub fn variation_split(f: &Expr, ctx: &JetContext) -> Result<VariationSplit> {
    ctx.validate(f)?;
    check_no_variations(f)?;
    let mut coeffs: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
    for v in free_vars(f) {
        if let VarRef::Jet { j, index } = &v {
            coeffs.insert((*j as usize, index.clone()), pdiff(f, &v));
        }
    }
    let mut terms = vec![Poly::zero(); ctx.n()];
    // Peel one index off the longest multi-index at a time:
    // g w_{K't i} = D_i(g w_{K't}) - D_i(g) w_{K't}.
    loop {
        let next = coeffs.keys().filter(|(_, k)| !k.is_empty()).max_by_key(|(_, k)| k.len()).cloned();
        let Some(key) = next else { break };
        let g = coeffs.remove(&key).unwrap();
        let (j, k) = key;
        let i = k.last().unwrap();
        let rest = k.without(i).unwrap();
        let slot = i.position().expect("no t in a non-extended Lagrangian");
        let var = Expr::Var(VarRef::jet(j, rest.with(Index::T)));
        terms[slot - 1].add_assign(Poly::of(&(&g * &var)));
        let dg = ctx.total_derivative(&g, i)?;
        let entry = coeffs.entry((j, rest)).or_insert_with(Expr::zero);
        *entry = &*entry - &dg;
    }
    let el_coeffs = (1..=ctx.m()).map(|j| coeffs.remove(&(j, MultiIndex::empty())).unwrap_or_else(Expr::zero)).collect();
    Ok(VariationSplit { el_coeffs, divergence_terms: terms.into_iter().map(Poly::into_expr).collect() })
}

/// The data of a second-order system
/// `e^j = F^j - Σ_{j',i,i'} F^{jj'}_{ii'} w^{j'}_{ii'}`.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseProblemData {
    pub n: usize,
    pub m: usize,
    pub f1: Vec<Expr>,
    pub f2: PairTable,
}

impl InverseProblemData {
    pub fn zeros(n: usize, m: usize) -> Self {
        InverseProblemData { n, m, f1: vec![Expr::zero(); m], f2: PairTable::zeros(m, n) }
    }

    /// Checks shapes, the symmetry of `F2` and that entries are first order.
    pub fn validate(&self) -> Result<()> {
        if self.f1.len() != self.m || self.f2.m() != self.m || self.f2.n() != self.n {
            return Err(Error::WrongShape(format!("data tables do not match n = {}, m = {}", self.n, self.m)));
        }
        if !self.f2.is_symmetric() {
            return Err(Error::WrongShape("second-order coefficients are not symmetric".into()));
        }
        let ctx = JetContext::new(self.n, self.m)?;
        for e in self.f1.iter().chain(self.f2.iter().map(|(_, e)| e)) {
            ctx.validate(e)?;
            if let Some(order) = e.jet_order().filter(|&k| k > 1) {
                return Err(Error::NotFirstOrder { order });
            }
        }
        Ok(())
    }

    /// The equations `e^j` described by the data.
    pub fn reconstruct(&self) -> Vec<Expr> {
        (1..=self.m)
            .map(|j| {
                let mut acc = Poly::of(&self.f1[j - 1]);
                for jp in 1..=self.m {
                    for i in 1..=self.n {
                        for ip in 1..=self.n {
                            let c = self.f2.get(j, jp, i, ip);
                            if !c.is_zero() {
                                acc.add_assign(Poly::of(&-(c * &Expr::w(jp, &[i, ip]))));
                            }
                        }
                    }
                }
                acc.into_expr()
            })
            .collect()
    }
}

/// `E^j[f]` and the symmetrized first-order Hessian `E^{jj'}_{ii'}[f]`.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderELDecomposition {
    pub e1: Vec<Expr>,
    pub e2: PairTable,
}

impl FirstOrderELDecomposition {
    pub fn recompose(&self) -> Vec<Expr> {
        self.as_data().reconstruct()
    }

    pub fn as_data(&self) -> InverseProblemData {
        InverseProblemData { n: self.e2.n(), m: self.e2.m(), f1: self.e1.clone(), f2: self.e2.clone() }
    }
}

pub fn el_split_first_order(f: &Expr, ctx: &JetContext) -> Result<FirstOrderELDecomposition> {
    ctx.validate(f)?;
    check_no_variations(f)?;
    if let Some(order) = f.jet_order().filter(|&k| k > 1) {
        return Err(Error::NotFirstOrder { order });
    }
    let (n, m) = (ctx.n(), ctx.m());
    let half = rat(1, 2);
    let grads: Vec<Vec<Expr>> =
        (1..=m).map(|j| (1..=n).map(|i| pdiff(f, &VarRef::w(j, &[i]))).collect()).collect();
    let e1 = (1..=m)
        .map(|j| {
            let mut acc = Poly::of(&pdiff(f, &VarRef::w(j, &[])));
            for i in 1..=n {
                let mut d = Poly::of(&ctx.truncated_derivative(&grads[j - 1][i - 1], i));
                d.scale(&-Rational::one());
                acc.add_assign(d);
            }
            acc.into_expr()
        })
        .collect();
    let mut e2 = PairTable::zeros(m, n);
    for j in 1..=m {
        for jp in 1..=m {
            for i in 1..=n {
                for ip in 1..=n {
                    let a = pdiff(&grads[j - 1][i - 1], &VarRef::w(jp, &[ip]));
                    let b = pdiff(&grads[j - 1][ip - 1], &VarRef::w(jp, &[i]));
                    e2.set(j, jp, i, ip, (&a + &b).scale(&half));
                }
            }
        }
    }
    Ok(FirstOrderELDecomposition { e1, e2 })
}

/// Splits second-order equations into their data. Off-diagonal coefficients
/// are halved over the two ordered index pairs; a `j <-> j'` mismatch that the
/// zero test proves nonzero is reported instead of symmetrized away, since
/// symmetrizing it would change the equations.
pub fn decompose_second_order(e: &[Expr], ctx: &JetContext, cfg: &ZeroTestConfig) -> Result<InverseProblemData> {
    let (n, m) = (ctx.n(), ctx.m());
    if e.len() != m {
        return Err(Error::WrongShape(format!("expected {m} equations, found {}", e.len())));
    }
    let mut raw = PairTable::zeros(m, n);
    let mut f1 = Vec::with_capacity(m);
    for (k, ej) in e.iter().enumerate() {
        let j = k + 1;
        ctx.validate(ej)?;
        check_no_variations(ej)?;
        if let Some(order) = ej.jet_order().filter(|&o| o > 2) {
            return Err(Error::OrderTooHigh { j, order });
        }
        let second: Vec<VarRef> = free_vars(ej).into_iter().filter(|v| v.order() == Some(2)).collect();
        let mut zeros = BTreeMap::new();
        for v in &second {
            let c = pdiff(ej, v);
            if free_vars(&c).iter().any(|u| u.order() == Some(2)) {
                return Err(Error::NonlinearSecondOrder { j, var: v.to_string() });
            }
            let VarRef::Jet { j: jp, index } = v else { unreachable!() };
            let (a, b) = match index.indices() {
                [a, b] => (a.position().unwrap(), b.position().unwrap()),
                _ => unreachable!(),
            };
            let jp = *jp as usize;
            if a == b {
                raw.set(j, jp, a, a, -c);
            } else {
                let h = (-c).scale(&rat(1, 2));
                raw.set(j, jp, a, b, h.clone());
                raw.set(j, jp, b, a, h);
            }
            zeros.insert(v.clone(), Expr::zero());
        }
        f1.push(substitute(ej, &zeros));
    }
    let mut f2 = PairTable::zeros(m, n);
    let half = rat(1, 2);
    for j in 1..=m {
        for jp in j..=m {
            for a in 1..=n {
                for b in a..=n {
                    let (x, y) = (raw.get(j, jp, a, b), raw.get(jp, j, a, b));
                    if jp != j && x != y {
                        if let ZeroStatus::NonZero(_) = is_zero(&(x - y), cfg)? {
                            return Err(Error::AsymmetryUnrepairable { j, jp, var: VarRef::w(jp, &[a, b]).to_string() });
                        }
                    }
                    f2.set_symmetric(j, jp, a, b, (x + y).scale(&half));
                }
            }
        }
    }
    Ok(InverseProblemData { n, m, f1, f2 })
}

/// Weakest zero status over all `e^j[f]`.
pub fn is_null_lagrangian(f: &Expr, ctx: &JetContext, cfg: &ZeroTestConfig) -> Result<ZeroStatus> {
    all_zero(&euler_lagrange(f, ctx)?, cfg)
}

/// `f_1, ..., f_n` with `Σ D_i f_i = f` for a null Lagrangian `f`, built by
/// the homotopy from the reference functions `c^j(x)`.
pub fn divergence_representation(f: &Expr, c: &[Expr], ctx: &JetContext, cfg: &ZeroTestConfig) -> Result<Vec<Expr>> {
    check_reference(c, ctx)?;
    let el = euler_lagrange(f, ctx)?;
    for (k, e) in el.iter().enumerate() {
        if is_zero(e, cfg)?.is_nonzero() {
            return Err(Error::NotNullLagrangian { j: k + 1, residual: e.to_string() });
        }
    }
    let split = variation_split(f, ctx)?;
    let mut bindings = BTreeMap::new();
    let t = Expr::t();
    let one_minus_t = &Expr::one() - &t;
    let mut seen = BTreeSet::new();
    for v in split.divergence_terms.iter().flat_map(free_vars).chain(free_vars(f)) {
        let VarRef::Jet { j, index } = &v else { continue };
        if !seen.insert(v.clone()) {
            continue;
        }
        let j = *j as usize;
        if index.contains_t() {
            let base = index.without(Index::T).unwrap();
            let cd = ctx.total_derivative_multi(&c[j - 1], &base)?;
            bindings.insert(v.clone(), &Expr::Var(VarRef::jet(j, base)) - &cd);
        } else {
            let cd = ctx.total_derivative_multi(&c[j - 1], index)?;
            bindings.insert(v.clone(), &(&t * &Expr::Var(v.clone())) + &(&one_minus_t * &cd));
        }
    }
    let mut out = Vec::with_capacity(ctx.n());
    for fi in &split.divergence_terms {
        let h = substitute(fi, &bindings);
        let integral = integrate_polynomial_t(&h)
            .ok_or_else(|| Error::NotClosedFormIntegrable(format!("homotopy integrand {h} is not polynomial in t")))?;
        out.push(integral);
    }
    let at_reference: BTreeMap<VarRef, Expr> =
        bindings.iter().filter(|(v, _)| !v.is_variation()).map(|(v, b)| (v.clone(), substitute(b, &[(VarRef::t(), Expr::zero())].into()))).collect();
    let base = substitute(f, &at_reference);
    if base.has_pole() {
        return Err(Error::NotClosedFormIntegrable(format!("{f} has a pole on the reference functions")));
    }
    if !base.is_zero() {
        let prim = primitive_x1(&base)
            .ok_or_else(|| Error::NotClosedFormIntegrable(format!("no closed-form x1-primitive of {base}")))?;
        out[0] = &out[0] + &prim;
    }
    let mut div = Poly::zero();
    for (k, fi) in out.iter().enumerate() {
        div.add_assign(Poly::of(&ctx.total_derivative(fi, Index::x(k + 1))?));
    }
    let check = &div.into_expr() - f;
    if is_zero(&check, cfg)?.is_nonzero() {
        return Err(Error::VerificationFailed(format!("divergence differs from the Lagrangian by {check}")));
    }
    Ok(out)
}

pub(crate) fn check_reference(c: &[Expr], ctx: &JetContext) -> Result<()> {
    if c.len() != ctx.m() {
        return Err(Error::WrongShape(format!("expected {} reference functions, found {}", ctx.m(), c.len())));
    }
    for cj in c {
        if let Some(v) = free_vars(cj).into_iter().find(|v| !matches!(v, VarRef::Independent(i) if !i.is_t())) {
            return Err(Error::InvalidReference(format!("{cj} depends on {v}")));
        }
    }
    Ok(())
}

/// Primitive in `x1` of a Laurent polynomial in `x1` whose other factors do
/// not involve `x1`.
fn primitive_x1(e: &Expr) -> Option<Expr> {
    let x1 = VarRef::x(1);
    let x1e = Expr::Var(x1.clone());
    let terms = e.terms();
    let mut acc = Vec::with_capacity(terms.len());
    for term in terms {
        let mut k = Rational::zero();
        let mut rest = Expr::one();
        let factors: Vec<Expr> = match &term {
            Expr::Product(fs) => fs.to_vec(),
            other => vec![other.clone()],
        };
        for fct in factors {
            match &fct {
                Expr::Var(v) if *v == x1 => k += Rational::one(),
                Expr::Power(b, q) if **b == x1e => k += q,
                other if crate::expr::depends_on(other, &x1) => return None,
                other => rest = &rest * other,
            }
        }
        let k1 = &k + Rational::one();
        acc.push(if k1.is_zero() {
            &rest * &x1e.ln()
        } else {
            let p = x1e.checked_pow(&k1).ok()?;
            (&rest * &p).scale(&k1.recip())
        });
    }
    Some(sum(&acc))
}
