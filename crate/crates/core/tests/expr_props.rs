use std::collections::BTreeMap;
use std::sync::Arc;

use proptest::prelude::*;
use proptest::strategy::ValueTree;
use varinv_core::expr::{eval_f64, eval_value, parse, pdiff, rat, simplify, substitute, Expr, Rational, Value, VarRef};

fn vars() -> Vec<VarRef> {
    vec![VarRef::x(1), VarRef::x(2), VarRef::w(1, &[]), VarRef::w(2, &[]), VarRef::w(1, &[1]), VarRef::w(1, &[1, 2]), VarRef::w(2, &[2])]
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-4i64..=4, 1i64..=3).prop_map(|(p, q)| Expr::rational(rat(p, q))),
        proptest::sample::select(vars()).prop_map(Expr::Var),
    ]
}

/// Raw (uncanonicalized) trees.
fn raw_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(4, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Expr::Sum(v.into())),
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| Expr::Product(v.into())),
            (inner.clone(), prop_oneof![Just(2i64), Just(3), Just(-1), Just(-2)])
                .prop_map(|(b, k)| Expr::Power(Arc::new(b), Rational::from_integer(k.into()))),
            inner.clone().prop_map(|a| Expr::Func(varinv_core::expr::FuncKind::Exp, Arc::new(a))),
            inner.prop_map(|a| Expr::Func(varinv_core::expr::FuncKind::Sin, Arc::new(a))),
        ]
    })
}

fn poly_expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(|v| simplify(&Expr::Sum(v.into()))),
            prop::collection::vec(inner, 2..3).prop_map(|v| simplify(&Expr::Product(v.into()))),
        ]
    })
}

fn point() -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-30i64..=30, 1i64..=7).prop_map(|(p, q)| rat(p, q)), vars().len())
}

fn lookup(values: &[Rational]) -> impl Fn(&VarRef) -> Option<Rational> + '_ {
    move |v| vars().iter().position(|u| u == v).map(|k| values[k].clone())
}

fn agree(a: &Value, b: &Value) -> bool {
    match (a, b) {
        (Value::Exact(x), Value::Exact(y)) => x == y,
        (x, y) => {
            let iv = |v: &Value| match v {
                Value::Exact(q) => {
                    let f = num_traits::ToPrimitive::to_f64(q).unwrap();
                    (f, f)
                }
                Value::Approx(i) => (i.lo, i.hi),
            };
            let ((a0, a1), (b0, b1)) = (iv(x), iv(y));
            // Enclosures of equal values overlap up to rounding of huge magnitudes.
            let slack = 1e-9 * (1.0 + a0.abs().max(a1.abs()).max(b0.abs()).max(b1.abs()));
            a0 <= b1 + slack && b0 <= a1 + slack
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn simplify_is_idempotent(e in raw_expr()) {
        let s = simplify(&e);
        prop_assert_eq!(simplify(&s), s);
    }

    #[test]
    fn printing_round_trips(e in raw_expr()) {
        let s = simplify(&e);
        prop_assume!(!s.has_pole());
        let text = s.to_string();
        prop_assert_eq!(parse(&text).unwrap(), s, "{}", text);
    }

    #[test]
    fn simplify_preserves_values(e in raw_expr(), at in point()) {
        let f = lookup(&at);
        if let (Ok(a), Ok(b)) = (eval_value(&e, &f), eval_value(&simplify(&e), &f)) {
            prop_assert!(agree(&a, &b), "{:?} vs {:?}", a, b);
        }
    }

    #[test]
    fn pdiff_is_linear(e1 in raw_expr(), e2 in raw_expr(), a in -3i64..=3, b in 1i64..=4) {
        let (e1, e2) = (simplify(&e1), simplify(&e2));
        let (a, b) = (Expr::int(a), Expr::rational(rat(1, b)));
        for v in vars() {
            let lhs = pdiff(&(&(&a * &e1) + &(&b * &e2)), &v);
            let rhs = &(&a * &pdiff(&e1, &v)) + &(&b * &pdiff(&e2, &v));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn partials_commute(e in raw_expr()) {
        let e = simplify(&e);
        let vs = vars();
        for u in &vs[..4] {
            for v in &vs[2..] {
                prop_assert_eq!(pdiff(&pdiff(&e, u), v), pdiff(&pdiff(&e, v), u));
            }
        }
    }
}

/// Eighth-order central difference.
fn central(f: impl Fn(f64) -> f64, x: f64, h: f64) -> f64 {
    const C: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
    C.iter().enumerate().map(|(k, c)| c * (f(x + (k + 1) as f64 * h) - f(x - (k + 1) as f64 * h))).sum::<f64>() / h
}

#[test]
fn chain_rule_matches_finite_differences() {
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut checked = 0;
    while checked < 100 {
        let f = poly_expr().new_tree(&mut runner).unwrap().current();
        let g = poly_expr().new_tree(&mut runner).unwrap().current();
        let at = point().new_tree(&mut runner).unwrap().current();
        let w1 = VarRef::w(1, &[]);
        let x1 = VarRef::x(1);
        let mut b = BTreeMap::new();
        b.insert(w1.clone(), substitute(&g, &BTreeMap::from([(w1.clone(), Expr::w(2, &[]))])));
        let composed = substitute(&f, &b);
        let symbolic = pdiff(&composed, &x1);
        let base: Vec<f64> = at.iter().map(|q| num_traits::ToPrimitive::to_f64(q).unwrap()).collect();
        let vs = vars();
        let eval_at = |x: f64| {
            eval_f64(&composed, &|v| {
                let k = vs.iter().position(|u| u == v)?;
                Some(if *v == x1 { x } else { base[k] })
            })
            .unwrap()
        };
        let exact = eval_f64(&symbolic, &|v| vs.iter().position(|u| u == v).map(|k| base[k])).unwrap();
        let numeric = central(eval_at, base[0], 1e-2);
        let scale = exact.abs().max(1.0);
        assert!((exact - numeric).abs() / scale < 1e-9, "{composed}: {exact} vs {numeric}");
        checked += 1;
    }
}
