use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varinv_core::expr::{parse, Expr};
use varinv_core::random::linear_top;
use varinv_core::reduction::{classify_top_order, reduce_order, StopReason, TopOrder};
use varinv_core::variational::euler_lagrange;
use varinv_core::{is_zero, Error, JetContext, ZeroTestConfig};

fn p(s: &str) -> Expr {
    parse(s).unwrap()
}

fn ctx(m: usize) -> JetContext {
    JetContext::with_max_order(1, m, 10).unwrap()
}

fn el_difference_vanishes(a: &Expr, b: &Expr, c: &JetContext) -> bool {
    let ea = euler_lagrange(a, c).unwrap();
    let eb = euler_lagrange(b, c).unwrap();
    ea.iter().zip(&eb).all(|(x, y)| !is_zero(&(x - y), &ZeroTestConfig::default()).unwrap().is_nonzero())
}

#[test]
fn classification_examples() {
    let c = ctx(1);
    assert_eq!(classify_top_order(&p("w1[1]^2"), &c), TopOrder::NonlinearTop { order: 1 });
    assert_eq!(
        classify_top_order(&p("w1*w1[1,1]"), &c),
        TopOrder::LinearTop { order: 2, coeffs: vec![p("w1")], coeff_order: Some(0) }
    );
    assert_eq!(classify_top_order(&p("x1"), &c), TopOrder::Constant);
    let c2 = ctx(2);
    assert_eq!(classify_top_order(&p("w1[1,1]*w2[1,1]"), &c2), TopOrder::NonlinearTop { order: 2 });
    assert_eq!(
        classify_top_order(&p("w1[1,1] + w2[1]*w2[1,1]"), &c2),
        TopOrder::LinearTop { order: 2, coeffs: vec![Expr::one(), p("w2[1]")], coeff_order: Some(1) }
    );
}

#[test]
fn reduction_examples() {
    let c = ctx(1);
    let t = reduce_order(&p("x1*w1[1,1]"), &c).unwrap();
    assert_eq!(t.steps.len(), 2);
    assert_eq!(t.steps[0].subtracted, p("w1[1] + x1*w1[1,1]"));
    assert_eq!(t.steps[0].result, p("-w1[1]"));
    assert_eq!(t.steps[1].subtracted, p("-w1[1]"));
    assert!(t.reduced.is_zero());
    assert_eq!(t.stop, StopReason::Constant);

    let f = p("w1*w1[1,1]");
    let t = reduce_order(&f, &c).unwrap();
    assert_eq!(t.steps.len(), 1);
    assert_eq!(t.reduced, p("-w1[1]^2"));
    assert_eq!(euler_lagrange(&t.reduced, &c).unwrap(), euler_lagrange(&f, &c).unwrap());
    assert_eq!(euler_lagrange(&t.reduced, &c).unwrap(), vec![p("2*w1[1,1]")]);

    let t = reduce_order(&p("w1[1]^2/2"), &c).unwrap();
    assert!(t.steps.is_empty());
    assert_eq!(t.reduced, p("w1[1]^2/2"));
    assert_eq!(t.stop, StopReason::NonlinearTop);
}

#[test]
fn reduction_stops_on_mixed_dependence() {
    let c = ctx(1);
    let f = p("w1[1]*w1[1,1]");
    let t = reduce_order(&f, &c).unwrap();
    assert!(t.steps.is_empty());
    assert_eq!(t.stop, StopReason::MixedDependence);
    assert!(matches!(reduce_order(&f, &JetContext::new(2, 1).unwrap()), Err(Error::WrongShape(_))));
}

#[test]
fn reduction_respects_the_context_order() {
    let c = JetContext::with_max_order(1, 1, 2).unwrap();
    let t = reduce_order(&p("w1*w1[1,1]"), &c).unwrap();
    assert_eq!(t.reduced, p("-w1[1]^2"));
    assert!(matches!(
        reduce_order(&p("w1[1,1,1]"), &c),
        Err(Error::IllegalVariable(_))
    ));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn linear_top_reductions_preserve_equations(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = rng.gen_range(1..=2);
        let order = rng.gen_range(1..=3);
        let c = ctx(m);
        let f = linear_top(&mut rng, m, order, 2);
        let t = reduce_order(&f, &c).unwrap();
        prop_assert!(!t.steps.is_empty(), "f = {}", f);
        let mut prev = f.jet_order();
        for s in &t.steps {
            let now = s.result.jet_order();
            prop_assert!(now < prev, "order did not drop: {}", f);
            prev = now;
        }
        prop_assert!(t.steps.len() <= order);
        prop_assert!(el_difference_vanishes(&f, &t.reduced, &c), "f = {}", f);
        if t.stop == StopReason::NonlinearTop {
            let k = t.reduced.jet_order().unwrap();
            let el_order = euler_lagrange(&t.reduced, &c).unwrap().iter().filter_map(Expr::jet_order).max();
            prop_assert_eq!(el_order, Some(2 * k), "half-order bound for {}", f);
        }
    }
}
