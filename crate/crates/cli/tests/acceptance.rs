//! The twelve acceptance criteria, one pass/fail line each, at their stated
//! tolerances and time limits.

mod common;

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use varinv_core::expr::{parse, simplify, Expr, VarRef};
use varinv_core::helmholtz::{conditions_m1, helmholtz_check, Verdict};
use varinv_core::random::{lagrangian, linear_top, polynomial, PolyShape};
use varinv_core::reduction::reduce_order;
use varinv_core::solver::{build_g_m2, solve_m1, solve_m2, solve_n1, LagrangianSolution, ReferenceFunctions, SolverOptions};
use varinv_core::tonti::{tonti_lagrangian, TontiResult};
use varinv_core::variational::{
    decompose_second_order, divergence_representation, el_split_first_order, euler_lagrange, is_null_lagrangian,
    InverseProblemData,
};
use varinv_core::{is_zero, Index, JetContext, ZeroStatus, ZeroTestConfig};

type Outcome = Result<String, String>;

fn ctx(n: usize, m: usize) -> JetContext {
    JetContext::new(n, m).expect("context")
}

fn cfg() -> ZeroTestConfig {
    ZeroTestConfig::default()
}

fn p(s: &str) -> Expr {
    parse(s).expect("expression")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn not_nonzero(e: &Expr) -> Result<bool, String> {
    Ok(!is_zero(e, &cfg()).map_err(|e| e.to_string())?.is_nonzero())
}

fn within(elapsed: Duration, limit: f64) -> Result<(), String> {
    ensure(elapsed.as_secs_f64() < limit, || format!("took {:.3} s, limit {limit} s", elapsed.as_secs_f64()))
}

fn c1() -> Outcome {
    let start = Instant::now();
    let e = euler_lagrange(&p("exp(w1)/w1[1]"), &ctx(1, 1)).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let expected = simplify(&p("2*(exp(w1)/w1[1])*(1 - w1[1,1]/w1[1]^2)"));
    ensure(e == vec![expected.clone()], || format!("got {}, expected {expected}", e[0]))?;
    within(elapsed, 0.1)?;
    Ok(format!("e1 = {}", e[0]))
}

/// Value of a second-order Lagrangian `L(x, y, y', y'')` at a jet point.
fn jet_eval(f: &TontiResult, x: f64, y: [f64; 3]) -> f64 {
    let lookup = |v: &VarRef| match v {
        VarRef::Independent(i) if *i == Index::x(1) => Some(x),
        VarRef::Jet { .. } => match v.order() {
            Some(k) if k <= 2 => Some(y[k]),
            _ => None,
        },
        _ => None,
    };
    f.eval_f64(&lookup).expect("pole-free sample")
}

/// Eighth-order central stencils for the first and second derivative.
const D1: [f64; 4] = [4.0 / 5.0, -1.0 / 5.0, 4.0 / 105.0, -1.0 / 280.0];
const D2: [f64; 5] = [-205.0 / 72.0, 8.0 / 5.0, -1.0 / 5.0, 8.0 / 315.0, -1.0 / 560.0];

fn first_derivative(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    D1.iter().zip(1..).map(|(w, k)| w * (g(k as f64) - g(-(k as f64)))).sum::<f64>() / h
}

fn second_derivative(g: impl Fn(f64) -> f64, h: f64) -> f64 {
    let tail: f64 = D2[1..].iter().zip(1..).map(|(w, k)| w * (g(k as f64) + g(-(k as f64)))).sum();
    (D2[0] * g(0.0) + tail) / (h * h)
}

/// `∂L/∂y^{(k)}` at a jet point.
fn partial(f: &TontiResult, x: f64, y: [f64; 3], k: usize) -> f64 {
    let h = 1e-3;
    first_derivative(
        |s| {
            let mut z = y;
            z[k] += s * h;
            jet_eval(f, x, z)
        },
        h,
    )
}

fn c2() -> Outcome {
    let start = Instant::now();
    let c = JetContext::with_max_order(1, 1, 6).expect("context");
    let e = p("2*exp(w1)/w1[1]*(1 - w1[1,1]/w1[1]^2)");
    let f = tonti_lagrangian(std::slice::from_ref(&e), &[p("x1")], &c, 32).map_err(|e| e.to_string())?;
    ensure(matches!(f, TontiResult::QuadratureForm { order: 32, .. }), || format!("expected a quadrature form, got {f}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut accepted = 0;
    while accepted < 20 {
        let x0: f64 = rng.gen_range(-1.0..1.0);
        let jet: [f64; 5] = [
            rng.gen_range(-1.0..1.0),
            rng.gen_range(0.5..2.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        ];
        let exact = {
            let lookup = |v: &VarRef| match v {
                VarRef::Independent(_) => Some(x0),
                _ => v.order().map(|k| jet[k]),
            };
            varinv_core::expr::eval_f64(&e, &lookup).expect("pole-free sample")
        };
        if exact.abs() < 1e-2 {
            continue;
        }
        // The curve y(x) through the sampled jet, with its first two derivatives.
        let curve = |x: f64| {
            let d = x - x0;
            [
                jet[0] + jet[1] * d + jet[2] * d * d / 2.0 + jet[3] * d.powi(3) / 6.0 + jet[4] * d.powi(4) / 24.0,
                jet[1] + jet[2] * d + jet[3] * d * d / 2.0 + jet[4] * d.powi(3) / 6.0,
                jet[2] + jet[3] * d + jet[4] * d * d / 2.0,
            ]
        };
        let big_h = 2e-2;
        let along = |k: usize, s: f64| {
            let x = x0 + s * big_h;
            partial(&f, x, curve(x), k)
        };
        let d1 = first_derivative(|s| along(1, s), big_h);
        let d2 = second_derivative(|s| along(2, s), big_h);
        let fd = along(0, 0.0) - d1 + d2;
        worst = worst.max((fd - exact).abs() / exact.abs());
        accepted += 1;
    }
    ensure(worst < 1e-6, || format!("worst relative error {worst:.3e}"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("worst relative error {worst:.2e} over 20 points"))
}

fn random_lagrangian(rng: &mut ChaCha8Rng) -> (usize, usize, Expr) {
    let (n, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
    let f = lagrangian(rng, &PolyShape::first_order(n, m, 2));
    (n, m, f)
}

fn c3() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut likely = 0;
    for _ in 0..100 {
        let (n, m, f) = random_lagrangian(&mut rng);
        let c = ctx(n, m);
        let e = euler_lagrange(&f, &c).map_err(|e| e.to_string())?;
        let h = helmholtz_check(&e, &c, &cfg()).map_err(|e| e.to_string())?;
        ensure(h.verdict != Verdict::NotVariational, || format!("{f}: {h}"))?;
        ensure(h.residuals.iter().all(|r| !r.status.is_nonzero()), || format!("{f}: NonZero residual"))?;
        likely += usize::from(h.verdict == Verdict::LikelyVariational);
    }
    within(start.elapsed(), 30.0)?;
    Ok(format!("100 Lagrangians variational ({likely} probabilistically)"))
}

fn c4() -> Outcome {
    let start = Instant::now();
    let h = helmholtz_check(&[p("w1[1]")], &ctx(1, 1), &cfg()).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    ensure(h.verdict == Verdict::NotVariational, || format!("verdict {}", h.verdict))?;
    let (id, w) = h.witness.ok_or("no witness")?;
    within(elapsed, 0.1)?;
    Ok(format!("NotVariational, witness {id} at {w}"))
}

fn c5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..50 {
        let (n, m, f) = random_lagrangian(&mut rng);
        let c = ctx(n, m);
        let e = euler_lagrange(&f, &c).map_err(|e| e.to_string())?;
        let zero = vec![Expr::zero(); m];
        let ft = tonti_lagrangian(&e, &zero, &c, 32).map_err(|e| e.to_string())?;
        let ft = ft.closed_form().ok_or_else(|| format!("{f}: no closed form"))?;
        let et = euler_lagrange(ft, &c).map_err(|e| e.to_string())?;
        for (a, b) in et.iter().zip(&e) {
            ensure(not_nonzero(&(a - b))?, || format!("{f}: Tonti Lagrangian {ft} misses {b}"))?;
        }
    }
    within(start.elapsed(), 30.0)?;
    Ok("50 Tonti round trips".into())
}

type Solver = fn(&InverseProblemData, &ReferenceFunctions, &JetContext, &SolverOptions) -> varinv_core::Result<LagrangianSolution>;

/// Solves the data of `f0` and checks the contract and the gauge.
fn round_trip(f0: &Expr, c: &JetContext, solver: Solver) -> Result<LagrangianSolution, String> {
    let e = euler_lagrange(f0, c).map_err(|e| e.to_string())?;
    let data = decompose_second_order(&e, c, &cfg()).map_err(|e| e.to_string())?;
    let refs = ReferenceFunctions::zeros(c.n(), c.m());
    let sol = solver(&data, &refs, c, &SolverOptions::default()).map_err(|e| format!("{f0}: {e}"))?;
    let dec = el_split_first_order(&sol.f, c).map_err(|e| e.to_string())?;
    ensure(dec.e2 == data.f2, || format!("{f0}: E2 differs"))?;
    for (a, b) in dec.e1.iter().zip(&data.f1) {
        ensure(not_nonzero(&(a - b))?, || format!("{f0}: E differs"))?;
    }
    let gauge = is_null_lagrangian(&(&sol.f - f0), c, &cfg()).map_err(|e| e.to_string())?;
    ensure(!gauge.is_nonzero(), || format!("{f0}: f - f0 is not null"))?;
    Ok(sol)
}

fn seeded(seed: u64, count: usize, n: usize, m: usize) -> Vec<Expr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| lagrangian(&mut rng, &PolyShape::first_order(n, m, 2))).collect()
}

fn c6() -> Outcome {
    let start = Instant::now();
    let c = ctx(2, 1);
    for f0 in seeded(6, 25, 2, 1) {
        round_trip(&f0, &c, solve_m1)?;
    }
    within(start.elapsed(), 60.0)?;
    Ok("25 round trips".into())
}

fn c7() -> Outcome {
    let c = ctx(1, 2);
    let sol = round_trip(&p("w1*w2[1]"), &c, solve_n1)?;
    let e = euler_lagrange(&sol.f, &c).map_err(|e| e.to_string())?;
    ensure(e == vec![p("w2[1]"), p("-w1[1]")], || format!("euler_lagrange(f) = {e:?}"))?;
    for f0 in seeded(7, 24, 1, 2) {
        round_trip(&f0, &c, solve_n1)?;
    }
    Ok(format!("25 round trips, rotation instance f = {}", sol.f))
}

fn c8() -> Outcome {
    let c = ctx(2, 2);
    let mut instances = vec![p("w1[1]*w2[2]")];
    instances.extend(seeded(8, 14, 2, 2));
    for f0 in &instances {
        let data = decompose_second_order(&euler_lagrange(f0, &c).map_err(|e| e.to_string())?, &c, &cfg())
            .map_err(|e| e.to_string())?;
        let opts = SolverOptions { ansatz_degree: 4, ..SolverOptions::default() };
        let g = build_g_m2(&data, &ReferenceFunctions::zeros(2, 2), &c, &opts).map_err(|e| format!("{f0}: {e}"))?;
        ensure(g.is_skew(), || format!("{f0}: skew correction is not skew"))?;
        let sol = round_trip(f0, &c, solve_m2)?;
        ensure(sol.g.as_ref().is_some_and(|g| g.is_skew()), || format!("{f0}: solution correction is not skew"))?;
    }
    Ok("15 round trips, skew corrections skew".into())
}

fn c9() -> Outcome {
    let c = ctx(2, 1);
    let shape = PolyShape::first_order(2, 1, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut failing, mut passing) = (0, 0);
    while failing < 10 || passing < 10 {
        let f = lagrangian(&mut rng, &shape);
        let good = el_split_first_order(&f, &c).map_err(|e| e.to_string())?.as_data();
        if passing < 10 {
            let r = conditions_m1(&good, &cfg()).map_err(|e| e.to_string())?;
            ensure(!r.has_failure(), || format!("{f}: conditions fail: {:?}", r.failed_ids()))?;
            passing += 1;
        }
        let mut bad = good;
        let bump = polynomial(&mut rng, &PolyShape { terms: 1, ..shape });
        if rng.gen_bool(0.5) {
            bad.f1[0] = &bad.f1[0] + &bump;
        } else {
            let (i, ip) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
            let v = bad.f2.get(1, 1, i, ip) + &bump;
            bad.f2.set_symmetric(1, 1, i, ip, v);
        }
        let r = conditions_m1(&bad, &cfg()).map_err(|e| e.to_string())?;
        if failing < 10 && r.has_failure() {
            let h = helmholtz_check(&bad.reconstruct(), &c, &cfg()).map_err(|e| e.to_string())?;
            ensure(h.verdict == Verdict::NotVariational, || format!("{:?} fails {:?} but is {}", bad, r.failed_ids(), h.verdict))?;
            failing += 1;
        }
    }
    Ok("10 failing sets NotVariational, 10 generated sets pass".into())
}

fn c10() -> Outcome {
    let c = JetContext::with_max_order(1, 1, 10).expect("context");
    let t = reduce_order(&p("x1*w1[1,1]"), &c).map_err(|e| e.to_string())?;
    ensure(t.steps.len() == 2 && t.reduced.is_zero(), || format!("x1*w1[1,1]: {t}"))?;
    let f = p("w1*w1[1,1]");
    let t = reduce_order(&f, &c).map_err(|e| e.to_string())?;
    ensure(t.reduced == p("-w1[1]^2"), || format!("w1*w1[1,1]: {t}"))?;
    let same = euler_lagrange(&t.reduced, &c).map_err(|e| e.to_string())? == euler_lagrange(&f, &c).map_err(|e| e.to_string())?;
    ensure(same, || "w1*w1[1,1]: Euler-Lagrange expressions differ".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for _ in 0..20 {
        let m = rng.gen_range(1..=2);
        let order = rng.gen_range(1..=3);
        let c = JetContext::with_max_order(1, m, 10).expect("context");
        let f = linear_top(&mut rng, m, order, 2);
        let t = reduce_order(&f, &c).map_err(|e| e.to_string())?;
        ensure(t.reduced.jet_order() < f.jet_order(), || format!("{f}: order not reduced"))?;
        let ea = euler_lagrange(&f, &c).map_err(|e| e.to_string())?;
        let eb = euler_lagrange(&t.reduced, &c).map_err(|e| e.to_string())?;
        for (a, b) in ea.iter().zip(&eb) {
            ensure(not_nonzero(&(a - b))?, || format!("{f}: Euler-Lagrange expressions differ"))?;
        }
    }
    Ok("examples exact, 20 random reductions".into())
}

fn c11() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut null_instances = 0;
    for k in 0..50 {
        let (n, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
        let c = ctx(n, m);
        let shape = PolyShape::first_order(n, m, 2);
        let mut f = Expr::zero();
        for i in 1..=n {
            let g = polynomial(&mut rng, &shape);
            f = &f + &c.total_derivative(&g, Index::x(i)).map_err(|e| e.to_string())?;
        }
        let status = is_null_lagrangian(&f, &c, &cfg()).map_err(|e| e.to_string())?;
        ensure(matches!(status, ZeroStatus::Zero | ZeroStatus::LikelyZero), || format!("{f} not null"))?;
        if k < 20 {
            let parts = divergence_representation(&f, &vec![Expr::zero(); m], &c, &cfg()).map_err(|e| format!("{f}: {e}"))?;
            let mut div = Expr::zero();
            for (i, fi) in parts.iter().enumerate() {
                div = &div + &c.total_derivative(fi, Index::x(i + 1)).map_err(|e| e.to_string())?;
            }
            ensure(not_nonzero(&(&div - &f))?, || format!("{f}: divergence representation fails"))?;
            null_instances += 1;
        }
    }
    Ok(format!("50 divergences null, {null_instances} representations recomposed"))
}

fn c12() -> Outcome {
    let cases = common::cases();
    ensure(!cases.is_empty(), || "no golden problem files".into())?;
    let first: Vec<String> = cases.iter().map(|c| common::run_case(c)).collect();
    let second: Vec<String> = cases.iter().map(|c| common::run_case(c)).collect();
    for (case, (a, b)) in cases.iter().zip(first.iter().zip(&second)) {
        ensure(a == b, || format!("{} differs between runs", case.display()))?;
    }
    Ok(format!("{} problem files byte-identical across two runs", cases.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("Euler-Lagrange worked example", c1),
        ("Tonti transcendental quadrature", c2),
        ("forward Helmholtz on 100 Lagrangians", c3),
        ("Helmholtz negative example", c4),
        ("Tonti round trip on 50 Lagrangians", c5),
        ("m = 1 solver round trip", c6),
        ("n = 1 solver round trip", c7),
        ("m = 2 solver round trip", c8),
        ("m = 1 conditions consistency", c9),
        ("order reduction", c10),
        ("null divergences", c11),
        ("CLI determinism", c12),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name} ({secs:.2} s): {detail}", k + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name} ({secs:.2} s): {why}", k + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
