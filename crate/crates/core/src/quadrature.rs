//! Gauss–Legendre rules on `[0, 1]`.

use std::f64::consts::PI;

/// Nodes and weights of the `order`-point rule mapped to `[0, 1]`.
pub fn gauss_legendre_unit(order: usize) -> Vec<(f64, f64)> {
    assert!(order >= 1, "quadrature order must be positive");
    let n = order;
    let mut rule = Vec::with_capacity(n);
    for k in 0..n {
        // Chebyshev-like initial guess, refined by Newton on P_n.
        let mut x = (PI * (k as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.push(((1.0 - x) / 2.0, w / 2.0));
    }
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

/// `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

pub fn integrate_unit(order: usize, f: impl Fn(f64) -> f64) -> f64 {
    gauss_legendre_unit(order).into_iter().map(|(x, w)| w * f(x)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 2, 5, 32, 64] {
            let s: f64 = gauss_legendre_unit(n).iter().map(|r| r.1).sum();
            assert!((s - 1.0).abs() < 1e-14, "{n}: {s}");
        }
    }

    #[test]
    fn exact_for_degree_2n_minus_1() {
        for n in 1..=12 {
            for d in 0..2 * n {
                let v = integrate_unit(n, |x| x.powi(d as i32));
                assert!((v - 1.0 / (d as f64 + 1.0)).abs() < 1e-14, "n={n} d={d}");
            }
        }
    }

    #[test]
    fn smooth_integrand() {
        let v = integrate_unit(32, f64::exp);
        assert!((v - (std::f64::consts::E - 1.0)).abs() < 1e-14);
    }
}
