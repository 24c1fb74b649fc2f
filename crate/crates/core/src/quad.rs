//! Gauss-Legendre quadrature with order doubling.

use crate::error::{Error, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
///
/// Nodes are found by Newton iteration on P_n starting from the Chebyshev
/// guess; good to machine precision for the orders used here (n <= ~20000).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess for the i-th root of P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_deriv(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        // Midpoint node is exactly zero.
        nodes[n / 2] = 0.0;
        let (_, d) = legendre_and_deriv(n, 0.0);
        weights[n / 2] = 2.0 / (d * d);
    }
    (nodes, weights)
}

fn legendre_and_deriv(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
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

/// Fixed-order Gauss-Legendre integral of `f` over [a, b].
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, order: usize) -> f64 {
    let (nodes, weights) = gauss_legendre(order);
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut sum = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        sum += w * f(mid + half * x);
    }
    sum * half
}

/// Integrate with order doubling until two successive values differ by
/// less than `tol`. Returns the value and the last order used.
pub fn integrate_doubling<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    start_order: usize,
    tol: f64,
    max_rounds: usize,
) -> Result<(f64, usize)> {
    let mut order = start_order.max(2);
    let mut prev = integrate(&f, a, b, order);
    for _ in 0..max_rounds {
        order *= 2;
        let next = integrate(&f, a, b, order);
        if (next - prev).abs() < tol {
            return Ok((next, order));
        }
        prev = next;
    }
    Err(Error::Quadrature(format!(
        "order doubling did not converge below {tol:.1e} within {max_rounds} rounds (last order {order})"
    )))
}
