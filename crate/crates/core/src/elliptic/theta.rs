//! Jacobi theta_1 q-series, stripped of the common prefactor.
//!
//! All consumers need only ratios of theta_1 and its v-derivatives, so we
//! sum the series without the overall 2 q^{1/4}:
//!
//! ```text
//! T(v)    = sum_{n>=0} (-1)^n q^{n(n+1)} sin((2n+1) v)
//! T'(v)   = sum (-1)^n q^{n(n+1)} (2n+1)   cos((2n+1) v)
//! T''(v)  = -sum (-1)^n q^{n(n+1)} (2n+1)^2 sin((2n+1) v)
//! T'''(v) = -sum (-1)^n q^{n(n+1)} (2n+1)^3 cos((2n+1) v)
//! ```
//!
//! For the rectangular lattices of this family q is real and, after the
//! argument is reduced to the fundamental cell, the terms decay like
//! exp(-pi Im(tau) n^2); a small fixed cap suffices.

use crate::error::{Error, Result};
use num_complex::Complex64;

const MAX_TERMS: usize = 64;

/// theta_1'''(0, q) / theta_1'(0, q); the prefactor cancels.
pub fn d3_over_d1_at_zero(q: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Convergence(format!("theta nome q = {q} outside [0,1)")));
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    let mut sign = 1.0f64;
    for n in 0..MAX_TERMS {
        let k = (2 * n + 1) as f64;
        let term = sign * q.powi((n * (n + 1)) as i32);
        num -= term * k * k * k;
        den += term * k;
        if term.abs() < 1e-18 * den.abs().max(1.0) && n > 2 {
            return Ok(num / den);
        }
        sign = -sign;
    }
    if q < 0.95 {
        return Ok(num / den);
    }
    Err(Error::Convergence(format!(
        "theta series at q = {q} did not reach machine precision"
    )))
}

/// T, T', T'', T''' at complex v (common prefactor stripped).
pub fn theta1_family(v: Complex64, q: f64) -> Result<[Complex64; 4]> {
    if !(0.0..1.0).contains(&q) {
        return Err(Error::Convergence(format!("theta nome q = {q} outside [0,1)")));
    }
    let mut t = [Complex64::new(0.0, 0.0); 4];
    let mut sign = 1.0f64;
    let mut largest = 0.0f64;
    for n in 0..MAX_TERMS {
        let k = (2 * n + 1) as f64;
        let kv = v * k;
        let coeff = sign * q.powi((n * (n + 1)) as i32);
        let (s, c) = (kv.sin(), kv.cos());
        let term0 = s * coeff;
        t[0] += term0;
        t[1] += c * (coeff * k);
        t[2] -= s * (coeff * k * k);
        t[3] -= c * (coeff * k * k * k);
        largest = largest.max(t[0].norm());
        if term0.norm() < 1e-18 * largest.max(1e-300) && n > 2 {
            return Ok(t);
        }
        sign = -sign;
    }
    if q < 0.95 {
        return Ok(t);
    }
    Err(Error::Convergence(format!(
        "theta series at q = {q} did not reach machine precision"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivative_ratio_small_q_expansion() {
        // Two leading series terms: (-1 + 27 q^2) / (1 - 3 q^2) + O(q^6).
        let q = 1e-4;
        let r = d3_over_d1_at_zero(q).unwrap();
        let expect = (-1.0 + 27.0 * q * q) / (1.0 - 3.0 * q * q);
        assert!((r - expect).abs() < 1e-12);
    }

    #[test]
    fn family_consistent_with_central_differences() {
        let q = 0.3;
        let v = Complex64::new(0.7, 0.2);
        let h = 1e-5;
        let f = |x: Complex64| theta1_family(x, q).unwrap()[0];
        let d1 = (f(v + h) - f(v - h)) / (2.0 * h);
        let d2 = (f(v + h) - f(v) * 2.0 + f(v - h)) / (h * h);
        let fam = theta1_family(v, q).unwrap();
        assert!((fam[1] - d1).norm() < 1e-9);
        assert!((fam[2] - d2).norm() < 1e-5);
    }
}
