//! c3-derivatives of the Weierstrass functions and of the lattice data,
//! with the complex argument z held fixed.
//!
//! On this family g2 and g3 depend on c3 alone, so the general
//! derivative-with-respect-to-invariants formulas collapse to closed
//! forms in wp, wp', zeta and z, with the common denominator
//! Delta = c3^3 (1 - 27 c3).

use super::{wp, wp_prime, zeta_w, LatticeData};
use crate::error::Result;
use num_complex::Complex64;

/// d/dc3 of wp(z) at fixed z.
pub fn d_c3_wp(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let c3 = lat.c3;
    let delta = c3.powi(3) * (1.0 - 27.0 * c3);
    let p = wp(z, lat)?;
    let dp = wp_prime(z, lat)?;
    let zeta = zeta_w(z, lat)?;
    let pre = c3 * c3 / (12.0 * delta);
    Ok((p * (6.0 * (1.0 - 36.0 * c3))
        + dp * ((zeta * 12.0 + z) - z * 36.0 * c3) * 3.0
        + p * p * 72.0
        + (24.0 * c3 - 1.0))
        * pre)
}

/// d/dc3 of zeta(z) at fixed z.
pub fn d_c3_zeta(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let c3 = lat.c3;
    let delta = c3.powi(3) * (1.0 - 27.0 * c3);
    let p = wp(z, lat)?;
    let dp = wp_prime(z, lat)?;
    let zeta = zeta_w(z, lat)?;
    let pre = -c3 * c3 / (48.0 * delta);
    Ok((dp * 72.0
        + (zeta - p * z) * (432.0 * c3 - 12.0)
        + p * zeta * 144.0
        + z * (24.0 * c3 - 1.0))
        * pre)
}

/// d/dc3 of log sigma(z) at fixed z.
pub fn d_c3_log_sigma(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let c3 = lat.c3;
    let delta = c3.powi(3) * (1.0 - 27.0 * c3);
    let p = wp(z, lat)?;
    let zeta = zeta_w(z, lat)?;
    let pre = -c3 * c3 / (96.0 * delta);
    Ok((p * 144.0 + z * z * (24.0 * c3 - 1.0) - zeta * zeta * 144.0
        + (zeta * z - 1.0) * (864.0 * c3 - 24.0))
        * pre)
}

/// c3-derivatives of periods and quasi-periods.
///
/// The tilde combinations obey the first-order system
/// d tilde_eta_i/dc3 = -2 omega_i, d omega_i/dc3 = -3 tilde_eta_i / (c3 (1 - 27 c3)),
/// and the plain quasi-periods follow by differentiating
/// eta_i = tilde_eta_i - omega_i (1/12 - 3 c3).
#[derive(Debug, Clone, Copy)]
pub struct PeriodDerivatives {
    pub d_omega1: f64,
    /// Imaginary part of d omega2/dc3.
    pub d_omega2_im: f64,
    pub d_eta1: f64,
    pub d_eta2_im: f64,
    pub d_tilde_eta1: f64,
    pub d_tilde_eta2_im: f64,
}

pub fn d_c3_periods(lat: &LatticeData) -> PeriodDerivatives {
    let c3 = lat.c3;
    let denom = c3 * (1.0 - 27.0 * c3);
    let d_omega1 = -3.0 * lat.tilde_eta1 / denom;
    let d_omega2_im = -3.0 * lat.tilde_eta2_im / denom;
    let d_tilde_eta1 = -2.0 * lat.omega1;
    let d_tilde_eta2_im = -2.0 * lat.omega2_im;
    let shift = 1.0 / 12.0 - 3.0 * c3;
    // eta = tilde_eta - omega * shift, shift' = -3.
    let d_eta1 = d_tilde_eta1 - d_omega1 * shift + 3.0 * lat.omega1;
    let d_eta2_im = d_tilde_eta2_im - d_omega2_im * shift + 3.0 * lat.omega2_im;
    PeriodDerivatives {
        d_omega1,
        d_omega2_im,
        d_eta1,
        d_eta2_im,
        d_tilde_eta1,
        d_tilde_eta2_im,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::elliptic::{log_sigma_w, LatticeData};
    use num_complex::Complex64;

    const FD_H: f64 = 1e-5;

    fn fd_lattices(c3: f64) -> (LatticeData, LatticeData, f64) {
        let h = FD_H * c3.abs().max(1.0);
        (
            LatticeData::new(c3 - h).unwrap(),
            LatticeData::new(c3 + h).unwrap(),
            h,
        )
    }

    #[test]
    fn wp_derivative_matches_central_difference() {
        let c3 = 1.0 / 54.0;
        let lat = LatticeData::new(c3).unwrap();
        let z = lat.omega2() + 0.4 * lat.omega1;
        let (lo, hi, h) = fd_lattices(c3);
        let fd = (wp(z, &hi).unwrap() - wp(z, &lo).unwrap()) / (2.0 * h);
        let an = d_c3_wp(z, &lat).unwrap();
        assert!(
            (an - fd).norm() < 1e-6 * an.norm().max(1.0),
            "analytic {an}, finite difference {fd}"
        );
    }

    #[test]
    fn zeta_derivative_matches_central_difference() {
        let c3 = 0.02;
        let lat = LatticeData::new(c3).unwrap();
        let z = Complex64::new(0.45 * lat.omega1, 0.3 * lat.omega2_im);
        let (lo, hi, h) = fd_lattices(c3);
        let fd = (zeta_w(z, &hi).unwrap() - zeta_w(z, &lo).unwrap()) / (2.0 * h);
        let an = d_c3_zeta(z, &lat).unwrap();
        assert!((an - fd).norm() < 1e-6 * an.norm().max(1.0));
    }

    #[test]
    fn log_sigma_derivative_matches_central_difference() {
        let c3 = 0.02;
        let lat = LatticeData::new(c3).unwrap();
        let z = Complex64::new(0.35 * lat.omega1, 0.55 * lat.omega2_im);
        let (lo, hi, h) = fd_lattices(c3);
        let fd = (log_sigma_w(z, &hi).unwrap() - log_sigma_w(z, &lo).unwrap()) / (2.0 * h);
        let an = d_c3_log_sigma(z, &lat).unwrap();
        assert!((an - fd).norm() < 1e-6 * an.norm().max(1.0));
    }

    #[test]
    fn total_derivative_of_wp_at_tertiary_period_vanishes() {
        // wp(2 omega1(c3)/3) = 1/12 identically, so
        // d_c3 wp + wp' * (2/3) d_c3 omega1 = 0.
        let c3 = 0.02;
        let lat = LatticeData::new(c3).unwrap();
        let tf = Complex64::new(lat.tau_f(), 0.0);
        let total = d_c3_wp(tf, &lat).unwrap()
            + wp_prime(tf, &lat).unwrap() * (2.0 / 3.0 * d_c3_periods(&lat).d_omega1);
        assert!(total.norm() < 1e-9, "total derivative = {total}");
    }

    #[test]
    fn zeta_derivative_chain_rule_at_omega1() {
        // d/dc3 [zeta(omega1(c3))] = d_eta1; subtract the moving-endpoint
        // term wp(omega1) * d_omega1 (zeta' = -wp) to recover the fixed-z
        // derivative.
        let c3 = 0.018;
        let lat = LatticeData::new(c3).unwrap();
        let pd = d_c3_periods(&lat);
        let z = Complex64::new(lat.omega1, 0.0);
        let fixed_z = d_c3_zeta(z, &lat).unwrap();
        let expected = pd.d_eta1 + lat.e1 * pd.d_omega1;
        assert!(
            (fixed_z.re - expected).abs() < 1e-8 * expected.abs().max(1.0),
            "fixed-z {} vs chain rule {}",
            fixed_z.re,
            expected
        );
    }

    #[test]
    fn period_derivatives_match_central_differences() {
        let c3 = 1.0 / 54.0;
        let lat = LatticeData::new(c3).unwrap();
        let pd = d_c3_periods(&lat);
        let (lo, hi, h) = fd_lattices(c3);
        let rel = |an: f64, fd: f64| (an - fd).abs() / an.abs().max(1.0);
        assert!(rel(pd.d_omega1, (hi.omega1 - lo.omega1) / (2.0 * h)) < 1e-6);
        assert!(rel(pd.d_omega2_im, (hi.omega2_im - lo.omega2_im) / (2.0 * h)) < 1e-6);
        assert!(rel(pd.d_eta1, (hi.eta1 - lo.eta1) / (2.0 * h)) < 1e-6);
        assert!(rel(pd.d_eta2_im, (hi.eta2_im - lo.eta2_im) / (2.0 * h)) < 1e-6);
        assert!(rel(pd.d_tilde_eta1, (hi.tilde_eta1 - lo.tilde_eta1) / (2.0 * h)) < 1e-6);
        assert!(
            rel(pd.d_tilde_eta2_im, (hi.tilde_eta2_im - lo.tilde_eta2_im) / (2.0 * h)) < 1e-6
        );
    }

    #[test]
    fn quasi_period_matrix_form_agrees() {
        // The traceless 2x2 system in (eta_i, omega_i) reproduces the
        // tilde-form derivatives.
        let lat = LatticeData::new(0.023).unwrap();
        let c3 = lat.c3;
        let denom = c3 * (1.0 - 27.0 * c3);
        let m11 = 0.25 * (1.0 - 36.0 * c3) / denom;
        let m12 = (1.0 - 24.0 * c3) / 48.0 / denom;
        let m21 = -3.0 / denom;
        let m22 = -0.25 * (1.0 - 36.0 * c3) / denom;
        let pd = d_c3_periods(&lat);
        assert!((m11 * lat.eta1 + m12 * lat.omega1 - pd.d_eta1).abs() < 1e-10);
        assert!((m21 * lat.eta1 + m22 * lat.omega1 - pd.d_omega1).abs() < 1e-10);
        assert!((m11 * lat.eta2_im + m12 * lat.omega2_im - pd.d_eta2_im).abs() < 1e-10);
        assert!((m21 * lat.eta2_im + m22 * lat.omega2_im - pd.d_omega2_im).abs() < 1e-10);
        // Tracelessness preserves the Legendre pairing along c3.
        let d_legendre = pd.d_eta1 * lat.omega2_im + lat.eta1 * pd.d_omega2_im
            - pd.d_eta2_im * lat.omega1
            - lat.eta2_im * pd.d_omega1;
        assert!(d_legendre.abs() < 1e-10);
    }

    #[test]
    fn omega1_second_order_ode() {
        // d/dc3 [c3 (1 - 27 c3) d omega1/dc3] = 6 omega1, by second
        // differences of the analytic first derivative.
        let c3 = 0.02;
        let h = 1e-5;
        let f = |c: f64| {
            let l = LatticeData::new(c).unwrap();
            c * (1.0 - 27.0 * c) * d_c3_periods(&l).d_omega1
        };
        let lhs = (f(c3 + h) - f(c3 - h)) / (2.0 * h);
        let rhs = 6.0 * LatticeData::new(c3).unwrap().omega1;
        assert!((lhs - rhs).abs() < 1e-5 * rhs.abs(), "lhs {lhs}, rhs {rhs}");
    }
}
