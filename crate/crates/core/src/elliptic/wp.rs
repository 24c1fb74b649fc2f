//! Evaluation of wp, wp', zeta, sigma and the real period-2pi function
//! varsigma on the rectangular lattice family.
//!
//! Arguments are reduced to the centred fundamental cell; the functions
//! are then evaluated through theta_1 q-series in whichever lattice basis
//! has the smaller nome, and the quasi-periodic corrections are restored:
//!
//! ```text
//! zeta(z)      = eta_w/w1 z + (pi/2w1) T'(v)/T(v),      v = pi z / (2 w1)
//! wp(z)        = -eta_w/w1 - (pi/2w1)^2 [T''/T - (T'/T)^2]
//! wp'(z)       = -(pi/2w1)^3 [T'''/T - 3 T''T'/T^2 + 2 (T'/T)^3]
//! log sigma(z) = log(2 w1/pi) + eta_w z^2/(2 w1) + log(T(v)/T'(0))
//! ```

use super::theta;
use super::LatticeData;
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative distance to the period lattice below which evaluation refuses
/// to proceed (the error blows up like dist^-2).
pub const POLE_THRESHOLD: f64 = 1e-8;

/// z = z_red + 2 m omega1 + 2 n omega2 with both reduced coefficients in
/// [-1/2, 1/2); returns (z_red, m, n).
fn reduce(z: Complex64, lat: &LatticeData) -> (Complex64, i64, i64) {
    let a = z.re / (2.0 * lat.omega1);
    let b = z.im / (2.0 * lat.omega2_im);
    let m = a.round();
    let n = b.round();
    let z_red = Complex64::new(
        z.re - 2.0 * m * lat.omega1,
        z.im - 2.0 * n * lat.omega2_im,
    );
    (z_red, m as i64, n as i64)
}

fn pole_check(z_red: Complex64, lat: &LatticeData) -> Result<()> {
    let dist = z_red.norm();
    let threshold = POLE_THRESHOLD * lat.omega1;
    if dist < threshold {
        return Err(Error::Pole { dist, threshold });
    }
    Ok(())
}

/// Basis used for theta evaluation: half-period w1 with nome q and the
/// matching quasi-period eta(w1).
struct EvalBasis {
    w1: Complex64,
    q: f64,
    eta: Complex64,
}

fn eval_basis(lat: &LatticeData) -> EvalBasis {
    let tau_im = lat.tau_im();
    if tau_im >= 1.0 {
        EvalBasis {
            w1: Complex64::new(lat.omega1, 0.0),
            q: (-PI * tau_im).exp(),
            eta: Complex64::new(lat.eta1, 0.0),
        }
    } else {
        // Same lattice generated by (omega2, -omega1); tau' = i / tau_im.
        EvalBasis {
            w1: lat.omega2(),
            q: (-PI / tau_im).exp(),
            eta: lat.eta2(),
        }
    }
}

fn theta_at(z_red: Complex64, basis: &EvalBasis) -> Result<[Complex64; 4]> {
    let v = z_red * PI / (2.0 * basis.w1);
    theta::theta1_family(v, basis.q)
}

/// Weierstrass wp(z).
pub fn wp(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let (z_red, _, _) = reduce(z, lat);
    pole_check(z_red, lat)?;
    let basis = eval_basis(lat);
    let t = theta_at(z_red, &basis)?;
    let r1 = t[1] / t[0];
    let r2 = t[2] / t[0];
    let scale = PI / (2.0 * basis.w1);
    Ok(-basis.eta / basis.w1 - scale * scale * (r2 - r1 * r1))
}

/// Derivative wp'(z).
pub fn wp_prime(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let (z_red, _, _) = reduce(z, lat);
    pole_check(z_red, lat)?;
    let basis = eval_basis(lat);
    let t = theta_at(z_red, &basis)?;
    let r1 = t[1] / t[0];
    let r2 = t[2] / t[0];
    let r3 = t[3] / t[0];
    let scale = PI / (2.0 * basis.w1);
    Ok(-scale * scale * scale * (r3 - r1 * r2 * 3.0 + r1 * r1 * r1 * 2.0))
}

/// Weierstrass zeta(z), including the quasi-period correction from the
/// cell reduction.
pub fn zeta_w(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let (z_red, m, n) = reduce(z, lat);
    pole_check(z_red, lat)?;
    let basis = eval_basis(lat);
    let t = theta_at(z_red, &basis)?;
    let inner = basis.eta / basis.w1 * z_red + t[1] / t[0] * PI / (2.0 * basis.w1);
    Ok(inner + 2.0 * m as f64 * lat.eta1 + lat.eta2() * 2.0 * n as f64)
}

/// log sigma(z): principal value on the reduced cell plus the exact
/// quasi-period correction.  The imaginary part carries the usual 2 pi i
/// branch ambiguity of a logarithm; the real part is branch-free.
pub fn log_sigma_w(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let (z_red, m, n) = reduce(z, lat);
    pole_check(z_red, lat)?;
    let basis = eval_basis(lat);
    let t = theta_at(z_red, &basis)?;
    let t1p0 = theta::theta1_family(Complex64::new(0.0, 0.0), basis.q)?[1];
    let core = (2.0 * basis.w1 / PI).ln()
        + basis.eta * z_red * z_red / (2.0 * basis.w1)
        + (t[0] / t1p0).ln();
    let (mf, nf) = (m as f64, n as f64);
    let quasi = (Complex64::new(2.0 * mf * lat.eta1, 2.0 * nf * lat.eta2_im))
        * (z_red + Complex64::new(mf * lat.omega1, nf * lat.omega2_im));
    let parity = mf * nf + mf + nf;
    Ok(core + quasi + Complex64::new(0.0, PI * parity))
}

/// sigma(z); entire, so no pole guard — near the lattice we use the
/// product form sigma ~ z directly.
pub fn sigma_w(z: Complex64, lat: &LatticeData) -> Result<Complex64> {
    let (z_red, m, n) = reduce(z, lat);
    if z_red.norm() < POLE_THRESHOLD * lat.omega1 {
        // sigma(z) = z (1 + O(z^5)) near the origin of each cell.
        let (mf, nf) = (m as f64, n as f64);
        let quasi = (Complex64::new(2.0 * mf * lat.eta1, 2.0 * nf * lat.eta2_im)
            * (z_red + Complex64::new(mf * lat.omega1, nf * lat.omega2_im)))
        .exp();
        let sign = if ((m * n + m + n) % 2).abs() == 1 { -1.0 } else { 1.0 };
        return Ok(z_red * quasi * sign);
    }
    Ok(log_sigma_w(z, lat)?.exp())
}

/// The real function varsigma(s) = zeta(omega2 + s omega1/pi) - eta2 -
/// (s/pi) eta1, odd and 2pi-periodic in s.
pub fn varsigma(s: f64, lat: &LatticeData) -> Result<f64> {
    let z = lat.omega2() + Complex64::new(s * lat.omega1 / PI, 0.0);
    let val = zeta_w(z, lat)? - lat.eta2() - lat.eta1 * s / PI;
    Ok(val.re)
}

/// Imaginary residue of the varsigma evaluation, for reality checks.
pub fn varsigma_im_residue(s: f64, lat: &LatticeData) -> Result<f64> {
    let z = lat.omega2() + Complex64::new(s * lat.omega1 / PI, 0.0);
    let val = zeta_w(z, lat)? - lat.eta2() - lat.eta1 * s / PI;
    Ok(val.im.abs())
}

/// wp and wp' at the tertiary points tau_f/2 and omega2 + tau_f, where the
/// closed forms in e1, e2, c3 are available.
#[derive(Debug, Clone, Copy)]
pub struct TertiaryValues {
    pub wp_tf_half: f64,
    pub wp_w2_plus_tf: f64,
    pub wp_prime_tf_half: f64,
    pub wp_prime_w2_plus_tf: f64,
}

pub fn tertiary_values(lat: &LatticeData) -> Result<TertiaryValues> {
    let tf_half = Complex64::new(lat.omega1 / 3.0, 0.0);
    let w2_tf = lat.omega2() + lat.tau_f();
    Ok(TertiaryValues {
        wp_tf_half: wp(tf_half, lat)?.re,
        wp_w2_plus_tf: wp(w2_tf, lat)?.re,
        wp_prime_tf_half: wp_prime(tf_half, lat)?.re,
        wp_prime_w2_plus_tf: wp_prime(w2_tf, lat)?.re,
    })
}
