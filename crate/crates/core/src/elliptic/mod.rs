//! Weierstrass elliptic functions for the one-parameter rectangular-lattice
//! family attached to the moment triangle of CP^2.
//!
//! The parameter is c3 = y^1 y^2 y^3, the product of the triangle
//! coordinates; the invariants are
//!
//! ```text
//! g2 = 1/12 - 2 c3,    g3 = c3/6 - 1/216 - c3^2,    c3 in (0, 1/27),
//! ```
//!
//! which keep the discriminant c3^3 (1 - 27 c3) positive, so all three
//! cubic roots are real and the lattice is rectangular: omega1 real,
//! omega2 purely imaginary.  Periods come from AGM-based complete
//! elliptic integrals on the root differences; function values come from
//! theta q-series after reduction to the fundamental cell.

mod derivs;
mod theta;
mod wp;

pub use derivs::{d_c3_log_sigma, d_c3_periods, d_c3_wp, d_c3_zeta, PeriodDerivatives};
pub use wp::{
    log_sigma_w, sigma_w, tertiary_values, varsigma, varsigma_im_residue, wp, wp_prime, zeta_w,
    TertiaryValues,
};

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Upper endpoint of the c3 interval; the lattice degenerates there.
pub const C3_SUP: f64 = 1.0 / 27.0;

/// Default guard band: c3 is accepted in [C3_GUARD_LO, C3_GUARD_HI].
pub const C3_GUARD_LO: f64 = 1e-6;
pub const C3_GUARD_HI: f64 = C3_SUP - 1e-6;

/// Weierstrass invariants of the c3 family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicInvariants {
    pub c3: f64,
    pub g2: f64,
    pub g3: f64,
    /// g2^3 - 27 g3^2 = c3^3 (1 - 27 c3), positive inside the interval.
    pub discriminant: f64,
}

/// Everything needed to evaluate wp, zeta, sigma for one value of c3.
///
/// Purely imaginary quantities (omega2, eta2, tilde_eta2) are stored as
/// their imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatticeData {
    pub c3: f64,
    pub g2: f64,
    pub g3: f64,
    /// Real half-period, positive.
    pub omega1: f64,
    /// Imaginary part of the second half-period omega2 = i*omega2_im, positive.
    pub omega2_im: f64,
    /// Quasi-period eta1 = zeta(omega1), real.
    pub eta1: f64,
    /// Imaginary part of eta2 = zeta(omega2); negative on this family.
    pub eta2_im: f64,
    /// Cubic roots, ordered e1 > e3 > e2.
    pub e1: f64,
    pub e2: f64,
    pub e3: f64,
    /// tilde_eta1 = eta1 + omega1 (1/12 - 3 c3).
    pub tilde_eta1: f64,
    /// Imaginary part of tilde_eta2 = eta2 + omega2 (1/12 - 3 c3).
    pub tilde_eta2_im: f64,
    /// Modular invariant j = 1728 g2^3 / discriminant, >= 1728.
    pub j_invariant: f64,
}

impl LatticeData {
    /// Build the lattice for a c3 inside the default guard band.
    pub fn new(c3: f64) -> Result<Self> {
        lattice_from_invariants(&invariants_from_c3(c3)?)
    }

    pub fn omega2(&self) -> Complex64 {
        Complex64::new(0.0, self.omega2_im)
    }

    pub fn eta2(&self) -> Complex64 {
        Complex64::new(0.0, self.eta2_im)
    }

    pub fn tilde_eta2(&self) -> Complex64 {
        Complex64::new(0.0, self.tilde_eta2_im)
    }

    /// Third half-period omega1 + omega2.
    pub fn omega3(&self) -> Complex64 {
        Complex64::new(self.omega1, self.omega2_im)
    }

    /// Lattice aspect ratio Im(omega2/omega1).
    pub fn tau_im(&self) -> f64 {
        self.omega2_im / self.omega1
    }

    /// The tertiary period tau_f = 2 omega1 / 3 where wp = 1/12.
    pub fn tau_f(&self) -> f64 {
        2.0 * self.omega1 / 3.0
    }

    /// zeta(tau_f) = 1/6 + (2/3) eta1, used by the zeta representation of
    /// the flow solution.
    pub fn zeta_tau_f(&self) -> f64 {
        1.0 / 6.0 + 2.0 / 3.0 * self.eta1
    }
}

/// Invariants from c3, with the default guard band.
pub fn invariants_from_c3(c3: f64) -> Result<CubicInvariants> {
    invariants_with_guard(c3, C3_GUARD_LO, C3_GUARD_HI)
}

/// Invariants from c3 with a caller-chosen guard band inside (0, 1/27).
pub fn invariants_with_guard(c3: f64, lo: f64, hi: f64) -> Result<CubicInvariants> {
    if !c3.is_finite() || c3 < lo || c3 > hi {
        return Err(Error::Domain(format!(
            "c3 = {c3:.6e} outside guard band [{lo:.3e}, {hi:.9}]"
        )));
    }
    let g2 = 1.0 / 12.0 - 2.0 * c3;
    let g3 = c3 / 6.0 - 1.0 / 216.0 - c3 * c3;
    let discriminant = c3 * c3 * c3 * (1.0 - 27.0 * c3);
    Ok(CubicInvariants {
        c3,
        g2,
        g3,
        discriminant,
    })
}

/// Real roots of 4x^3 - g2 x - g3 = 0, ordered e1 > e3 > e2.
///
/// Trigonometric solution of the depressed cubic, with a stabilised
/// branch near the interval endpoints: there two roots merge with gap
/// ~ c3^{3/2} (or (1-27c3)^{1/2}) and the arccos loses them entirely, so
/// the gap is recomputed from the exact discriminant
/// Delta = 16 (e1-e2)^2 (e2-e3)^2 (e3-e1)^2 around the pair midpoint.
fn cubic_roots(inv: &CubicInvariants) -> Result<(f64, f64, f64)> {
    // x^3 + p x + q with p = -g2/4, q = -g3/4.
    let p = -inv.g2 / 4.0;
    let q = -inv.g3 / 4.0;
    if p >= 0.0 {
        return Err(Error::Convergence(format!(
            "cubic not in the three-real-root regime (p = {p:.3e})"
        )));
    }
    let r = 2.0 * (-p / 3.0).sqrt();
    let arg = (3.0 * q / (2.0 * p)) * (-3.0 / p).sqrt();
    let phi = arg.clamp(-1.0, 1.0).acos();
    let mut roots = [0.0f64; 3];
    for (k, root) in roots.iter_mut().enumerate() {
        *root = r * ((phi - 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos();
    }
    roots.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let (mut e1, mut e3, mut e2) = (roots[0], roots[1], roots[2]);

    let polish = |x0: f64| {
        let mut x = x0;
        for _ in 0..4 {
            let f = 4.0 * x * x * x - inv.g2 * x - inv.g3;
            let fp = 12.0 * x * x - inv.g2;
            if fp == 0.0 {
                break;
            }
            x -= f / fp;
        }
        x
    };

    let upper_gap = e1 - e3;
    let lower_gap = e3 - e2;
    let outer = upper_gap.max(lower_gap);
    let delta = inv.discriminant;
    if upper_gap.min(lower_gap) < 1e-3 * outer {
        if upper_gap <= lower_gap {
            // (e1, e3) nearly degenerate, e2 separated.
            e2 = polish(e2);
            let mid = -e2 / 2.0;
            let mut split = upper_gap.max(0.0);
            for _ in 0..3 {
                let d1 = mid + 0.5 * split - e2;
                let d2 = mid - 0.5 * split - e2;
                split = (delta / (16.0 * d1 * d1 * d2 * d2)).sqrt();
            }
            e1 = mid + 0.5 * split;
            e3 = mid - 0.5 * split;
        } else {
            // (e3, e2) nearly degenerate, e1 separated.
            e1 = polish(e1);
            let mid = -e1 / 2.0;
            let mut split = lower_gap.max(0.0);
            for _ in 0..3 {
                let d1 = e1 - (mid + 0.5 * split);
                let d2 = e1 - (mid - 0.5 * split);
                split = (delta / (16.0 * d1 * d1 * d2 * d2)).sqrt();
            }
            e3 = mid + 0.5 * split;
            e2 = mid - 0.5 * split;
        }
    } else {
        e1 = polish(e1);
        e2 = polish(e2);
        e3 = polish(e3);
    }
    if !(e1 > e3 && e3 > e2) {
        return Err(Error::Convergence(format!(
            "root ordering e1 > e3 > e2 violated: {e1}, {e3}, {e2}"
        )));
    }
    Ok((e1, e2, e3))
}

/// Complete elliptic integral K(m) by the arithmetic-geometric mean,
/// parameter convention m = k^2.
fn ellipk_agm(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::Convergence(format!("K(m) needs 0 <= m < 1, got {m}")));
    }
    let mut a = 1.0;
    let mut b = (1.0 - m).sqrt();
    for _ in 0..64 {
        let an = 0.5 * (a + b);
        let bn = (a * b).sqrt();
        if (an - bn).abs() <= 2.0 * f64::EPSILON * an {
            return Ok(std::f64::consts::PI / (2.0 * an));
        }
        a = an;
        b = bn;
    }
    Err(Error::Convergence("AGM did not converge".into()))
}

/// Periods, quasi-periods and roots for one c3.
///
/// eta1 and eta2 are computed from *independent* theta series (one per
/// lattice basis), so the Legendre relation eta1 omega2 - eta2 omega1 =
/// i pi/2 stays a genuine consistency check downstream.
pub fn lattice_from_invariants(inv: &CubicInvariants) -> Result<LatticeData> {
    let (e1, e2, e3) = cubic_roots(inv)?;
    let scale = (e1 - e2).sqrt();
    let m = (e3 - e2) / (e1 - e2);
    let omega1 = ellipk_agm(m)? / scale;
    let omega2_im = ellipk_agm(1.0 - m)? / scale;

    // eta1 from the basis (omega1, omega2): q = exp(-pi |omega2|/omega1).
    let tau_im = omega2_im / omega1;
    let q = (-std::f64::consts::PI * tau_im).exp();
    let eta1 = -std::f64::consts::PI.powi(2) * theta::d3_over_d1_at_zero(q)? / (12.0 * omega1);

    // eta2 from the swapped basis (omega2, -omega1): tau' = i omega1/|omega2|.
    let q_swap = (-std::f64::consts::PI / tau_im).exp();
    let ratio_swap = theta::d3_over_d1_at_zero(q_swap)?;
    // eta2 = -pi^2 ratio / (12 omega2) with omega2 = i |omega2|.
    let eta2_im = std::f64::consts::PI.powi(2) * ratio_swap / (12.0 * omega2_im);

    let shift = 1.0 / 12.0 - 3.0 * inv.c3;
    let lat = LatticeData {
        c3: inv.c3,
        g2: inv.g2,
        g3: inv.g3,
        omega1,
        omega2_im,
        eta1,
        eta2_im,
        e1,
        e2,
        e3,
        tilde_eta1: eta1 + omega1 * shift,
        tilde_eta2_im: eta2_im + omega2_im * shift,
        j_invariant: 1728.0 * inv.g2.powi(3) / inv.discriminant,
    };

    // Internal consistency: the two independent eta computations must
    // satisfy the Legendre relation to near machine precision.
    let legendre = (lat.eta1 * lat.omega2_im - lat.eta2_im * lat.omega1
        - std::f64::consts::PI / 2.0)
        .abs();
    if legendre > 1e-10 {
        return Err(Error::Convergence(format!(
            "period computation inconsistent: Legendre residual {legendre:.3e}"
        )));
    }
    Ok(lat)
}

/// Absolute residual of the Legendre relation eta1 omega2 - eta2 omega1 - i pi/2.
pub fn legendre_residual(lat: &LatticeData) -> f64 {
    (lat.eta1 * lat.omega2_im - lat.eta2_im * lat.omega1 - std::f64::consts::PI / 2.0).abs()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn invariants_closed_forms_at_c3_one_54th() {
        let inv = invariants_from_c3(1.0 / 54.0).unwrap();
        // Direct substitution, cross-checked against c3^3 (1 - 27 c3).
        assert!((inv.g2 - 5.0 / 108.0).abs() < 1e-16);
        assert!((inv.g3 + 11.0 / 5832.0).abs() < 1e-17);
        assert!((inv.discriminant - 1.0 / 314928.0).abs() < 1e-18);
        let alt = inv.g2.powi(3) - 27.0 * inv.g3 * inv.g3;
        assert!((alt - inv.discriminant).abs() <= 1e-14 * inv.discriminant.abs());
    }

    #[test]
    fn discriminant_degenerates_at_upper_endpoint() {
        // Delta = c3^3 (1 - 27 c3) -> 0 as c3 -> 1/27.
        let inv = invariants_with_guard(C3_SUP - 1e-10, 1e-12, C3_SUP - 1e-12).unwrap();
        assert!(inv.discriminant < 1e-12);
        assert!(inv.discriminant > 0.0);
    }

    #[test]
    fn guard_band_is_enforced() {
        assert!(matches!(invariants_from_c3(0.0), Err(Error::Domain(_))));
        assert!(matches!(invariants_from_c3(1.0 / 27.0), Err(Error::Domain(_))));
        assert!(matches!(invariants_from_c3(-0.01), Err(Error::Domain(_))));
        assert!(invariants_from_c3(0.02).is_ok());
    }

    #[test]
    fn j_invariant_minimum_is_1728() {
        // Lowest j on the family, attained at c3 = 1/12 - sqrt(3)/36.
        let c3 = 1.0 / 12.0 - 3.0_f64.sqrt() / 36.0;
        let lat = LatticeData::new(c3).unwrap();
        assert!((lat.j_invariant - 1728.0).abs() < 1e-6);
        for &c in &[0.002, 0.01, 0.02, 0.03, 0.036] {
            let l = LatticeData::new(c).unwrap();
            assert!(l.j_invariant >= 1728.0 - 1e-6, "j({c}) = {}", l.j_invariant);
        }
    }

    #[test]
    fn root_relations_match_symmetric_functions() {
        for &c3 in &[0.004, 1.0 / 54.0, 0.03, 0.036] {
            let lat = LatticeData::new(c3).unwrap();
            let (e1, e2, e3) = (lat.e1, lat.e2, lat.e3);
            assert!(e1 > e3 && e3 > e2, "ordering at c3={c3}");
            assert!((e1 + e2 + e3).abs() < 1e-15);
            assert!((e1 * e2 + e2 * e3 + e3 * e1 + lat.g2 / 4.0).abs() < 1e-15);
            assert!((e1 * e2 * e3 - lat.g3 / 4.0).abs() < 1e-16);
        }
    }

    #[test]
    fn legendre_relation_on_grid() {
        for k in 1..=25 {
            let c3 = C3_SUP * k as f64 / 26.0;
            let lat = LatticeData::new(c3.clamp(C3_GUARD_LO, C3_GUARD_HI)).unwrap();
            assert!(
                legendre_residual(&lat) < 1e-12,
                "Legendre residual {} at c3 = {c3}",
                legendre_residual(&lat)
            );
        }
    }

    #[test]
    fn limit_values_near_endpoints() {
        // c3 -> 1/27: omega1 -> sqrt(3) pi, eta1 -> sqrt(3) pi / 36,
        // tilde_eta2 -> -i sqrt(3)/6.
        let lat = LatticeData::new(C3_GUARD_HI).unwrap();
        let s3pi = 3.0_f64.sqrt() * std::f64::consts::PI;
        assert!((lat.omega1 - s3pi).abs() < 2e-2);
        assert!((lat.eta1 - s3pi / 36.0).abs() < 2e-3);
        assert!((lat.tilde_eta2_im + 3.0_f64.sqrt() / 6.0).abs() < 2e-2);

        // c3 -> 0: omega2 -> i pi, eta2 -> -i pi/12, tilde_eta1 -> 1/2.
        let lat = LatticeData::new(C3_GUARD_LO).unwrap();
        assert!((lat.omega2_im - std::f64::consts::PI).abs() < 2e-2);
        assert!((lat.eta2_im + std::f64::consts::PI / 12.0).abs() < 2e-3);
        assert!((lat.tilde_eta1 - 0.5).abs() < 2e-2);
    }

    #[test]
    fn omega1_matches_brute_force_period_integral() {
        // omega1 = int_{e1}^inf dt / sqrt(4t^3 - g2 t - g3), split at e1 + 1
        // with substitutions that remove the sqrt singularity and the tail.
        let lat = LatticeData::new(1.0 / 54.0).unwrap();
        let (e1, e2, e3) = (lat.e1, lat.e2, lat.e3);
        let near = crate::quad::integrate(
            |u: f64| {
                let t = e1 + u * u;
                1.0 / ((t - e2) * (t - e3)).sqrt()
            },
            0.0,
            1.0,
            80,
        );
        let far = crate::quad::integrate(
            |v: f64| {
                1.0 / ((1.0 + (e1 - e2) * v * v) * (1.0 + (e1 - e3) * v * v)).sqrt()
            },
            0.0,
            1.0,
            80,
        );
        let oracle = near + far;
        assert!(
            (lat.omega1 - oracle).abs() < 1e-9,
            "omega1 = {}, integral oracle = {}",
            lat.omega1,
            oracle
        );
    }
}
