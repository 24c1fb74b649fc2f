//! The generalised Kahler potential, evaluated by quadrature:
//!
//! ```text
//! K(c3, s; dt) = (dt/4) log c3
//!              + (3/8) int_0^dt sum_i y^i(t') log( y^i(t') / y^i(0) ) dt'
//! ```
//!
//! with y^i(t') the flow solution at s + pi t'/omega1.  The leading term
//! is proportional to the Fubini-Study Kahler potential and diverges on
//! the anti-canonical divisor; the correction integrand only sees the
//! ratios y^i(t')/y^i(0) and stays bounded there.  K(dt = 0) = 0 is the
//! normalisation choice.

use crate::elliptic::LatticeData;
use crate::error::{Error, Result};
use crate::flow::{y_with_lattice, PolarPoint};
use crate::quad;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Potential value split into its divergent and regular parts.
#[derive(Debug, Clone, Copy)]
pub struct GkpValue {
    pub point: PolarPoint,
    pub dt: f64,
    pub k: f64,
    /// (dt/4) log c3, proportional to the Fubini-Study potential.
    pub fubini_study_part: f64,
    /// The flow integral term; bounded on face approach.
    pub correction_part: f64,
    pub quad_order_used: usize,
}

/// Convergence target for the order-doubling quadrature.
pub const QUAD_TOL: f64 = 1e-10;
const MAX_DOUBLINGS: usize = 12;

fn correction_integrand<'a>(
    lat: &'a LatticeData,
    s0: f64,
    y0: &[f64; 3],
) -> impl Fn(f64) -> f64 + 'a {
    let y0 = *y0;
    move |t: f64| {
        let s = s0 + PI * t / lat.omega1;
        let y = y_with_lattice(lat, s).expect("interior contour point").as_array();
        let mut sum = 0.0;
        for i in 0..3 {
            sum += y[i] * (y[i] / y0[i]).ln();
        }
        sum
    }
}

/// Evaluate the potential with Gauss-Legendre order doubling starting at
/// `quad_order` (at least 8) until two orders agree below `QUAD_TOL`.
pub fn potential(p: &PolarPoint, dt: f64, quad_order: usize) -> Result<GkpValue> {
    if dt < 0.0 {
        return Err(Error::Domain(format!("flow time dt = {dt} must be nonnegative")));
    }
    let order = quad_order.max(8);
    let lat = LatticeData::new(p.c3)?;
    let fubini_study_part = dt / 4.0 * p.c3.ln();
    if dt == 0.0 {
        return Ok(GkpValue {
            point: *p,
            dt,
            k: 0.0,
            fubini_study_part: 0.0,
            correction_part: 0.0,
            quad_order_used: order,
        });
    }
    let y0 = y_with_lattice(&lat, p.s)?.as_array();
    let f = correction_integrand(&lat, p.s, &y0);
    let (integral, quad_order_used) =
        quad::integrate_doubling(f, 0.0, dt, order, QUAD_TOL, MAX_DOUBLINGS)?;
    let correction_part = 3.0 / 8.0 * integral;
    Ok(GkpValue {
        point: *p,
        dt,
        k: fubini_study_part + correction_part,
        fubini_study_part,
        correction_part,
        quad_order_used,
    })
}

/// The same integral in the rescaled variable u = t' pi / omega1,
/// multiplied by 3 omega1 / (8 pi); used as a cross-check of the change
/// of variables.
pub fn correction_u_form(p: &PolarPoint, dt: f64, quad_order: usize) -> Result<f64> {
    let lat = LatticeData::new(p.c3)?;
    let y0 = y_with_lattice(&lat, p.s)?.as_array();
    let f = |u: f64| {
        let y = y_with_lattice(&lat, p.s + u)
            .expect("interior contour point")
            .as_array();
        let mut sum = 0.0;
        for i in 0..3 {
            sum += y[i] * (y[i] / y0[i]).ln();
        }
        sum
    };
    let (integral, _) = quad::integrate_doubling(
        f,
        0.0,
        dt * PI / lat.omega1,
        quad_order.max(8),
        QUAD_TOL,
        MAX_DOUBLINGS,
    )?;
    Ok(3.0 * lat.omega1 / (8.0 * PI) * integral)
}

/// Local holomorphic coordinates of the deformed structure.
///
/// The square of Q^i is the product of the source and target inhomogeneous
/// coordinates, (Q^i)^2 = z^i zhat^i, so the modulus is the quarter power
/// of the flow-symmetric ratio:
///
/// ```text
/// |Q^i|^4 = y^i(0) y^i(dt) / ( y^3(0) y^3(dt) ),
/// ```
///
/// which at dt = 0 reverts to the standard coordinates |z^i|^2 = y^i/y^3.
pub fn local_q_coords(
    p: &PolarPoint,
    dt: f64,
    theta: [f64; 2],
) -> Result<[Complex64; 2]> {
    let lat = LatticeData::new(p.c3)?;
    let y0 = y_with_lattice(&lat, p.s)?.as_array();
    let yt = y_with_lattice(&lat, p.s + PI * dt / lat.omega1)?.as_array();
    let mut out = [Complex64::new(0.0, 0.0); 2];
    for i in 0..2 {
        let modulus = (y0[i] * yt[i] / (y0[2] * yt[2])).powf(0.25);
        out[i] = Complex64::from_polar(modulus, theta[i]);
    }
    Ok(out)
}

/// Result of a face-approach study of the potential split.
#[derive(Debug, Clone)]
pub struct RegularityReport {
    pub correction_values: Vec<f64>,
    pub fubini_study_values: Vec<f64>,
    /// Largest |correction| along the sequence.
    pub correction_bound: f64,
    /// True when the correction stays bounded while the leading part
    /// diverges like (dt/4) log c3.
    pub correction_bounded: bool,
}

/// Evaluate the potential along a sequence of points approaching a face
/// (c3 -> 0) with fixed dt and report the boundedness of the parts.
pub fn correction_regularity_check(
    sequence: &[PolarPoint],
    dt: f64,
) -> Result<RegularityReport> {
    if sequence.is_empty() {
        return Err(Error::Domain("empty face-approach sequence".into()));
    }
    let mut correction_values = Vec::with_capacity(sequence.len());
    let mut fubini_study_values = Vec::with_capacity(sequence.len());
    for p in sequence {
        let v = potential(p, dt, 32)?;
        correction_values.push(v.correction_part);
        fubini_study_values.push(v.fubini_study_part);
    }
    let correction_bound = correction_values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    // Bounded: no blow-up relative to the divergent leading term.
    let leading_span = fubini_study_values
        .iter()
        .fold(0.0f64, |acc, &v| acc.max(v.abs()));
    let correction_bounded =
        correction_bound.is_finite() && (dt == 0.0 || correction_bound < leading_span.max(1.0));
    Ok(RegularityReport {
        correction_values,
        fubini_study_values,
        correction_bound,
        correction_bounded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::flow_map;

    #[test]
    fn zero_flow_time_normalisation() {
        let p = PolarPoint::new(0.02, 1.0).unwrap();
        let v = potential(&p, 0.0, 16).unwrap();
        assert_eq!(v.k, 0.0);
        assert_eq!(v.fubini_study_part, 0.0);
        assert_eq!(v.correction_part, 0.0);
    }

    #[test]
    fn parts_sum_to_total() {
        let p = PolarPoint::new(0.02, 1.0).unwrap();
        let v = potential(&p, 0.5, 16).unwrap();
        assert!((v.k - v.fubini_study_part - v.correction_part).abs() < 1e-15);
    }

    #[test]
    fn slope_at_zero_is_quarter_log_c3() {
        // dK/dt|_0 = (1/4) log c3, by one-sided differencing.
        let p = PolarPoint::new(0.02, 1.0).unwrap();
        let dt = 1e-5;
        let v = potential(&p, dt, 32).unwrap();
        let slope = v.k / dt;
        let expect = 0.25 * p.c3.ln();
        assert!(
            (slope - expect).abs() < 1e-6 * expect.abs().max(1.0),
            "slope {slope} vs (1/4) log c3 = {expect}"
        );
    }

    #[test]
    fn quadrature_matches_riemann_oracle() {
        // Trapezoid with 1e5 panels as an independent slow oracle.
        let p = PolarPoint::new(0.02, 1.0).unwrap();
        let dt = 0.5;
        let v = potential(&p, dt, 16).unwrap();
        let lat = LatticeData::new(p.c3).unwrap();
        let y0 = y_with_lattice(&lat, p.s).unwrap().as_array();
        let f = correction_integrand(&lat, p.s, &y0);
        let n = 100_000;
        let h = dt / n as f64;
        let mut sum = 0.5 * (f(0.0) + f(dt));
        for k in 1..n {
            sum += f(k as f64 * h);
        }
        let oracle = 3.0 / 8.0 * sum * h;
        assert!(
            (v.correction_part - oracle).abs() < 1e-8,
            "quadrature {} vs riemann {}",
            v.correction_part,
            oracle
        );
    }

    #[test]
    fn u_form_agrees_with_t_form() {
        let p = PolarPoint::new(0.02, 1.0).unwrap();
        for dt in [0.2, 0.7, 1.9] {
            let t_form = potential(&p, dt, 16).unwrap().correction_part;
            let u_form = correction_u_form(&p, dt, 16).unwrap();
            assert!(
                (t_form - u_form).abs() < 1e-10,
                "dt = {dt}: {t_form} vs {u_form}"
            );
        }
    }

    #[test]
    fn integral_cocycle_property() {
        // int_0^{a+b} = int_0^a + (shifted) int_0^b at the integrand level.
        let p = PolarPoint::new(0.018, 0.7).unwrap();
        let (a, b) = (0.4, 0.9);
        let whole = potential(&p, a + b, 32).unwrap();
        let first = potential(&p, a, 32).unwrap();
        let shifted_point = flow_map(&p, a).unwrap();
        let lat = LatticeData::new(p.c3).unwrap();
        // Second leg of the integral keeps the original reference y(0).
        let y0 = y_with_lattice(&lat, p.s).unwrap().as_array();
        let f = correction_integrand(&lat, shifted_point.s, &y0);
        let (second, _) = quad::integrate_doubling(f, 0.0, b, 32, QUAD_TOL, MAX_DOUBLINGS).unwrap();
        let stitched = first.correction_part + 3.0 / 8.0 * second;
        assert!(
            (whole.correction_part - stitched).abs() < 1e-9,
            "cocycle: {} vs {}",
            whole.correction_part,
            stitched
        );
    }

    #[test]
    fn quadrature_converges_monotonically_past_order_32() {
        let p = PolarPoint::new(0.02, 1.3).unwrap();
        let lat = LatticeData::new(p.c3).unwrap();
        let y0 = y_with_lattice(&lat, p.s).unwrap().as_array();
        let f = correction_integrand(&lat, p.s, &y0);
        let dt = 1.5;
        let orders = [32usize, 64, 128, 256];
        let vals: Vec<f64> = orders.iter().map(|&n| quad::integrate(&f, 0.0, dt, n)).collect();
        let mut prev_diff = f64::INFINITY;
        for w in vals.windows(2) {
            let diff = (w[1] - w[0]).abs().max(1e-14);
            assert!(diff <= prev_diff * 1.5 + 1e-14, "non-monotone: {vals:?}");
            prev_diff = diff;
        }
    }

    #[test]
    fn local_coords_revert_to_standard_at_zero_time() {
        let p = PolarPoint::new(0.02, 2.4).unwrap();
        let theta = [0.3, -1.2];
        let q = local_q_coords(&p, 0.0, theta).unwrap();
        let lat = LatticeData::new(p.c3).unwrap();
        let y = y_with_lattice(&lat, p.s).unwrap();
        let z1 = (y.y1 / y.y3).sqrt();
        let z2 = (y.y2 / y.y3).sqrt();
        assert!((q[0] - Complex64::from_polar(z1, theta[0])).norm() < 1e-12);
        assert!((q[1] - Complex64::from_polar(z2, theta[1])).norm() < 1e-12);
    }

    #[test]
    fn local_coords_moduli_and_equivariance() {
        let p = PolarPoint::new(0.015, 0.9).unwrap();
        let dt = 0.6;
        let lat = LatticeData::new(p.c3).unwrap();
        let y0 = y_with_lattice(&lat, p.s).unwrap().as_array();
        let yt = y_with_lattice(&lat, p.s + PI * dt / lat.omega1)
            .unwrap()
            .as_array();
        let q = local_q_coords(&p, dt, [0.4, 0.9]).unwrap();
        // |Q^i|^4 carries the flow-symmetric product of moduli.
        assert!((q[0].norm_sqr().powi(2) - y0[0] * yt[0] / (y0[2] * yt[2])).abs() < 1e-12);
        assert!((q[1].norm_sqr().powi(2) - y0[1] * yt[1] / (y0[2] * yt[2])).abs() < 1e-12);
        // Rotating theta_1 rotates Q^1 by the same phase.
        let shift = 0.7;
        let q2 = local_q_coords(&p, dt, [0.4 + shift, 0.9]).unwrap();
        let rotated = q[0] * Complex64::from_polar(1.0, shift);
        assert!((q2[0] - rotated).norm() < 1e-12);
        assert!((q2[1] - q[1]).norm() < 1e-15);
    }

    #[test]
    fn face_approach_keeps_correction_bounded() {
        let dt = 0.3;
        let seq: Vec<PolarPoint> = (2..=5)
            .map(|k| PolarPoint::new(10f64.powi(-k), 0.7).unwrap())
            .collect();
        let report = correction_regularity_check(&seq, dt).unwrap();
        assert!(report.correction_bounded, "{report:?}");
        // The leading part diverges while the correction stays O(1).
        assert!(report.fubini_study_values.last().unwrap().abs() > 0.8);
        assert!(report.correction_bound < 1.0, "{report:?}");
        // Ratios y_i(t)/y_i(0) stay in a fixed band along the sequence.
        for p in &seq {
            let lat = LatticeData::new(p.c3).unwrap();
            let y0 = y_with_lattice(&lat, p.s).unwrap().as_array();
            let yt = y_with_lattice(&lat, p.s + PI * dt / lat.omega1)
                .unwrap()
                .as_array();
            for i in 0..3 {
                let r = yt[i] / y0[i];
                assert!(r > 1e-3 && r < 1e3, "ratio {r} escaped at c3 = {}", p.c3);
            }
        }
    }

    #[test]
    fn negative_flow_time_is_rejected() {
        let p = PolarPoint::new(0.02, 0.0).unwrap();
        assert!(matches!(
            potential(&p, -0.1, 16),
            Err(Error::Domain(_))
        ));
    }
}
