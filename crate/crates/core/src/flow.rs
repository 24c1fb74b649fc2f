//! The Hitchin flow on the moment triangle of CP^2 in closed form.
//!
//! Contours of constant c3 = y^1 y^2 y^3 are parametrised by the
//! 2pi-periodic coordinate s through t = omega2 + s omega1/pi, and
//!
//! ```text
//! y^k(c3, s) = c3 / (1/12 - wp(omega2 + (omega1/pi)(s + 2 k pi/3))).
//! ```
//!
//! The branch assignment t_1 = t_3 + tau_f, t_2 = t_3 - tau_f makes the
//! flow run clockwise on the contour (y^2 decreases from the symmetric
//! point s = 0); a regression test pins this orientation.

use crate::elliptic::{varsigma, wp, zeta_w, LatticeData};
use crate::error::{Error, Result};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Reduce an angle to [0, 2 pi).
pub fn reduce_angle(s: f64) -> f64 {
    let two_pi = 2.0 * PI;
    let r = s.rem_euclid(two_pi);
    if r == two_pi {
        0.0
    } else {
        r
    }
}

/// Polar chart of the triangle interior: the contour label c3 and the
/// rescaled flow time s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarPoint {
    pub c3: f64,
    pub s: f64,
}

impl PolarPoint {
    /// Validates c3 against the default guard band and reduces s mod 2 pi.
    pub fn new(c3: f64, s: f64) -> Result<Self> {
        crate::elliptic::invariants_from_c3(c3)?;
        Ok(PolarPoint {
            c3,
            s: reduce_angle(s),
        })
    }
}

/// Symmetric chart (y^1, y^2, y^3) with y^1 + y^2 + y^3 = 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TriplePoint {
    pub y1: f64,
    pub y2: f64,
    pub y3: f64,
}

impl TriplePoint {
    pub fn as_array(&self) -> [f64; 3] {
        [self.y1, self.y2, self.y3]
    }

    pub fn sum(&self) -> f64 {
        self.y1 + self.y2 + self.y3
    }

    pub fn product(&self) -> f64 {
        self.y1 * self.y2 * self.y3
    }

    pub fn is_interior(&self) -> bool {
        self.as_array().iter().all(|&y| y > 0.0 && y < 1.0)
    }
}

/// The argument t_k = omega2 + (omega1/pi)(s + 2 k pi/3) of the k-th branch.
fn branch_argument(lat: &LatticeData, s: f64, k: usize) -> Complex64 {
    lat.omega2() + Complex64::new(lat.omega1 / PI * (s + 2.0 * PI * k as f64 / 3.0), 0.0)
}

/// y^k(c3, s) for a prebuilt lattice.
pub fn y_with_lattice(lat: &LatticeData, s: f64) -> Result<TriplePoint> {
    let mut y = [0.0f64; 3];
    for k in 1..=3 {
        let p = wp(branch_argument(lat, s, k), lat)?;
        y[k - 1] = lat.c3 / (1.0 / 12.0 - p.re);
    }
    Ok(TriplePoint {
        y1: y[0],
        y2: y[1],
        y3: y[2],
    })
}

/// Closed-form flow solution in the wp representation.
pub fn y_of_polar(p: &PolarPoint) -> Result<TriplePoint> {
    let lat = LatticeData::new(p.c3)?;
    y_with_lattice(&lat, p.s)
}

/// Same point through the Weierstrass zeta representation,
/// a second algebraic route used as a cross-check:
///
/// ```text
/// y^3 = zeta(t - tau_f) - zeta(t + tau_f) + 2 zeta(tau_f)
/// y^1 = zeta(t) - zeta(t - tau_f) + 1/2 - zeta(tau_f)
/// y^2 = zeta(t + tau_f) - zeta(t) + 1/2 - zeta(tau_f)
/// ```
pub fn y_via_zeta(p: &PolarPoint) -> Result<TriplePoint> {
    let lat = LatticeData::new(p.c3)?;
    y_via_zeta_with_lattice(&lat, p.s)
}

pub fn y_via_zeta_with_lattice(lat: &LatticeData, s: f64) -> Result<TriplePoint> {
    let t = lat.omega2() + Complex64::new(lat.omega1 * s / PI, 0.0);
    let tf = lat.tau_f();
    let z_m = zeta_w(t - tf, lat)?;
    let z_0 = zeta_w(t, lat)?;
    let z_p = zeta_w(t + tf, lat)?;
    let ztf = lat.zeta_tau_f();
    Ok(TriplePoint {
        y1: (z_0 - z_m).re + 0.5 - ztf,
        y2: (z_p - z_0).re + 0.5 - ztf,
        y3: (z_m - z_p).re + 2.0 * ztf,
    })
}

/// Partial derivatives of y^i with respect to c3 at fixed s.
pub fn dy_dc3(p: &PolarPoint) -> Result<[f64; 3]> {
    let lat = LatticeData::new(p.c3)?;
    dy_dc3_with_lattice(&lat, p.s)
}

pub fn dy_dc3_with_lattice(lat: &LatticeData, s: f64) -> Result<[f64; 3]> {
    let y = y_with_lattice(lat, s)?.as_array();
    let c3 = lat.c3;
    let denom = c3 * (1.0 - 27.0 * c3);
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        // varsigma argument s + (i - 3) * 2 pi / 3 for i = 1, 2, 3.
        let shift = (i as f64 + 1.0 - 3.0) * 2.0 * PI / 3.0;
        let vs = varsigma(s + shift, lat)?;
        let yi = y[i];
        let cyc = y[(i + 1) % 3] - y[(i + 2) % 3];
        out[i] = (0.5 * (yi * yi - yi) - 9.0 * c3 * yi + 6.0 * c3 + 3.0 * yi * cyc * vs) / denom;
    }
    Ok(out)
}

/// Partial derivatives of y^i with respect to s at fixed c3; these are the
/// flow equation up to the factor omega1/pi.
pub fn dy_ds_with_lattice(lat: &LatticeData, s: f64) -> Result<[f64; 3]> {
    let y = y_with_lattice(lat, s)?.as_array();
    let mut out = [0.0f64; 3];
    for i in 0..3 {
        out[i] = lat.omega1 / PI * y[i] * (y[(i + 1) % 3] - y[(i + 2) % 3]);
    }
    Ok(out)
}

/// Invert the chart: recover (c3, s) from a point strictly inside the
/// triangle.  c3 is the closed form y1 y2 (1 - y1 - y2); s comes from a
/// coarse 64-point scan followed by Gauss-Newton on the contour.
pub fn polar_of_y(y1: f64, y2: f64) -> Result<PolarPoint> {
    let y3 = 1.0 - y1 - y2;
    if !(y1 > 0.0 && y2 > 0.0 && y3 > 0.0) {
        return Err(Error::Domain(format!(
            "({y1}, {y2}) is not strictly inside the moment triangle"
        )));
    }
    let c3 = y1 * y2 * y3;
    let lat = LatticeData::new(c3)?;

    let misfit = |s: f64| -> Result<(f64, f64, f64)> {
        let y = y_with_lattice(&lat, s)?;
        Ok((y.y1 - y1, y.y2 - y2, (y.y1 - y1).powi(2) + (y.y2 - y2).powi(2)))
    };

    // Coarse scan to seed the 1D solve.
    let mut best_s = 0.0;
    let mut best = f64::INFINITY;
    for k in 0..64 {
        let s = 2.0 * PI * k as f64 / 64.0;
        let (_, _, m) = misfit(s)?;
        if m < best {
            best = m;
            best_s = s;
        }
    }

    // Gauss-Newton on s.
    let mut s = best_s;
    for _ in 0..50 {
        let (r1, r2, m) = misfit(s)?;
        if m < 1e-24 {
            return PolarPoint::new(c3, s);
        }
        let dy = dy_ds_with_lattice(&lat, s)?;
        let jtj = dy[0] * dy[0] + dy[1] * dy[1];
        if jtj == 0.0 {
            break;
        }
        let step = (r1 * dy[0] + r2 * dy[1]) / jtj;
        s -= step;
        if step.abs() < 1e-14 {
            let (_, _, m) = misfit(s)?;
            if m < 1e-18 {
                return PolarPoint::new(c3, s);
            }
        }
    }
    let (_, _, m) = misfit(s)?;
    if m < 1e-18 {
        return PolarPoint::new(c3, s);
    }
    Err(Error::Convergence(format!(
        "contour solve for s did not converge at (y1, y2) = ({y1}, {y2}); residual {m:.3e}"
    )))
}

/// Advance a polar point by flow time dt: s -> s + pi dt / omega1(c3).
pub fn flow_map(p: &PolarPoint, dt: f64) -> Result<PolarPoint> {
    let lat = LatticeData::new(p.c3)?;
    PolarPoint::new(p.c3, p.s + PI * dt / lat.omega1)
}

/// Independent oracle: integrate the flow equations
/// dy^1/dt = y^1 (y^2 - y^3) (and cyclic) with an adaptive
/// Dormand-Prince 5(4) scheme.
pub fn ode_oracle(y0: &TriplePoint, dt: f64) -> Result<TriplePoint> {
    let rhs = |y: &[f64; 3]| -> [f64; 3] {
        [
            y[0] * (y[1] - y[2]),
            y[1] * (y[2] - y[0]),
            y[2] * (y[0] - y[1]),
        ]
    };
    let y = integrate_dopri5(rhs, y0.as_array(), dt, 1e-12, 1e-14)?;
    Ok(TriplePoint {
        y1: y[0],
        y2: y[1],
        y3: y[2],
    })
}

/// Dormand-Prince 5(4) with PI-free basic step control.
fn integrate_dopri5<F: Fn(&[f64; 3]) -> [f64; 3]>(
    rhs: F,
    mut y: [f64; 3],
    dt: f64,
    rtol: f64,
    atol: f64,
) -> Result<[f64; 3]> {
    if dt == 0.0 {
        return Ok(y);
    }
    let dir = dt.signum();
    let t_end = dt.abs();
    let mut t = 0.0f64;
    let mut h = (t_end / 100.0).min(0.1).max(1e-8);

    const A: [[f64; 6]; 6] = [
        [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
        [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
        [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
        [
            19372.0 / 6561.0,
            -25360.0 / 2187.0,
            64448.0 / 6561.0,
            -212.0 / 729.0,
            0.0,
            0.0,
        ],
        [
            9017.0 / 3168.0,
            -355.0 / 33.0,
            46732.0 / 5247.0,
            49.0 / 176.0,
            -5103.0 / 18656.0,
            0.0,
        ],
        [
            35.0 / 384.0,
            0.0,
            500.0 / 1113.0,
            125.0 / 192.0,
            -2187.0 / 6784.0,
            11.0 / 84.0,
        ],
    ];
    const B5: [f64; 7] = [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
        0.0,
    ];
    const B4: [f64; 7] = [
        5179.0 / 57600.0,
        0.0,
        7571.0 / 16695.0,
        393.0 / 640.0,
        -92097.0 / 339200.0,
        187.0 / 2100.0,
        1.0 / 40.0,
    ];

    let mut steps = 0usize;
    while t < t_end {
        if steps > 2_000_000 {
            return Err(Error::StepSize("step budget exhausted".into()));
        }
        steps += 1;
        h = h.min(t_end - t);
        let mut k = [[0.0f64; 3]; 7];
        k[0] = rhs(&y);
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                for c in 0..3 {
                    ys[c] += dir * h * A[stage][j] * kj[c];
                }
            }
            k[stage + 1] = rhs(&ys);
        }
        let mut y5 = y;
        let mut y4 = y;
        for (j, kj) in k.iter().enumerate() {
            for c in 0..3 {
                y5[c] += dir * h * B5[j] * kj[c];
                y4[c] += dir * h * B4[j] * kj[c];
            }
        }
        let mut err = 0.0f64;
        for c in 0..3 {
            let sc = atol + rtol * y5[c].abs().max(y[c].abs());
            err = err.max(((y5[c] - y4[c]) / sc).abs());
        }
        if err <= 1.0 {
            t += h;
            y = y5;
        }
        let factor = if err > 0.0 {
            (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h < 1e-14 {
            return Err(Error::StepSize(format!("step size underflow at t = {t}")));
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triple_point_invariants() {
        for &(c3, s) in &[(0.004, 0.3), (0.02, 1.7), (0.034, 5.9)] {
            let p = PolarPoint::new(c3, s).unwrap();
            let y = y_of_polar(&p).unwrap();
            assert!(y.is_interior());
            assert!((y.sum() - 1.0).abs() < 1e-12, "sum = {}", y.sum());
            assert!((y.product() - c3).abs() < 1e-11, "product = {}", y.product());
        }
    }

    #[test]
    fn symmetric_point_at_s_zero() {
        let p = PolarPoint::new(0.02, 0.0).unwrap();
        let lat = LatticeData::new(0.02).unwrap();
        let y = y_of_polar(&p).unwrap();
        assert!((y.y1 - y.y2).abs() < 1e-12);
        let y3_expect = 0.02 / (1.0 / 12.0 - lat.e2);
        assert!((y.y3 - y3_expect).abs() < 1e-12);
        assert!(y.y1 > y.y3);
    }

    #[test]
    fn zeta_route_agrees_with_wp_route() {
        for &(c3, s) in &[(0.006, 0.9), (0.02, 2.4), (0.031, 4.2)] {
            let p = PolarPoint::new(c3, s).unwrap();
            let a = y_of_polar(&p).unwrap().as_array();
            let b = y_via_zeta(&p).unwrap().as_array();
            for i in 0..3 {
                assert!((a[i] - b[i]).abs() < 1e-10, "component {i} at ({c3},{s})");
            }
        }
    }

    #[test]
    fn clockwise_orientation_from_symmetric_point() {
        // y^2 decreases initially when starting at y^1 = y^2 > y^3.
        let lat = LatticeData::new(0.02).unwrap();
        let y0 = y_with_lattice(&lat, 0.0).unwrap();
        let y1 = y_with_lattice(&lat, 0.01).unwrap();
        assert!(y1.y2 < y0.y2);
        assert!(y1.y1 > y0.y1);
    }

    #[test]
    fn dy_dc3_sum_and_product_rules() {
        let p = PolarPoint::new(1.0 / 54.0, 1.3).unwrap();
        let d = dy_dc3(&p).unwrap();
        let y = y_of_polar(&p).unwrap().as_array();
        let sum: f64 = d.iter().sum();
        let product_rule = d[0] * y[1] * y[2] + y[0] * d[1] * y[2] + y[0] * y[1] * d[2];
        assert!(sum.abs() < 1e-9, "sum rule residual {sum}");
        assert!((product_rule - 1.0).abs() < 1e-9, "product rule {product_rule}");
    }

    #[test]
    fn dy_dc3_matches_finite_difference() {
        let c3 = 0.02;
        let s = 2.1;
        let d = dy_dc3(&PolarPoint::new(c3, s).unwrap()).unwrap();
        let h = 1e-5 * c3.abs().max(1.0);
        let hi = y_of_polar(&PolarPoint::new(c3 + h, s).unwrap()).unwrap().as_array();
        let lo = y_of_polar(&PolarPoint::new(c3 - h, s).unwrap()).unwrap().as_array();
        for i in 0..3 {
            let fd = (hi[i] - lo[i]) / (2.0 * h);
            assert!(
                (d[i] - fd).abs() < 1e-6 * d[i].abs().max(1.0),
                "component {i}: analytic {} vs fd {fd}",
                d[i]
            );
        }
    }

    #[test]
    fn flow_satisfies_ode_pointwise() {
        // (pi/omega1) d_s y^i = y^i (y^{i+1} - y^{i+2}).
        let lat = LatticeData::new(0.017).unwrap();
        for &s in &[0.4, 1.9, 3.3, 5.2] {
            let y = y_with_lattice(&lat, s).unwrap().as_array();
            let ds = dy_ds_with_lattice(&lat, s).unwrap();
            for i in 0..3 {
                let rhs = y[i] * (y[(i + 1) % 3] - y[(i + 2) % 3]);
                let lhs = PI / lat.omega1 * ds[i];
                assert!((lhs - rhs).abs() < 1e-9, "flow residual {i} at s={s}");
            }
        }
    }

    #[test]
    fn chart_inversion_round_trip() {
        let cases = [(0.2, 0.35), (0.5, 0.2), (0.15, 0.15), (0.34, 0.33)];
        for &(y1, y2) in &cases {
            let p = polar_of_y(y1, y2).unwrap();
            let y = y_of_polar(&p).unwrap();
            assert!((y.y1 - y1).abs() < 1e-9 && (y.y2 - y2).abs() < 1e-9);
            assert!((p.c3 - y1 * y2 * (1.0 - y1 - y2)).abs() < 1e-16);
        }
    }

    #[test]
    fn chart_jacobian_is_pi_over_omega1() {
        let (y1, y2) = (0.3, 0.25);
        let h = 1e-6;
        let f = |a: f64, b: f64| polar_of_y(a, b).unwrap();
        let p0 = f(y1, y2);
        let lat = LatticeData::new(p0.c3).unwrap();
        let wrap = |d: f64| {
            let mut d = d;
            while d > PI {
                d -= 2.0 * PI;
            }
            while d < -PI {
                d += 2.0 * PI;
            }
            d
        };
        let dc_dy1 = (f(y1 + h, y2).c3 - f(y1 - h, y2).c3) / (2.0 * h);
        let dc_dy2 = (f(y1, y2 + h).c3 - f(y1, y2 - h).c3) / (2.0 * h);
        let ds_dy1 = wrap(f(y1 + h, y2).s - f(y1 - h, y2).s) / (2.0 * h);
        let ds_dy2 = wrap(f(y1, y2 + h).s - f(y1, y2 - h).s) / (2.0 * h);
        let det = dc_dy1 * ds_dy2 - dc_dy2 * ds_dy1;
        let expect = PI / lat.omega1;
        assert!(
            (det - expect).abs() < 1e-6 * expect.abs(),
            "jacobian {det} vs pi/omega1 {expect}"
        );
    }

    #[test]
    fn near_centre_maps_close_to_symmetric_axis() {
        let eps = 5e-3;
        let p = polar_of_y(1.0 / 3.0 + eps, 1.0 / 3.0 + eps).unwrap();
        // y1 = y2 > y3 is the s = 0 point of the contour.
        let d0 = p.s.min(2.0 * PI - p.s);
        assert!(d0 < 1e-6, "s = {} not on the symmetric axis", p.s);
    }

    #[test]
    fn flow_map_and_oracle_agree() {
        let p = PolarPoint::new(0.02, 0.8).unwrap();
        let y0 = y_of_polar(&p).unwrap();
        for &dt in &[0.0, 0.35, 1.2] {
            let closed = y_of_polar(&flow_map(&p, dt).unwrap()).unwrap();
            let rk = ode_oracle(&y0, dt).unwrap();
            for (a, b) in closed.as_array().iter().zip(rk.as_array().iter()) {
                assert!((a - b).abs() < 1e-8, "dt = {dt}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn full_period_returns_to_start() {
        let p = PolarPoint::new(0.02, 0.8).unwrap();
        let lat = LatticeData::new(p.c3).unwrap();
        let y0 = y_of_polar(&p).unwrap();
        let y1 = y_of_polar(&flow_map(&p, 2.0 * lat.omega1).unwrap()).unwrap();
        for (a, b) in y0.as_array().iter().zip(y1.as_array().iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn oracle_fixed_point_and_conservation() {
        let centre = TriplePoint {
            y1: 1.0 / 3.0,
            y2: 1.0 / 3.0,
            y3: 1.0 / 3.0,
        };
        let out = ode_oracle(&centre, 5.0).unwrap();
        for (a, b) in out.as_array().iter().zip(centre.as_array().iter()) {
            assert!((a - b).abs() < 1e-12);
        }
        let y0 = TriplePoint {
            y1: 0.5,
            y2: 0.3,
            y3: 0.2,
        };
        let out = ode_oracle(&y0, 10.0).unwrap();
        assert!((out.sum() - 1.0).abs() < 1e-10);
        assert!((out.product() - y0.product()).abs() < 1e-9);
    }

    #[test]
    fn product_of_wp_factors_is_c3_squared() {
        // (1/12 - wp(z))(1/12 - wp(z - tf))(1/12 - wp(z + tf)) = c3^2.
        let lat = LatticeData::new(0.02).unwrap();
        for &(a, b) in &[(0.13, 0.41), (0.52, 0.7), (0.81, 0.27)] {
            let z = Complex64::new(2.0 * lat.omega1 * a, 2.0 * lat.omega2_im * b);
            let tf = lat.tau_f();
            let f = |w: Complex64| 1.0 / 12.0 - wp(w, &lat).unwrap();
            let prod = f(z) * f(z - tf) * f(z + tf);
            assert!(
                (prod - lat.c3 * lat.c3).norm() < 1e-10,
                "product = {prod} at ({a},{b})"
            );
        }
    }

    #[test]
    fn varsigma_shift_relations() {
        // varsigma(s + 2pi/3) - varsigma(s) = y^2(t) - 1/3 and
        // varsigma(s - 2pi/3) - varsigma(s) = 1/3 - y^1(t).
        let lat = LatticeData::new(0.019).unwrap();
        for &s in &[0.37, 1.9, 4.4] {
            let y = y_with_lattice(&lat, s).unwrap();
            let v0 = varsigma(s, &lat).unwrap();
            let vp = varsigma(s + 2.0 * PI / 3.0, &lat).unwrap();
            let vm = varsigma(s - 2.0 * PI / 3.0, &lat).unwrap();
            assert!((vp - v0 - (y.y2 - 1.0 / 3.0)).abs() < 1e-10);
            assert!((vm - v0 - (1.0 / 3.0 - y.y1)).abs() < 1e-10);
        }
    }
}
