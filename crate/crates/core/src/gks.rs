//! The generalised Kahler structure on CP^2 in the (theta1, theta2, c3, s)
//! chart: both complex structures, the Hitchin Poisson tensor, the 2-form
//! F, the bi-hermitian metric, and their verification residuals.
//!
//! Matrix conventions (coordinate order theta1, theta2, c3, s):
//! - endomorphisms I act on column tangent vectors, I[a][b] = (I d_b)^a;
//! - 2-forms F[a][b] = F(d_a, d_b); bivectors Q[a][b] = Q^{ab};
//! - with these, the structure equations read I+ - I- + Q F = 0,
//!   I-^T F + F I+ = 0, g = I-^T F - F I-, and Q = [I+, I-] g^{-1}.
//!   The sign of g is pinned by positive definiteness at small dt > 0;
//!   it amounts to contracting F on its first slot.
//!
//! Both complex structures are block off-diagonal: the flow-time shift
//! s -> s + pi dt/omega1(c3) enters I+ also through the c3-dependence of
//! omega1, producing the extra terms proportional to
//! 3 tilde_eta1 pi dt / (omega1^2 c3 (1 - 27 c3)); these are evaluated
//! analytically through the period derivatives, never by differencing.

use crate::elliptic::{log_sigma_w, varsigma, LatticeData};
use crate::error::{Error, Result};
use crate::flow::{dy_dc3_with_lattice, dy_ds_with_lattice, y_with_lattice, PolarPoint};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use std::f64::consts::PI;

/// Which tensor field a 4x4 sample holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    IMinus,
    IPlus,
    Q,
    F,
    Metric,
    SigmaPlusRe,
    SigmaPlusIm,
}

impl FieldKind {
    pub fn parse(name: &str) -> Option<FieldKind> {
        match name {
            "I_minus" | "i_minus" => Some(FieldKind::IMinus),
            "I_plus" | "i_plus" => Some(FieldKind::IPlus),
            "Q" | "q" => Some(FieldKind::Q),
            "F" | "f" => Some(FieldKind::F),
            "g" | "metric" => Some(FieldKind::Metric),
            "sigma_plus_re" => Some(FieldKind::SigmaPlusRe),
            "sigma_plus_im" => Some(FieldKind::SigmaPlusIm),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            FieldKind::IMinus => "I_minus",
            FieldKind::IPlus => "I_plus",
            FieldKind::Q => "Q",
            FieldKind::F => "F",
            FieldKind::Metric => "g",
            FieldKind::SigmaPlusRe => "sigma_plus_re",
            FieldKind::SigmaPlusIm => "sigma_plus_im",
        }
    }
}

/// One tensor field sampled at one point, as a real 4x4 matrix in the
/// coordinate order (theta1, theta2, c3, s).
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub point: PolarPoint,
    pub kind: FieldKind,
    pub dt: f64,
    pub m: Matrix4<f64>,
}

/// Residual summary of the structure equations at one sample.
#[derive(Debug, Clone)]
pub struct GksReport {
    pub residual_gks_i: f64,
    pub residual_gks_ii: f64,
    pub residual_i2: f64,
    pub residual_hermitian_plus: f64,
    pub residual_hermitian_minus: f64,
    pub min_metric_eigenvalue: f64,
    pub nijenhuis_max: f64,
}

/// The two off-diagonal 2x2 blocks of a complex structure:
/// `a` maps (c3, s) to (theta1, theta2) and `b` the other way.
#[derive(Debug, Clone, Copy)]
struct JBlocks {
    a: Matrix2<f64>,
    b: Matrix2<f64>,
}

/// Blocks of the standard complex structure I- at contour time s.
fn j_blocks(lat: &LatticeData, s: f64) -> Result<JBlocks> {
    let y = y_with_lattice(lat, s)?;
    let vs = varsigma(s, lat)?;
    let c3 = lat.c3;
    let d = 4.0 * c3 * (1.0 - 27.0 * c3);
    let a11 = (1.0 + 3.0 * y.y2 - 18.0 * y.y1 * y.y2 - 6.0 * vs * (1.0 - 3.0 * y.y2)) / d;
    let a21 = (1.0 + 3.0 * y.y1 - 18.0 * y.y1 * y.y2 + 6.0 * vs * (1.0 - 3.0 * y.y1)) / d;
    let a12 = lat.omega1 / (2.0 * PI) * (3.0 * y.y2 - 1.0);
    let a22 = lat.omega1 / (2.0 * PI) * (1.0 - 3.0 * y.y1);
    let r = 4.0 * PI * c3 / lat.omega1;
    Ok(JBlocks {
        a: Matrix2::new(a11, a12, a21, a22),
        b: Matrix2::new(-r * a22, r * a12, r * a21, -r * a11),
    })
}

fn assemble(point: PolarPoint, kind: FieldKind, dt: f64, blocks: &JBlocks) -> FieldSample {
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        for k in 0..2 {
            m[(i, 2 + k)] = blocks.a[(i, k)];
            m[(2 + k, i)] = blocks.b[(k, i)];
        }
    }
    FieldSample { point, kind, dt, m }
}

/// The coefficient kappa = 3 tilde_eta1 pi dt / (omega1^2 c3 (1 - 27 c3))
/// = d/dc3 [pi dt / omega1], the c3-derivative of the flow shift.
fn shift_derivative(lat: &LatticeData, dt: f64) -> f64 {
    3.0 * lat.tilde_eta1 * PI * dt / (lat.omega1 * lat.omega1 * lat.c3 * (1.0 - 27.0 * lat.c3))
}

/// The standard complex structure I- in the polar chart.
pub fn i_minus(p: &PolarPoint) -> Result<FieldSample> {
    let lat = LatticeData::new(p.c3)?;
    let blocks = j_blocks(&lat, p.s)?;
    Ok(assemble(*p, FieldKind::IMinus, 0.0, &blocks))
}

/// The flowed complex structure I+(dt) = (phi_dt*)^{-1} I- phi_dt*.
pub fn i_plus(p: &PolarPoint, dt: f64) -> Result<FieldSample> {
    let lat = LatticeData::new(p.c3)?;
    let blocks = i_plus_blocks(&lat, p.s, dt)?;
    Ok(assemble(*p, FieldKind::IPlus, dt, &blocks))
}

fn i_plus_blocks(lat: &LatticeData, s: f64, dt: f64) -> Result<JBlocks> {
    let shifted = s + PI * dt / lat.omega1;
    let base = j_blocks(lat, shifted)?;
    let kappa = shift_derivative(lat, dt);
    let l = Matrix2::new(1.0, 0.0, kappa, 1.0);
    let l_inv = Matrix2::new(1.0, 0.0, -kappa, 1.0);
    Ok(JBlocks {
        a: base.a * l,
        b: l_inv * base.b,
    })
}

/// The Hitchin Poisson tensor in the polar chart:
/// Q = (4 c3 pi / omega1) d_c3 ^ d_s - d_theta1 ^ d_theta2.
pub fn q_polar(p: &PolarPoint) -> Result<FieldSample> {
    let lat = LatticeData::new(p.c3)?;
    let mut m = Matrix4::zeros();
    m[(0, 1)] = -1.0;
    m[(1, 0)] = 1.0;
    let radial = 4.0 * p.c3 * PI / lat.omega1;
    m[(2, 3)] = radial;
    m[(3, 2)] = -radial;
    Ok(FieldSample {
        point: *p,
        kind: FieldKind::Q,
        dt: 0.0,
        m,
    })
}

/// Partial derivatives (d_c3 Y^i, d_s Y^i) of the flow integrals
/// Y^i = int_0^dt phi_t^* y^i, in closed form.
fn dy_integrals(lat: &LatticeData, s: f64, dt: f64) -> Result<[[f64; 2]; 2]> {
    let shifted = s + PI * dt / lat.omega1;
    let y_s = y_with_lattice(lat, s)?;
    let y_sh = y_with_lattice(lat, shifted)?;
    let a_s = j_blocks(lat, s)?.a;
    let a_plus = i_plus_blocks(lat, s, dt)?.a;
    let ds_y1 = lat.omega1 / PI * (y_sh.y1 - y_s.y1);
    let ds_y2 = lat.omega1 / PI * (y_sh.y2 - y_s.y2);
    let dc3_y1 = -2.0 / 3.0 * (a_plus[(1, 0)] - a_s[(1, 0)]);
    let dc3_y2 = 2.0 / 3.0 * (a_plus[(0, 0)] - a_s[(0, 0)]);
    Ok([[dc3_y1, ds_y1], [dc3_y2, ds_y2]])
}

/// The 2-form F = -(3/2) (dY^1 ^ dtheta_1 + dY^2 ^ dtheta_2).
pub fn f_two_form(p: &PolarPoint, dt: f64) -> Result<FieldSample> {
    let lat = LatticeData::new(p.c3)?;
    Ok(FieldSample {
        point: *p,
        kind: FieldKind::F,
        dt,
        m: f_matrix(&lat, p.s, dt)?,
    })
}

fn f_matrix(lat: &LatticeData, s: f64, dt: f64) -> Result<Matrix4<f64>> {
    let dy = dy_integrals(lat, s, dt)?;
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        // dY^i ^ dtheta_i contributes at (c3, theta_i) and (s, theta_i).
        m[(2, i)] = -1.5 * dy[i][0];
        m[(i, 2)] = 1.5 * dy[i][0];
        m[(3, i)] = -1.5 * dy[i][1];
        m[(i, 3)] = 1.5 * dy[i][1];
    }
    Ok(m)
}

/// The flow integrals Y^1, Y^2 themselves, through quotients of sigma
/// functions.  Y^i is real; taking real parts of the log sigma
/// combination removes the branch ambiguity of the complex logarithms.
pub fn y_integrals(p: &PolarPoint, dt: f64) -> Result<[f64; 2]> {
    let lat = LatticeData::new(p.c3)?;
    let t = lat.omega2() + Complex64::new(lat.omega1 * p.s / PI, 0.0);
    let tf = lat.tau_f();
    let ls = |z: Complex64| -> Result<f64> { Ok(log_sigma_w(z, &lat)?.re) };
    let drift = dt * (0.5 - lat.zeta_tau_f());
    let y1 = ls(t + dt)? + ls(t - tf)? - ls(t + dt - tf)? - ls(t)? + drift;
    let y2 = ls(t + dt + tf)? + ls(t)? - ls(t + dt)? - ls(t + tf)? + drift;
    Ok([y1, y2])
}

/// Bi-hermitian metric g = I-^T F - F I-; symmetric, vanishes at dt = 0,
/// positive definite for small dt > 0.
pub fn metric(p: &PolarPoint, dt: f64) -> Result<FieldSample> {
    let lat = LatticeData::new(p.c3)?;
    let f = f_matrix(&lat, p.s, dt)?;
    let im = assemble(*p, FieldKind::IMinus, 0.0, &j_blocks(&lat, p.s)?).m;
    Ok(FieldSample {
        point: *p,
        kind: FieldKind::Metric,
        dt,
        m: metric_matrix(&f, &im),
    })
}

fn metric_matrix(f: &Matrix4<f64>, i_minus: &Matrix4<f64>) -> Matrix4<f64> {
    i_minus.transpose() * f - f * i_minus
}

/// The 2-form d I^* dh for h = -(1/4) log c3, the derivative of F at
/// dt = 0.  The 1-form I^*dh has theta-components (1 - 3 y^i)/2, so the
/// exterior derivative is built from the analytic y-derivatives; in the
/// action-angle chart it equals -(3/2) sum_i dy^i ^ dtheta_i.
pub fn curvature_form(p: &PolarPoint) -> Result<Matrix4<f64>> {
    let lat = LatticeData::new(p.c3)?;
    let dc = dy_dc3_with_lattice(&lat, p.s)?;
    let ds = dy_ds_with_lattice(&lat, p.s)?;
    let mut m = Matrix4::zeros();
    for i in 0..2 {
        m[(2, i)] = -1.5 * dc[i];
        m[(i, 2)] = 1.5 * dc[i];
        m[(3, i)] = -1.5 * ds[i];
        m[(i, 3)] = 1.5 * ds[i];
    }
    Ok(m)
}

/// The metric rate dg/dt at dt = 0: the pairing of the curvature form
/// with I-, positive definite on the triangle interior.
pub fn metric_rate(p: &PolarPoint) -> Result<Matrix4<f64>> {
    let phi = curvature_form(p)?;
    let im = i_minus(p)?.m;
    Ok(metric_matrix(&phi, &im))
}

/// Holomorphic Poisson structures sigma_pm = (1/4)(I_pm Q + i Q),
/// returned as (real part, imaginary part) samples.
pub fn sigma_pm(p: &PolarPoint, dt: f64, plus: bool) -> Result<(FieldSample, FieldSample)> {
    let q = q_polar(p)?;
    let i_pm = if plus { i_plus(p, dt)? } else { i_minus(p)? };
    Ok((
        FieldSample {
            point: *p,
            kind: FieldKind::SigmaPlusRe,
            dt,
            m: 0.25 * i_pm.m * q.m,
        },
        FieldSample {
            point: *p,
            kind: FieldKind::SigmaPlusIm,
            dt,
            m: 0.25 * q.m,
        },
    ))
}

/// Norm of the antiholomorphic projection of sigma_pm under I_pm.
///
/// For sigma = (1/4)(I Q + i Q) the algebra (1 + iI)(I + i) = 0 makes
/// P sigma P^T with P = (1 + i I)/2 vanish identically; this measures
/// how far the numerics are from that.
pub fn sigma_projection_residual(p: &PolarPoint, dt: f64, plus: bool) -> Result<f64> {
    let (re, im) = sigma_pm(p, dt, plus)?;
    let i_pm = if plus { i_plus(p, dt)? } else { i_minus(p)? };
    let mut sigma = Matrix4::<Complex64>::zeros();
    let mut proj = Matrix4::<Complex64>::zeros();
    for a in 0..4 {
        for b in 0..4 {
            sigma[(a, b)] = Complex64::new(re.m[(a, b)], im.m[(a, b)]);
            let id = if a == b { 1.0 } else { 0.0 };
            proj[(a, b)] = Complex64::new(0.5 * id, 0.5 * i_pm.m[(a, b)]);
        }
    }
    let out = proj * sigma * proj.transpose();
    Ok(out.iter().map(|c| c.norm()).fold(0.0, f64::max))
}

/// Finite-difference steps for the Nijenhuis tensor and closure checks.
const FD_STEP_S: f64 = 1e-5;
const FD_STEP_C3: f64 = 1e-6;

fn require_stencil(c3: f64, h: f64) -> Result<()> {
    if c3 - h < crate::elliptic::C3_GUARD_LO || c3 + h > crate::elliptic::C3_GUARD_HI {
        return Err(Error::Stencil(format!(
            "c3 stencil [{:.3e}, {:.3e}] leaves the guard band",
            c3 - h,
            c3 + h
        )));
    }
    Ok(())
}

/// Max component of the Nijenhuis tensor of I- or I+(dt), by central
/// differences of the matrix field over the (c3, s) directions.
pub fn nijenhuis_max(kind: FieldKind, p: &PolarPoint, dt: f64) -> Result<f64> {
    let field = |c3: f64, s: f64| -> Result<Matrix4<f64>> {
        let lat = LatticeData::new(c3)?;
        let blocks = match kind {
            FieldKind::IMinus => j_blocks(&lat, s)?,
            FieldKind::IPlus => i_plus_blocks(&lat, s, dt)?,
            _ => {
                return Err(Error::Domain(
                    "Nijenhuis tensor is defined for I_minus or I_plus".into(),
                ))
            }
        };
        Ok(assemble(PolarPoint { c3, s }, kind, dt, &blocks).m)
    };
    require_stencil(p.c3, FD_STEP_C3)?;

    let center = field(p.c3, p.s)?;
    // d I / d x^c for c = 2 (c3) and c = 3 (s); theta derivatives vanish.
    let d_c3 =
        (field(p.c3 + FD_STEP_C3, p.s)? - field(p.c3 - FD_STEP_C3, p.s)?) / (2.0 * FD_STEP_C3);
    let d_s = (field(p.c3, p.s + FD_STEP_S)? - field(p.c3, p.s - FD_STEP_S)?) / (2.0 * FD_STEP_S);
    let grads = [Matrix4::zeros(), Matrix4::zeros(), d_c3, d_s];

    let mut max = 0.0f64;
    for a in 0..4 {
        for b in (a + 1)..4 {
            for e in 0..4 {
                let mut n = 0.0;
                for c in 0..4 {
                    n += center[(c, a)] * grads[c][(e, b)] - center[(c, b)] * grads[c][(e, a)]
                        + center[(e, c)] * (grads[b][(c, a)] - grads[a][(c, b)]);
                }
                max = max.max(n.abs());
            }
        }
    }
    Ok(max)
}

/// Finite-difference exterior derivative of F: the only components not
/// structurally zero are dF(d_c3, d_s, d_theta_i).
pub fn f_closure_residual(p: &PolarPoint, dt: f64) -> Result<f64> {
    require_stencil(p.c3, FD_STEP_C3)?;
    let f = |c3: f64, s: f64| -> Result<Matrix4<f64>> { f_matrix(&LatticeData::new(c3)?, s, dt) };
    let d_c3 = (f(p.c3 + FD_STEP_C3, p.s)? - f(p.c3 - FD_STEP_C3, p.s)?) / (2.0 * FD_STEP_C3);
    let d_s = (f(p.c3, p.s + FD_STEP_S)? - f(p.c3, p.s - FD_STEP_S)?) / (2.0 * FD_STEP_S);
    let mut max = 0.0f64;
    for i in 0..2 {
        // dF(c3, s, theta_i) = d_c3 F(s, theta_i) - d_s F(c3, theta_i).
        let r = d_c3[(3, i)] - d_s[(2, i)];
        max = max.max(r.abs());
    }
    Ok(max)
}

/// Full residual summary at one sample point.
pub fn gks_report(p: &PolarPoint, dt: f64) -> Result<GksReport> {
    let im = i_minus(p)?.m;
    let ip = i_plus(p, dt)?.m;
    let q = q_polar(p)?.m;
    let lat = LatticeData::new(p.c3)?;
    let f = f_matrix(&lat, p.s, dt)?;
    let g = metric_matrix(&f, &im);
    let id = Matrix4::identity();

    let residual_gks_i = (ip - im + q * f).amax();
    let residual_gks_ii = (im.transpose() * f + f * ip).amax();
    let residual_i2 = (im * im + id).amax().max((ip * ip + id).amax());
    let residual_hermitian_minus = (im.transpose() * g * im - g).amax();
    let residual_hermitian_plus = (ip.transpose() * g * ip - g).amax();
    let min_metric_eigenvalue = g
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let nijenhuis = nijenhuis_max(FieldKind::IPlus, p, dt)?;
    Ok(GksReport {
        residual_gks_i,
        residual_gks_ii,
        residual_i2,
        residual_hermitian_plus,
        residual_hermitian_minus,
        min_metric_eigenvalue,
        nijenhuis_max: nijenhuis,
    })
}

/// Grid for positivity scans.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub c3_min: f64,
    pub c3_max: f64,
    pub n_c3: usize,
    pub n_s: usize,
    /// Number of flow-time fractions k/n_dt * dt, k = 1..=n_dt.
    pub n_dt: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            c3_min: 0.005,
            c3_max: 0.032,
            n_c3: 20,
            n_s: 20,
            n_dt: 4,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct PositivityReport {
    pub min_eigenvalue: f64,
    pub at_c3: f64,
    pub at_s: f64,
    pub at_dt: f64,
}

/// Minimum eigenvalue of the metric over the grid, scanning flow times
/// k dt / n_dt up to dt.  Deterministic reduction in index order.
pub fn positivity_scan(dt: f64, grid: &GridSpec) -> Result<PositivityReport> {
    if grid.n_c3 < 2 || grid.n_s < 2 || grid.n_dt < 1 {
        return Err(Error::Domain("grid sizes must be at least 2 x 2 x 1".into()));
    }
    let mut report = PositivityReport {
        min_eigenvalue: f64::INFINITY,
        at_c3: f64::NAN,
        at_s: f64::NAN,
        at_dt: f64::NAN,
    };
    for ic in 0..grid.n_c3 {
        let c3 = grid.c3_min + (grid.c3_max - grid.c3_min) * ic as f64 / (grid.n_c3 - 1) as f64;
        let lat = LatticeData::new(c3)?;
        for is in 0..grid.n_s {
            let s = 2.0 * PI * is as f64 / grid.n_s as f64;
            let im = assemble(
                PolarPoint { c3, s },
                FieldKind::IMinus,
                0.0,
                &j_blocks(&lat, s)?,
            )
            .m;
            for k in 1..=grid.n_dt {
                let dtk = dt * k as f64 / grid.n_dt as f64;
                let f = f_matrix(&lat, s, dtk)?;
                let g = metric_matrix(&f, &im);
                let min_eig = g
                    .symmetric_eigen()
                    .eigenvalues
                    .iter()
                    .cloned()
                    .fold(f64::INFINITY, f64::min);
                if min_eig < report.min_eigenvalue {
                    report = PositivityReport {
                        min_eigenvalue: min_eig,
                        at_c3: c3,
                        at_s: s,
                        at_dt: dtk,
                    };
                }
            }
        }
    }
    Ok(report)
}
