//! The holomorphic symplectic groupoid on T*CP^2 in one corner chart:
//! the symplectic form Omega_0, its inverse bivector, source and target
//! maps, composition, and Darboux coordinates.
//!
//! Conventions for the 4x4 matrices, in the coordinate basis
//! (z^1, z^2, xi_1, xi_2):
//! - a 2-form F is stored as F[a][b] = F(d_a, d_b);
//! - a bivector P as P[a][b] = P^{ab};
//! - with these, `omega0(g) * inverse_bivector(g) = id`.

use crate::error::{Error, Result};
use nalgebra::{Matrix4, SMatrix};
use num_complex::Complex64;

type C = Complex64;
type Jacobian2x4 = SMatrix<C, 2, 4>;

const I: C = C::new(0.0, 1.0);

/// A point (z^1, z^2, xi_1, xi_2) of the groupoid chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupoidPoint {
    pub z1: C,
    pub z2: C,
    pub xi1: C,
    pub xi2: C,
}

impl GroupoidPoint {
    pub fn new(z1: C, z2: C, xi1: C, xi2: C) -> Self {
        GroupoidPoint { z1, z2, xi1, xi2 }
    }

    /// The unit arrow over a base point.
    pub fn unit(z: [C; 2]) -> Self {
        GroupoidPoint::new(z[0], z[1], C::new(0.0, 0.0), C::new(0.0, 0.0))
    }
}

/// Darboux coordinates (q^1, q^2, p_1, p_2) for Omega_0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DarbouxPoint {
    pub q1: C,
    pub q2: C,
    pub p1: C,
    pub p2: C,
}

/// i Omega_0 = -xi1 xi2 dz1^dz2 - xi1 z2 dz1^dxi2 + dz1^dxi1 + dz2^dxi2
///             + xi2 z1 dz2^dxi1 - z1 z2 dxi1^dxi2.
pub fn omega0(g: &GroupoidPoint) -> Matrix4<C> {
    let mut m = Matrix4::zeros();
    let set = |m: &mut Matrix4<C>, a: usize, b: usize, v: C| {
        m[(a, b)] = v;
        m[(b, a)] = -v;
    };
    set(&mut m, 0, 1, -g.xi1 * g.xi2);
    set(&mut m, 0, 3, -g.xi1 * g.z2);
    set(&mut m, 0, 2, C::new(1.0, 0.0));
    set(&mut m, 1, 3, C::new(1.0, 0.0));
    set(&mut m, 1, 2, g.xi2 * g.z1);
    set(&mut m, 2, 3, -g.z1 * g.z2);
    m * (-I)
}

/// The inverse bivector Pi = Omega_0^{-1} in closed form:
/// -i Pi = d_xi1^d_z1 + d_xi2^d_z2 - xi1 xi2 d_xi1^d_xi2
///         + xi1 z2 d_xi1^d_z2 - xi2 z1 d_xi2^d_z1 - z1 z2 d_z1^d_z2.
pub fn inverse_bivector(g: &GroupoidPoint) -> Matrix4<C> {
    let mut m = Matrix4::zeros();
    let set = |m: &mut Matrix4<C>, a: usize, b: usize, v: C| {
        m[(a, b)] = v;
        m[(b, a)] = -v;
    };
    set(&mut m, 2, 0, C::new(1.0, 0.0));
    set(&mut m, 3, 1, C::new(1.0, 0.0));
    set(&mut m, 2, 3, -g.xi1 * g.xi2);
    set(&mut m, 2, 1, g.xi1 * g.z2);
    set(&mut m, 3, 0, -g.xi2 * g.z1);
    set(&mut m, 0, 1, -g.z1 * g.z2);
    m * I
}

/// Source map s(g) = (z^1, z^2).
pub fn source(g: &GroupoidPoint) -> [C; 2] {
    [g.z1, g.z2]
}

/// Target map t(g) = (z^1 e^{xi_2 z^2}, z^2 e^{-xi_1 z^1}).
pub fn target(g: &GroupoidPoint) -> [C; 2] {
    [
        g.z1 * (g.xi2 * g.z2).exp(),
        g.z2 * (-g.xi1 * g.z1).exp(),
    ]
}

/// Composability tolerance for `compose`.
pub const COMPOSE_TOL: f64 = 1e-9;

/// h o g for s(h) = t(g):
/// (z^1, z^2; xi_1 + eta_1 e^{xi_2 z^2}, xi_2 + eta_2 e^{-xi_1 z^1}).
pub fn compose(h: &GroupoidPoint, g: &GroupoidPoint) -> Result<GroupoidPoint> {
    let tg = target(g);
    let sh = source(h);
    let mismatch = (sh[0] - tg[0]).norm().max((sh[1] - tg[1]).norm());
    if mismatch > COMPOSE_TOL {
        return Err(Error::Composability {
            mismatch,
            tol: COMPOSE_TOL,
        });
    }
    Ok(GroupoidPoint::new(
        g.z1,
        g.z2,
        g.xi1 + h.xi1 * (g.xi2 * g.z2).exp(),
        g.xi2 + h.xi2 * (-g.xi1 * g.z1).exp(),
    ))
}

/// Darboux coordinates of Lemma form: q^1 = z^1 e^{xi_2 z^2/2}, ...
pub fn darboux(g: &GroupoidPoint) -> DarbouxPoint {
    let half2 = (g.xi2 * g.z2 / 2.0).exp();
    let half1 = (g.xi1 * g.z1 / 2.0).exp();
    DarbouxPoint {
        q1: g.z1 * half2,
        q2: g.z2 / half1,
        p1: g.xi1 / half2,
        p2: g.xi2 * half1,
    }
}

/// Analytic Jacobian of the source map (rows: s components, columns:
/// z1, z2, xi1, xi2).
pub fn source_jacobian(_g: &GroupoidPoint) -> Jacobian2x4 {
    let mut j = Jacobian2x4::zeros();
    j[(0, 0)] = C::new(1.0, 0.0);
    j[(1, 1)] = C::new(1.0, 0.0);
    j
}

/// Analytic Jacobian of the target map.
pub fn target_jacobian(g: &GroupoidPoint) -> Jacobian2x4 {
    let e2 = (g.xi2 * g.z2).exp();
    let e1 = (-g.xi1 * g.z1).exp();
    let mut j = Jacobian2x4::zeros();
    j[(0, 0)] = e2;
    j[(0, 1)] = g.z1 * g.xi2 * e2;
    j[(0, 3)] = g.z1 * g.z2 * e2;
    j[(1, 0)] = -g.z2 * g.xi1 * e1;
    j[(1, 1)] = e1;
    j[(1, 2)] = -g.z1 * g.z2 * e1;
    j
}

/// The invariant holomorphic Poisson tensor sigma = i z^1 z^2 d_1 ^ d_2
/// at a base point, as a 2x2 bivector matrix.
pub fn sigma_at(z: [C; 2]) -> SMatrix<C, 2, 2> {
    let v = I * z[0] * z[1];
    SMatrix::<C, 2, 2>::new(C::new(0.0, 0.0), v, -v, C::new(0.0, 0.0))
}

/// Residuals of the structural pushforward relations at one point:
/// t_* Pi = +sigma at t(g), s_* Pi = -sigma at s(g), the bracket
/// orthogonality {t^*f, s^*g} = 0, and Omega_0-orthogonality of ker s_*
/// and ker t_*.
#[derive(Debug, Clone, Copy)]
pub struct PushforwardReport {
    pub target_poisson_residual: f64,
    pub source_poisson_residual: f64,
    pub bracket_orthogonality_residual: f64,
    pub kernel_orthogonality_residual: f64,
}

impl PushforwardReport {
    pub fn max(&self) -> f64 {
        self.target_poisson_residual
            .max(self.source_poisson_residual)
            .max(self.bracket_orthogonality_residual)
            .max(self.kernel_orthogonality_residual)
    }
}

pub fn target_pushforward_check(g: &GroupoidPoint) -> Result<PushforwardReport> {
    let pi = inverse_bivector(g);
    let s_jac = source_jacobian(g);
    let t_jac = target_jacobian(g);
    if !t_jac.iter().all(|c| c.is_finite()) {
        return Err(Error::Jacobian("target jacobian overflowed".into()));
    }

    let push_t = t_jac * pi * t_jac.transpose();
    let push_s = s_jac * pi * s_jac.transpose();
    let target_poisson_residual = (push_t - sigma_at(target(g))).norm();
    let source_poisson_residual = (push_s + sigma_at(source(g))).norm();

    // {t^*f, s^*g}_Pi over coordinate functions: T Pi S^T = 0.
    let bracket = t_jac * pi * s_jac.transpose();
    let bracket_orthogonality_residual = bracket.norm();

    // ker s_* is spanned by the fibre directions; a basis of ker t_* is
    // solved from the two linear conditions dt^i(V) = 0.
    let om = omega0(g);
    let mut kernel_orthogonality_residual = 0.0f64;
    let kernel_t = kernel_basis(&t_jac);
    for u in [[2usize], [3usize]] {
        for v in &kernel_t {
            let mut val = C::new(0.0, 0.0);
            for (b, vb) in v.iter().enumerate() {
                val += om[(u[0], b)] * vb;
            }
            kernel_orthogonality_residual = kernel_orthogonality_residual.max(val.norm());
        }
    }
    Ok(PushforwardReport {
        target_poisson_residual,
        source_poisson_residual,
        bracket_orthogonality_residual,
        kernel_orthogonality_residual,
    })
}

/// Two vectors spanning the kernel of a rank-2 complex 2x4 Jacobian,
/// solved by fixing one of the last two coordinates at a time.
fn kernel_basis(j: &Jacobian2x4) -> Vec<[C; 4]> {
    let mut basis = Vec::with_capacity(2);
    for free in [2usize, 3usize] {
        // Solve j[:, 0..2] * (a, b) = -j[:, free].
        let m = SMatrix::<C, 2, 2>::new(j[(0, 0)], j[(0, 1)], j[(1, 0)], j[(1, 1)]);
        let rhs = nalgebra::SVector::<C, 2>::new(-j[(0, free)], -j[(1, free)]);
        if let Some(inv) = m.try_inverse() {
            let ab = inv * rhs;
            let mut v = [C::new(0.0, 0.0); 4];
            v[0] = ab[0];
            v[1] = ab[1];
            v[free] = C::new(1.0, 0.0);
            basis.push(v);
        }
    }
    basis
}

/// The model symplectic form on C^2 with Poisson tensor x y d_x ^ d_y:
/// Omega = uv dx^dy + vy dx^du - dx^dv + dy^du - ux dy^dv - xy du^dv.
/// Its determinant is identically one.
pub fn toy_model_omega(x: C, y: C, u: C, v: C) -> Matrix4<C> {
    let mut m = Matrix4::zeros();
    let set = |m: &mut Matrix4<C>, a: usize, b: usize, val: C| {
        m[(a, b)] = val;
        m[(b, a)] = -val;
    };
    set(&mut m, 0, 1, u * v);
    set(&mut m, 0, 2, v * y);
    set(&mut m, 0, 3, -C::new(1.0, 0.0));
    set(&mut m, 1, 2, C::new(1.0, 0.0));
    set(&mut m, 1, 3, -u * x);
    set(&mut m, 2, 3, -x * y);
    m
}
