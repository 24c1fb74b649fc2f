//! Symplectic-coordinate description of toric surfaces: the symplectic
//! potential on the Delzant polygon, the induced complex structure and
//! metric in action-angle coordinates, local complex coordinates per
//! corner chart, and the toric invariant holomorphic Poisson tensor.
//!
//! The general-polygon operations work for any Delzant polygon; the
//! closed forms (Poisson norm, Hitchin Poisson tensor) are specific to
//! the CP^2 triangle and guarded by a polygon fingerprint.

use crate::error::{Error, Result};
use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

/// Face functions must exceed this for a point to count as interior.
pub const FACE_TOLERANCE: f64 = 1e-9;

fn cross(a: [i64; 2], b: [i64; 2]) -> i64 {
    a[0] * b[1] - a[1] * b[0]
}

/// A Delzant polygon given by faces <v^a, y> + lambda^a >= 0, with the
/// normals listed so that consecutive pairs meet at a vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct DelzantPolygon {
    normals: Vec<[i64; 2]>,
    offsets: Vec<f64>,
}

impl DelzantPolygon {
    /// Validates the smoothness condition: consecutive normals form a
    /// positively oriented Z-basis (cross product one).
    pub fn new(normals: Vec<[i64; 2]>, offsets: Vec<f64>) -> Result<Self> {
        if normals.len() < 3 || normals.len() != offsets.len() {
            return Err(Error::Domain(
                "polygon needs at least three faces with matching offsets".into(),
            ));
        }
        let n = normals.len();
        for k in 0..n {
            let c = cross(normals[k], normals[(k + 1) % n]);
            if c != 1 {
                return Err(Error::InvalidCorner { cross: c });
            }
        }
        Ok(DelzantPolygon { normals, offsets })
    }

    /// The moment triangle of CP^2 with Kahler class fixed by
    /// lambda = (0, 0, 1).
    pub fn cp2() -> Self {
        DelzantPolygon {
            normals: vec![[1, 0], [0, 1], [-1, -1]],
            offsets: vec![0.0, 0.0, 1.0],
        }
    }

    /// Unit square of CP^1 x CP^1, used as a secondary fixture.
    pub fn cp1_cp1() -> Self {
        DelzantPolygon {
            normals: vec![[1, 0], [0, 1], [-1, 0], [0, -1]],
            offsets: vec![0.0, 0.0, 1.0, 1.0],
        }
    }

    pub fn num_faces(&self) -> usize {
        self.normals.len()
    }

    pub fn normal(&self, a: usize) -> [i64; 2] {
        self.normals[a]
    }

    /// Face affine functions l_a(y) = <v^a, y> + lambda^a.
    pub fn face_values(&self, y: &MomentPoint) -> Vec<f64> {
        self.normals
            .iter()
            .zip(self.offsets.iter())
            .map(|(v, l)| v[0] as f64 * y.y1 + v[1] as f64 * y.y2 + l)
            .collect()
    }

    /// Corner chart between face k and face k+1.
    pub fn corner(&self, k: usize) -> Corner {
        let n = self.normals.len();
        Corner {
            u1: self.normals[k % n],
            u2: self.normals[(k + 1) % n],
        }
    }

    /// True exactly for the CP^2 triangle fixture; the closed-form
    /// operations refuse anything else.
    pub fn is_cp2(&self) -> bool {
        *self == Self::cp2()
    }

    fn require_interior(&self, y: &MomentPoint) -> Result<Vec<f64>> {
        let faces = self.face_values(y);
        for (a, &value) in faces.iter().enumerate() {
            if value <= FACE_TOLERANCE {
                return Err(Error::Boundary { face: a, value });
            }
        }
        Ok(faces)
    }

    fn require_cp2(&self) -> Result<()> {
        if !self.is_cp2() {
            return Err(Error::Domain(
                "closed form is specific to the CP^2 triangle".into(),
            ));
        }
        Ok(())
    }
}

/// A point of the moment polytope interior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentPoint {
    pub y1: f64,
    pub y2: f64,
}

impl MomentPoint {
    pub fn new(y1: f64, y2: f64) -> Self {
        MomentPoint { y1, y2 }
    }

    /// Third triangle coordinate y^3 = 1 - y^1 - y^2 (CP^2 convention).
    pub fn y3(&self) -> f64 {
        1.0 - self.y1 - self.y2
    }
}

/// A corner chart: the two face normals meeting at the vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Corner {
    pub u1: [i64; 2],
    pub u2: [i64; 2],
}

/// Guillemin potential data at one point: value, gradient, Hessian and
/// inverse Hessian.
#[derive(Debug, Clone)]
pub struct GuilleminData {
    pub g: f64,
    pub grad: [f64; 2],
    pub hess: Matrix2<f64>,
    pub hess_inv: Matrix2<f64>,
}

/// G = (1/2) sum_a l_a log l_a with gradient and Hessian.
pub fn guillemin(poly: &DelzantPolygon, y: &MomentPoint) -> Result<GuilleminData> {
    let faces = poly.require_interior(y)?;
    let mut g = 0.0;
    let mut grad = [0.0f64; 2];
    let mut hess = Matrix2::zeros();
    for (a, &l) in faces.iter().enumerate() {
        let v = poly.normal(a);
        let (v1, v2) = (v[0] as f64, v[1] as f64);
        g += 0.5 * l * l.ln();
        grad[0] += 0.5 * v1 * (l.ln() + 1.0);
        grad[1] += 0.5 * v2 * (l.ln() + 1.0);
        hess[(0, 0)] += 0.5 * v1 * v1 / l;
        hess[(0, 1)] += 0.5 * v1 * v2 / l;
        hess[(1, 1)] += 0.5 * v2 * v2 / l;
    }
    hess[(1, 0)] = hess[(0, 1)];
    let hess_inv = hess
        .try_inverse()
        .ok_or_else(|| Error::Convergence("Guillemin Hessian not invertible".into()))?;
    Ok(GuilleminData {
        g,
        grad,
        hess,
        hess_inv,
    })
}

/// Complex structure in coordinate order (theta1, theta2, y1, y2):
/// the theta <- y block is G_ij and the y <- theta block is -G^{ij}.
pub fn complex_structure_ytheta(poly: &DelzantPolygon, y: &MomentPoint) -> Result<Matrix4<f64>> {
    let gd = guillemin(poly, y)?;
    let mut j = Matrix4::zeros();
    for i in 0..2 {
        for k in 0..2 {
            j[(i, 2 + k)] = gd.hess[(i, k)];
            j[(2 + i, k)] = -gd.hess_inv[(i, k)];
        }
    }
    Ok(j)
}

/// Metric in the same coordinate order: block diag(G^{ij}, G_ij).
pub fn metric_ytheta(poly: &DelzantPolygon, y: &MomentPoint) -> Result<Matrix4<f64>> {
    let gd = guillemin(poly, y)?;
    let mut g = Matrix4::zeros();
    for i in 0..2 {
        for k in 0..2 {
            g[(i, k)] = gd.hess_inv[(i, k)];
            g[(2 + i, 2 + k)] = gd.hess[(i, k)];
        }
    }
    Ok(g)
}

/// Symplectic form omega = sum dy^i wedge dtheta_i in the same order.
pub fn symplectic_ytheta() -> Matrix4<f64> {
    let mut w = Matrix4::zeros();
    for i in 0..2 {
        w[(2 + i, i)] = 1.0;
        w[(i, 2 + i)] = -1.0;
    }
    w
}

/// Local complex coordinates of a corner chart:
/// z_1 = xi_1^{u^2_2} xi_2^{-u^2_1}, z_2 = xi_1^{-u^1_2} xi_2^{u^1_1}
/// with xi_i = exp(i theta_i + G_i).
pub fn complex_coords(
    poly: &DelzantPolygon,
    y: &MomentPoint,
    theta: [f64; 2],
    corner: &Corner,
) -> Result<[Complex64; 2]> {
    let c = cross(corner.u1, corner.u2);
    if c != 1 {
        return Err(Error::InvalidCorner { cross: c });
    }
    let gd = guillemin(poly, y)?;
    let xi1 = Complex64::new(gd.grad[0], theta[0]).exp();
    let xi2 = Complex64::new(gd.grad[1], theta[1]).exp();
    let z1 = xi1.powi(corner.u2[1] as i32) * xi2.powi(-corner.u2[0] as i32);
    let z2 = xi1.powi(-corner.u1[1] as i32) * xi2.powi(corner.u1[0] as i32);
    Ok([z1, z2])
}

/// Integer transition matrix between two corner charts; the new
/// coordinates are the monomials tilde z_a = prod_b z_b^{A_ab}.
pub fn transition_matrix(from: &Corner, to: &Corner) -> Result<[[i64; 2]; 2]> {
    for c in [from, to] {
        let x = cross(c.u1, c.u2);
        if x != 1 {
            return Err(Error::InvalidCorner { cross: x });
        }
    }
    let a = [
        [cross(from.u1, to.u2), cross(from.u2, to.u2)],
        [cross(to.u1, from.u1), cross(to.u1, from.u2)],
    ];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    debug_assert_eq!(det, 1, "transition matrix must be unimodular");
    Ok(a)
}

/// Apply the monomial map of a transition matrix to chart coordinates.
pub fn monomial_transport(z: [Complex64; 2], a: &[[i64; 2]; 2]) -> [Complex64; 2] {
    [
        z[0].powi(a[0][0] as i32) * z[1].powi(a[0][1] as i32),
        z[0].powi(a[1][0] as i32) * z[1].powi(a[1][1] as i32),
    ]
}

/// Norm squared of the invariant holomorphic Poisson tensor,
/// ||sigma||^2 = (1/2) det(G_ij)^{-1}; equals 2 y^1 y^2 y^3 on CP^2.
pub fn poisson_norm(poly: &DelzantPolygon, y: &MomentPoint) -> Result<f64> {
    let gd = guillemin(poly, y)?;
    let det = gd.hess[(0, 0)] * gd.hess[(1, 1)] - gd.hess[(0, 1)] * gd.hess[(1, 0)];
    Ok(0.5 / det)
}

/// CP^2 closed form of the Poisson norm.
pub fn poisson_norm_cp2(y: &MomentPoint) -> Result<f64> {
    let poly = DelzantPolygon::cp2();
    poly.require_interior(y)?;
    Ok(2.0 * y.y1 * y.y2 * y.y3())
}

/// The Hitchin Poisson tensor on CP^2 in action-angle coordinates,
/// Q = 4 y^1 y^2 y^3 d_y1 ^ d_y2 - d_theta1 ^ d_theta2, as a bivector
/// component matrix in the order (theta1, theta2, y1, y2).
pub fn hitchin_q_ytheta(poly: &DelzantPolygon, y: &MomentPoint) -> Result<Matrix4<f64>> {
    poly.require_cp2()?;
    poly.require_interior(y)?;
    let mut q = Matrix4::zeros();
    q[(0, 1)] = -1.0;
    q[(1, 0)] = 1.0;
    let c3 = y.y1 * y.y2 * y.y3();
    q[(2, 3)] = 4.0 * c3;
    q[(3, 2)] = -4.0 * c3;
    Ok(q)
}
