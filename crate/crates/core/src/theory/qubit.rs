//! Exact error statistics for the qubit SIC POM.
//!
//! The Bloch-vector estimator is Gaussian with covariance `C(s)`; the mean
//! error `E|ds|` is evaluated in closed form when two principal variances
//! coincide and by quadrature otherwise.

use std::f64::consts::PI;

use nalgebra::{Matrix3, SymmetricEigen, Vector3};
use serde::Serialize;

use super::check_copies;
use crate::error::{Error, Result};
use crate::operators::BlochVector;
use crate::povm::tetrahedron_vertices;

/// Relative tolerance for treating two variances as equal.
pub const BRANCH_TOL: f64 = 1e-9;

/// Principal variances of the Bloch-vector estimator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QubitEllipsoid {
    pub sigma_sq: [f64; 3],
}

impl QubitEllipsoid {
    /// Round-off negatives down to `-1e-12` are clamped to zero.
    pub fn new(sigma_sq: [f64; 3]) -> Result<Self> {
        let mut out = sigma_sq;
        for v in &mut out {
            if !(*v >= -1e-12) {
                return Err(Error::InvalidParameter(format!("negative variance {v}")));
            }
            *v = v.max(0.0);
        }
        Ok(QubitEllipsoid { sigma_sq: out })
    }

    /// Ascending variances.
    pub fn sorted(&self) -> [f64; 3] {
        let mut s = self.sigma_sq;
        s.sort_by(f64::total_cmp);
        s
    }

    pub fn trace(&self) -> f64 {
        self.sigma_sq.iter().sum()
    }
}

/// `C(s) = [3 I - s s + (9/4) sum_k (a_k . s) a_k a_k] / N` for the
/// tetrahedron POM, and its eigenvalues.
pub fn qubit_mse_matrix(s: &BlochVector, n: f64) -> Result<(Matrix3<f64>, QubitEllipsoid)> {
    check_copies(n)?;
    if !s.is_physical() {
        return Err(Error::NotDensity(format!("Bloch vector length {} > 1", s.norm())));
    }
    let sv = Vector3::from(s.0);
    let mut c = Matrix3::identity() * 3.0 - sv * sv.transpose();
    for a in tetrahedron_vertices() {
        let av = Vector3::from(a.0);
        c += av * av.transpose() * (2.25 * a.dot(s));
    }
    c /= n;
    let ev = SymmetricEigen::new(c).eigenvalues;
    let ellipsoid = QubitEllipsoid::new([ev[0], ev[1], ev[2]])?;
    Ok((c, ellipsoid))
}

/// Ellipsoid for `s = z a_1`: `sigma_1^2 = sigma_2^2 = (3-z)/N`,
/// `sigma_3^2 = (3-z)(1+z)/N`.
pub fn extreme_state_ellipsoid(z: f64, n: f64) -> Result<QubitEllipsoid> {
    check_copies(n)?;
    if !(-1.0..=1.0).contains(&z) {
        return Err(Error::InvalidParameter(format!("z = {z} outside [-1, 1]")));
    }
    QubitEllipsoid::new([(3.0 - z) / n, (3.0 - z) / n, (3.0 - z) * (1.0 + z) / n])
}

/// `atan(x)/x`, accurate near zero.
fn atan_over_x(x: f64) -> f64 {
    if x < 1e-4 {
        let x2 = x * x;
        1.0 - x2 / 3.0 + x2 * x2 / 5.0
    } else {
        x.atan() / x
    }
}

/// `atanh(x)/x`, accurate near zero.
fn atanh_over_x(x: f64) -> f64 {
    if x < 1e-4 {
        let x2 = x * x;
        1.0 + x2 / 3.0 + x2 * x2 / 5.0
    } else {
        x.atanh() / x
    }
}

/// `E|ds|` for variances `(sigma1^2, sigma1^2, sigma3^2)`.
pub fn mean_error_closed_form(sigma1_sq: f64, sigma3_sq: f64) -> f64 {
    let k = (2.0 / PI).sqrt();
    let s1 = sigma1_sq.max(0.0).sqrt();
    let s3 = sigma3_sq.max(0.0).sqrt();
    if s1 == 0.0 {
        return k * s3;
    }
    if s3 == 0.0 {
        return (PI / 2.0).sqrt() * s1;
    }
    let diff = sigma1_sq - sigma3_sq;
    let x = (diff.abs() / sigma3_sq).sqrt();
    let f = if diff >= 0.0 { atan_over_x(x) } else { atanh_over_x(x) };
    k * (sigma1_sq * f / s3 + s3)
}

/// `E|ds|` from the one-dimensional reduced integral over `t in [0, 1]`,
/// with the largest variance as `sigma_3`.
pub fn mean_error_quadrature(ellipsoid: &QubitEllipsoid) -> f64 {
    let [a, b, c] = ellipsoid.sorted();
    if c == 0.0 {
        return 0.0;
    }
    let num0 = a * c + b * c;
    let num2 = 2.0 * a * b - a * c - b * c;
    let integrand = |t: f64| {
        let t2 = t * t;
        let u = 1.0 - t2;
        let g = c * u * u + a * b / c * t2 * t2 + (a + b) * t2 * u;
        if g <= 0.0 {
            0.0
        } else {
            (num0 + num2 * t2) / (g * g.sqrt())
        }
    };
    let target = 1e-13 * c.sqrt();
    let out = quadrature::integrate(integrand, 0.0, 1.0, target);
    (2.0 / PI).sqrt() * out.integral
}

/// `E|ds|`: closed form when two variances agree within [`BRANCH_TOL`],
/// quadrature otherwise. Returns zero when all variances vanish.
pub fn qubit_mean_error(ellipsoid: &QubitEllipsoid) -> f64 {
    let [a, b, c] = ellipsoid.sorted();
    if c == 0.0 {
        return 0.0;
    }
    let close = |x: f64, y: f64| (x - y).abs() <= BRANCH_TOL * x.max(y);
    if close(a, b) {
        mean_error_closed_form(0.5 * (a + b), c)
    } else if close(b, c) {
        mean_error_closed_form(0.5 * (b + c), a)
    } else {
        mean_error_quadrature(ellipsoid)
    }
}

/// Mean trace distance, `E|ds|/2`.
pub fn qubit_mean_trace_distance(ellipsoid: &QubitEllipsoid) -> f64 {
    qubit_mean_error(ellipsoid) / 2.0
}

/// Mean trace distance assuming an isotropic ellipsoid with the exact MSE,
/// `sqrt(2/(3 pi N)) sqrt(9 - s^2)`.
pub fn isotropic_mean_trace_distance(s_norm_sq: f64, n: f64) -> f64 {
    (2.0 / (3.0 * PI * n)).sqrt() * (9.0 - s_norm_sq).sqrt()
}
