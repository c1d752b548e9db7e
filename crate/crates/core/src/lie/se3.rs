//! Closed-form SE(3) formulas. Coordinates are `(angular, linear)`.

use nalgebra::{Matrix3, Matrix6, Vector3, Vector6};

use super::so3;
use crate::error::Result;

const SERIES_ANGLE: f64 = 0.1;

fn split(x: &Vector6<f64>) -> (Vector3<f64>, Vector3<f64>) {
    (Vector3::new(x[0], x[1], x[2]), Vector3::new(x[3], x[4], x[5]))
}

/// Screw-motion exponential: `(exp(ŵ), dexp_so3(w) v)`.
pub fn exp(x: &Vector6<f64>) -> (Matrix3<f64>, Vector3<f64>) {
    let (w, v) = split(x);
    (so3::exp(&w), so3::dexp(&w) * v)
}

pub fn log(r: &Matrix3<f64>, p: &Vector3<f64>) -> Result<Vector6<f64>> {
    let w = so3::log(r)?;
    let v = so3::dexp_inv(&w) * p;
    Ok(Vector6::new(w[0], w[1], w[2], v[0], v[1], v[2]))
}

/// `(θ² + 2cos θ − 2) / (2θ⁴)`.
fn coef_b(theta: f64) -> f64 {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        1.0 / 24.0 - t2 / 720.0 + t2 * t2 / 40320.0 - t2 * t2 * t2 / 3628800.0
    } else {
        let t2 = theta * theta;
        (t2 + 2.0 * theta.cos() - 2.0) / (2.0 * t2 * t2)
    }
}

/// `(2θ − 3 sin θ + θ cos θ) / (2θ⁵)`.
fn coef_c(theta: f64) -> f64 {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        1.0 / 120.0 - t2 / 2520.0 + t2 * t2 / 120960.0 - t2 * t2 * t2 / 7983360.0
    } else {
        let t2 = theta * theta;
        (2.0 * theta - 3.0 * theta.sin() + theta * theta.cos()) / (2.0 * t2 * t2 * theta)
    }
}

/// Off-diagonal block of the se(3) exponential's tangent.
fn coupling_block(w: &Vector3<f64>, v: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let wh = so3::hat(w);
    let vh = so3::hat(v);
    let wv = wh * vh;
    let vw = vh * wh;
    let wvw = wv * wh;
    let ww = wh * wh;
    vh * 0.5
        + (wv + vw + wvw) * so3::coef_a(theta)
        + (ww * vh + vw * wh - wvw * 3.0) * coef_b(theta)
        + (wvw * wh + ww * vh * wh) * coef_c(theta)
}

/// Right-trivialized tangent of exp on se(3): `[[J, 0], [Q, J]]`.
pub fn dexp(x: &Vector6<f64>) -> Matrix6<f64> {
    let (w, v) = split(x);
    let j = so3::dexp(&w);
    let q = coupling_block(&w, &v);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&j);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&j);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&q);
    m
}

/// Inverse of [`dexp`]: `[[J⁻¹, 0], [−J⁻¹ Q J⁻¹, J⁻¹]]`.
pub fn dexp_inv(x: &Vector6<f64>) -> Matrix6<f64> {
    let (w, v) = split(x);
    let ji = so3::dexp_inv(&w);
    let q = coupling_block(&w, &v);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&ji);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&ji);
    m.fixed_view_mut::<3, 3>(3, 0).copy_from(&(-(ji * q * ji)));
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ad(x: &Vector6<f64>) -> Matrix6<f64> {
        let (w, v) = split(x);
        let mut m = Matrix6::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&so3::hat(&w));
        m.fixed_view_mut::<3, 3>(3, 3).copy_from(&so3::hat(&w));
        m.fixed_view_mut::<3, 3>(3, 0).copy_from(&so3::hat(&v));
        m
    }

    /// Σ adʲ / (j+1)! summed until the terms vanish.
    fn dexp_series(x: &Vector6<f64>) -> Matrix6<f64> {
        let a = ad(x);
        let mut term = Matrix6::identity();
        let mut sum = Matrix6::identity();
        for j in 1..40 {
            term = term * a / (j + 1) as f64;
            sum += term;
        }
        sum
    }

    fn twist(x: &Vector6<f64>) -> nalgebra::Matrix4<f64> {
        let (w, v) = split(x);
        let mut m = nalgebra::Matrix4::zeros();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&so3::hat(&w));
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&v);
        m
    }

    #[test]
    fn exp_matches_screw_series() {
        // ω = (0,0,1), v = (1,0,0): scalar series of the 4x4 twist
        for x in [
            Vector6::new(0.0, 0.0, 1.0, 1.0, 0.0, 0.0),
            Vector6::new(0.3, -0.7, 0.2, 1.0, 2.0, -0.5),
            Vector6::new(1e-6, 0.0, 2e-6, 1.0, 0.0, 0.0),
        ] {
            let t = twist(&x);
            let mut term = nalgebra::Matrix4::identity();
            let mut sum = nalgebra::Matrix4::identity();
            for k in 1..60 {
                term = term * t / k as f64;
                sum += term;
            }
            let (r, p) = exp(&x);
            assert!((sum.fixed_view::<3, 3>(0, 0) - r).norm() < 1e-14);
            assert!((sum.fixed_view::<3, 1>(0, 3) - p).norm() < 1e-14);
        }
    }

    #[test]
    fn closed_form_tangent_matches_series() {
        for x in [
            Vector6::new(0.3, -0.7, 0.2, 1.0, 2.0, -0.5),
            Vector6::new(0.05, 0.02, -0.01, 0.3, -0.1, 0.2),
            Vector6::new(0.0, 0.0, 0.0, 1.0, 2.0, 3.0),
            Vector6::new(1.5, -0.4, 0.9, -2.0, 0.5, 1.0),
            Vector6::new(0.09, 0.0, 0.0, 0.0, 1.0, 0.0),
            Vector6::new(0.11, 0.0, 0.0, 0.0, 1.0, 0.0),
        ] {
            let diff = dexp(&x) - dexp_series(&x);
            assert!(diff.norm() < 1e-13, "{x:?}: {}", diff.norm());
            let prod = dexp(&x) * dexp_inv(&x);
            assert!((prod - Matrix6::identity()).norm() < 1e-13);
        }
    }

    #[test]
    fn log_round_trip() {
        let x = Vector6::new(0.3, -0.7, 0.2, 1.0, 2.0, -0.5);
        let (r, p) = exp(&x);
        assert!((log(&r, &p).unwrap() - x).norm() < 1e-13);
    }
}
