//! Closed-form SO(3) formulas on fixed-size matrices.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};

/// Below this angle exp/log switch to their Taylor expansions.
pub const SMALL_ANGLE: f64 = 1e-4;

/// Below this angle the Jacobian coefficient functions use their series.
const SERIES_ANGLE: f64 = 5e-2;

/// Largest rotation angle accepted by [`log`]; the axis is ill-defined at π.
pub const LOG_ANGLE_LIMIT: f64 = std::f64::consts::PI - 1e-6;

pub fn hat(w: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::new(0.0, -w[2], w[1], w[2], 0.0, -w[0], -w[1], w[0], 0.0)
}

pub fn vee(m: &Matrix3<f64>) -> Vector3<f64> {
    Vector3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// `sin θ / θ` and `(1 − cos θ) / θ²`.
fn rodrigues_coefficients(theta: f64) -> (f64, f64) {
    if theta < SMALL_ANGLE {
        let t2 = theta * theta;
        (1.0 - t2 / 6.0, 0.5 - t2 / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / (theta * theta))
    }
}

/// Rodrigues formula.
pub fn exp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let (a, b) = rodrigues_coefficients(theta);
    let k = hat(w);
    Matrix3::identity() + k * a + k * k * b
}

/// Axis-angle logarithm for rotation angles below [`LOG_ANGLE_LIMIT`].
pub fn log(r: &Matrix3<f64>) -> Result<Vector3<f64>> {
    let s = vee(r);
    let sin_t = s.norm();
    let cos_t = 0.5 * (r.trace() - 1.0);
    let theta = sin_t.atan2(cos_t);
    if theta > LOG_ANGLE_LIMIT {
        return Err(Error::OutOfDomain {
            what: "SO(3) logarithm",
            detail: format!("rotation angle {theta} too close to pi"),
        });
    }
    if theta < SMALL_ANGLE {
        // θ / sin θ ≈ 1 + θ²/6
        Ok(s * (1.0 + theta * theta / 6.0))
    } else {
        Ok(s * (theta / sin_t))
    }
}

/// `(θ − sin θ) / θ³`.
pub(crate) fn coef_a(theta: f64) -> f64 {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0 - t2 * t2 * t2 / 362880.0
    } else {
        (theta - theta.sin()) / (theta * theta * theta)
    }
}

/// `(1 − (θ/2) cot(θ/2)) / θ²`.
fn coef_dexp_inv(theta: f64) -> f64 {
    if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0 + t2 * t2 * t2 / 1209600.0
    } else {
        let half = 0.5 * theta;
        (1.0 - half / half.tan()) / (theta * theta)
    }
}

/// Right-trivialized tangent of exp: `dexp(w) = Σ adʲ/(j+1)!`.
pub fn dexp(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let b = if theta < SERIES_ANGLE {
        let t2 = theta * theta;
        0.5 - t2 / 24.0 + t2 * t2 / 720.0 - t2 * t2 * t2 / 40320.0
    } else {
        (1.0 - theta.cos()) / (theta * theta)
    };
    let k = hat(w);
    Matrix3::identity() + k * b + k * k * coef_a(theta)
}

/// Inverse of [`dexp`]: `I − K/2 + c(θ) K²`.
pub fn dexp_inv(w: &Vector3<f64>) -> Matrix3<f64> {
    let theta = w.norm();
    let k = hat(w);
    Matrix3::identity() - k * 0.5 + k * k * coef_dexp_inv(theta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn series_exp(m: &Matrix3<f64>) -> Matrix3<f64> {
        let mut term = Matrix3::identity();
        let mut sum = Matrix3::identity();
        for k in 1..60 {
            term = term * m / k as f64;
            sum += term;
        }
        sum
    }

    #[test]
    fn exp_matches_series() {
        for w in [
            Vector3::new(0.0, 0.0, std::f64::consts::FRAC_PI_2),
            Vector3::new(0.3, -1.2, 0.8),
            Vector3::new(1e-6, 2e-6, -1e-6),
            Vector3::new(5e-5, 0.0, 0.0),
        ] {
            let diff = exp(&w) - series_exp(&hat(&w));
            assert!(diff.norm() < 1e-14, "{w:?}: {}", diff.norm());
        }
    }

    #[test]
    fn log_round_trip() {
        for w in [
            Vector3::new(0.0, 0.0, 0.9),
            Vector3::new(0.3, -1.2, 0.8),
            Vector3::new(1e-7, 2e-7, -1e-7),
            Vector3::new(0.0, 3.0, 0.0),
        ] {
            let back = log(&exp(&w)).unwrap();
            assert!((back - w).norm() < 1e-12);
        }
        let flip = exp(&Vector3::new(std::f64::consts::PI, 0.0, 0.0));
        assert!(log(&flip).is_err());
    }

    #[test]
    fn dexp_pair_are_inverses() {
        for w in [
            Vector3::new(0.3, -1.2, 0.8),
            Vector3::new(1e-3, 2e-3, 0.0),
            Vector3::new(0.0, 0.0, 0.0),
            Vector3::new(2.0, 1.0, -1.5),
        ] {
            let p = dexp(&w) * dexp_inv(&w);
            assert!((p - Matrix3::identity()).norm() < 1e-13);
        }
    }

    #[test]
    fn coefficient_series_join_continuously() {
        let lo = SERIES_ANGLE * (1.0 - 1e-9);
        let hi = SERIES_ANGLE * (1.0 + 1e-9);
        assert!((coef_a(lo) - coef_a(hi)).abs() < 1e-12);
        assert!((coef_dexp_inv(lo) - coef_dexp_inv(hi)).abs() < 1e-12);
    }
}
