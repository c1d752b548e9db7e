//! Newton iteration with a central-difference Jacobian.

use nalgebra::{DMatrix, DVector};

use crate::config::NumericsConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// ∞-norm of the residual at the returned point.
    pub residual: f64,
}

/// Solves `F(x) = 0` starting from `x0`.
///
/// Converged when `‖F(x)‖∞ ≤ newton_tol`. Fails with `NoConvergence` after
/// `newton_max_iter` updates, and with `Singular` when the Jacobian cannot be
/// factored. Errors raised by `F` itself (for example a retraction leaving
/// its domain) are passed through.
pub fn solve_implicit<F>(mut f: F, x0: DVector<f64>, numerics: &NumericsConfig) -> Result<(DVector<f64>, SolveReport)>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let mut x = x0;
    let mut r = f(&x)?;
    let n = x.len();
    if r.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: r.len(),
        });
    }
    let mut norm = r.amax();
    if !norm.is_finite() {
        return Err(Error::NoConvergence {
            iterations: 0,
            residual: norm,
        });
    }
    for iteration in 0..numerics.newton_max_iter {
        if norm <= numerics.newton_tol {
            return Ok((
                x,
                SolveReport {
                    iterations: iteration,
                    residual: norm,
                },
            ));
        }
        let jac = fd_jacobian(&mut f, &x, numerics.newton_fd_step)?;
        let dx = jac.lu().solve(&r).ok_or(Error::Singular("Newton Jacobian"))?;
        x -= dx;
        r = f(&x)?;
        norm = r.amax();
        if !norm.is_finite() {
            break;
        }
    }
    if norm <= numerics.newton_tol {
        return Ok((
            x,
            SolveReport {
                iterations: numerics.newton_max_iter,
                residual: norm,
            },
        ));
    }
    Err(Error::NoConvergence {
        iterations: numerics.newton_max_iter,
        residual: norm,
    })
}

/// Central differences with step `rel · (1 + ‖x‖)`.
pub fn fd_jacobian<F>(f: &mut F, x: &DVector<f64>, rel: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&DVector<f64>) -> Result<DVector<f64>>,
{
    let n = x.len();
    let step = rel * (1.0 + x.norm());
    let mut jac = DMatrix::zeros(n, n);
    let mut probe = x.clone();
    for j in 0..n {
        probe[j] = x[j] + step;
        let plus = f(&probe)?;
        probe[j] = x[j] - step;
        let minus = f(&probe)?;
        probe[j] = x[j];
        jac.set_column(j, &((plus - minus) / (2.0 * step)));
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_nonlinear_system() {
        // x² + y² = 4, x = y
        let f = |v: &DVector<f64>| Ok(DVector::from_vec(vec![v[0] * v[0] + v[1] * v[1] - 4.0, v[0] - v[1]]));
        let (x, report) = solve_implicit(f, DVector::from_vec(vec![1.0, 0.5]), &NumericsConfig::default()).unwrap();
        let r = 2f64.sqrt();
        assert!((x[0] - r).abs() < 1e-12 && (x[1] - r).abs() < 1e-12);
        assert!(report.residual <= 1e-12);
        assert!(report.iterations < 10);
    }

    #[test]
    fn converged_start_takes_no_iterations() {
        let f = |v: &DVector<f64>| Ok(v.clone());
        let (_, report) = solve_implicit(f, DVector::zeros(3), &NumericsConfig::default()).unwrap();
        assert_eq!(report.iterations, 0);
    }

    #[test]
    fn reports_no_convergence() {
        // no real root
        let f = |v: &DVector<f64>| Ok(DVector::from_vec(vec![v[0] * v[0] + 1.0]));
        let cfg = NumericsConfig {
            newton_max_iter: 5,
            ..Default::default()
        };
        match solve_implicit(f, DVector::from_vec(vec![0.3]), &cfg) {
            Err(Error::NoConvergence { iterations, residual }) => {
                assert_eq!(iterations, 5);
                assert!(residual > 0.5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn jacobian_matches_analytic() {
        let mut f = |v: &DVector<f64>| Ok(DVector::from_vec(vec![v[0].sin() * v[1], v[1].exp()]));
        let x = DVector::from_vec(vec![0.4, -0.2]);
        let j = fd_jacobian(&mut f, &x, 1e-6).unwrap();
        let exact = DMatrix::from_row_slice(2, 2, &[0.4f64.cos() * -0.2, 0.4f64.sin(), 0.0, (-0.2f64).exp()]);
        assert!((j - exact).amax() < 1e-9);
    }
}
