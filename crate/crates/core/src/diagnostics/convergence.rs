use rayon::prelude::*;

use super::fit_slope;
use crate::error::{Error, Result};
use crate::integrators::{integrate_final, rk4_baseline_step, HPState, Integrator};
use crate::lie::{self, GroupElement, Momentum};
use crate::models::Model;
use crate::retraction::Retraction;

/// Largest admissible disagreement between the two reference resolutions.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceStudy {
    pub h: Vec<f64>,
    pub errors: Vec<f64>,
    pub slope: f64,
    pub slope_stderr: f64,
    pub reference_h: f64,
    /// Error distance between the reference at `h_ref` and at `h_ref / 2`.
    pub reference_discrepancy: f64,
}

/// `‖log(g_ref⁻¹ g)‖ + ‖p − μ_ref‖`.
pub fn error_distance(g: &GroupElement, p: &Momentum, g_ref: &GroupElement, mu_ref: &Momentum) -> Result<f64> {
    let rel = GroupElement::from_matrix_unchecked(g.group(), lie::inverse(g_ref).matrix() * g.matrix());
    let dg = Retraction::exp().tau_inv(&rel)?.norm();
    Ok(dg + (p.coords() - mu_ref.coords()).norm())
}

fn steps_for(t_end: f64, h: f64) -> Result<usize> {
    let n = (t_end / h).round();
    if n < 1.0 || (n * h - t_end).abs() > 1e-9 * t_end.abs().max(1.0) {
        return Err(Error::InvalidConfig(vec![format!("step size {h} does not divide the time span {t_end}")]));
    }
    Ok(n as usize)
}

/// RK4 solution at `t_end` from `(g0, μ0)` with step `h_ref`, checked
/// against a run at `h_ref / 2`.
pub fn reference_solution(model: &dyn Model, g0: &GroupElement, mu0: &Momentum, t_end: f64, h_ref: f64) -> Result<(HPState, f64)> {
    let xi0 = model.legendre_inv(g0, mu0);
    let start = HPState {
        g: g0.clone(),
        xi: xi0,
        mu: mu0.clone(),
        t: 0.0,
    };
    let run = |h: f64| -> Result<HPState> {
        let mut s = start.clone();
        for _ in 0..steps_for(t_end, h)? {
            s = rk4_baseline_step(model, h, &s);
        }
        Ok(s)
    };
    let (coarse, fine) = rayon::join(|| run(h_ref), || run(h_ref / 2.0));
    let (coarse, fine) = (coarse?, fine?);
    let discrepancy = error_distance(&coarse.g, &coarse.mu, &fine.g, &fine.mu)?;
    if !(discrepancy <= REFERENCE_TOLERANCE) {
        return Err(Error::ReferenceUnconverged {
            discrepancy,
            limit: REFERENCE_TOLERANCE,
        });
    }
    Ok((fine, discrepancy))
}

/// Global error at `t_end` for each step size and the fitted log-log slope.
///
/// Every run starts from the state whose phase momentum is `μ0` at `g0`, and
/// its error is measured on the phase momentum, so the comparison with the
/// continuous `(g, μ)` is free of the velocity staggering of the variational
/// schemes.
pub fn convergence_order(
    integrator: &Integrator,
    model: &dyn Model,
    h_list: &[f64],
    t_end: f64,
    g0: &GroupElement,
    mu0: &Momentum,
) -> Result<ConvergenceStudy> {
    if h_list.len() < 4 {
        return Err(Error::InvalidConfig(vec![format!("need >= 4 step sizes, got {}", h_list.len())]));
    }
    let ratio = h_list[1] / h_list[0];
    if h_list.iter().any(|h| !(*h > 0.0)) || h_list.windows(2).any(|w| ((w[1] / w[0]) / ratio - 1.0).abs() > 1e-9) || ratio == 1.0 {
        return Err(Error::InvalidConfig(vec!["step sizes must form a geometric sequence".into()]));
    }
    for &h in h_list {
        steps_for(t_end, h)?;
    }
    let h_min = h_list.iter().copied().fold(f64::INFINITY, f64::min);
    let h_ref = h_min / 32.0;
    let (reference, reference_discrepancy) = reference_solution(model, g0, mu0, t_end, h_ref)?;
    let errors: Vec<f64> = h_list
        .par_iter()
        .map(|&h| -> Result<f64> {
            let start = integrator.state_from_phase(model, h, g0.clone(), mu0, 0.0)?;
            let end = integrate_final(integrator, model, h, steps_for(t_end, h)?, start)?;
            let p = Momentum::from_coords(end.group(), integrator.phase_momentum(model, h, &end)?);
            error_distance(&end.g, &p, &reference.g, &reference.mu)
        })
        .collect::<Result<_>>()?;
    let lx: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
    let ly: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let (slope, slope_stderr) = fit_slope(&lx, &ly);
    Ok(ConvergenceStudy {
        h: h_list.to_vec(),
        errors,
        slope,
        slope_stderr,
        reference_h: h_ref / 2.0,
        reference_discrepancy,
    })
}
