use nalgebra::DVector;

use super::{check_step, solve, HPState, Kit, StepReport};
use crate::config::NumericsConfig;
use crate::error::Result;
use crate::models::Model;
use crate::retraction::Retraction;

/// Forward variational Euler (one stage, `a = 0`, `b = 1`).
///
/// Solves `(dτ⁻¹_{hξ})* ∂ℓ/∂ξ(g_k, ξ) = (dτ⁻¹_{−hξ_k})* μ_k + h f(g_k, ξ)`
/// for `ξ = ξ_{k+1}`; then `g_{k+1} = g_k τ(hξ_{k+1})` and
/// `μ_{k+1} = ∂ℓ/∂ξ(g_k, ξ_{k+1})`.
pub fn ve_forward_step(
    model: &dyn Model,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let g = &state.g;
    let lhs_k = kit.phase(h, state.xi.coords(), state.mu.coords())?;
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let dp = kit.dti(&(x * h))?;
        Ok(dp.tr_mul(&kit.dell(g, x)) - &lhs_k - kit.force(g, x) * h)
    };
    let (xi, report) = solve(residual, state.xi.coords().clone(), numerics)?;
    let step = &xi * h;
    kit.guard(&step)?;
    let next = HPState {
        g: kit.retract(g, &step)?,
        mu: kit.mom(kit.dell(g, &xi)),
        xi: kit.alg(xi),
        t: state.t + h,
    };
    Ok((next, report))
}

/// Backward variational Euler (one stage, `a = 1`, `b = 1`).
///
/// With `G = g_k τ(hξ)`, solves `(dτ⁻¹_{hξ})* ∂ℓ/∂ξ(G, ξ) = (dτ⁻¹_{−hξ_k})* μ_k`
/// for `ξ = ξ_{k+1}`; then `g_{k+1} = G` and
/// `μ_{k+1} = ∂ℓ/∂ξ(G, ξ) + h (dτ_{−hξ})* f(G, ξ)`.
pub fn ve_backward_step(
    model: &dyn Model,
    r: &Retraction,
    h: f64,
    state: &HPState,
    numerics: &NumericsConfig,
) -> Result<(HPState, StepReport)> {
    check_step(model, r, h, state)?;
    let kit = Kit::new(model, r);
    let g = &state.g;
    let lhs_k = kit.phase(h, state.xi.coords(), state.mu.coords())?;
    let residual = |x: &DVector<f64>| -> Result<DVector<f64>> {
        let step = x * h;
        let gn = kit.retract(g, &step)?;
        Ok(kit.dti(&step)?.tr_mul(&kit.dell(&gn, x)) - &lhs_k)
    };
    let (xi, report) = solve(residual, state.xi.coords().clone(), numerics)?;
    let step = &xi * h;
    kit.guard(&step)?;
    let g_next = kit.retract(g, &step)?;
    let mut mu = kit.dell(&g_next, &xi);
    if !model.is_left_invariant() {
        mu += kit.dt(&-&step)?.tr_mul(&kit.force(&g_next, &xi)) * h;
    }
    let next = HPState {
        g: g_next,
        mu: kit.mom(mu),
        xi: kit.alg(xi),
        t: state.t + h,
    };
    Ok((next, report))
}
