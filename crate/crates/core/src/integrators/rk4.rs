use nalgebra::{DMatrix, DVector};

use super::HPState;
use crate::lie::{self, GroupElement, Momentum};
use crate::models::Model;

/// Classical RK4 on `ġ = g ξ̂`, `μ̇ = ad*_ξ μ + f(g, ξ)`, `ξ = (∂ℓ/∂ξ)⁻¹(μ)`,
/// with `g` advanced as an unconstrained matrix.
pub fn rk4_baseline_step(model: &dyn Model, h: f64, state: &HPState) -> HPState {
    let group = state.group();
    let rhs = |g: &DMatrix<f64>, mu: &DVector<f64>| {
        let g = GroupElement::from_matrix_unchecked(group, g.clone());
        let mu = Momentum::from_coords(group, mu.clone());
        let xi = model.legendre_inv(&g, &mu);
        let gdot = g.matrix() * lie::hat(&xi);
        let mut mudot = lie::ad_matrix(&xi).tr_mul(mu.coords());
        if !model.is_left_invariant() {
            mudot += model.body_force(&g, &xi).coords();
        }
        (gdot, mudot)
    };
    let g0 = state.g.matrix();
    let m0 = state.mu.coords();
    let (k1g, k1m) = rhs(g0, m0);
    let (k2g, k2m) = rhs(&(g0 + &k1g * (h / 2.0)), &(m0 + &k1m * (h / 2.0)));
    let (k3g, k3m) = rhs(&(g0 + &k2g * (h / 2.0)), &(m0 + &k2m * (h / 2.0)));
    let (k4g, k4m) = rhs(&(g0 + &k3g * h), &(m0 + &k3m * h));
    let g = g0 + (k1g + k2g * 2.0 + k3g * 2.0 + k4g) * (h / 6.0);
    let mu = m0 + (k1m + k2m * 2.0 + k3m * 2.0 + k4m) * (h / 6.0);
    let g = GroupElement::from_matrix_unchecked(group, g);
    let mu = Momentum::from_coords(group, mu);
    let xi = model.legendre_inv(&g, &mu);
    HPState {
        g,
        xi,
        mu,
        t: state.t + h,
    }
}
