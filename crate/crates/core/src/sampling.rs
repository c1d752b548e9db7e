//! Seeded random samples for test sweeps.

use nalgebra::DVector;
use rand::Rng;

use crate::integrators::HPState;
use crate::lie::{AlgebraElement, Group, GroupElement};
use crate::models::Model;
use crate::retraction::Retraction;

/// Uniform sample from the ball `‖ξ‖ ≤ radius`.
pub fn algebra_in_ball(rng: &mut impl Rng, group: Group, radius: f64) -> AlgebraElement {
    let d = group.algebra_dim();
    loop {
        let v = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
        if v.norm() <= 1.0 {
            return AlgebraElement::new(group, v * radius).unwrap();
        }
    }
}

/// `ξ` with components uniform in `[−scale, scale]`.
pub fn algebra_in_cube(rng: &mut impl Rng, group: Group, scale: f64) -> AlgebraElement {
    let d = group.algebra_dim();
    AlgebraElement::new(group, DVector::from_fn(d, |_, _| rng.random_range(-scale..scale))).unwrap()
}

/// `exp(η)` with `η` uniform in the unit ball.
pub fn group_element(rng: &mut impl Rng, group: Group) -> GroupElement {
    Retraction::exp().tau(&algebra_in_ball(rng, group, 1.0)).unwrap()
}

/// Random configuration with velocity components uniform in `[−1, 1]`.
pub fn state(rng: &mut impl Rng, model: &dyn Model) -> HPState {
    let group = model.group();
    let g = group_element(rng, group);
    let xi = algebra_in_cube(rng, group, 1.0);
    HPState::from_velocity(model, g, xi, 0.0).unwrap()
}
