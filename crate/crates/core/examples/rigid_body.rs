//! Free rigid body with Störmer-Verlet: energy stays bounded, the discrete
//! spatial momentum is conserved to roundoff and `g` stays on SO(3).
//!
//! ```bash
//! cargo run --release --example rigid_body
//! ```

use lievprk::config::NumericsConfig;
use lievprk::diagnostics::{drift_series, spatial_momentum, Observable, Trajectory};
use lievprk::integrators::{integrate, HPState, Integrator, Method};
use lievprk::lie::{AlgebraElement, Group, GroupElement};
use lievprk::models::RigidBody;
use lievprk::retraction::RetractionKind;
use nalgebra::Vector3;

fn main() -> lievprk::Result<()> {
    let body = RigidBody::new(Vector3::new(1.0, 2.0, 3.0))?;
    let xi = AlgebraElement::from_slice(Group::SO3, &[1.0, 0.5, -0.2])?;
    let start = HPState::from_velocity(&body, GroupElement::identity(Group::SO3), xi, 0.0)?;
    let it = Integrator::new(Method::Sv, RetractionKind::Cayley, NumericsConfig::default());
    let h = 0.01;

    let traj = Trajectory::new(integrate(&it, &body, h, 20_000, start)?, h, it.id(), "rigid_body")?;
    let energy = drift_series(&traj, &body, Observable::Energy);
    println!("{} steps of {} at h = {h}", traj.len() - 1, it.id());
    println!("energy: peak-to-peak {:.3e}, slope {:.2e} per unit time", energy.peak_to_peak, energy.slope);

    let first = spatial_momentum(&traj.states[1], &it.retraction, h)?.discrete;
    let mut drift: f64 = 0.0;
    for s in &traj.states[1..] {
        drift = drift.max((spatial_momentum(s, &it.retraction, h)?.discrete.coords() - first.coords()).amax());
    }
    println!("discrete spatial momentum {:?}, max change {drift:.1e}", first.coords().as_slice());

    let last = traj.states.last().unwrap();
    println!("final t = {:.2}, group residual {:.1e}", last.t, last.g.residual());
    Ok(())
}
