//! Heavy top under gravity with VPRK methods of order 1, 2 and 4. The
//! momentum about the vertical is conserved by every variational scheme.
//!
//! ```bash
//! cargo run --release --example heavy_top
//! ```

use lievprk::config::NumericsConfig;
use lievprk::integrators::{integrate, HPState, Integrator};
use lievprk::lie::{AlgebraElement, Group, GroupElement};
use lievprk::models::HeavyTop;
use lievprk::retraction::RetractionKind;
use nalgebra::Vector3;

fn main() -> lievprk::Result<()> {
    let top = HeavyTop::new(Vector3::new(1.0, 2.0, 3.0), 1.0, Vector3::new(0.6, 0.0, 0.8))?;
    let xi = AlgebraElement::from_slice(Group::SO3, &[0.3, 1.2, -0.4])?;
    let start = HPState::from_velocity(&top, GroupElement::identity(Group::SO3), xi, 0.0)?;
    let h = 0.02;
    let steps = 5000;
    for method in ["ve_backward", "sv", "vprk:gauss2", "rk4"] {
        let it = Integrator::parse(method, RetractionKind::Exp, NumericsConfig::default())?;
        let states = integrate(&it, &top, h, steps, start.clone())?;
        let e0 = states[0].0.energy(&top);
        let max_dev = states.iter().map(|(s, _)| (s.energy(&top) - e0).abs()).fold(0.0, f64::max);
        let iters: usize = states.iter().map(|(_, r)| r.newton_iterations).sum();
        let last = &states.last().unwrap().0;
        println!(
            "{:<12} max |E - E0| = {max_dev:.2e}  Newton iterations {iters:>6}  final xi = [{:+.4}, {:+.4}, {:+.4}]",
            it.id(),
            last.xi.coords()[0],
            last.xi.coords()[1],
            last.xi.coords()[2],
        );
    }
    Ok(())
}
