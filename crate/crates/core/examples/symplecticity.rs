//! Finite-difference symplecticity defect of one step: variational methods
//! sit at the difference floor, rk4 and RKMK do not.
//!
//! ```bash
//! cargo run --release --example symplecticity
//! ```

use lievprk::config::NumericsConfig;
use lievprk::diagnostics::symplecticity_defect;
use lievprk::integrators::Integrator;
use lievprk::models::RigidBody;
use lievprk::retraction::RetractionKind;
use lievprk::sampling;
use nalgebra::Vector3;
use rand::rngs::StdRng;
use rand::SeedableRng;

fn main() -> lievprk::Result<()> {
    let body = RigidBody::new(Vector3::new(1.0, 2.0, 3.0))?;
    let mut rng = StdRng::seed_from_u64(7);
    let states: Vec<_> = (0..5).map(|_| sampling::state(&mut rng, &body)).collect();
    let h = 0.05;
    for method in ["ve_forward", "ve_backward", "sv", "vprk:gauss2", "rkmk:rk4", "rk4"] {
        let it = Integrator::parse(method, RetractionKind::Cayley, NumericsConfig::default())?;
        let d: Vec<String> = states
            .iter()
            .map(|s| symplecticity_defect(&it, &body, h, s).map(|v| format!("{v:.1e}")))
            .collect::<lievprk::Result<_>>()?;
        println!("{:<12} {}", it.id(), d.join("  "));
    }
    Ok(())
}
