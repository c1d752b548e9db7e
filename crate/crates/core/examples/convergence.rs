//! Convergence orders on the free rigid body against a fine rk4 reference.
//!
//! ```bash
//! cargo run --release --example convergence
//! ```

use lievprk::config::NumericsConfig;
use lievprk::diagnostics::convergence_order;
use lievprk::integrators::Integrator;
use lievprk::lie::{Group, GroupElement};
use lievprk::models::{Model, RigidBody};
use lievprk::lie::AlgebraElement;
use lievprk::retraction::RetractionKind;
use nalgebra::Vector3;

fn main() -> lievprk::Result<()> {
    let body = RigidBody::new(Vector3::new(1.0, 2.0, 3.0))?;
    let g0 = GroupElement::identity(Group::SO3);
    let mu0 = body.dell_dxi(&g0, &AlgebraElement::from_slice(Group::SO3, &[1.0, 0.5, -0.2])?);
    let h_list = [0.1, 0.05, 0.025, 0.0125];
    println!("{:<14} {:>12} {:>12} {:>12} {:>12}  slope", "method", "h=0.1", "0.05", "0.025", "0.0125");
    for method in ["ve_forward", "ve_backward", "sv", "vprk:gauss2", "rkmk:rk4", "rk4"] {
        let it = Integrator::parse(method, RetractionKind::Exp, NumericsConfig::default())?;
        let study = convergence_order(&it, &body, &h_list, 1.0, &g0, &mu0)?;
        let errs: Vec<String> = study.errors.iter().map(|e| format!("{e:12.3e}")).collect();
        println!("{:<14} {}  {:.3}", it.id(), errs.join(" "), study.slope);
    }
    Ok(())
}
