//! User-defined Butcher tableaus in VPRK. Any coefficients with nonzero
//! weights define a variational scheme; zero weights are rejected.
//!
//! ```bash
//! cargo run --release --example custom_tableau
//! ```

use lievprk::config::NumericsConfig;
use lievprk::diagnostics::convergence_order;
use lievprk::integrators::{ButcherTableau, Integrator, Method};
use lievprk::lie::{AlgebraElement, Group, GroupElement};
use lievprk::models::{Model, RigidBody};
use lievprk::retraction::RetractionKind;
use nalgebra::Vector3;

fn main() -> lievprk::Result<()> {
    let s = 3f64.sqrt() / 6.0;
    let radau = ButcherTableau::from_rows("radau_iia2", &[vec![5.0 / 12.0, -1.0 / 12.0], vec![0.75, 0.25]], &[0.75, 0.25])?;
    let gauss = ButcherTableau::from_rows("my_gauss2", &[vec![0.25, 0.25 - s], vec![0.25 + s, 0.25]], &[0.5, 0.5])?;
    match ButcherTableau::from_rows("lobatto_like", &[vec![0.0, 0.0], vec![1.0, 0.0]], &[0.0, 1.0]) {
        Ok(_) => println!("zero weight accepted"),
        Err(e) => println!("zero weight rejected: {e}"),
    }

    let body = RigidBody::new(Vector3::new(1.0, 2.0, 3.0))?;
    let g0 = GroupElement::identity(Group::SO3);
    let mu0 = body.dell_dxi(&g0, &AlgebraElement::from_slice(Group::SO3, &[1.0, 0.5, -0.2])?);
    for tableau in [radau, gauss] {
        let name = tableau.name().to_string();
        let it = Integrator::new(Method::Vprk(tableau), RetractionKind::Cayley, NumericsConfig::default());
        let study = convergence_order(&it, &body, &[0.2, 0.1, 0.05, 0.025], 1.0, &g0, &mu0)?;
        println!("{name:<12} errors {:?} slope {:.2}", study.errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(), study.slope);
    }
    Ok(())
}
