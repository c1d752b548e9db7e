//! The three retractions on SO(3) and SE(3): round trips, the defining
//! identity `τ(ξ)τ(−ξ) = e`, and how `dτ⁻¹` compares with `dexp⁻¹`.
//!
//! ```bash
//! cargo run --release --example retractions
//! ```

use lievprk::config::NumericsConfig;
use lievprk::lie::{self, AlgebraElement, Group};
use lievprk::retraction::{Retraction, RetractionKind};

fn main() -> lievprk::Result<()> {
    let numerics = NumericsConfig::default();
    for group in [Group::SO3, Group::SE3] {
        let xi = match group {
            Group::SO3 => AlgebraElement::from_slice(group, &[0.3, -0.5, 0.4])?,
            Group::SE3 => AlgebraElement::from_slice(group, &[0.3, -0.5, 0.4, 1.0, 0.2, -0.7])?,
        };
        println!("{} with xi = {:?}", group.name(), xi.coords().as_slice());
        let exp = Retraction::new(RetractionKind::Exp, &numerics);
        for kind in RetractionKind::ALL {
            if !kind.supports(group) {
                println!("  {:<9} not defined on {}", kind.name(), group.name());
                continue;
            }
            let r = Retraction::new(kind, &numerics);
            let g = r.tau(&xi)?;
            let back = r.tau_inv(&g)?;
            let e = lie::compose(&g, &r.tau(&xi.scaled(-1.0))?)?;
            let identity_err = (e.matrix() - lie::GroupElement::identity(group).matrix()).amax();
            let dti_gap = (r.dtau_inv_matrix(&xi)? - exp.dtau_inv_matrix(&xi)?).amax();
            println!(
                "  {:<9} |tau^-1(tau(xi)) - xi| = {:.1e}  |tau(xi)tau(-xi) - e| = {:.1e}  |dtau^-1 - dexp^-1| = {:.3}",
                kind.name(),
                (back.coords() - xi.coords()).amax(),
                identity_err,
                dti_gap,
            );
        }
    }

    let skew = Retraction::new(RetractionKind::SkewSqrt, &numerics);
    let far = AlgebraElement::from_slice(Group::SO3, &[0.0, 0.0, 0.995])?;
    match skew.tau(&far) {
        Ok(_) => println!("skew_sqrt accepted |xi| = 0.995"),
        Err(e) => println!("skew_sqrt at |xi| = 0.995: {e}"),
    }
    Ok(())
}
