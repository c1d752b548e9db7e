//! Poincaré section of the underwater vehicle on SE(3) with ve_backward and
//! rk4, reporting the extent of each point cloud.
//!
//! ```bash
//! cargo run --release --example vehicle_poincare [T]
//! ```

use lievprk::diagnostics::{cloud_extent, extent_difference, observable_names, SectionSpec};
use lievprk::run::{section_points, ModelSpec, RunConfig};

fn main() -> lievprk::Result<()> {
    let t_end: f64 = std::env::args().nth(1).map_or(1000.0, |s| s.parse().expect("T must be a number"));
    let model = ModelSpec::default_for("underwater_vehicle").unwrap();
    let spec = SectionSpec::default();
    let names = observable_names(model.group());
    let shown: Vec<usize> = ["xi_1", "xi_2"].iter().map(|n| names.iter().position(|m| m == n).unwrap()).collect();
    let mut extents = Vec::new();
    for method in ["ve_backward", "rk4"] {
        let mut cfg = RunConfig::new(model.clone(), method);
        cfg.initial_xi = vec![0.5, 0.8, -0.3, 0.2, 0.1, 0.3];
        cfg.t_span = (0.0, t_end);
        cfg.steps = (t_end / 0.025).round() as usize;
        let points = section_points(&cfg, &spec)?;
        let ext = cloud_extent(&points, &shown);
        println!("{method:<12} {} crossings of {spec}, xi_1 in [{:+.3}, {:+.3}], xi_2 in [{:+.3}, {:+.3}]", points.len(), ext[0].0, ext[0].1, ext[1].0, ext[1].1);
        extents.push(ext);
    }
    println!("extent difference {:.1}%", 100.0 * extent_difference(&extents[0], &extents[1]));
    Ok(())
}
