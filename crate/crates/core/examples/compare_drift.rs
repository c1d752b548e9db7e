//! Energy and momentum drift of several methods on one long free rigid
//! body run.
//!
//! ```bash
//! cargo run --release --example compare_drift
//! ```

use lievprk::run::{drift_report, ModelSpec, RunConfig};

fn main() -> lievprk::Result<()> {
    let mut cfg = RunConfig::new(ModelSpec::default_for("rigid_body").unwrap(), "sv");
    cfg.t_span = (0.0, 2000.0);
    cfg.steps = 20_000;
    println!("free rigid body, h = {}, T = {}", cfg.h(), cfg.t_span.1);
    println!("{:<12} {:>14} {:>14} {:>14} {:>12}", "method", "energy slope", "energy p2p", "momentum slope", "max dlp");
    for method in ["ve_backward", "sv", "vprk:gauss2", "rkmk:rk4", "rk4"] {
        let r = drift_report(&cfg, method)?;
        let dlp = r.max_dlp_residual.map_or("-".to_string(), |v| format!("{v:.1e}"));
        println!(
            "{:<12} {:>14.2e} {:>14.2e} {:>14.2e} {:>12}",
            r.method, r.energy.slope, r.energy.peak_to_peak, r.momentum_slope, dlp
        );
    }
    Ok(())
}
