//! Runs a TOML configuration the same way `lievprk simulate` does and
//! prints the first rows of the CSV it writes.
//!
//! ```bash
//! cargo run --release --example config_run -- crates/core/examples/configs/heavy_top.toml
//! ```

use std::path::PathBuf;

use lievprk::run::{cmd_simulate, RunConfig};

fn main() -> lievprk::Result<()> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs/rigid_body.toml"));
    let cfg = RunConfig::from_file(&path)?;
    println!("{} with {} on {}, h = {}", path.display(), cfg.method, cfg.model.id(), cfg.h());
    let out = std::env::temp_dir().join("lievprk_config_run.csv");
    let rows = cmd_simulate(&cfg, Some(&out), false)?;
    println!("wrote {rows} rows to {}", out.display());
    let text = std::fs::read_to_string(&out).expect("CSV was just written");
    for line in text.lines().filter(|l| !l.starts_with('#')).take(3) {
        println!("{}", &line[..line.len().min(150)]);
    }
    Ok(())
}
