use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use lievprk::retraction::BERNOULLI;
use lievprk::run::{self, RunConfig};
use lievprk::{selftest, Error};

/// Variational Lie-group integrators: simulations, convergence studies,
/// Poincaré sections and method comparisons.
#[derive(Parser)]
#[command(name = "lievprk", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Opts,
}

#[derive(Args)]
struct Opts {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output CSV path, overriding `output` in the config.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Comma-separated method ids for converge and compare.
    #[arg(long, global = true, value_delimiter = ',')]
    methods: Vec<String>,
    /// Comma-separated step sizes for converge.
    #[arg(long = "h-list", global = true, value_delimiter = ',')]
    h_list: Vec<f64>,
    /// Replace the configured initial state by a seeded random one.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Add per-stage VPRK columns to the trajectory CSV.
    #[arg(long, global = true)]
    debug_stages: bool,
    #[arg(long, global = true, hide = true)]
    corrupt_bernoulli: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write the trajectory.
    Simulate,
    /// Measure the convergence order over --h-list.
    Converge,
    /// Write the Poincaré section of the configured run.
    Poincare,
    /// Compare energy and momentum drift of --methods.
    Compare,
    /// Run the invariant suite.
    Selftest,
}

fn load(opts: &Opts) -> Result<RunConfig, Error> {
    let path = opts
        .config
        .as_deref()
        .ok_or_else(|| Error::InvalidConfig(vec!["--config <path> is required".into()]))?;
    let mut cfg = RunConfig::from_file(path)?;
    if let Some(seed) = opts.seed {
        cfg.randomize_initial(seed);
    }
    Ok(cfg)
}

fn execute(cmd: &Command, opts: &Opts) -> Result<(), Error> {
    let out = opts.output.as_deref();
    match cmd {
        Command::Simulate => {
            let rows = run::cmd_simulate(&load(opts)?, out, opts.debug_stages)?;
            println!("wrote {rows} rows");
        }
        Command::Converge => {
            let cfg = load(opts)?;
            for (m, s) in run::cmd_converge(&cfg, &opts.methods, &opts.h_list, out)? {
                println!("{m}: slope {:.4} (stderr {:.1e})", s.slope, s.slope_stderr);
            }
        }
        Command::Poincare => {
            let n = run::cmd_poincare(&load(opts)?, out)?;
            println!("wrote {n} section points");
        }
        Command::Compare => {
            let cfg = load(opts)?;
            for r in run::cmd_compare(&cfg, &opts.methods, out)? {
                println!(
                    "{}: energy slope {:.3e}, excursion {:.3e}, momentum slope {:.3e}",
                    r.method, r.energy.slope, r.energy.max_deviation, r.momentum_slope
                );
            }
        }
        Command::Selftest => unreachable!(),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Command::Selftest = cli.command {
        let table = if cli.opts.corrupt_bernoulli { selftest::corrupted_bernoulli() } else { BERNOULLI };
        let checks = selftest::run(&table, |c| println!("{c}"));
        let failed: Vec<_> = checks.iter().filter(|c| !c.passed).map(|c| c.name).collect();
        if failed.is_empty() {
            println!("selftest passed");
            return ExitCode::SUCCESS;
        }
        eprintln!("selftest failed: {}", failed.join(", "));
        return ExitCode::from(1);
    }
    match execute(&cli.command, &cli.opts) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            match &e {
                Error::InvalidConfig(msgs) => {
                    eprintln!("invalid configuration:");
                    for m in msgs {
                        eprintln!("  {m}");
                    }
                }
                other => eprintln!("error: {other}"),
            }
            ExitCode::from(run::exit_code(&e) as u8)
        }
    }
}
