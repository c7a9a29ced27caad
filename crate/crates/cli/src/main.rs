use std::path::{Path, PathBuf};
use std::process::ExitCode;

use allen_cahn::experiment::{
    presets, read_report, run_connect, run_sweep, run_verify, write_connect, write_sweep, ExperimentConfig,
    Outcome, VerifyOptions,
};
use allen_cahn::{Error, Result};
use clap::{Parser, Subcommand, ValueEnum};

/// Allen-Cahn partition lab: connections, eps-sweeps and invariant checks.
///
/// Exit status: 0 all checks pass, 1 a check failed, 2 bad config,
/// 3 a solve did not converge.
#[derive(Parser, Debug)]
#[command(name = "aclab", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// TOML config; layered over --preset when both are given.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Named scenario: triod, figure3a, figure3b, remark5, mass-disk, double-well.
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,

    /// Output directory; defaults to `output.dir` or `out/<name>`.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Seed for random initial data and the verify suite.
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve the 1D connections and write profiles plus the sigma table.
    Connect,
    /// Run the eps-sweep, measure the partition and write the report.
    Sweep,
    /// Run the invariant suite and print a table.
    Verify {
        #[arg(long, hide = true)]
        inject_fault: Option<Fault>,
    },
    /// Print a saved report and exit with its recorded status.
    Report,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Fault {
    Gradient,
}

fn load(cli: &Cli, fallback: Option<&str>) -> Result<ExperimentConfig> {
    let text = match &cli.config {
        Some(path) => Some(
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?,
        ),
        None => None,
    };
    let preset = cli.preset.as_deref().or(if text.is_none() { fallback } else { None });
    let mut cfg = presets::load(preset, text.as_deref())?;
    if let Some(seed) = cli.seed {
        cfg.set_seed(seed);
    }
    Ok(cfg)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    if let Some(d) = &cli.out {
        return d.clone();
    }
    if let Some(d) = cfg.and_then(|c| c.output.dir.as_ref()) {
        return PathBuf::from(d);
    }
    let name = cfg.and_then(|c| c.name.clone()).or_else(|| cli.preset.clone()).unwrap_or_else(|| "experiment".into());
    Path::new("out").join(name)
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Connect => {
            let cfg = load(cli, Some("double-well"))?;
            let dir = out_dir(cli, Some(&cfg));
            let conn = run_connect(&cfg)?;
            write_connect(&conn, &dir)?;
            for s in conn.summaries() {
                println!(
                    "sigma({},{}) = {:.6}  equipartition defect {:.2e}",
                    s.i + 1,
                    s.j + 1,
                    s.action,
                    s.defect
                );
            }
            println!("wrote {}", dir.display());
            Ok(Outcome::Pass)
        }
        Command::Sweep => {
            let cfg = load(cli, None)?;
            let dir = out_dir(cli, Some(&cfg));
            let mut sweep = run_sweep(&cfg)?;
            write_sweep(&mut sweep, &dir)?;
            print!("{}", sweep.report.summary());
            println!("wrote {}", dir.display());
            Ok(sweep.report.outcome)
        }
        Command::Verify { inject_fault } => {
            let cfg = load(cli, Some("double-well"))?;
            let opts = VerifyOptions {
                seed: cli.seed.unwrap_or(0),
                corrupt_gradient: matches!(inject_fault, Some(Fault::Gradient)),
            };
            let report = run_verify(&cfg, opts)?;
            print!("{}", report.table());
            Ok(report.outcome)
        }
        Command::Report => {
            let cfg = if cli.config.is_some() || cli.preset.is_some() { Some(load(cli, None)?) } else { None };
            let dir = out_dir(cli, cfg.as_ref());
            let report = read_report(&dir)?;
            print!("{}", report.summary());
            for f in &report.figures {
                if !dir.join(f).exists() {
                    return Err(Error::Config(format!("figure {f} listed in the report is missing")));
                }
            }
            Ok(report.outcome)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = run(&cli).unwrap_or_else(|e| {
        eprintln!("error: {e}");
        Outcome::from_error(&e)
    });
    ExitCode::from(outcome.exit_code() as u8)
}
