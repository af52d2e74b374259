use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand as ClapSubcommand};

use nffbeam::cli_io::{parse_config, run_scenario, RunSummary, Subcommand};
use nffbeam::Error;

/// Worker cap for field evaluation; 0 or unset means one per core.
const THREADS_ENV: &str = "NFFBEAM_THREADS";

#[derive(Parser, Debug)]
#[command(name = "nffbeam", version, about = "Near-field focused phased-array beamforming simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ClapSubcommand, Debug)]
enum Command {
    /// Synthesize per-element excitation phases.
    Synth(RunArgs),
    /// Evaluate field maps for each configured method.
    Field(RunArgs),
    /// Compare time-reversal, ray-optic and far-field focusing.
    Compare(RunArgs),
    /// Time-reversal focus for every configured target.
    Steer(RunArgs),
}

#[derive(clap::Args, Debug)]
struct RunArgs {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `output.directory`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    quiet: bool,
}

fn threads_from_env() -> Result<usize, Error> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(0),
        Ok(s) => s.trim().parse::<usize>().map_err(|_| {
            Error::InvalidInput(format!("{THREADS_ENV} must be a non-negative integer, got {s:?}"))
        }),
    }
}

fn execute(cmd: Subcommand, args: &RunArgs) -> Result<RunSummary, Error> {
    let threads = threads_from_env()?;
    let text = std::fs::read_to_string(&args.config).map_err(|e| Error::Io {
        path: args.config.clone(),
        source: e,
    })?;
    let config = parse_config(&text)?;
    let out_dir = args.out.clone().unwrap_or_else(|| config.output.directory.clone());

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidInput(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_scenario(&config, cmd, &out_dir))
}

fn print_summary(s: &RunSummary) {
    println!(
        "{:?}: layout {} ({} files, {:.3} s)",
        s.subcommand,
        s.layout_hash,
        s.files.len(),
        s.elapsed_s
    );
    for c in &s.comparisons {
        println!(
            "  target {}: tr==ray-optic {}, tr peak not farther {}, tr peak not weaker {}",
            c.target, c.checks.tr_matches_ray_optic, c.checks.tr_peak_not_farther, c.checks.tr_peak_not_weaker
        );
    }
    for r in &s.reports {
        println!(
            "  target {} -> peak {} |E| {:.6e}, lateral error {:.4} m",
            r.target, r.peak_position, r.peak_magnitude, r.lateral_peak_error
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Command::Synth(a) => (Subcommand::Synth, a),
        Command::Field(a) => (Subcommand::Field, a),
        Command::Compare(a) => (Subcommand::Compare, a),
        Command::Steer(a) => (Subcommand::Steer, a),
    };
    match execute(cmd, args) {
        Ok(summary) => {
            if !args.quiet {
                print_summary(&summary);
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            let record = serde_json::json!({
                "error": {
                    "class": e.class(),
                    "exit_code": e.exit_code(),
                    "message": e.to_string(),
                }
            });
            eprintln!("{record}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
