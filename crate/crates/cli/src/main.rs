use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pdcshape_cli::commands::resolve_out_dir;
use pdcshape_cli::{
    cmd_g2, cmd_jsa, cmd_pipeline, cmd_scan_ck, cmd_scan_decorrelate, CliResult, Context, ExperimentConfig,
    G2Mode,
};

/// Environment variable naming the default output directory.
const OUT_ENV: &str = "PDCSHAPE_OUT";

#[derive(Debug, Parser)]
#[command(name = "pdcshape", version, about = "Programmable time-frequency entangled photon-pair source simulator")]
struct Cli {
    /// TOML experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory [default: output.directory, then $PDCSHAPE_OUT, then ./pdcshape-out].
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides grid.points.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Starting preset when no --config is given.
    #[arg(long, global = true, value_enum, default_value_t = Preset::Lab)]
    preset: Preset,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum Preset {
    Lab,
    Ideal,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build the joint spectral amplitude and its Schmidt decomposition.
    Jsa,
    /// Schmidt number of cosine-kernel pumps of order 0..=n_max.
    ScanCk {
        /// Highest order [default: scan.ck_max_order].
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Simulate a time-of-flight measurement and reconstruct the JSA.
    Pipeline,
    /// Scan pump FWHM and chirp correction for the decorrelated point.
    ScanDecorrelate,
    /// Predict or simulate the marginal g2.
    G2 {
        #[arg(value_enum)]
        mode: G2Mode,
    },
}

fn run(cli: Cli) -> CliResult<String> {
    let mut config = match &cli.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => match cli.preset {
            Preset::Lab => ExperimentConfig::lab(),
            Preset::Ideal => ExperimentConfig::ideal(),
        },
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(points) = cli.grid {
        config.grid.points = points;
    }
    let env = std::env::var(OUT_ENV).ok();
    let out = resolve_out_dir(cli.out.as_deref(), &config, env.as_deref());
    let ctx = Context::new(config, out)?;
    for w in &ctx.experiment.warnings {
        eprintln!("warning: {w}");
    }
    Ok(match cli.command {
        Command::Jsa => cmd_jsa(&ctx)?.to_string(),
        Command::ScanCk { n_max } => cmd_scan_ck(&ctx, n_max)?.to_string(),
        Command::Pipeline => cmd_pipeline(&ctx)?.to_string(),
        Command::ScanDecorrelate => cmd_scan_decorrelate(&ctx)?.to_string(),
        Command::G2 { mode } => cmd_g2(&ctx, mode)?.to_string(),
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            // a closed pipe (`| head`) is not an error
            let _ = std::io::stdout().lock().write_all(summary.as_bytes());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
