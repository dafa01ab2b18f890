use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gevrey_bbm_cli::{commands, exit, report_error, RunConfig};

#[derive(Parser)]
#[command(
    name = "gevrey-bbm",
    version,
    about = "Analytic-radius verification campaigns for the BBM equation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (key = value with optional [sections]).
    #[arg(long)]
    config: PathBuf,
    /// Per-key overrides, e.g. `--alpha 3 --t_end 5`.
    #[arg(
        trailing_var_arg = true,
        allow_hyphen_values = true,
        value_name = "--KEY VALUE"
    )]
    overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate and write the norm time series.
    Simulate(Common),
    /// Check the hyperplane factorization and the trilinear bound constant.
    VerifyIdentities(Common),
    /// Energy defect over one local window and its σ-scaling.
    Conservation(Common),
    /// Track the analytic radius along a trajectory.
    Radius(Common),
    /// Radius schedule for a long horizon.
    Schedule(Common),
    /// Defect measurements over an (α, σ) grid.
    Sweep(Common),
    /// Measure the bilinear and defect constants.
    Calibrate(Common),
}

type Runner = fn(&RunConfig) -> Result<PathBuf, gevrey_bbm_cli::CliError>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Simulate(c) => (c, commands::cmd_simulate),
        Command::VerifyIdentities(c) => (c, commands::cmd_verify_identities),
        Command::Conservation(c) => (c, commands::cmd_conservation),
        Command::Radius(c) => (c, commands::cmd_radius),
        Command::Schedule(c) => (c, commands::cmd_schedule),
        Command::Sweep(c) => (c, commands::cmd_sweep),
        Command::Calibrate(c) => (c, commands::cmd_calibrate),
    };
    let outcome = RunConfig::load(&common.config, &common.overrides).and_then(|cfg| run(&cfg));
    match outcome {
        Ok(path) => {
            println!("{}", path.display());
            ExitCode::from(exit::OK as u8)
        }
        Err(e) => {
            report_error(&e);
            ExitCode::from(e.code as u8)
        }
    }
}
