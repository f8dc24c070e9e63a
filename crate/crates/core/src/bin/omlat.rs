use clap::{Parser, Subcommand};
use omlat::config::RunConfig;
use omlat::runner::{
    run_edge_states, run_kitaev, run_spectrum, run_sweep, run_validate, run_walk, Artifact,
    OutputFormat, RunnerError,
};
use std::path::PathBuf;

/// Frequency-modulated optomechanical lattice simulator.
#[derive(Parser)]
#[command(name = "omlat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Config file: flat `key = value` text or JSON (a previously emitted
    /// summary works too).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (default: $OMLAT_OUT_DIR or the current directory).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Table format.
    #[arg(long, default_value = "csv")]
    format: OutputFormat,
    /// Worker threads for sweep points.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Eigenvalue table with IPR and in-gap side labels.
    Spectrum(CommonArgs),
    /// In-gap localized states with profiles and localization lengths.
    EdgeStates(CommonArgs),
    /// Single-excitation quantum walk heatmap and suppression metric.
    Walk(CommonArgs),
    /// Fermionic Kitaev reference spectrum (BdG).
    Kitaev(CommonArgs),
    /// Full time-dependent integration vs the effective model over a nu list.
    Validate(CommonArgs),
    /// Spectrum blocks over a one-parameter sweep axis.
    Sweep(CommonArgs),
}

fn out_dir(args: &CommonArgs) -> PathBuf {
    args.out
        .clone()
        .or_else(|| std::env::var_os("OMLAT_OUT_DIR").map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

fn load_config(args: &CommonArgs) -> Result<RunConfig, RunnerError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", args.config.display())))?;
    RunConfig::parse(&text).map_err(RunnerError::from)
}

fn write_artifacts(dir: &PathBuf, artifacts: &[Artifact]) -> Result<(), RunnerError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| RunnerError::Config(format!("{}: {e}", dir.display())))?;
    for a in artifacts {
        let path = dir.join(&a.filename);
        std::fs::write(&path, &a.contents)
            .map_err(|e| RunnerError::Config(format!("{}: {e}", path.display())))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), RunnerError> {
    let (args, runner): (&CommonArgs, _) = match &cli.command {
        Command::Spectrum(a) => (a, run_spectrum(&load_config(a)?, a.format)),
        Command::EdgeStates(a) => (a, run_edge_states(&load_config(a)?, a.format)),
        Command::Walk(a) => (a, run_walk(&load_config(a)?, a.format)),
        Command::Kitaev(a) => (a, run_kitaev(&load_config(a)?, a.format)),
        Command::Validate(a) => (a, run_validate(&load_config(a)?, a.format)),
        Command::Sweep(a) => {
            let cfg = load_config(a)?;
            (a, run_sweep(&cfg, a.format, a.jobs))
        }
    };
    write_artifacts(&out_dir(args), &runner?)
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
