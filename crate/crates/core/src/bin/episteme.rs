use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use episteme::config::PRESET_NAMES;
use episteme::report::{self, RunManifest};
use episteme::{Error, Execution, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "episteme",
    version,
    about = "Simulate epistemic agents in a shifting commons"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its metrics as CSV.
    Run(RunArgs),
    /// Print the names of the built-in presets.
    ListPresets {
        /// Also print each preset's full JSON config.
        #[arg(long)]
        verbose: bool,
    },
    /// Check a config file without running it.
    Validate {
        #[arg(long)]
        config: PathBuf,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, conflicts_with = "config", required_unless_present = "config")]
    preset: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Also write seed_<n>.csv for every replication.
    #[arg(long)]
    per_seed: bool,
    /// Run replications one after another instead of on the thread pool.
    #[arg(long)]
    sequential: bool,
}

fn exit_for(err: &Error) -> ExitCode {
    eprintln!("error: {err}");
    if err.is_config_error() {
        ExitCode::from(1)
    } else {
        ExitCode::from(2)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::ListPresets { verbose } => {
            for name in PRESET_NAMES {
                println!("{name}");
                if verbose {
                    let cfg = ExperimentConfig::preset(name).expect("built-in preset");
                    print!("{}", cfg.to_json());
                }
            }
            ExitCode::SUCCESS
        }
        Command::Validate { config } => match ExperimentConfig::load(&config) {
            Ok(cfg) => {
                print!("{}", cfg.to_json());
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        },
        Command::Run(args) => {
            let config = match (&args.preset, &args.config) {
                (Some(name), _) => ExperimentConfig::preset(name),
                (None, Some(path)) => ExperimentConfig::load(path),
                (None, None) => unreachable!("clap requires one of --preset/--config"),
            };
            let config = match config {
                Ok(c) => c,
                Err(e) => return exit_for(&e),
            };
            let manifest = RunManifest {
                config,
                output_dir: args.out,
                emit_per_seed: args.per_seed,
                execution: if args.sequential {
                    Execution::Sequential
                } else {
                    Execution::Parallel
                },
            };
            match report::run_and_emit(&manifest) {
                Ok(series) => {
                    eprintln!(
                        "wrote {} ticks x {} seeds to {}",
                        series.mean.len(),
                        series.seeds.len(),
                        manifest.output_dir.display()
                    );
                    ExitCode::SUCCESS
                }
                Err(e) => exit_for(&e),
            }
        }
    }
}
