use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use isac_lab::{load_config, presets, run_experiment, CliError, RunConfig, VERSION};

#[derive(Parser)]
#[command(name = "isac-lab", version = VERSION, about = "Run ISAC sensing and V2I experiments from JSON configs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a config file or a named preset.
    Run {
        /// Path to a JSON config, or the name of a built-in preset.
        config: String,
        /// Also write SVG plots.
        #[arg(long)]
        plot: bool,
        /// Output directory override.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Seed override.
        #[arg(long)]
        seed: Option<u64>,
        /// Trial count override for Monte Carlo experiments.
        #[arg(long)]
        trials: Option<usize>,
    },
    /// Built-in presets.
    Presets {
        #[command(subcommand)]
        action: PresetAction,
    },
}

#[derive(Subcommand)]
enum PresetAction {
    /// List preset names and descriptions.
    List,
    /// Print a preset's JSON.
    Show { name: String },
}

fn load(source: &str) -> Result<RunConfig, CliError> {
    let path = PathBuf::from(source);
    if path.exists() {
        load_config(&path)
    } else if presets::preset_text(source).is_some() {
        presets::preset(source)
    } else {
        Err(CliError::Config {
            field: None,
            message: format!("`{source}` is neither a readable file nor a preset name"),
        })
    }
}

fn execute(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run {
            config,
            plot,
            out,
            seed,
            trials,
        } => {
            let mut cfg = load(&config)?;
            cfg.apply_overrides(seed, trials, out.as_deref());
            cfg.validate()?;
            log::info!("running {} into {}", cfg.experiment.as_str(), cfg.output_dir.display());
            let summary = run_experiment(&cfg, plot)?;
            for f in &summary.files {
                println!("{}", summary.output_dir.join(f).display());
            }
        }
        Command::Presets { action: PresetAction::List } => {
            for name in presets::preset_names() {
                let description = presets::preset(name)?.description.unwrap_or_default();
                println!("{name}\t{description}");
            }
        }
        Command::Presets {
            action: PresetAction::Show { name },
        } => match presets::preset_text(&name) {
            Some(text) => print!("{text}"),
            None => return Err(CliError::Config { field: None, message: format!("unknown preset `{name}`") }),
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
