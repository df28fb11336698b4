use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sgf_core::experiment::{self, ExperimentSpec, KEYS, RECIPES};
use sgf_core::Error;

/// Semi-grant-free NOMA uplink: outage sweeps and figure recipes.
#[derive(Parser)]
#[command(name = "sgf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a recipe or a config file and write the CSV.
    Run {
        /// Built-in recipe id (see `list-recipes`).
        #[arg(long, conflicts_with = "config")]
        recipe: Option<String>,
        /// Config file with `key = value` lines.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Print the resolved config instead of running.
        #[arg(long)]
        dry_run: bool,
        /// Overrides as `--key value` pairs, e.g. `--out a.csv --trials 100000 --M 12`.
        #[arg(trailing_var_arg = true, allow_hyphen_values = true, value_name = "--KEY VALUE")]
        overrides: Vec<String>,
    },
    /// List the built-in recipes.
    ListRecipes,
    /// Check a config file (or a recipe) without running it.
    Validate {
        #[arg(long, required_unless_present = "recipe")]
        config: Option<PathBuf>,
        #[arg(long, conflicts_with = "config")]
        recipe: Option<String>,
    },
}

fn apply_overrides(spec: &mut ExperimentSpec, args: &[String]) -> Result<(), Error> {
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        let Some(flag) = arg.strip_prefix("--") else {
            return Err(Error::Config(format!("expected --key, got '{arg}'")));
        };
        let (key, value) = match flag.split_once('=') {
            Some((k, v)) => (k, v.to_string()),
            None => {
                let v = it.next().ok_or_else(|| Error::Config(format!("missing value for --{flag}")))?;
                (flag, v.clone())
            }
        };
        if !KEYS.contains(&key) {
            return Err(Error::Config(format!("unknown key '{key}'")));
        }
        spec.set(key, &value)?;
    }
    Ok(())
}

fn load(recipe: Option<&str>, config: Option<&PathBuf>) -> Result<ExperimentSpec, Error> {
    match (recipe, config) {
        (Some(id), _) => experiment::recipe(id),
        (None, Some(path)) => ExperimentSpec::from_file(path),
        (None, None) => Err(Error::Config("either --recipe or --config is required".into())),
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::SamplingCap { .. } => 3,
        Error::Config(_) | Error::Usage(_) | Error::Domain(_) | Error::Contract(_) => 2,
        _ => 1,
    }
}

fn execute(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ListRecipes => {
            for (id, desc) in RECIPES {
                println!("{id:<6} {desc}");
            }
        }
        Command::Validate { config, recipe } => {
            let spec = load(recipe.as_deref(), config.as_ref())?;
            spec.validate()?;
            println!("ok: {} ({} points x {} probes)", spec.scenario, spec.values.len(), spec.probes().len());
        }
        Command::Run { recipe, config, dry_run, overrides } => {
            let mut spec = load(recipe.as_deref(), config.as_ref())?;
            apply_overrides(&mut spec, &overrides)?;
            spec.validate()?;
            if dry_run {
                print!("{}", spec.to_config_string());
                return Ok(());
            }
            let report = experiment::run(&spec)?;
            println!("wrote {} ({} rows)", report.csv.display(), report.rows.len());
            if let Some(svg) = report.svg {
                println!("wrote {}", svg.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
