use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use flowcat_cli::{run, CliError, Command, JobConfig};

#[derive(Parser)]
#[command(name = "flowcat", version, about = "Verify and compute with flow-category models")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
    /// Accepted distance of quadrature values from ±1.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Log every assembled entry with its sign exponent to stderr.
    #[arg(long, global = true)]
    verbose_signs: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Check d² = 0 and any morphism or homotopy sections.
    Verify { input: PathBuf },
    /// Betti numbers of the assembled complex.
    Cohomology { input: PathBuf },
    /// Spectral sequence pages of the level filtration.
    Ss {
        input: PathBuf,
        #[arg(long)]
        page: Option<i64>,
    },
    /// Chain map checks for the morphism section.
    Morphism { input: PathBuf },
    /// Gysin sequence of a sphere bundle.
    Gysin {
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        k: i64,
        #[arg(long)]
        trivial: bool,
    },
    /// Perturbation lemma on a complex file, or on the seeded family.
    Hpl { input: Option<PathBuf> },
    /// Build a model with the Morse engine and run the pipeline on it.
    Demo { name: String },
}

fn config(cli: Cli) -> Result<JobConfig, CliError> {
    let seed = match std::env::var("FLOWCAT_SEED") {
        Ok(s) => s.trim().parse().map_err(|_| CliError::Usage(format!("FLOWCAT_SEED is not an integer: {s:?}")))?,
        Err(_) => 0,
    };
    let (command, input) = match &cli.command {
        Cmd::Verify { input } => (Command::Verify, Some(input)),
        Cmd::Cohomology { input } => (Command::Cohomology, Some(input)),
        Cmd::Ss { input, .. } => (Command::Ss, Some(input)),
        Cmd::Morphism { input } => (Command::Morphism, Some(input)),
        Cmd::Gysin { input, .. } => (Command::Gysin, Some(input)),
        Cmd::Hpl { input } => (Command::Hpl, input.as_ref()),
        Cmd::Demo { .. } => (Command::Demo, None),
    };
    let mut cfg = JobConfig::new(command);
    cfg.input = input.cloned();
    cfg.tol = cli.tol;
    cfg.out = cli.out;
    cfg.verbose_signs = cli.verbose_signs;
    cfg.seed = seed;
    match cli.command {
        Cmd::Ss { page, .. } => cfg.page = page,
        Cmd::Gysin { k, trivial, .. } => {
            cfg.k = k;
            cfg.trivial = trivial;
        }
        Cmd::Demo { name } => cfg.demo = Some(name),
        _ => {}
    }
    Ok(cfg)
}

fn write(path: &PathBuf, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io { path: path.display().to_string(), reason: e.to_string() })
}

fn main_inner() -> Result<i32, CliError> {
    let cfg = config(Cli::parse())?;
    let outcome = run(&cfg)?;
    for line in &outcome.log {
        eprintln!("{line}");
    }
    match &cfg.out {
        Some(path) => {
            write(path, &outcome.report)?;
            if let Some(model) = &outcome.model {
                write(&path.with_extension("model.json"), model)?;
            }
        }
        None => print!("{}", outcome.report),
    }
    Ok(outcome.exit_code())
}

fn main() -> ExitCode {
    match main_inner() {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("flowcat: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
