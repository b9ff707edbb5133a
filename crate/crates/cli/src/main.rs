//! `subdiff-lab` — experiment runner for the subdifferential uniform-law
//! laboratory. Parses a subcommand into an [`ExperimentConfig`], runs it,
//! and writes the report to stdout or `--out`.

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subdiff_cli::{render, run, Experiment, ExperimentConfig, Format, RunError};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Csv,
}

impl From<OutFormat> for Format {
    fn from(f: OutFormat) -> Self {
        match f {
            OutFormat::Json => Format::Json,
            OutFormat::Csv => Format::Csv,
        }
    }
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum, default_value = "json")]
    format: OutFormat,
    /// Write the report to this file instead of stdout.
    #[arg(long)]
    out: Option<std::path::PathBuf>,
}

#[derive(Debug, Args)]
struct GapArgs {
    /// Sample size nu (number of scenario draws per trial).
    #[arg(long)]
    nu: u32,
    /// Number of independent trials.
    #[arg(long, default_value_t = 100)]
    trials: u64,
    /// Master seed; trial t uses the derived seed split(seed, t).
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct UllnArgs {
    /// Comma-separated list of sample sizes, e.g. 64,256,1024.
    #[arg(long, value_delimiter = ',')]
    nu_list: Vec<u64>,
    /// Number of master-seed repetitions per sample size.
    #[arg(long, default_value_t = 20)]
    trials: u64,
    /// Master seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Gap experiment for the random-Lipschitz 1-D family.
    GapLip(GapArgs),
    /// Gap experiment for the random-convex 2-D family.
    GapCvx(GapArgs),
    /// Convergence of the empirical subdifferential curve (median example).
    #[command(name = "ulln-1d")]
    Ulln1d(UllnArgs),
    /// Convergence of empirical epsilon-subdifferentials for a discrete
    /// hinge mixture.
    EpsUlln {
        #[command(flatten)]
        ulln: UllnArgs,
        /// Smoothing parameter epsilon (must be positive).
        #[arg(long)]
        epsilon: f64,
        /// Override the scenario atoms, as "center:prob,center:prob,...".
        #[arg(long)]
        atoms: Option<String>,
    },
    /// Empirical failure rate of the joint-bit event vs its bound.
    GadgetStats(GapArgs),
    /// Exhibit n dyadic witnesses whose binary digits realize all 2^n
    /// sign patterns.
    Shatter {
        /// Number of witnesses (dimension of the shattered set).
        #[arg(long)]
        n: u32,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Debug, Parser)]
#[command(name = "subdiff-lab", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn to_config(cmd: &Command) -> (ExperimentConfig, Format, Option<std::path::PathBuf>) {
    match cmd {
        Command::GapLip(a) | Command::GapCvx(a) | Command::GadgetStats(a) => {
            let experiment = match cmd {
                Command::GapLip(_) => Experiment::GapLip,
                Command::GapCvx(_) => Experiment::GapCvx,
                _ => Experiment::GadgetStats,
            };
            (
                ExperimentConfig {
                    experiment,
                    nu: Some(a.nu),
                    nu_list: None,
                    trials: Some(a.trials),
                    seed: a.seed,
                    epsilon: None,
                    n: None,
                    atoms: None,
                },
                a.output.format.into(),
                a.output.out.clone(),
            )
        }
        Command::Ulln1d(a) => (
            ExperimentConfig {
                experiment: Experiment::Ulln1d,
                nu: None,
                nu_list: Some(a.nu_list.clone()),
                trials: Some(a.trials),
                seed: a.seed,
                epsilon: None,
                n: None,
                atoms: None,
            },
            a.output.format.into(),
            a.output.out.clone(),
        ),
        Command::EpsUlln { ulln, epsilon, atoms } => (
            ExperimentConfig {
                experiment: Experiment::EpsUlln,
                nu: None,
                nu_list: Some(ulln.nu_list.clone()),
                trials: Some(ulln.trials),
                seed: ulln.seed,
                epsilon: Some(*epsilon),
                n: None,
                atoms: atoms.clone(),
            },
            ulln.output.format.into(),
            ulln.output.out.clone(),
        ),
        Command::Shatter { n, output } => (
            ExperimentConfig {
                experiment: Experiment::Shatter,
                nu: None,
                nu_list: None,
                trials: None,
                seed: 0,
                epsilon: None,
                n: Some(*n),
                atoms: None,
            },
            output.format.into(),
            output.out.clone(),
        ),
    }
}

fn execute(cli: &Cli) -> Result<(), RunError> {
    let (config, format, out) = to_config(&cli.command);
    let report = run(&config)?;
    let rendered = render(&report, format)?;
    match out {
        Some(path) => std::fs::write(&path, rendered)
            .map_err(|e| RunError::Io(format!("{}: {e}", path.display())))?,
        None => println!("{rendered}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
