use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use pfp_core::io::{read_config, read_responses_csv, read_scenario_set, read_session};
use pfp_core::{
    fit_prior, recovery_experiment, Error, FitOptions, NormalPrior, Round, ScenarioSet, Session,
    SyntheticSpec,
};

/// Fit Normal priors to elicited posterior means and report on them.
#[derive(Debug, Parser)]
#[command(name = "pfp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a prior to one expert's responses.
    Fit {
        /// Scenario-set JSON.
        #[arg(long)]
        scenarios: PathBuf,
        /// Data-model config JSON.
        #[arg(long)]
        config: PathBuf,
        /// Response CSV with columns scenario_id, theta_tilde_m.
        #[arg(long)]
        responses: PathBuf,
        /// Also write the JSON here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Show the feedback report for a stored round.
    Feedback {
        /// Session JSON file, or a session id under $PFP_DATA_DIR.
        #[arg(long)]
        session: PathBuf,
        #[arg(long)]
        expert: String,
        #[arg(long)]
        round: Round,
        #[arg(long, value_enum, default_value_t = FeedbackFormat::Json)]
        format: FeedbackFormat,
        /// Write the elicited-vs-best-fit scatter data as CSV.
        #[arg(long)]
        plot_csv: Option<PathBuf>,
    },
    /// Recover known priors from synthetic experts.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        true_mu0: f64,
        #[arg(long, allow_negative_numbers = true)]
        true_sigma0: f64,
        #[arg(long, allow_negative_numbers = true)]
        noise_sd: f64,
        #[arg(long)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        scenarios: PathBuf,
        #[arg(long)]
        config: PathBuf,
        /// Write per-replication rows as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Cohort table, ascending by initial RMSD.
    Summary {
        /// Session JSON file, or a session id under $PFP_DATA_DIR.
        #[arg(long)]
        session: PathBuf,
        #[arg(long, value_enum, default_value_t = SummaryFormat::Json)]
        format: SummaryFormat,
    },
    /// Print the built-in case-study scenario set.
    Scenarios,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FeedbackFormat {
    Json,
    Text,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SummaryFormat {
    Json,
    Csv,
}

/// Exit status 2 for bad input, 1 for anything else.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        Failure::input(err)
    }
}

impl Failure {
    fn input(err: impl std::fmt::Display) -> Self {
        Failure {
            code: 2,
            message: err.to_string(),
        }
    }

    fn internal(err: impl std::fmt::Display) -> Self {
        Failure {
            code: 1,
            message: err.to_string(),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn input_file(path: &Path) -> CliResult<()> {
    if path.is_file() {
        Ok(())
    } else {
        Err(Failure::input(format!("cannot read {}", path.display())))
    }
}

/// Every input read is a validation concern: a missing or unreadable file
/// exits 2 like a malformed one.
fn load<T>(path: &Path, read: impl FnOnce(&Path) -> pfp_core::Result<T>) -> CliResult<T> {
    input_file(path)?;
    read(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn session_path(arg: &Path) -> PathBuf {
    if arg.exists() {
        return arg.to_path_buf();
    }
    match std::env::var_os("PFP_DATA_DIR") {
        Some(dir) if arg.components().count() == 1 => {
            let mut path = PathBuf::from(dir).join(arg);
            path.set_extension("json");
            path
        }
        _ => arg.to_path_buf(),
    }
}

fn load_session(arg: &Path) -> CliResult<Session> {
    load(&session_path(arg), |p| read_session(p))
}

fn emit(text: &str) -> CliResult {
    let mut stdout = std::io::stdout().lock();
    stdout
        .write_all(text.as_bytes())
        .and_then(|_| stdout.flush())
        .map_err(Failure::internal)
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| Failure::internal(format!("{}: {e}", path.display())))
}

fn json<T: serde::Serialize>(value: &T) -> CliResult<String> {
    pfp_core::to_json_pretty(value).map_err(Failure::internal)
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Fit {
            scenarios,
            config,
            responses,
            out,
        } => {
            let set = load(&scenarios, |p| read_scenario_set(p))?;
            let config = load(&config, |p| read_config(p))?;
            let responses = load(&responses, |p| read_responses_csv(p, "cli", Round::Initial))?;
            let fit = fit_prior(&responses, &set, &config, &FitOptions::default())?;
            let text = json(&fit)?;
            if let Some(out) = out {
                write_file(&out, &text)?;
            }
            emit(&text)
        }
        Command::Feedback {
            session,
            expert,
            round,
            format,
            plot_csv,
        } => {
            let session = load_session(&session)?;
            let report = session.feedback(&expert, round)?;
            if let Some(path) = &plot_csv {
                write_file(path, &report.plot_points_csv()?)?;
            }
            match format {
                FeedbackFormat::Json => emit(&json(&report)?),
                FeedbackFormat::Text => {
                    let shown = plot_csv.as_ref().map(|p| p.display().to_string());
                    emit(&report.render_text(shown.as_deref()))
                }
            }
        }
        Command::Simulate {
            true_mu0,
            true_sigma0,
            noise_sd,
            reps,
            seed,
            scenarios,
            config,
            csv,
        } => {
            let set = load(&scenarios, |p| read_scenario_set(p))?;
            let config = load(&config, |p| read_config(p))?;
            let spec = SyntheticSpec {
                true_prior: NormalPrior::new(true_mu0, true_sigma0)?,
                noise_sd,
                seed,
            };
            let stats = recovery_experiment(&spec, &set, &config, reps, &FitOptions::default())?;
            if let Some(path) = csv {
                write_file(&path, &stats.replicates_csv()?)?;
            }
            emit(&json(&stats)?)
        }
        Command::Summary { session, format } => {
            let summary = load_session(&session)?.summary()?;
            match format {
                SummaryFormat::Json => emit(&json(&summary)?),
                SummaryFormat::Csv => emit(&summary.to_csv()?),
            }
        }
        Command::Scenarios => emit(&json(&ScenarioSet::case_study_default())?),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
