mod args;
mod commands;
mod output;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use qchaos::combinatorics::MAX_POINTS;
use qchaos::qalgebra::parse_rational;
use qchaos::Rational;

use crate::args::{Cli, Command, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Core(#[from] qchaos::Error),

    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(qchaos::Error::ResourceCap { .. }) => 3,
            CliError::Core(qchaos::Error::InvariantViolation(_)) => 1,
            _ => 2,
        }
    }
}

pub struct Session {
    /// `None` keeps results symbolic in `q`.
    pub q: Option<Rational>,
    pub format: Format,
    pub seed: u64,
    pub max_points: usize,
}

impl Session {
    fn from_args(args: &args::Session) -> Result<Self, CliError> {
        let q = match args.q.trim() {
            "symbolic" => None,
            text => Some(parse_rational(text).map_err(|e| CliError::Usage(format!("--q: {e}")))?),
        };
        if args.max_points > MAX_POINTS {
            return Err(CliError::Usage(format!(
                "--max-points cannot exceed {MAX_POINTS}"
            )));
        }
        Ok(Session {
            q,
            format: args.format,
            seed: args.seed,
            max_points: args.max_points,
        })
    }
}

fn run(cli: &Cli) -> Result<commands::Outcome, CliError> {
    let session = Session::from_args(&cli.session)?;
    let outcome = match &cli.command {
        Command::Pairings(a) => commands::pairings(&session, a)?,
        Command::Moments(a) => commands::moments(&session, a)?,
        Command::Counterexample => commands::counterexample()?,
        Command::FmtDiagnose(a) => commands::fmt(&session, a)?,
        Command::TransferCheck(a) => commands::transfer(&session, a)?,
        Command::BreuerMajor(a) => commands::breuer_major(&session, a)?,
        Command::Density(a) => commands::density(&session, a)?,
    };
    let text = outcome.output.render(session.format)?;
    let mut stdout = std::io::stdout().lock();
    let _ = stdout
        .write_all(text.as_bytes())
        .and_then(|()| stdout.flush());
    Ok(outcome)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(outcome) => match outcome.mismatch {
            None => ExitCode::SUCCESS,
            Some(msg) => {
                eprintln!("mismatch: {msg}");
                ExitCode::from(1)
            }
        },
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
