mod args;
mod commands;
mod settings;

use std::process::ExitCode;

use clap::Parser;
use sepvol_core::Error;

use args::{Cli, Command};
use commands::Outcome;

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Usage(_) | Error::Domain(_) => 2,
        Error::Input(_) => 3,
        Error::Numerical(_) | Error::Internal(_) => 4,
        Error::Io(_) | Error::Json(_) => 1,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::EstimateF(a) => commands::estimate_f(a),
        Command::Integrate(a) => commands::integrate(a),
        Command::Jacobian(a) => commands::jacobian(a),
        Command::Validate(a) => commands::validate(a),
    };
    match result {
        Ok(Outcome::Success) => ExitCode::SUCCESS,
        Ok(Outcome::ValidationFailed) => {
            log::error!("validation failed");
            ExitCode::from(5)
        }
        Ok(Outcome::Interrupted) => ExitCode::from(130),
        Err(e) => {
            log::error!("{e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
