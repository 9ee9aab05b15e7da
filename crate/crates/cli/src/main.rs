mod args;
mod cache;
mod commands;
mod render;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use radocolor_core::engine::SearchStats;

use crate::args::Cli;

/// Exit statuses. These are a stable contract for scripts.
pub mod status {
    pub const OK: u8 = 0;
    /// A negative answer: Sat, a monochromatic solution, an invalid proof.
    pub const NEGATIVE: u8 = 1;
    pub const USAGE: u8 = 64;
    pub const DATA: u8 = 65;
    pub const SOFTWARE: u8 = 70;
}

#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Data(String),
    Budget(SearchStats),
    Internal(String),
}

impl From<radocolor_core::Error> for Failure {
    fn from(e: radocolor_core::Error) -> Self {
        match e {
            radocolor_core::Error::BudgetExceeded(stats) => Failure::Budget(stats),
            other => Failure::Usage(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("RADOCOLOR_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                status::USAGE
            } else {
                status::OK
            });
        }
    };
    match commands::dispatch(&cli) {
        Ok(out) => {
            let mut stdout = std::io::stdout().lock();
            if stdout
                .write_all(out.text.as_bytes())
                .and_then(|_| stdout.flush())
                .is_err()
            {
                return ExitCode::from(status::SOFTWARE);
            }
            ExitCode::from(out.status)
        }
        Err(f) => {
            let code = match &f {
                Failure::Usage(m) => {
                    eprintln!("error: {m}");
                    status::USAGE
                }
                Failure::Data(m) => {
                    eprintln!("error: {m}");
                    status::DATA
                }
                Failure::Budget(stats) => {
                    let doc = serde_json::json!({ "error": "budget exceeded", "stats": stats });
                    eprintln!("{doc}");
                    status::SOFTWARE
                }
                Failure::Internal(m) => {
                    eprintln!("error: {m}");
                    status::SOFTWARE
                }
            };
            ExitCode::from(code)
        }
    }
}
