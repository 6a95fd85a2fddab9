use std::fmt::Display;
use std::process::ExitCode;

use tcoal_core::cannings::CanningsError;
use tcoal_core::harness::HarnessError;
use tcoal_core::limit::LimitError;
use tcoal_core::profiles::ScheduleError;

/// Exit status classes of the command-line tool.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Config = 2,
    Runtime = 3,
    ComparisonFailed = 4,
}

#[derive(Debug, thiserror::Error)]
#[error("{message}")]
pub struct CliError {
    pub status: Status,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Display) -> Self {
        CliError {
            status: Status::Config,
            message: message.to_string(),
        }
    }

    pub fn runtime(message: impl Display) -> Self {
        CliError {
            status: Status::Runtime,
            message: message.to_string(),
        }
    }

    pub fn exit_code(&self) -> ExitCode {
        ExitCode::from(self.status as u8)
    }
}

fn cannings_status(e: &CanningsError) -> Status {
    match e {
        CanningsError::Cap { .. }
        | CanningsError::OutOfRange { .. }
        | CanningsError::State(_)
        | CanningsError::Degenerate(_) => Status::Runtime,
        _ => Status::Config,
    }
}

fn schedule_status(e: &ScheduleError) -> Status {
    match e {
        ScheduleError::CapViolation { .. } | ScheduleError::TooLong(_) => Status::Runtime,
        _ => Status::Config,
    }
}

impl From<CanningsError> for CliError {
    fn from(e: CanningsError) -> Self {
        CliError {
            status: cannings_status(&e),
            message: e.to_string(),
        }
    }
}

impl From<ScheduleError> for CliError {
    fn from(e: ScheduleError) -> Self {
        CliError {
            status: schedule_status(&e),
            message: e.to_string(),
        }
    }
}

impl From<LimitError> for CliError {
    fn from(e: LimitError) -> Self {
        let status = match e {
            LimitError::Incomplete => Status::Runtime,
            _ => Status::Config,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        let status = match &e {
            HarnessError::Cannings(c) => cannings_status(c),
            HarnessError::Schedule(s) => schedule_status(s),
            HarnessError::Horizon(_) | HarnessError::Clock(_) => Status::Runtime,
            HarnessError::Limit(LimitError::Incomplete) => Status::Runtime,
            _ => Status::Config,
        };
        CliError {
            status,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::runtime(format!("i/o error: {e}"))
    }
}
