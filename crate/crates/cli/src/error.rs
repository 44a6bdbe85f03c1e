//! Exit-code taxonomy: 0 ok, 2 usage, 3 I/O, 4 stability, 10 gauge, 11 hopf, 12 bubble.

use std::fmt;

use nsk_core::error::Stage;

pub const USAGE: i32 = 2;
pub const IO: i32 = 3;
pub const STABILITY: i32 = 4;
pub const GAUGE: i32 = 10;
pub const HOPF: i32 = 11;
pub const BUBBLE: i32 = 12;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self { code: USAGE, message: message.into() }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self { code: IO, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

pub fn code_for(stage: Stage) -> i32 {
    match stage {
        Stage::Usage => USAGE,
        Stage::Io => IO,
        Stage::Stability => STABILITY,
        Stage::Gauge => GAUGE,
        Stage::Hopf => HOPF,
        Stage::Bubble => BUBBLE,
    }
}

impl From<nsk_core::Error> for CliError {
    fn from(e: nsk_core::Error) -> Self {
        let message = match &e {
            nsk_core::Error::TimeStep { .. } => format!("{e} (step 0)"),
            _ => e.to_string(),
        };
        Self { code: code_for(e.stage()), message }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::io(e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        Self::io(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
