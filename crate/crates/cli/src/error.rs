use std::fmt;

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    /// Command-line usage error (reported by the argument parser).
    #[allow(dead_code)]
    pub const USAGE: i32 = 2;
    /// Invalid configuration or arguments.
    pub const CONFIG: i32 = 3;
    /// Numerical failure in a solve or decomposition.
    pub const NUMERICAL: i32 = 4;
    /// I/O or file-format failure.
    pub const IO: i32 = 5;
}

#[derive(Debug)]
pub enum CliError {
    Core(wrom::Error),
    Config(String),
}

impl CliError {
    pub fn class(&self) -> &'static str {
        match self {
            CliError::Core(e) => e.class(),
            CliError::Config(_) => "config",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self.class() {
            "config" | "invalid-argument" | "out-of-domain" | "dimension-mismatch" | "node-budget" | "unsupported" => {
                exit::CONFIG
            }
            "singular-matrix" | "solver-stagnation" | "snapshot-failed" | "near-singular" | "no-positive-weights" => {
                exit::NUMERICAL
            }
            _ => exit::IO,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Config(m) => write!(f, "{m}"),
        }
    }
}

impl From<wrom::Error> for CliError {
    fn from(e: wrom::Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Core(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Core(e.into())
    }
}
