use std::io::Write;
use std::path::Path;
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::{json, Value};

use crate::Cli;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug)]
pub enum CliError {
    /// Flag parsing failed or an unknown subcommand was given.
    Cli(String),
    Lib(lamplighter::Error),
    /// An input file was unreadable or malformed.
    Input(String),
    Io(String),
}

impl From<lamplighter::Error> for CliError {
    fn from(e: lamplighter::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    pub fn code(&self) -> u8 {
        use lamplighter::Error::*;
        match self {
            CliError::Cli(_) => 2,
            CliError::Lib(Usage(_)) => 3,
            CliError::Lib(Size { .. }) => 4,
            CliError::Lib(NotGenerating { .. }) => 5,
            CliError::Lib(Degenerate(_)) => 6,
            CliError::Lib(Consistency(_)) => 7,
            CliError::Input(_) => 8,
            CliError::Io(_) => 9,
        }
    }

    fn kind(&self) -> &'static str {
        use lamplighter::Error::*;
        match self {
            CliError::Cli(_) => "cli",
            CliError::Lib(Usage(_)) => "usage",
            CliError::Lib(Size { .. }) => "size",
            CliError::Lib(NotGenerating { .. }) => "not-generating",
            CliError::Lib(Degenerate(_)) => "degenerate",
            CliError::Lib(Consistency(_)) => "consistency",
            CliError::Input(_) => "input",
            CliError::Io(_) => "io",
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Cli(m) | CliError::Input(m) | CliError::Io(m) => m.trim_end().to_string(),
            CliError::Lib(e) => e.to_string(),
        }
    }

    /// Prints the machine-readable error object to stderr.
    pub fn emit(&self) -> ExitCode {
        let obj = json!({
            "schema_version": SCHEMA_VERSION,
            "error": { "kind": self.kind(), "code": self.code(), "message": self.message() },
        });
        eprintln!("{obj}");
        ExitCode::from(self.code())
    }
}

#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    timestamp_unix: u64,
}

#[derive(Serialize)]
pub struct Report<'a> {
    schema_version: u32,
    header: Header,
    config: &'a Cli,
    report: Value,
}

impl<'a> Report<'a> {
    pub fn new(config: &'a Cli, report: Value) -> Self {
        let timestamp_unix = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        Report {
            schema_version: SCHEMA_VERSION,
            header: Header { tool: "lamplighter", version: env!("CARGO_PKG_VERSION"), timestamp_unix },
            config,
            report,
        }
    }

    pub fn write(&self, path: Option<&Path>) -> Result<(), CliError> {
        let mut text = serde_json::to_string_pretty(self).map_err(|e| CliError::Io(e.to_string()))?;
        text.push('\n');
        match path {
            Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display()))),
            None => std::io::stdout().write_all(text.as_bytes()).map_err(|e| CliError::Io(e.to_string())),
        }
    }
}

/// CSV with a leading `# schema_version=…` comment line.
pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let io = |e: &dyn std::fmt::Display| CliError::Io(format!("{}: {e}", path.display()));
    let mut file = std::fs::File::create(path).map_err(|e| io(&e))?;
    writeln!(file, "# schema_version={SCHEMA_VERSION}").map_err(|e| io(&e))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header).map_err(|e| io(&e))?;
    for row in rows {
        w.write_record(row).map_err(|e| io(&e))?;
    }
    w.flush().map_err(|e| io(&e))
}
