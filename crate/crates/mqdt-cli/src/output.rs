//! Where results go: text tables to stdout, CSV to a file or stdout.

use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;

use crate::error::CliError;

pub struct Sink {
    csv: Option<PathBuf>,
}

impl Sink {
    pub fn new(csv: Option<PathBuf>) -> Self {
        Sink { csv }
    }

    fn csv_to_stdout(&self) -> bool {
        self.csv.as_ref().is_some_and(|p| p.as_os_str() == "-")
    }

    /// Prints the table unless the CSV is going to stdout.
    pub fn table(&self, text: &str) {
        if !self.csv_to_stdout() {
            print!("{text}");
        }
    }

    /// Writes CSV if a destination was configured.
    pub fn csv<F>(&self, write: F) -> Result<(), CliError>
    where
        F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
    {
        match &self.csv {
            None => Ok(()),
            Some(p) if p.as_os_str() == "-" => write(&mut io::stdout().lock()),
            Some(p) => write_file(p, write),
        }
    }
}

pub fn write_file<F>(path: &PathBuf, write: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> Result<(), CliError>,
{
    let io_err = |source| CliError::Io { path: path.clone(), source };
    let mut f = io::BufWriter::new(File::create(path).map_err(io_err)?);
    write(&mut f)?;
    f.flush().map_err(io_err)
}

/// Shortest representation that parses back to the same f64.
pub fn exact(x: f64) -> String {
    x.to_string()
}

pub fn opt_exact(x: Option<f64>) -> String {
    x.map(exact).unwrap_or_default()
}

/// Parses `LABEL=VALUE`, splitting at the last `=`.
pub fn split_assignment(s: &str) -> Result<(&str, &str), String> {
    s.rsplit_once('=').map(|(k, v)| (k.trim(), v.trim())).ok_or_else(|| format!("expected LABEL=VALUE, got `{s}`"))
}
