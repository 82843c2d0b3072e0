//! Shift-versus-trap-frequency data and its CSV form:
//! header `omega_ax_khz,shift_khz,sigma_khz`, `#` comment lines, the sigma
//! column optional.

use std::io::{Read, Write};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataFileError {
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {reason}")]
    Row { line: u64, reason: String },
    #[error("header must start with omega_ax_khz,shift_khz (got `{0}`)")]
    Header(String),
    #[error("no sigma column and no default sigma given")]
    MissingSigma,
    #[error("sigma must be positive, got {0}")]
    NonPositiveSigma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub omega_ax_khz: f64,
    pub shift_khz: f64,
    pub sigma_khz: f64,
}

impl Measurement {
    pub fn new(omega_ax_khz: f64, shift_khz: f64, sigma_khz: f64) -> Result<Self, DataFileError> {
        if !(sigma_khz > 0.0 && sigma_khz.is_finite()) {
            return Err(DataFileError::NonPositiveSigma(sigma_khz));
        }
        Ok(Measurement { omega_ax_khz, shift_khz, sigma_khz })
    }
}

pub const HEADER: [&str; 3] = ["omega_ax_khz", "shift_khz", "sigma_khz"];

/// Reads measurements; rows without sigma take `default_sigma`.
pub fn read_csv<R: Read>(input: R, default_sigma: Option<f64>) -> Result<Vec<Measurement>, DataFileError> {
    let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).flexible(true).from_reader(input);
    let header = rdr.headers()?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[0] != HEADER[0] || names[1] != HEADER[1] || (names.len() > 2 && names[2] != HEADER[2]) {
        return Err(DataFileError::Header(names.join(",")));
    }
    let has_sigma = names.len() > 2;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| -> Result<f64, DataFileError> {
            let txt = rec
                .get(i)
                .ok_or_else(|| DataFileError::Row { line, reason: format!("missing column {}", HEADER[i]) })?;
            txt.parse().map_err(|_| DataFileError::Row { line, reason: format!("`{txt}` is not a number") })
        };
        let sigma = if has_sigma && rec.get(2).is_some_and(|s| !s.is_empty()) {
            field(2)?
        } else {
            default_sigma.ok_or(DataFileError::MissingSigma)?
        };
        let m = Measurement::new(field(0)?, field(1)?, sigma)
            .map_err(|e| DataFileError::Row { line, reason: e.to_string() })?;
        out.push(m);
    }
    Ok(out)
}

/// Writes with shortest round-trip float formatting, so reading back is exact.
pub fn write_csv<W: Write>(output: W, data: &[Measurement]) -> Result<(), DataFileError> {
    let mut w = csv::Writer::from_writer(output);
    w.write_record(HEADER)?;
    for m in data {
        w.write_record([m.omega_ax_khz.to_string(), m.shift_khz.to_string(), m.sigma_khz.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
