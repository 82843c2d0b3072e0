//! Run configuration: one TOML file shared by all subcommands. Each
//! subcommand reads the sections it needs; unknown keys anywhere are
//! rejected with their position.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// alternative constants file
    pub dataset: Option<PathBuf>,
    pub pair: Option<PairConfig>,
    pub c6_au: Option<f64>,
    pub chi_phase_offset: Option<f64>,
    pub reaction_zone_a0: Option<f64>,
    #[serde(default)]
    pub rows: Vec<RowConfig>,
    pub transition: Option<TransitionConfig>,
    pub sweep: Option<SweepConfig>,
    pub noise: Option<NoiseConfig>,
    pub fit: Option<FitConfig>,
    pub chi: Option<ChiConfig>,
    pub trap: Option<TrapConfig>,
    pub channels: Option<ChannelsConfig>,
    /// CSV destination, `-` for stdout
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairConfig {
    pub first: String,
    pub second: String,
}

/// One scattering-length row.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RowConfig {
    pub channel: Option<String>,
    pub mu_s: Option<f64>,
    pub mu_t: Option<f64>,
    pub mu_t_es: Option<f64>,
    /// closed channel label -> chi
    #[serde(default)]
    pub chi: BTreeMap<String, f64>,
    /// eigenchannel label -> "EI" | "ES"
    #[serde(default)]
    pub class_overrides: BTreeMap<String, String>,
    /// echoed for comparison only
    pub a_exp: Option<f64>,
    pub a_cc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum LengthValue {
    Known(f64),
    Word(UnknownWord),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum UnknownWord {
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AtomChoice {
    First,
    Second,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransitionConfig {
    pub atom: Option<AtomChoice>,
    pub initial: Option<String>,
    #[serde(rename = "final")]
    pub final_: Option<String>,
    pub a_initial: Option<LengthValue>,
    pub a_final: Option<LengthValue>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub eta: Option<f64>,
    pub omega_ax_khz: Option<Vec<f64>>,
    pub start_khz: Option<f64>,
    pub stop_khz: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    pub sigma_khz: Option<f64>,
    pub seed: Option<u64>,
    /// known scattering length used to generate data when the transition
    /// has an unknown one
    pub a_true: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub data: Option<PathBuf>,
    pub eta: Option<f64>,
    pub default_sigma_khz: Option<f64>,
    pub residuals: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChiConfig {
    pub gaps_ghz: Option<Vec<f64>>,
    /// compute for the closed channels of this entrance channel instead
    pub entrance: Option<String>,
    pub calibrate_gap_ghz: Option<f64>,
    pub calibrate_target: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrapConfig {
    pub radial_khz: Option<f64>,
    pub axial_khz: Option<f64>,
    pub a_a0: Option<Vec<f64>>,
    pub branch: Option<u32>,
    pub anisotropy_gate: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelsConfig {
    /// total projection, e.g. "-4" or "-7/2"
    pub m: Option<String>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
    (line, col)
}

impl RunConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| {
            let location = match e.span() {
                Some(span) => {
                    let (line, col) = line_col(text, span.start);
                    format!("{origin}:{line}:{col}")
                }
                None => origin.to_string(),
            };
            CliError::Config { location, message: e.message().trim().to_string() }
        })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
        let mut cfg = Self::parse(&text, &path.display().to_string())?;
        // relative paths inside the file are taken from the file's directory
        let base = path.parent().unwrap_or(Path::new("."));
        let rebase = |p: &mut Option<PathBuf>| {
            if let Some(q) = p.as_mut() {
                if q.is_relative() && q.as_os_str() != "-" {
                    *q = base.join(&*q);
                }
            }
        };
        rebase(&mut cfg.dataset);
        rebase(&mut cfg.output);
        if let Some(f) = cfg.fit.as_mut() {
            rebase(&mut f.data);
            rebase(&mut f.residuals);
        }
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_key_reports_position() {
        let err = RunConfig::parse("c6_au = 4710.0\n\n[trap]\nradial_khz = 165\nwidth = 3\n", "run.toml").unwrap_err();
        let CliError::Config { location, message } = err else { panic!() };
        assert_eq!(location, "run.toml:5:1");
        assert!(message.contains("width"), "{message}");
    }

    #[test]
    fn nested_unknown_key_in_row() {
        let err = RunConfig::parse("[[rows]]\nchannel = \"(1,-1;3,-3)\"\nmu_x = 0.1\n", "c").unwrap_err();
        assert!(matches!(err, CliError::Config { ref location, .. } if location == "c:3:1"), "{err}");
    }

    #[test]
    fn lengths_accept_unknown() {
        let c = RunConfig::parse("[transition]\na_initial = \"unknown\"\na_final = 213.0\n", "c").unwrap();
        let t = c.transition.unwrap();
        assert_eq!(t.a_initial, Some(LengthValue::Word(UnknownWord::Unknown)));
        assert_eq!(t.a_final, Some(LengthValue::Known(213.0)));
        assert!(RunConfig::parse("[transition]\na_final = \"maybe\"\n", "c").is_err());
    }

    #[test]
    fn integers_are_accepted_for_floats() {
        let c = RunConfig::parse("[trap]\nradial_khz = 165\naxial_khz = 27\n", "c").unwrap();
        assert_eq!(c.trap.unwrap().radial_khz, Some(165.0));
    }
}
