//! Physical constants, species data and the van der Waals scales of a pair.
//!
//! Everything numeric comes from a TOML data file (a copy is compiled in);
//! computations run in SI and convert to atomic units / MHz at the edges.

use std::sync::OnceLock;

use serde::Deserialize;
use thiserror::Error;

use crate::halfint::HalfInt;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("malformed data file: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("species `{name}`: {reason}")]
    InvalidSpecies { name: String, reason: String },
    #[error("unknown species `{0}`")]
    UnknownSpecies(String),
    #[error("{quantity} must be positive, got {value}")]
    NonPositive { quantity: &'static str, value: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub hbar: f64,
    pub planck: f64,
    pub bohr_radius: f64,
    pub hartree: f64,
    pub atomic_mass_unit: f64,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Species {
    pub name: String,
    pub mass_u: f64,
    pub nuclear_spin: HalfInt,
    pub hyperfine_ghz: f64,
}

impl Species {
    pub fn electron_spin(&self) -> HalfInt {
        HalfInt::HALF
    }

    pub fn lower_f(&self) -> HalfInt {
        self.nuclear_spin - HalfInt::HALF
    }

    pub fn upper_f(&self) -> HalfInt {
        self.nuclear_spin + HalfInt::HALF
    }

    fn validate(&self) -> Result<(), DataError> {
        let bad = |reason: &str| DataError::InvalidSpecies { name: self.name.clone(), reason: reason.to_string() };
        if !(self.mass_u > 0.0 && self.mass_u.is_finite()) {
            return Err(bad("mass must be positive"));
        }
        if !(self.hyperfine_ghz > 0.0 && self.hyperfine_ghz.is_finite()) {
            return Err(bad("hyperfine splitting must be positive"));
        }
        if self.nuclear_spin.twice() < 1 {
            return Err(bad("nuclear spin must be at least 1/2"));
        }
        Ok(())
    }
}

/// Two distinguishable atoms; atom 1 carries (F1, mF1), atom 2 (F2, mF2).
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesPair {
    pub first: Species,
    pub second: Species,
}

impl SpeciesPair {
    pub fn new(first: Species, second: Species) -> Self {
        SpeciesPair { first, second }
    }

    /// Zero-field threshold of (F1, F2) above the (lower, lower) manifold.
    pub fn threshold_ghz(&self, f1: HalfInt, f2: HalfInt) -> f64 {
        let mut e = 0.0;
        if f1 == self.first.upper_f() {
            e += self.first.hyperfine_ghz;
        }
        if f2 == self.second.upper_f() {
            e += self.second.hyperfine_ghz;
        }
        e
    }

    pub fn reduced_mass_u(&self) -> f64 {
        reduced_mass(self.first.mass_u, self.second.mass_u)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct LongRangeData {
    c6_au: f64,
    chi_phase_offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDataset {
    version: String,
    constants: Constants,
    species: Vec<Species>,
    long_range: LongRangeData,
}

/// Parsed contents of a constants file.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub version: String,
    pub constants: Constants,
    pub species: Vec<Species>,
    pub c6_au: f64,
    pub chi_phase_offset: f64,
}

const BUNDLED: &str = include_str!("../data/constants.toml");

impl Dataset {
    pub fn from_toml_str(text: &str) -> Result<Self, DataError> {
        let raw: RawDataset = toml::from_str(text)?;
        for s in &raw.species {
            s.validate()?;
        }
        let c = &raw.constants;
        for (quantity, value) in [
            ("hbar", c.hbar),
            ("planck", c.planck),
            ("bohr_radius", c.bohr_radius),
            ("hartree", c.hartree),
            ("atomic_mass_unit", c.atomic_mass_unit),
            ("c6_au", raw.long_range.c6_au),
        ] {
            if !(value > 0.0 && value.is_finite()) {
                return Err(DataError::NonPositive { quantity, value });
            }
        }
        Ok(Dataset {
            version: raw.version,
            constants: raw.constants,
            species: raw.species,
            c6_au: raw.long_range.c6_au,
            chi_phase_offset: raw.long_range.chi_phase_offset,
        })
    }

    /// The data file compiled into the library.
    pub fn bundled() -> &'static Dataset {
        static DATA: OnceLock<Dataset> = OnceLock::new();
        DATA.get_or_init(|| Dataset::from_toml_str(BUNDLED).expect("bundled constants file is valid"))
    }

    pub fn species(&self, name: &str) -> Result<&Species, DataError> {
        self.species.iter().find(|s| s.name == name).ok_or_else(|| DataError::UnknownSpecies(name.to_string()))
    }

    pub fn pair(&self, first: &str, second: &str) -> Result<SpeciesPair, DataError> {
        Ok(SpeciesPair::new(self.species(first)?.clone(), self.species(second)?.clone()))
    }

    /// The Rb87 + Rb85 pair with atom 1 = Rb87.
    pub fn rb_pair(&self) -> SpeciesPair {
        self.pair("Rb87", "Rb85").expect("bundled data contains both rubidium isotopes")
    }

    pub fn vdw_scales(&self, pair: &SpeciesPair) -> VdwScales {
        vdw_scales(self.c6_au, pair.reduced_mass_u(), &self.constants).expect("bundled C6 and masses are positive")
    }
}

pub fn reduced_mass(m_a: f64, m_b: f64) -> f64 {
    m_a * m_b / (m_a + m_b)
}

/// Length and energy scales of a -C6/R^6 tail.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VdwScales {
    pub c6_au: f64,
    pub reduced_mass_u: f64,
    pub beta6_a0: f64,
    pub energy_j: f64,
    pub energy_mhz: f64,
    pub constants: Constants,
}

impl VdwScales {
    pub fn reduced_mass_kg(&self) -> f64 {
        self.reduced_mass_u * self.constants.atomic_mass_unit
    }

    pub fn beta6_m(&self) -> f64 {
        self.beta6_a0 * self.constants.bohr_radius
    }

    /// C6 recomputed from beta6, in atomic units.
    pub fn c6_from_beta6(&self) -> f64 {
        let c = &self.constants;
        let b = self.beta6_m();
        b.powi(4) * c.hbar * c.hbar / (2.0 * self.reduced_mass_kg()) / (c.hartree * c.bohr_radius.powi(6))
    }
}

pub fn vdw_scales(c6_au: f64, mu_u: f64, constants: &Constants) -> Result<VdwScales, DataError> {
    if !(c6_au > 0.0 && c6_au.is_finite()) {
        return Err(DataError::NonPositive { quantity: "c6", value: c6_au });
    }
    if !(mu_u > 0.0 && mu_u.is_finite()) {
        return Err(DataError::NonPositive { quantity: "reduced mass", value: mu_u });
    }
    let c = constants;
    let mu = mu_u * c.atomic_mass_unit;
    let c6 = c6_au * c.hartree * c.bohr_radius.powi(6);
    let beta6 = (2.0 * mu * c6 / (c.hbar * c.hbar)).powf(0.25);
    let energy_j = c.hbar * c.hbar / (2.0 * mu * beta6 * beta6);
    Ok(VdwScales {
        c6_au,
        reduced_mass_u: mu_u,
        beta6_a0: beta6 / c.bohr_radius,
        energy_j,
        energy_mhz: energy_j / c.planck * 1e-6,
        constants: *c,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn bundled_species() {
        let d = Dataset::bundled();
        let rb87 = d.species("Rb87").unwrap();
        assert_eq!(rb87.lower_f(), HalfInt::integer(1));
        assert_eq!(rb87.upper_f(), HalfInt::integer(2));
        let rb85 = d.species("Rb85").unwrap();
        assert_eq!(rb85.upper_f(), HalfInt::integer(3));
        assert!(d.species("Cs133").is_err());
    }

    #[test]
    fn reduced_mass_rb_pair() {
        let mu = Dataset::bundled().rb_pair().reduced_mass_u();
        assert!((mu - 42.9494).abs() < 1e-3, "{mu}");
        assert_eq!(reduced_mass(7.0, 7.0), 3.5);
    }

    #[test]
    fn reduced_mass_heavy_limit() {
        let mut last = 0.0;
        for k in 1..12 {
            let mu = reduced_mass(2.0, 10f64.powi(k));
            assert!(mu > last && mu < 2.0);
            last = mu;
        }
        assert!((last - 2.0).abs() < 1e-9);
    }

    #[test]
    fn beta6_and_energy_scale() {
        let d = Dataset::bundled();
        let s = d.vdw_scales(&d.rb_pair());
        assert!(rel(s.beta6_a0, 165.1) < 5e-3, "{}", s.beta6_a0);
        assert!(s.energy_mhz > 1.0 && s.energy_mhz < 2.0);
        assert!(rel(s.c6_from_beta6(), 4710.0) < 1e-10);
    }

    #[test]
    fn homogeneity_in_c6() {
        let d = Dataset::bundled();
        let a = vdw_scales(4710.0, 42.9, &d.constants).unwrap();
        let b = vdw_scales(16.0 * 4710.0, 42.9, &d.constants).unwrap();
        assert!(rel(b.beta6_a0, 2.0 * a.beta6_a0) < 1e-12);
        assert!(rel(b.energy_j, a.energy_j / 4.0) < 1e-12);
    }

    #[test]
    fn rejects_bad_inputs() {
        let c = Dataset::bundled().constants;
        assert!(vdw_scales(0.0, 42.9, &c).is_err());
        assert!(vdw_scales(4710.0, -1.0, &c).is_err());
    }

    #[test]
    fn thresholds_take_four_values() {
        let p = Dataset::bundled().rb_pair();
        let (l1, u1) = (p.first.lower_f(), p.first.upper_f());
        let (l2, u2) = (p.second.lower_f(), p.second.upper_f());
        assert_eq!(p.threshold_ghz(l1, l2), 0.0);
        assert!((p.threshold_ghz(l1, u2) - 3.0357).abs() < 1e-4);
        assert!((p.threshold_ghz(u1, l2) - 6.8347).abs() < 1e-4);
        assert!((p.threshold_ghz(u1, u2) - 9.8704).abs() < 1e-4);
    }

    #[test]
    fn user_data_rejects_unknown_keys() {
        let text = BUNDLED.replace("[long_range]", "[long_range]\nbogus = 1");
        assert!(matches!(Dataset::from_toml_str(&text), Err(DataError::Parse(_))));
    }
}
