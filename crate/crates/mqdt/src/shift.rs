//! Microwave collisional shifts of a trapped pair, synthetic data, and
//! one-parameter least-squares extraction of a scattering length.
//!
//! Driving one atom moves the pair from the initial to the final collision
//! channel, so the two-atom line sits at the single-atom line plus the
//! difference of the two trapped-pair interaction energies. `direction`
//! is +1 when the driven atom starts in its lower hyperfine manifold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use thiserror::Error;

use crate::angular::ChannelLabel;
use crate::halfint::HalfInt;
use crate::measurements::Measurement;
use crate::physics::{Constants, SpeciesPair, VdwScales};
use crate::roots::{brent, golden_section};
use crate::trap::{a_to_energy, pseudopotential_validity, TrapError, TrapGeometry, Verdict};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ShiftError {
    #[error(transparent)]
    Trap(#[from] TrapError),
    #[error("transition must change only atom {atom}'s state: {initial} -> {final_}")]
    NotSingleAtom { atom: usize, initial: ChannelLabel, final_: ChannelLabel },
    #[error("transition {from} -> {to} does not connect the two hyperfine manifolds")]
    SameManifold { from: String, to: String },
    #[error("both scattering lengths must be known for a prediction")]
    UnknownLength,
    #[error("fit needs exactly one unknown scattering length, found {0}")]
    UnknownCount(usize),
    #[error("pseudopotential invalid: beta6/d_r = {0:.3}")]
    InvalidPseudopotential(f64),
    #[error("fit needs at least 2 measurements, got {0}")]
    TooFewPoints(usize),
    #[error("chi^2 is flat over the bracket; data carry no information on the unknown length")]
    IllPosed,
    #[error("chi^2 minimum at the bracket edge a = {0:.1} a0")]
    BracketEdge(f64),
    #[error("noise sigma must be non-negative and finite, got {0}")]
    BadSigma(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Length {
    Known(f64),
    Unknown,
}

impl Length {
    pub fn value(self) -> Option<f64> {
        match self {
            Length::Known(a) => Some(a),
            Length::Unknown => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Atom {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct InternalState {
    pub f: HalfInt,
    pub m: HalfInt,
}

impl std::fmt::Display for InternalState {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "|{},{}>", self.f, self.m)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransitionSpec {
    pub atom: Atom,
    pub initial_state: InternalState,
    pub final_state: InternalState,
    pub initial_channel: ChannelLabel,
    pub final_channel: ChannelLabel,
    pub direction: f64,
    pub a_initial: Length,
    pub a_final: Length,
}

impl TransitionSpec {
    /// Infers the driven atom's states and the direction from the channels.
    pub fn new(
        pair: &SpeciesPair,
        atom: Atom,
        initial_channel: ChannelLabel,
        final_channel: ChannelLabel,
        a_initial: Length,
        a_final: Length,
    ) -> Result<Self, ShiftError> {
        let (i, f) = (initial_channel, final_channel);
        let (kept, init, fin, species) = match atom {
            Atom::First => ((i.f2, i.m2) == (f.f2, f.m2), (i.f1, i.m1), (f.f1, f.m1), &pair.first),
            Atom::Second => ((i.f1, i.m1) == (f.f1, f.m1), (i.f2, i.m2), (f.f2, f.m2), &pair.second),
        };
        if !kept || init == fin {
            let atom = if atom == Atom::First { 1 } else { 2 };
            return Err(ShiftError::NotSingleAtom { atom, initial: i, final_: f });
        }
        let initial_state = InternalState { f: init.0, m: init.1 };
        let final_state = InternalState { f: fin.0, m: fin.1 };
        let direction = if init.0 == species.lower_f() && fin.0 == species.upper_f() {
            1.0
        } else if init.0 == species.upper_f() && fin.0 == species.lower_f() {
            -1.0
        } else {
            return Err(ShiftError::SameManifold { from: initial_state.to_string(), to: final_state.to_string() });
        };
        Ok(TransitionSpec {
            atom,
            initial_state,
            final_state,
            initial_channel: i,
            final_channel: f,
            direction,
            a_initial,
            a_final,
        })
    }

    fn unknown_count(&self) -> usize {
        [self.a_initial, self.a_final].iter().filter(|l| **l == Length::Unknown).count()
    }

    fn with_unknown(&self, a: f64) -> TransitionSpec {
        let mut t = self.clone();
        if t.a_initial == Length::Unknown {
            t.a_initial = Length::Known(a);
        } else if t.a_final == Length::Unknown {
            t.a_final = Length::Known(a);
        }
        t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub omega_ax_khz: f64,
    pub omega_r_khz: f64,
    pub shift_khz: Result<f64, ShiftError>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub a_hat: f64,
    pub sigma_a: f64,
    pub chi2: f64,
    pub dof: usize,
    pub residuals: Vec<f64>,
    pub evaluations: usize,
}

impl FitResult {
    pub fn reduced_chi2(&self) -> f64 {
        self.chi2 / self.dof.max(1) as f64
    }
}

/// Forward model for one species pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftModel {
    pub beta6_a0: f64,
    pub reduced_mass_u: f64,
    pub constants: Constants,
}

pub const FIT_BRACKET: (f64, f64) = (-1000.0, 1000.0);

impl ShiftModel {
    pub fn new(scales: &VdwScales) -> Self {
        ShiftModel { beta6_a0: scales.beta6_a0, reduced_mass_u: scales.reduced_mass_u, constants: scales.constants }
    }

    pub fn trap(&self, f_r_khz: f64, f_ax_khz: f64) -> Result<TrapGeometry, ShiftError> {
        Ok(TrapGeometry::from_khz(f_r_khz, f_ax_khz, self.reduced_mass_u, &self.constants)?)
    }

    fn energy(&self, a: f64, trap: &TrapGeometry) -> Result<f64, ShiftError> {
        Ok(a_to_energy(a, trap, 0)?.value)
    }

    fn check_validity(&self, trap: &TrapGeometry) -> Result<(), ShiftError> {
        let v = pseudopotential_validity(trap, self.beta6_a0);
        if v.verdict == Verdict::Invalid {
            return Err(ShiftError::InvalidPseudopotential(v.ratio));
        }
        Ok(())
    }

    /// Two-atom minus single-atom resonance, kHz.
    pub fn predict_shift(&self, t: &TransitionSpec, trap: &TrapGeometry) -> Result<f64, ShiftError> {
        let (ai, af) = match (t.a_initial.value(), t.a_final.value()) {
            (Some(i), Some(f)) => (i, f),
            _ => return Err(ShiftError::UnknownLength),
        };
        self.check_validity(trap)?;
        let ei = self.energy(ai, trap)?;
        let ef = self.energy(af, trap)?;
        Ok(t.direction * (ef - ei) * trap.axial_khz())
    }

    /// Shift along a sweep with omega_r = eta omega_ax; failures stay per point.
    pub fn shift_curve(&self, t: &TransitionSpec, omega_ax_khz: &[f64], eta: f64) -> Vec<CurvePoint> {
        omega_ax_khz
            .par_iter()
            .map(|&w| CurvePoint {
                omega_ax_khz: w,
                omega_r_khz: eta * w,
                shift_khz: self.trap(eta * w, w).and_then(|trap| self.predict_shift(t, &trap)),
            })
            .collect()
    }

    pub fn synthesize_measurements(
        &self,
        t: &TransitionSpec,
        eta: f64,
        omega_ax_khz: &[f64],
        a_true: f64,
        sigma: f64,
        seed: u64,
    ) -> Result<Vec<Measurement>, ShiftError> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(ShiftError::BadSigma(sigma));
        }
        let full = t.with_unknown(a_true);
        let noise = Normal::new(0.0, sigma).map_err(|_| ShiftError::BadSigma(sigma))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // zero-noise data carry unit weights
        let reported = if sigma > 0.0 { sigma } else { 1.0 };
        let model: Vec<f64> =
            self.shift_curve(&full, omega_ax_khz, eta).into_iter().map(|p| p.shift_khz).collect::<Result<_, _>>()?;
        Ok(omega_ax_khz
            .iter()
            .zip(model)
            .map(|(&w, s)| Measurement { omega_ax_khz: w, shift_khz: s + noise.sample(&mut rng), sigma_khz: reported })
            .collect())
    }

    /// chi^2 as a function of the unknown length, with per-point traps and
    /// the known side's energies computed once.
    pub fn objective<'a>(
        &'a self,
        data: &'a [Measurement],
        t: &'a TransitionSpec,
        eta: f64,
    ) -> Result<Objective<'a>, ShiftError> {
        if t.unknown_count() != 1 {
            return Err(ShiftError::UnknownCount(t.unknown_count()));
        }
        let known = t.a_initial.value().or(t.a_final.value()).expect("one side known");
        let points = data
            .par_iter()
            .map(|m| {
                let trap = self.trap(eta * m.omega_ax_khz, m.omega_ax_khz)?;
                self.check_validity(&trap)?;
                let e_known = self.energy(known, &trap)?;
                Ok((trap, e_known))
            })
            .collect::<Result<Vec<_>, ShiftError>>()?;
        Ok(Objective { model: self, data, t, points })
    }

    pub fn fit_scattering_length(
        &self,
        data: &[Measurement],
        t: &TransitionSpec,
        eta: f64,
    ) -> Result<FitResult, ShiftError> {
        if data.len() < 2 {
            return Err(ShiftError::TooFewPoints(data.len()));
        }
        let obj = self.objective(data, t, eta)?;
        let (lo, hi) = FIT_BRACKET;
        let s_lo = obj.shifts(lo)?;
        let s_hi = obj.shifts(hi)?;
        let spread =
            s_lo.iter().zip(&s_hi).zip(data).map(|((a, b), m)| ((a - b) / m.sigma_khz).abs()).fold(0.0, f64::max);
        if spread < 1e-6 {
            return Err(ShiftError::IllPosed);
        }
        let chi2 = |a: f64| obj.chi2(a);
        let min = golden_section(chi2, lo, hi, 1e-6)?;
        let width = hi - lo;
        if (min.x - lo).abs() < 1e-3 * width || (hi - min.x).abs() < 1e-3 * width {
            return Err(ShiftError::BracketEdge(min.x));
        }
        let level = |a: f64| obj.chi2(a).map(|c| c - min.fx - 1.0);
        let lower = brent(level, lo, min.x, 1e-6)?.ok();
        let upper = brent(level, min.x, hi, 1e-6)?.ok();
        let sigma_a = match (lower, upper) {
            (Some(l), Some(u)) => 0.5 * (u - l),
            (Some(l), None) => min.x - l,
            (None, Some(u)) => u - min.x,
            (None, None) => return Err(ShiftError::IllPosed),
        };
        let model = obj.shifts(min.x)?;
        let residuals = data.iter().zip(&model).map(|(m, s)| m.shift_khz - s).collect();
        Ok(FitResult {
            a_hat: min.x,
            sigma_a,
            chi2: min.fx,
            dof: data.len() - 1,
            residuals,
            evaluations: min.evaluations,
        })
    }
}

pub struct Objective<'a> {
    model: &'a ShiftModel,
    data: &'a [Measurement],
    t: &'a TransitionSpec,
    points: Vec<(TrapGeometry, f64)>,
}

impl Objective<'_> {
    pub fn shifts(&self, a: f64) -> Result<Vec<f64>, ShiftError> {
        let unknown_is_final = self.t.a_final == Length::Unknown;
        self.points
            .par_iter()
            .map(|(trap, e_known)| {
                let e = self.model.energy(a, trap)?;
                let diff = if unknown_is_final { e - e_known } else { e_known - e };
                Ok(self.t.direction * diff * trap.axial_khz())
            })
            .collect()
    }

    pub fn chi2(&self, a: f64) -> Result<f64, ShiftError> {
        let s = self.shifts(a)?;
        Ok(self.data.iter().zip(s).map(|(m, p)| ((p - m.shift_khz) / m.sigma_khz).powi(2)).sum())
    }
}

impl From<crate::roots::RootError> for ShiftError {
    fn from(e: crate::roots::RootError) -> Self {
        ShiftError::Trap(TrapError::Root(e))
    }
}

/// Unweighted mean of independent estimates.
pub fn plain_average(values: &[f64]) -> Option<f64> {
    (!values.is_empty()).then(|| values.iter().sum::<f64>() / values.len() as f64)
}
