//! Two atoms in a cylindrically symmetric harmonic trap with
//! omega_r = eta omega_ax, eta close to an integer n.
//!
//! The relative-motion energy eps (units of hbar omega_ax, measured from the
//! noninteracting zero point) and the scattering length a (units of
//! d_ax = sqrt(hbar / (mu omega_ax))) are tied by
//!
//!   -sqrt(pi) / a = F(-eps / 2),
//!   F(x) = -2 sqrt(pi) Gamma(x)/Gamma(x - 1/2)
//!          + sqrt(pi) Gamma(x)/Gamma(x + 1/2) sum_{m=1}^{n-1} 2F1(1, x; x + 1/2; e^{2 pi i m / n}).
//!
//! For n = 1 this is the isotropic relation 1/a = 2 Gamma(x)/Gamma(x - 1/2).

use std::f64::consts::PI;

use thiserror::Error;

use crate::hypergeometric::{scaled_root_sums, HypError, ACCURACY_GATE};
use crate::physics::Constants;
use crate::roots::{brent, RootError};
use crate::special::{gamma_ratio_half, pole_distance};

/// Half-width of the exclusion window around poles of F.
pub const POLE_WINDOW: f64 = 1e-10;
const RESIDUAL_GATE: f64 = 1e-10;
/// |F| beyond which energy_to_a reports a = 0.
const ZERO_LENGTH_F: f64 = 1e12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrapError {
    #[error(transparent)]
    Hypergeometric(#[from] HypError),
    #[error(transparent)]
    Root(#[from] RootError),
    #[error("F({x}) requested {distance:.2e} from a pole")]
    PoleProximity { x: f64, distance: f64 },
    #[error("imaginary residual {residual:.2e} in F({x}) = {value}")]
    ImaginaryResidual { x: f64, value: f64, residual: f64 },
    #[error("anisotropy order must be a positive integer")]
    BadOrder,
    #[error("trap frequencies need omega_r >= omega_ax > 0 (got {omega_r}, {omega_ax})")]
    BadFrequencies { omega_r: f64, omega_ax: f64 },
    #[error("anisotropy {eta:.4} is {offset:.3} away from the nearest integer (gate {gate})")]
    Anisotropy { eta: f64, offset: f64, gate: f64 },
    #[error("scattering length must be finite, got {0}")]
    NonFiniteLength(f64),
    #[error("no root on branch {branch} for a' = {a_scaled:.4e}; scanned signs {pattern}")]
    Bracket { branch: u32, a_scaled: f64, pattern: String },
    #[error("solution x = {x} lies {distance:.2e} from a pole of F")]
    NearPole { x: f64, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapGeometry {
    /// rad/s
    pub omega_r: f64,
    /// rad/s
    pub omega_ax: f64,
    pub eta: f64,
    pub n: usize,
    pub d_r_a0: f64,
    pub d_ax_a0: f64,
}

impl TrapGeometry {
    pub const DEFAULT_GATE: f64 = 0.25;

    pub fn new(omega_r: f64, omega_ax: f64, reduced_mass_u: f64, c: &Constants) -> Result<Self, TrapError> {
        Self::with_gate(omega_r, omega_ax, reduced_mass_u, c, Self::DEFAULT_GATE)
    }

    pub fn with_gate(
        omega_r: f64,
        omega_ax: f64,
        reduced_mass_u: f64,
        c: &Constants,
        gate: f64,
    ) -> Result<Self, TrapError> {
        if !(omega_ax > 0.0 && omega_r >= omega_ax && omega_r.is_finite()) {
            return Err(TrapError::BadFrequencies { omega_r, omega_ax });
        }
        let eta = omega_r / omega_ax;
        let n = eta.round();
        if (eta - n).abs() > gate {
            return Err(TrapError::Anisotropy { eta, offset: (eta - n).abs(), gate });
        }
        let mu = reduced_mass_u * c.atomic_mass_unit;
        let len = |w: f64| (c.hbar / (mu * w)).sqrt() / c.bohr_radius;
        Ok(TrapGeometry { omega_r, omega_ax, eta, n: n as usize, d_r_a0: len(omega_r), d_ax_a0: len(omega_ax) })
    }

    /// Frequencies given as f/(2 pi) in kHz.
    pub fn from_khz(f_r_khz: f64, f_ax_khz: f64, reduced_mass_u: f64, c: &Constants) -> Result<Self, TrapError> {
        let w = |f: f64| 2.0 * PI * f * 1e3;
        Self::new(w(f_r_khz), w(f_ax_khz), reduced_mass_u, c)
    }

    pub fn axial_khz(&self) -> f64 {
        self.omega_ax / (2.0 * PI) / 1e3
    }

    pub fn radial_khz(&self) -> f64 {
        self.omega_r / (2.0 * PI) / 1e3
    }
}

/// Relative-motion energy in hbar omega_ax above the noninteracting zero point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrapEnergy {
    pub value: f64,
    pub branch: u32,
}

impl TrapEnergy {
    pub fn khz(&self, trap: &TrapGeometry) -> f64 {
        self.value * trap.axial_khz()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BigF {
    pub value: f64,
    pub imag_residual: f64,
    pub error: f64,
}

pub fn big_f(x: f64, n: usize) -> Result<f64, TrapError> {
    big_f_detailed(x, n).map(|b| b.value)
}

pub fn big_f_detailed(x: f64, n: usize) -> Result<BigF, TrapError> {
    if n == 0 {
        return Err(TrapError::BadOrder);
    }
    let distance = pole_distance(x);
    if distance <= POLE_WINDOW {
        return Err(TrapError::PoleProximity { x, distance });
    }
    let sqrt_pi = PI.sqrt();
    // Gamma(x)/Gamma(x - 1/2) = 1 / r(x - 1/2); r is infinite (lead zero)
    // where Gamma(x - 1/2) has poles
    let lead = -2.0 * sqrt_pi / gamma_ratio_half(x - 0.5);
    if n == 1 {
        return Ok(BigF { value: lead, imag_residual: 0.0, error: 0.0 });
    }
    let sums = scaled_root_sums(x, n)?;
    let total: num_complex::Complex64 = sums.value.iter().sum();
    let value = lead + sqrt_pi * total.re;
    let residual = sqrt_pi * total.im.abs();
    if residual > RESIDUAL_GATE * (1.0 + value.abs()) {
        return Err(TrapError::ImaginaryResidual { x, value, residual });
    }
    let error = sqrt_pi * sums.error * (n - 1) as f64;
    if error > ACCURACY_GATE * (1.0 + value.abs()) {
        return Err(HypError::AccuracyNotMet { x, estimate: error }.into());
    }
    Ok(BigF { value, imag_residual: residual, error })
}

/// Scattering length (a0) of the level at `eps`.
pub fn energy_to_a(eps: TrapEnergy, trap: &TrapGeometry) -> Result<f64, TrapError> {
    let x = -0.5 * eps.value;
    if pole_distance(x) <= POLE_WINDOW {
        return Ok(0.0);
    }
    let f = big_f(x, trap.n)?;
    if f.abs() > ZERO_LENGTH_F {
        return Ok(0.0);
    }
    Ok(-PI.sqrt() / f * trap.d_ax_a0)
}

/// x-interval of a branch: (lo, hi), hi possibly infinite.
fn branch_interval(branch: u32, repulsive: bool) -> (f64, f64) {
    let k = f64::from(branch);
    match (repulsive, branch) {
        (true, _) => (-k - 1.0, -k),
        (false, 0) => (0.0, f64::INFINITY),
        (false, _) => (-k, -k + 1.0),
    }
}

fn scan_points(lo: f64, hi: f64) -> Vec<f64> {
    let margin = 4.0 * POLE_WINDOW;
    if hi.is_infinite() {
        let mut v = vec![lo + margin];
        let mut t = 1e-8;
        while t < 1e7 {
            v.push(lo + t);
            t *= 4.0;
        }
        return v;
    }
    let mut v = vec![lo + margin];
    for e in [1e-8, 1e-6, 1e-4, 1e-2] {
        v.push(lo + e);
    }
    for j in 1..32 {
        v.push(lo + (hi - lo) * j as f64 / 32.0);
    }
    for e in [1e-2, 1e-4, 1e-6, 1e-8] {
        v.push(hi - e);
    }
    v.push(hi - margin);
    v
}

type Bracket = (f64, f64);

/// Sign change between the interval ends (bounded case) or between the
/// lower end and a doubling upper probe (unbounded case).
fn quick_bracket<G>(g: &G, lo: f64, hi: f64) -> Result<Option<Bracket>, TrapError>
where
    G: Fn(f64) -> Result<f64, TrapError>,
{
    let margin = 4.0 * POLE_WINDOW;
    let a = lo + margin;
    let ga = g(a)?;
    if hi.is_finite() {
        let b = hi - margin;
        return Ok((ga.signum() != g(b)?.signum()).then_some((a, b)));
    }
    let mut prev = a;
    let mut b = lo + 1.0;
    while b < 1e7 {
        if g(b)?.signum() != ga.signum() {
            return Ok(Some((prev, b)));
        }
        prev = b;
        b = lo + 2.0 * (b - lo);
    }
    Ok(None)
}

/// Dense sign scan; on failure returns the observed sign pattern.
fn scan_bracket<G>(g: &G, lo: f64, hi: f64) -> Result<Result<Bracket, TrapError>, String>
where
    G: Fn(f64) -> Result<f64, TrapError>,
{
    let mut prev: Option<(f64, f64)> = None;
    let mut pattern = String::new();
    for x in scan_points(lo, hi) {
        let v = match g(x) {
            Ok(v) => v,
            Err(e) => return Ok(Err(e)),
        };
        pattern.push(if v > 0.0 {
            '+'
        } else if v < 0.0 {
            '-'
        } else {
            '0'
        });
        if let Some((xp, vp)) = prev {
            if vp.signum() != v.signum() {
                return Ok(Ok((xp, x)));
            }
        }
        prev = Some((x, v));
    }
    Err(pattern)
}

/// Energy of the given branch for scattering length `a_a0`. Branch 0 is the
/// ground branch, continuous through a = 0 at eps = 0.
pub fn a_to_energy(a_a0: f64, trap: &TrapGeometry, branch: u32) -> Result<TrapEnergy, TrapError> {
    if !a_a0.is_finite() {
        return Err(TrapError::NonFiniteLength(a_a0));
    }
    let pole_eps = 2.0 * f64::from(branch);
    let a_scaled = a_a0 / trap.d_ax_a0;
    let target = -PI.sqrt() / a_scaled;
    if a_a0 == 0.0 || target.abs() > ZERO_LENGTH_F {
        return Ok(TrapEnergy { value: pole_eps, branch });
    }
    if branch == 0 && target.abs() > 1e9 {
        // F = n/x + O(1) next to the x = 0 pole
        let x = trap.n as f64 / target;
        return Ok(TrapEnergy { value: -2.0 * x, branch });
    }
    let (lo, hi) = branch_interval(branch, a_a0 > 0.0);
    let g = |x: f64| big_f(x, trap.n).map(|f| f - target);
    let (xl, xh) = match quick_bracket(&g, lo, hi)? {
        Some(b) => b,
        None => scan_bracket(&g, lo, hi).map_err(|pattern| TrapError::Bracket { branch, a_scaled, pattern })??,
    };
    let x = brent(g, xl, xh, 2e-13)??;
    let distance = pole_distance(x);
    if distance <= POLE_WINDOW {
        return Err(TrapError::NearPole { x, distance });
    }
    Ok(TrapEnergy { value: -2.0 * x, branch })
}

/// Ground-branch first-order energy shift dε/da at a = 0 in units of
/// hbar omega_ax per a0: 2 hbar^2 / (sqrt(pi) mu d_r^2 d_ax) / (hbar omega_ax).
pub fn perturbative_slope(trap: &TrapGeometry) -> f64 {
    2.0 * trap.d_ax_a0 / (PI.sqrt() * trap.d_r_a0 * trap.d_r_a0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Valid,
    Warning,
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Validity {
    pub ratio: f64,
    pub verdict: Verdict,
}

/// beta6 / d_r with a verdict: below 0.5 valid, up to 1 a warning.
pub fn pseudopotential_validity(trap: &TrapGeometry, beta6_a0: f64) -> Validity {
    let ratio = beta6_a0 / trap.d_r_a0;
    let verdict = if ratio < 0.5 {
        Verdict::Valid
    } else if ratio <= 1.0 + 1e-12 {
        Verdict::Warning
    } else {
        Verdict::Invalid
    };
    Validity { ratio, verdict }
}
