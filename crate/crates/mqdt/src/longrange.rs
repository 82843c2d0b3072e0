//! Closed-channel parameter chi^c(E) of the -C6/R^6 tail.
//!
//! In r = R/beta6 and eps = E/s_E the s-wave equation reads
//! u'' + (r^-6 + eps) u = 0. Two reference solutions f, g are fixed at
//! small r by WKB amplitude and phase (with the Bessel-type asymptotic
//! series of the eps = 0 solutions as the amplitude correction), carried
//! out with step-doubled RK4, and projected on the growing exponential
//! well past the turning point. chi = (growing part of f)/(growing part of g),
//! so f - chi g decays.

use std::f64::consts::{FRAC_PI_4, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::physics::{Dataset, VdwScales};
use crate::roots::{brent, RootError};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LongRangeError {
    #[error("energy gap must be non-negative, got {0} GHz")]
    NegativeGap(f64),
    #[error("chi is defined for closed channels only (scaled energy {0} is not negative)")]
    NotClosed(f64),
    #[error("inner radius {0} is outside (0, 0.05]")]
    BadInnerRadius(f64),
    #[error("chi drifts between matching radii: {inner} vs {outer} (relative {drift:.2e})")]
    MatchingDrift { inner: f64, outer: f64, drift: f64 },
    #[error("Wronskian drifted by {drift:.2e} (relative) before the turning point")]
    WronskianDrift { drift: f64 },
    #[error("step size underflow at r = {0}")]
    StepUnderflow(f64),
    #[error("phase calibration failed: {0}")]
    Calibration(#[from] RootError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledEnergy {
    pub value: f64,
    pub gap_ghz: f64,
}

pub fn scaled_energy(gap_ghz: f64, scales: &VdwScales) -> Result<ScaledEnergy, LongRangeError> {
    if gap_ghz.is_nan() || gap_ghz < 0.0 {
        return Err(LongRangeError::NegativeGap(gap_ghz));
    }
    let value = if gap_ghz == 0.0 { 0.0 } else { -gap_ghz * 1e3 / scales.energy_mhz };
    Ok(ScaledEnergy { value, gap_ghz })
}

const WRONSKIAN_GATE: f64 = 1e-8;
const MATCHING_GATE: f64 = 1e-6;
/// |eps| r_m^6 at the inner matching radius.
const MATCH_DOMINANCE: f64 = 1e6;
const OUTER_MATCH_FACTOR: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LongRangeSolver {
    /// inner standardization radius, in beta6
    pub r0: f64,
    /// additive phase of the short-range standardization (radians)
    pub phase_offset: f64,
    /// relative local error per step
    pub step_tol: f64,
}

impl Default for LongRangeSolver {
    fn default() -> Self {
        LongRangeSolver::from_dataset(Dataset::bundled())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiResult {
    pub chi: f64,
    /// value at the inner matching radius
    pub chi_inner: f64,
    pub r_match: f64,
    pub matching_drift: f64,
    pub wronskian_drift: f64,
    pub steps: usize,
}

/// Propagated reference functions on the adaptive grid. Past the turning
/// point both are rescaled together; `log_scale[k]` restores true values.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferencePair {
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub log_scale: Vec<f64>,
    pub wronskian: f64,
}

type State = [f64; 4];

fn rhs(r: f64, eps: f64, y: &State) -> State {
    let w = r.powi(-6) + eps;
    [y[1], -w * y[0], y[3], -w * y[2]]
}

fn rk4(r: f64, eps: f64, y: &State, h: f64) -> State {
    let add = |a: &State, b: &State, s: f64| [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2], a[3] + s * b[3]];
    let k1 = rhs(r, eps, y);
    let k2 = rhs(r + 0.5 * h, eps, &add(y, &k1, 0.5 * h));
    let k3 = rhs(r + 0.5 * h, eps, &add(y, &k2, 0.5 * h));
    let k4 = rhs(r + h, eps, &add(y, &k3, h));
    let mut out = *y;
    for i in 0..4 {
        out[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    out
}

/// Binomial coefficient C(1/2, n).
fn binom_half(n: usize) -> f64 {
    let mut c = 1.0;
    for j in 0..n {
        c *= (0.5 - j as f64) / (j as f64 + 1.0);
    }
    c
}

/// sum_k i^k a_k / y^k for the order-1/4 Bessel asymptotics, and its y-derivative.
fn hankel_series(y: f64) -> (Complex64, Complex64) {
    let mu = 0.25; // 4 nu^2 with nu = 1/4
    let mut a = 1.0;
    let mut ik = Complex64::new(1.0, 0.0);
    let mut s = Complex64::new(1.0, 0.0);
    let mut ds = Complex64::new(0.0, 0.0);
    for k in 1..30 {
        let kf = k as f64;
        a *= (mu - (2.0 * kf - 1.0).powi(2)) / (8.0 * kf);
        ik *= Complex64::i();
        let t = ik * a / y.powi(k);
        s += t;
        ds -= t * kf / y;
        if t.norm() < 1e-18 {
            break;
        }
    }
    (s, ds)
}

/// (u, u') at r of the standardized solution with base phase `phase`.
fn standardized(r: f64, eps: f64, phase: f64) -> (f64, f64) {
    let y = 0.5 / (r * r);
    let mut shift = 0.0;
    for n in 1..10 {
        let p = 6.0 * n as f64 - 2.0;
        let term = binom_half(n) * eps.powi(n as i32) * r.powf(p) / p;
        shift += term;
        if term.abs() < 1e-18 * y {
            break;
        }
    }
    let ye = y - shift;
    let x = 1.0 + eps * r.powi(6);
    let amp = x.powf(-0.25);
    let damp = -1.5 * eps * r.powi(5) * x.powf(-1.25);
    let k = (r.powi(-6) + eps).sqrt();
    let (s, ds) = hankel_series(ye);
    let a = (2.0 / PI).sqrt();
    let ph = Complex64::cis(ye + phase);
    let z = a * r.powf(1.5) * amp * s * ph;
    let dz =
        a * ph * ((1.5 * r.sqrt() * amp + r.powf(1.5) * damp) * s - r.powf(1.5) * amp * k * (ds + Complex64::i() * s));
    (z.re, dz.re)
}

struct Propagation {
    chi_at: Vec<f64>,
    wronskian_drift: f64,
    steps: usize,
    pair: Option<ReferencePair>,
}

impl LongRangeSolver {
    pub fn from_dataset(d: &Dataset) -> Self {
        LongRangeSolver { r0: 0.02, phase_offset: d.chi_phase_offset, step_tol: 1e-12 }
    }

    pub fn with_phase_offset(mut self, phase_offset: f64) -> Self {
        self.phase_offset = phase_offset;
        self
    }

    pub fn with_r0(mut self, r0: f64) -> Self {
        self.r0 = r0;
        self
    }

    pub fn with_step_tol(mut self, tol: f64) -> Self {
        self.step_tol = tol;
        self
    }

    /// Inner matching radius for this energy.
    pub fn matching_radius(eps: f64) -> f64 {
        (MATCH_DOMINANCE / eps.abs()).powf(1.0 / 6.0).max(1.0)
    }

    fn initial_state(&self, eps: f64) -> State {
        let (f, df) = standardized(self.r0, eps, -FRAC_PI_4 + self.phase_offset);
        let (g, dg) = standardized(self.r0, eps, FRAC_PI_4 + self.phase_offset);
        [f, df, g, dg]
    }

    fn propagate(&self, eps: f64, stops: &[f64], record: bool) -> Result<Propagation, LongRangeError> {
        if !(self.r0 > 0.0 && self.r0 <= 0.05) {
            return Err(LongRangeError::BadInnerRadius(self.r0));
        }
        let mut y = self.initial_state(eps);
        let w0 = y[0] * y[3] - y[1] * y[2];
        let r_turn = eps.abs().powf(-1.0 / 6.0);
        let mut r = self.r0;
        let scale_of = |r: f64| (r.powi(-6) + eps.abs()).sqrt();
        let mut h = 1e-3 / scale_of(r);
        let mut steps = 0usize;
        let mut w_drift = 0.0f64;
        let mut log_scale = 0.0f64;
        let mut chi_at = Vec::with_capacity(stops.len());
        let mut pair = record.then(|| ReferencePair {
            r: vec![r],
            f: vec![y[0]],
            g: vec![y[2]],
            log_scale: vec![0.0],
            wronskian: w0,
        });
        for &stop in stops {
            while r < stop {
                let remaining = stop - r;
                let mut hh = h.min(remaining);
                let clipped = hh < h;
                let (y_new, err) = loop {
                    let full = rk4(r, eps, &y, hh);
                    let mid = rk4(r, eps, &y, 0.5 * hh);
                    let half = rk4(r + 0.5 * hh, eps, &mid, 0.5 * hh);
                    let w = scale_of(r + hh);
                    let pair_err = |i: usize| {
                        let du = half[i] - full[i];
                        let dv = (half[i + 1] - full[i + 1]) / w;
                        let n = (half[i] * half[i] + (half[i + 1] / w).powi(2)).sqrt();
                        (du * du + dv * dv).sqrt() / n.max(f64::MIN_POSITIVE)
                    };
                    let err = pair_err(0).max(pair_err(2));
                    if err <= self.step_tol {
                        let mut out = half;
                        for i in 0..4 {
                            out[i] += (half[i] - full[i]) / 15.0;
                        }
                        break (out, err);
                    }
                    hh *= (0.9 * (self.step_tol / err).powf(0.2)).max(0.2);
                    if hh < 1e-15 * r {
                        return Err(LongRangeError::StepUnderflow(r));
                    }
                };
                let reached = hh >= remaining;
                r = if reached { stop } else { r + hh };
                y = y_new;
                steps += 1;
                if !(clipped && reached) {
                    let growth = if err > 0.0 { (0.9 * (self.step_tol / err).powf(0.2)).clamp(0.2, 4.0) } else { 4.0 };
                    h = hh * growth;
                }
                if r <= r_turn {
                    let wr = y[0] * y[3] - y[1] * y[2];
                    w_drift = w_drift.max(((wr - w0) / w0).abs());
                } else {
                    let big = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                    if big > 1e100 {
                        for v in y.iter_mut() {
                            *v /= big;
                        }
                        log_scale += big.ln();
                    }
                }
                if let Some(p) = pair.as_mut() {
                    p.r.push(r);
                    p.f.push(y[0]);
                    p.g.push(y[2]);
                    p.log_scale.push(log_scale);
                }
            }
            chi_at.push(project_growing(eps, r, &y));
        }
        if w_drift > WRONSKIAN_GATE {
            return Err(LongRangeError::WronskianDrift { drift: w_drift });
        }
        Ok(Propagation { chi_at, wronskian_drift: w_drift, steps, pair })
    }

    pub fn chi_c(&self, e: ScaledEnergy) -> Result<ChiResult, LongRangeError> {
        let eps = e.value;
        if eps.is_nan() || eps >= 0.0 {
            return Err(LongRangeError::NotClosed(eps));
        }
        let rm = Self::matching_radius(eps);
        let p = self.propagate(eps, &[rm, OUTER_MATCH_FACTOR * rm], false)?;
        let (inner, outer) = (p.chi_at[0], p.chi_at[1]);
        let drift = (inner - outer).abs() / outer.abs().max(1.0);
        if drift > MATCHING_GATE {
            return Err(LongRangeError::MatchingDrift { inner, outer, drift });
        }
        Ok(ChiResult {
            chi: outer,
            chi_inner: inner,
            r_match: OUTER_MATCH_FACTOR * rm,
            matching_drift: drift,
            wronskian_drift: p.wronskian_drift,
            steps: p.steps,
        })
    }

    pub fn chi_at_gap(&self, gap_ghz: f64, scales: &VdwScales) -> Result<ChiResult, LongRangeError> {
        self.chi_c(scaled_energy(gap_ghz, scales)?)
    }

    /// f and g on the propagation grid out to the outer matching radius.
    pub fn reference_pair(&self, e: ScaledEnergy) -> Result<ReferencePair, LongRangeError> {
        if e.value.is_nan() || e.value >= 0.0 {
            return Err(LongRangeError::NotClosed(e.value));
        }
        let rm = Self::matching_radius(e.value);
        let p = self.propagate(e.value, &[OUTER_MATCH_FACTOR * rm], true)?;
        Ok(p.pair.expect("recording requested"))
    }

    /// Phase offset that makes chi at `e` equal `target`, searched within
    /// +-`window` radians of the current offset.
    pub fn calibrate(&self, e: ScaledEnergy, target: f64, window: f64) -> Result<f64, LongRangeError> {
        let f = |delta: f64| self.with_phase_offset(delta).chi_c(e).map(|c| c.chi - target);
        let lo = self.phase_offset - window;
        let hi = self.phase_offset + window;
        Ok(brent(f, lo, hi, 1e-13)??)
    }
}

/// Growing-exponential coefficient ratio at r using the local WKB momentum
/// q = sqrt(|eps| - r^-6), which removes the decaying admixture.
fn project_growing(eps: f64, r: f64, y: &State) -> f64 {
    let q2 = -eps - r.powi(-6);
    let q = q2.sqrt();
    let c = q + 1.5 * r.powi(-7) / q2;
    (y[1] + c * y[0]) / (y[3] + c * y[2])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scales() -> VdwScales {
        let d = Dataset::bundled();
        d.vdw_scales(&d.rb_pair())
    }

    #[test]
    fn scaled_energy_values() {
        let s = scales();
        assert_eq!(scaled_energy(0.0, &s).unwrap().value, 0.0);
        let e = scaled_energy(3.799, &s).unwrap().value;
        assert!(e < -2000.0 && e > -3000.0, "{e}");
        let e = scaled_energy(6.8347, &s).unwrap().value;
        assert!(e < -4000.0 && e > -5000.0, "{e}");
        assert!(scaled_energy(-1.0, &s).is_err());
    }

    #[test]
    fn standardization_wronskian() {
        // W = f g' - f' g = 2/pi for the standardized pair
        for eps in [-1.0, -2500.0] {
            let (f, df) = standardized(0.03, eps, -FRAC_PI_4);
            let (g, dg) = standardized(0.03, eps, FRAC_PI_4);
            assert!(((f * dg - df * g) - 2.0 / PI).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_open_energies() {
        let s = LongRangeSolver::default();
        assert!(matches!(s.chi_c(ScaledEnergy { value: 0.0, gap_ghz: 0.0 }), Err(LongRangeError::NotClosed(_))));
    }

    #[test]
    fn reference_pair_keeps_wronskian_before_turning_point() {
        let s = LongRangeSolver::default();
        let e = ScaledEnergy { value: -50.0, gap_ghz: 0.0 };
        let p = s.reference_pair(e).unwrap();
        let rt = 50f64.powf(-1.0 / 6.0);
        assert!(p.r.len() > 100);
        let last_inside = p.r.iter().rposition(|&r| r < rt).unwrap();
        assert_eq!(p.log_scale[last_inside], 0.0);
    }
}
