//! 2F1(1, x; x + 1/2; z) on the unit circle.
//!
//! On |z| = 1 the series converges only conditionally (c - a - b = -1/2).
//! Repeated summation by parts,
//!
//!   sum a_k z^k = (1 - z)^-p  sum (Delta^p a)_k z^k,
//!
//! turns it into an absolutely convergent series whose terms decay like
//! k^(-p-1/2). Truncation is controlled by a tail bound on those terms and
//! an estimate of rounding amplified by the differencing.

use num_complex::Complex64;
use thiserror::Error;

use crate::special::{gamma_ratio_half, RATIO_ASYMPTOTIC_MIN};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HypError {
    #[error("z = 1 is a divergent point of the series (phi = {0})")]
    DivergentPoint(f64),
    #[error("series coefficients have a pole: x + 1/2 = {0} is a non-positive integer")]
    CoefficientPole(f64),
    #[error("|z| = {0} is outside the disc of convergence of the plain series")]
    OutsideDisc(f64),
    #[error("error estimate {estimate:.3e} exceeds the accuracy gate at x = {x}")]
    AccuracyNotMet { x: f64, estimate: f64 },
}

const ORDER: usize = 6;
const DIFF: [f64; ORDER + 1] = [1.0, -6.0, 15.0, -20.0, 15.0, -6.0, 1.0];
const MAX_TERMS: usize = 1 << 21;
/// Relative tolerance the truncation aims for.
const TARGET: f64 = 2e-15;
/// Relative error estimate beyond which a result is refused.
pub const ACCURACY_GATE: f64 = 1e-8;

/// p-th backward difference of a stream padded with zeros on the left.
struct Differencer {
    hist: [f64; ORDER + 1],
}

impl Differencer {
    fn new() -> Self {
        Differencer { hist: [0.0; ORDER + 1] }
    }

    fn push(&mut self, a: f64) -> f64 {
        self.hist.copy_within(0..ORDER, 1);
        self.hist[0] = a;
        self.hist.iter().zip(DIFF).map(|(h, c)| h * c).sum()
    }
}

/// Streams r(y0 + k) = Gamma(y0+k)/Gamma(y0+k+1/2) for y0 >= 12, with an
/// exact re-anchor every few steps so recurrence drift stays bounded.
struct RatioStream {
    y: f64,
    r: f64,
    since_anchor: usize,
}

const ANCHOR_EVERY: usize = 32;

impl RatioStream {
    fn new(y0: f64) -> Self {
        debug_assert!(y0 >= RATIO_ASYMPTOTIC_MIN);
        RatioStream { y: y0, r: gamma_ratio_half(y0), since_anchor: 0 }
    }

    fn next(&mut self) -> f64 {
        let out = self.r;
        self.since_anchor += 1;
        if self.since_anchor == ANCHOR_EVERY {
            self.y += 1.0;
            self.r = gamma_ratio_half(self.y);
            self.since_anchor = 0;
        } else {
            self.r *= self.y / (self.y + 0.5);
            self.y += 1.0;
        }
        out
    }
}

/// Gamma(p + 1/2) / sqrt(pi): leading coefficient of the p-th difference
/// of r(y), |Delta^p r(y)| ~ DIFF_LEAD y^(-p-1/2).
const DIFF_LEAD: f64 = 162.421_875;

/// Bookkeeping shared by the two summation front ends. Measured
/// differences sink into a rounding floor, so the tail is bounded from the
/// asymptotic form instead; checkpoints keep x + k in the hundreds.
struct Control {
    one_minus_z_pow: f64,
    x: f64,
    coef_scale: f64,
    sq_terms: f64,
}

impl Control {
    fn new(min_abs_one_minus_z: f64, x: f64, coef_scale: f64) -> Self {
        Control { one_minus_z_pow: min_abs_one_minus_z.powi(ORDER as i32), x, coef_scale, sq_terms: 0.0 }
    }

    fn observe(&mut self, a: f64) {
        self.sq_terms += a * a;
    }

    /// (truncation bound, rounding estimate), both absolute, after n terms.
    fn bounds(&self, n: usize) -> (f64, f64) {
        let q = ORDER as f64 - 0.5;
        let trunc = 2.0 * DIFF_LEAD * self.coef_scale * (self.x + n as f64).powf(-q) / q / self.one_minus_z_pow;
        let round = 64.0 * f64::EPSILON * self.sq_terms.sqrt() / self.one_minus_z_pow;
        (trunc, round)
    }
}

fn first_checkpoint(x: f64) -> usize {
    let lead = if x < 0.0 { (2.0 * -x) as usize } else { 0 };
    (512 + lead).next_power_of_two()
}

/// Result of a unit-circle summation with its absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summed<T> {
    pub value: T,
    pub error: f64,
    pub terms: usize,
}

fn check_phi(phi: f64) -> Result<(), HypError> {
    let t = phi.rem_euclid(2.0 * std::f64::consts::PI);
    if !phi.is_finite() || t < 1e-12 || 2.0 * std::f64::consts::PI - t < 1e-12 {
        return Err(HypError::DivergentPoint(phi));
    }
    Ok(())
}

/// Coefficients c_k = (x)_k / (x + 1/2)_k of 2F1(1, x; x + 1/2; z).
struct CoefStream {
    x: f64,
    k: usize,
    c: f64,
    switch_at: usize,
    tail: Option<(f64, RatioStream)>,
}

impl CoefStream {
    fn new(x: f64) -> Self {
        let switch_at = (RATIO_ASYMPTOTIC_MIN - x).ceil().max(0.0) as usize;
        CoefStream { x, k: 0, c: 1.0, switch_at, tail: None }
    }

    fn next(&mut self) -> f64 {
        if self.k == self.switch_at && self.tail.is_none() {
            let y0 = self.x + self.k as f64;
            let stream = RatioStream::new(y0);
            // c_k = c_K * r(x + k) / r(x + K)
            let scale = self.c / stream.r;
            self.tail = Some((scale, stream));
        }
        let out = match self.tail.as_mut() {
            Some((scale, stream)) => *scale * stream.next(),
            None => {
                let out = self.c;
                let t = self.x + self.k as f64;
                self.c *= t / (t + 0.5);
                out
            }
        };
        self.k += 1;
        out
    }
}

/// 2F1(1, x; x + 1/2; e^{i phi}).
pub fn hyp2f1_unit_circle(x: f64, phi: f64) -> Result<Complex64, HypError> {
    hyp2f1_unit_circle_detailed(x, phi).map(|s| s.value)
}

pub fn hyp2f1_unit_circle_detailed(x: f64, phi: f64) -> Result<Summed<Complex64>, HypError> {
    check_phi(phi)?;
    let c = x + 0.5;
    if c <= 0.0 && (c - c.round()).abs() < 1e-12 {
        return Err(HypError::CoefficientPole(c));
    }
    let phi = phi.rem_euclid(2.0 * std::f64::consts::PI);
    if phi > std::f64::consts::PI {
        let s = hyp2f1_unit_circle_detailed(x, 2.0 * std::f64::consts::PI - phi)?;
        return Ok(Summed { value: s.value.conj(), ..s });
    }
    if 2.0 * (0.5 * phi).sin() <= CONNECTION_RADIUS {
        return near_one(x, phi);
    }
    let z = Complex64::cis(phi);
    let one_minus_z = Complex64::new(1.0, 0.0) - z;
    let mut coef = CoefStream::new(x);
    let mut diff = Differencer::new();
    let mut ctl = Control::new(one_minus_z.norm(), x, 1.0 / gamma_ratio_half(x).abs());
    let mut acc = Complex64::new(0.0, 0.0);
    let mut k = 0usize;
    let mut checkpoint = first_checkpoint(x);
    loop {
        while k < checkpoint {
            let a = coef.next();
            let d = diff.push(a);
            ctl.observe(a);
            if d != 0.0 {
                acc += d * Complex64::cis(phi * k as f64);
            }
            k += 1;
        }
        let value = acc / one_minus_z.powi(ORDER as i32);
        let (trunc, round) = ctl.bounds(k);
        let scale = value.norm().max(f64::MIN_POSITIVE);
        if trunc <= TARGET * scale || k >= MAX_TERMS {
            let error = trunc + round;
            if error > ACCURACY_GATE * scale {
                return Err(HypError::AccuracyNotMet { x, estimate: error / scale });
            }
            return Ok(Summed { value, error, terms: k });
        }
        checkpoint *= 2;
    }
}

/// Below this |1 - z| the z -> 1 - z connection formula is used instead of
/// summation by parts, whose rounding grows like (2/|1 - z|)^p.
const CONNECTION_RADIUS: f64 = 0.75;

/// With a = 1, b = x, c = x + 1/2 the connection formula collapses to
///
///   (1 - 2x) 2F1(1, x; 3/2; 1 - z) + sqrt(pi) Gamma(x + 1/2)/Gamma(x) (1 - z)^(-1/2) z^(1/2 - x),
///
/// where the second hypergeometric function reduced to a power of z.
fn near_one(x: f64, phi: f64) -> Result<Summed<Complex64>, HypError> {
    let z = Complex64::cis(phi);
    let w = Complex64::new(1.0, 0.0) - z;
    let (series, err) = gauss_series_1x(x, w)?;
    let tail = std::f64::consts::PI.sqrt() / gamma_ratio_half(x) * w.powf(-0.5) * Complex64::cis((0.5 - x) * phi);
    let value = (1.0 - 2.0 * x) * series + tail;
    let error = (1.0 - 2.0 * x).abs() * err + 8.0 * f64::EPSILON * tail.norm();
    let scale = value.norm().max(f64::MIN_POSITIVE);
    if error > ACCURACY_GATE * scale {
        return Err(HypError::AccuracyNotMet { x, estimate: error / scale });
    }
    Ok(Summed { value, error, terms: 0 })
}

/// 2F1(1, x; 3/2; w) for |w| < 1, with an absolute error estimate.
fn gauss_series_1x(x: f64, w: Complex64) -> Result<(Complex64, f64), HypError> {
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    let mut biggest = 1.0f64;
    for k in 0..20_000 {
        let kf = k as f64;
        term *= (x + kf) / (1.5 + kf) * w;
        sum += term;
        biggest = biggest.max(term.norm());
        if term.norm() <= 1e-17 * sum.norm().max(1e-300) && kf > -x {
            let err = 4.0 * f64::EPSILON * biggest * (kf + 1.0).sqrt() + term.norm();
            return Ok((sum, err));
        }
    }
    Err(HypError::AccuracyNotMet { x, estimate: term.norm() / sum.norm() })
}

/// Plain Gauss series inside the unit disc (|z| <= 0.9).
pub fn hyp2f1_series(a: f64, b: f64, c: f64, z: Complex64) -> Result<Complex64, HypError> {
    if c <= 0.0 && (c - c.round()).abs() < 1e-12 {
        return Err(HypError::CoefficientPole(c));
    }
    if z.norm() > 0.9 {
        return Err(HypError::OutsideDisc(z.norm()));
    }
    let mut term = Complex64::new(1.0, 0.0);
    let mut sum = term;
    for k in 0..10_000 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((c + kf) * (kf + 1.0)) * z;
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            return Ok(sum);
        }
    }
    Err(HypError::AccuracyNotMet { x: b, estimate: term.norm() / sum.norm() })
}

/// For m = 1..n-1, S_m = sum_k r_k z_m^k with r_k = Gamma(x+k)/Gamma(x+k+1/2)
/// and z_m = exp(2 pi i m / n). That is Gamma(x)/Gamma(x+1/2) times
/// 2F1(1, x; x+1/2; z_m), finite even where the 2F1 coefficients have poles.
///
/// Because z_m^k depends only on k mod n, the differenced terms are
/// collected in n real residue sums and each S_m costs O(n) at the end.
pub fn scaled_root_sums(x: f64, n: usize) -> Result<Summed<Vec<Complex64>>, HypError> {
    if n < 2 {
        return Ok(Summed { value: Vec::new(), error: 0.0, terms: 0 });
    }
    let roots: Vec<Complex64> =
        (0..n).map(|m| Complex64::cis(2.0 * std::f64::consts::PI * m as f64 / n as f64)).collect();
    let min_gap = 2.0 * (std::f64::consts::PI / n as f64).sin();
    let mut residues = vec![0.0f64; n];
    let mut diff = Differencer::new();
    let mut ctl = Control::new(min_gap, x, 1.0);
    let switch_at = (RATIO_ASYMPTOTIC_MIN - x).ceil().max(0.0) as usize;
    let mut stream: Option<RatioStream> = None;
    let mut k = 0usize;
    let mut checkpoint = first_checkpoint(x);
    loop {
        while k < checkpoint {
            let a = if k < switch_at {
                gamma_ratio_half(x + k as f64)
            } else {
                stream.get_or_insert_with(|| RatioStream::new(x + k as f64)).next()
            };
            let d = diff.push(a);
            ctl.observe(a);
            residues[k % n] += d;
            k += 1;
        }
        let sums: Vec<Complex64> = (1..n)
            .map(|m| {
                let z = roots[m];
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, t) in residues.iter().enumerate() {
                    acc += t * roots[(j * m) % n];
                }
                acc / (Complex64::new(1.0, 0.0) - z).powi(ORDER as i32)
            })
            .collect();
        let (trunc, round) = ctl.bounds(k);
        let scale = sums.iter().map(|s| s.norm()).fold(0.0, f64::max).max(1e-300);
        if trunc <= TARGET * scale || k >= MAX_TERMS {
            let error = trunc + round;
            if error > ACCURACY_GATE * scale.max(1.0) {
                return Err(HypError::AccuracyNotMet { x, estimate: error / scale });
            }
            return Ok(Summed { value: sums, error, terms: k });
        }
        checkpoint *= 2;
    }
}
