//! Gamma-function family for real arguments, including negative ones.

use std::f64::consts::PI;

/// B_2, B_4, ..., B_20
const BERNOULLI_EVEN: [f64; 10] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
];

const STIRLING_MIN: f64 = 15.0;

/// Below this, `gamma_ratio_half` recurs upward before using its series.
pub const RATIO_ASYMPTOTIC_MIN: f64 = 12.0;

/// sin(pi x) with the argument reduced exactly.
pub fn sin_pi(x: f64) -> f64 {
    let n = x.round();
    let f = x - n;
    let s = (PI * f).sin();
    if (n as i64) % 2 == 0 {
        s
    } else {
        -s
    }
}

fn ln_gamma_stirling(x: f64) -> f64 {
    let mut sum = 0.0;
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut p = inv;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2.0 * (k as f64 + 1.0);
        sum += b / (n * (n - 1.0)) * p;
        p *= inv2;
    }
    (x - 0.5) * x.ln() - x + 0.5 * (2.0 * PI).ln() + sum
}

/// (ln|Gamma(x)|, sign of Gamma(x)); `(inf, 1)` at the poles.
pub fn ln_gamma(x: f64) -> (f64, f64) {
    if x.is_nan() {
        return (f64::NAN, 1.0);
    }
    if x <= 0.0 && x == x.floor() {
        return (f64::INFINITY, 1.0);
    }
    if x < 0.5 {
        let s = sin_pi(x);
        let (lg, sg) = ln_gamma(1.0 - x);
        return ((PI / s.abs()).ln() - lg, s.signum() * sg);
    }
    let mut shift = 0.0;
    let mut y = x;
    while y < STIRLING_MIN {
        shift += y.ln();
        y += 1.0;
    }
    (ln_gamma_stirling(y) - shift, 1.0)
}

pub fn gamma(x: f64) -> f64 {
    let (l, s) = ln_gamma(x);
    s * l.exp()
}

/// 1/Gamma(x), zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    let (l, s) = ln_gamma(x);
    if l.is_infinite() {
        return 0.0;
    }
    s * (-l).exp()
}

/// Distance from x to the nearest non-positive integer (infinite for x > 0.5).
pub fn pole_distance(x: f64) -> f64 {
    if x > 0.5 {
        return f64::INFINITY;
    }
    (x - x.round()).abs()
}

fn ln_ratio_half_asymptotic(y: f64) -> f64 {
    // ln Gamma(y) - ln Gamma(y + 1/2) for large y; only odd powers survive
    let inv = 1.0 / y;
    let inv2 = inv * inv;
    let mut p = inv;
    let mut sum = 0.0;
    for (k, b) in BERNOULLI_EVEN.iter().enumerate().take(9) {
        let n = (2 * k + 1) as f64;
        sum += b * (2.0 - 0.5f64.powi(2 * k as i32 + 1)) / (n * (n + 1.0)) * p;
        p *= inv2;
    }
    -0.5 * y.ln() + sum
}

/// Gamma(y) / Gamma(y + 1/2). Infinite at poles of Gamma(y), zero at
/// poles of Gamma(y + 1/2).
pub fn gamma_ratio_half(y: f64) -> f64 {
    if y >= RATIO_ASYMPTOTIC_MIN {
        return ln_ratio_half_asymptotic(y).exp();
    }
    let steps = (RATIO_ASYMPTOTIC_MIN - y).ceil() as usize;
    let mut r = ln_ratio_half_asymptotic(y + steps as f64).exp();
    for j in (0..steps).rev() {
        let t = y + j as f64;
        r *= (t + 0.5) / t;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn known_values() {
        assert!(rel(gamma(0.5), PI.sqrt()) < 1e-14);
        assert!(rel(gamma(5.0), 24.0) < 1e-14);
        assert!(rel(gamma(0.25), 3.625_609_908_221_908) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-1.5), 4.0 / 3.0 * PI.sqrt()) < 1e-14);
        assert_eq!(rgamma(-3.0), 0.0);
        assert_eq!(rgamma(0.0), 0.0);
    }

    #[test]
    fn matches_statrs() {
        for &x in &[0.1, 0.7, 1.3, 2.5, 7.9, 14.2, 33.3, 120.5] {
            let (l, s) = ln_gamma(x);
            assert_eq!(s, 1.0);
            assert!((l - statrs::function::gamma::ln_gamma(x)).abs() < 2e-14 * l.abs().max(1.0), "{x}");
        }
        for &x in &[-0.3, -1.7, -4.2, -10.6] {
            assert!(rel(gamma(x), statrs::function::gamma::gamma(x)) < 1e-12, "{x}");
        }
    }

    #[test]
    fn ratio_half_against_direct() {
        for &y in &[-7.3, -2.9, -0.2, 0.4, 1.0, 3.3, 11.9, 12.0, 25.5, 60.0] {
            let (l0, s0) = ln_gamma(y);
            let (l1, s1) = ln_gamma(y + 0.5);
            let direct = s0 * s1 * (l0 - l1).exp();
            assert!(rel(gamma_ratio_half(y), direct) < 1e-13, "{y}");
        }
        assert_eq!(gamma_ratio_half(-1.5), 0.0);
        assert!(gamma_ratio_half(-2.0).is_infinite());
        assert!(rel(gamma_ratio_half(1e6), 1e-3 * (1.0 + 1.0 / 8e6 + 1.0 / 128e12)) < 4e-15);
    }

    #[test]
    fn pole_distance_values() {
        assert!((pole_distance(-2.1) - 0.1).abs() < 1e-12);
        assert_eq!(pole_distance(3.0), f64::INFINITY);
        assert!((pole_distance(0.2) - 0.2).abs() < 1e-15);
    }
}
