//! Exact half-integer arithmetic for angular-momentum quantum numbers.

use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
#[error("{0} is not a half-integer")]
pub struct NotHalfInteger(pub f64);

/// A value `k/2` with integer `k`, stored as `k`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Deserialize)]
#[serde(try_from = "f64")]
pub struct HalfInt(i32);

impl HalfInt {
    pub const ZERO: HalfInt = HalfInt(0);
    pub const HALF: HalfInt = HalfInt(1);
    pub const ONE: HalfInt = HalfInt(2);

    pub const fn from_twice(twice: i32) -> Self {
        HalfInt(twice)
    }

    pub const fn integer(n: i32) -> Self {
        HalfInt(2 * n)
    }

    pub fn new(value: f64) -> Result<Self, NotHalfInteger> {
        let t = 2.0 * value;
        if !t.is_finite() || (t - t.round()).abs() > 1e-9 || t.abs() > 1e6 {
            return Err(NotHalfInteger(value));
        }
        Ok(HalfInt(t.round() as i32))
    }

    pub const fn twice(self) -> i32 {
        self.0
    }

    pub fn value(self) -> f64 {
        f64::from(self.0) / 2.0
    }

    pub const fn is_integer(self) -> bool {
        self.0 % 2 == 0
    }

    pub fn abs(self) -> Self {
        HalfInt(self.0.abs())
    }

    /// `-j, -j+1, ..., j`
    pub fn projections(self) -> impl Iterator<Item = HalfInt> {
        let j = self.0;
        (-j..=j).step_by(2).map(HalfInt)
    }

    /// `lo, lo+1, ..., hi`
    pub fn range_inclusive(lo: HalfInt, hi: HalfInt) -> impl Iterator<Item = HalfInt> {
        (lo.0..=hi.0).step_by(2).map(HalfInt)
    }
}

impl TryFrom<f64> for HalfInt {
    type Error = NotHalfInteger;
    fn try_from(v: f64) -> Result<Self, Self::Error> {
        HalfInt::new(v)
    }
}

impl Add for HalfInt {
    type Output = HalfInt;
    fn add(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 + o.0)
    }
}

impl Sub for HalfInt {
    type Output = HalfInt;
    fn sub(self, o: HalfInt) -> HalfInt {
        HalfInt(self.0 - o.0)
    }
}

impl Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt(-self.0)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_integer() {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

impl fmt::Debug for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for HalfInt {
    type Err = NotHalfInteger;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let n: i32 = num.trim().parse().map_err(|_| NotHalfInteger(f64::NAN))?;
            return match den.trim() {
                "2" => Ok(HalfInt(n)),
                "1" => Ok(HalfInt(2 * n)),
                _ => Err(NotHalfInteger(f64::NAN)),
            };
        }
        let v: f64 = s.parse().map_err(|_| NotHalfInteger(f64::NAN))?;
        HalfInt::new(v)
    }
}
