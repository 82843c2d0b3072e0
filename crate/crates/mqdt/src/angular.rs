//! Clebsch-Gordan coefficients, channel enumeration at fixed total
//! projection M, and the recoupling matrix between fragmentation
//! channels |F1 mF1; F2 mF2> and short-range eigenchannels |S MS; I MI>.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::halfint::{HalfInt, NotHalfInteger};
use crate::physics::SpeciesPair;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AngularError {
    #[error(transparent)]
    NotHalfInteger(#[from] NotHalfInteger),
    #[error("angular momentum too large for the factorial table (2j = {0})")]
    TooLarge(i32),
    #[error("frame transform needs square input: {frag} fragmentation vs {eigen} eigenchannels")]
    DimensionMismatch { frag: usize, eigen: usize },
    #[error("cannot parse channel label `{0}`")]
    BadLabel(String),
}

const MAX_FACTORIAL: usize = 128;

fn ln_factorials() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; MAX_FACTORIAL + 1];
        for k in 1..=MAX_FACTORIAL {
            t[k] = t[k - 1] + (k as f64).ln();
        }
        t
    })
}

/// <j1 m1 j2 m2 | J M> (Condon-Shortley) from exact half-integer arguments.
pub fn cg(j1: HalfInt, m1: HalfInt, j2: HalfInt, m2: HalfInt, j: HalfInt, m: HalfInt) -> f64 {
    let (j1, m1, j2, m2, j, m) = (j1.twice(), m1.twice(), j2.twice(), m2.twice(), j.twice(), m.twice());
    if m1 + m2 != m || j1 < 0 || j2 < 0 || j < 0 {
        return 0.0;
    }
    if m1.abs() > j1 || m2.abs() > j2 || m.abs() > j {
        return 0.0;
    }
    if (j1 + m1) % 2 != 0 || (j2 + m2) % 2 != 0 || (j + m) % 2 != 0 {
        return 0.0;
    }
    if j > j1 + j2 || j < (j1 - j2).abs() || (j1 + j2 + j) % 2 != 0 {
        return 0.0;
    }
    // all factorial arguments below are (sums of twice-values)/2
    let h = |t: i32| -> usize { (t / 2) as usize };
    let lf = ln_factorials();
    let f = |t: i32| lf[h(t)];

    let pre = ((j + 1) as f64).ln() + f(j + j1 - j2) + f(j - j1 + j2) + f(j1 + j2 - j) - f(j1 + j2 + j + 2)
        + f(j + m)
        + f(j - m)
        + f(j1 - m1)
        + f(j1 + m1)
        + f(j2 - m2)
        + f(j2 + m2);

    let kmin = 0.max(j2 - j - m1).max(j1 - j + m2) / 2;
    let kmax = (j1 + j2 - j).min(j1 - m1).min(j2 + m2) / 2;
    let mut sum = 0.0;
    for k in kmin..=kmax {
        let k2 = 2 * k;
        let den =
            f(k2) + f(j1 + j2 - j - k2) + f(j1 - m1 - k2) + f(j2 + m2 - k2) + f(j - j2 + m1 + k2) + f(j - j1 - m2 + k2);
        let term = (0.5 * pre - den).exp();
        sum += if k % 2 == 0 { term } else { -term };
    }
    sum
}

/// Checked entry point taking real arguments.
pub fn clebsch_gordan(j1: f64, m1: f64, j2: f64, m2: f64, j: f64, m: f64) -> Result<f64, AngularError> {
    let args = [j1, m1, j2, m2, j, m].map(HalfInt::new);
    let mut h = [HalfInt::ZERO; 6];
    for (slot, a) in h.iter_mut().zip(args) {
        *slot = a?;
    }
    if (h[0].twice() + h[2].twice() + h[4].twice()) as usize > 2 * MAX_FACTORIAL - 4 {
        return Err(AngularError::TooLarge(h[0].twice().max(h[2].twice()).max(h[4].twice())));
    }
    Ok(cg(h[0], h[1], h[2], h[3], h[4], h[5]))
}

/// Quantum numbers of a fragmentation channel, written `F1,mF1;F2,mF2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ChannelLabel {
    pub f1: HalfInt,
    pub m1: HalfInt,
    pub f2: HalfInt,
    pub m2: HalfInt,
}

impl ChannelLabel {
    pub fn new(f1: HalfInt, m1: HalfInt, f2: HalfInt, m2: HalfInt) -> Self {
        ChannelLabel { f1, m1, f2, m2 }
    }

    pub fn from_ints(f1: i32, m1: i32, f2: i32, m2: i32) -> Self {
        ChannelLabel::new(HalfInt::integer(f1), HalfInt::integer(m1), HalfInt::integer(f2), HalfInt::integer(m2))
    }

    pub fn projection(&self) -> HalfInt {
        self.m1 + self.m2
    }

    /// The short `{mF1;mF2}` form.
    pub fn short(&self) -> String {
        format!("{{{};{}}}", self.m1, self.m2)
    }
}

impl fmt::Display for ChannelLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.f1, self.m1, self.f2, self.m2)
    }
}

fn parse_quad(s: &str) -> Result<[HalfInt; 4], AngularError> {
    let bad = || AngularError::BadLabel(s.to_string());
    let t = s.trim().trim_start_matches(['(', '{']).trim_end_matches([')', '}']);
    let (a, b) = t.split_once(';').ok_or_else(bad)?;
    let (p, q) = a.split_once(',').ok_or_else(bad)?;
    let (r, u) = b.split_once(',').ok_or_else(bad)?;
    let mut out = [HalfInt::ZERO; 4];
    for (slot, txt) in out.iter_mut().zip([p, q, r, u]) {
        *slot = txt.parse().map_err(|_| bad())?;
    }
    Ok(out)
}

impl FromStr for ChannelLabel {
    type Err = AngularError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [f1, m1, f2, m2] = parse_quad(s)?;
        Ok(ChannelLabel { f1, m1, f2, m2 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FragChannel {
    pub label: ChannelLabel,
    pub m_total: HalfInt,
    pub threshold_ghz: f64,
}

impl FragChannel {
    pub fn new(pair: &SpeciesPair, label: ChannelLabel) -> Self {
        FragChannel { label, m_total: label.projection(), threshold_ghz: pair.threshold_ghz(label.f1, label.f2) }
    }
}

/// Short-range eigenchannel, written `S,MS;I,MI`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EigenLabel {
    pub s: HalfInt,
    pub ms: HalfInt,
    pub i: HalfInt,
    pub mi: HalfInt,
}

impl EigenLabel {
    pub fn from_ints(s: i32, ms: i32, i: i32, mi: i32) -> Self {
        EigenLabel {
            s: HalfInt::integer(s),
            ms: HalfInt::integer(ms),
            i: HalfInt::integer(i),
            mi: HalfInt::integer(mi),
        }
    }

    pub fn is_triplet(&self) -> bool {
        self.s == HalfInt::ONE
    }
}

impl fmt::Display for EigenLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{};{},{})", self.s, self.ms, self.i, self.mi)
    }
}

impl FromStr for EigenLabel {
    type Err = AngularError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let [s_, ms, i, mi] = parse_quad(s)?;
        Ok(EigenLabel { s: s_, ms, i, mi })
    }
}

pub type EigenChannel = EigenLabel;

pub fn channel_threshold(pair: &SpeciesPair, c: &ChannelLabel) -> f64 {
    pair.threshold_ghz(c.f1, c.f2)
}

fn frag_order(a: &FragChannel, b: &FragChannel) -> Ordering {
    a.threshold_ghz.total_cmp(&b.threshold_ghz).then_with(|| a.label.cmp(&b.label))
}

/// Ascending threshold, then lexicographic in (F1, mF1, F2, mF2).
pub fn enumerate_frag_channels(pair: &SpeciesPair, m: HalfInt) -> Vec<FragChannel> {
    let mut out = Vec::new();
    for f1 in [pair.first.lower_f(), pair.first.upper_f()] {
        for m1 in f1.projections() {
            for f2 in [pair.second.lower_f(), pair.second.upper_f()] {
                let m2 = m - m1;
                if m2.abs() <= f2 && (m2 - f2).is_integer() {
                    out.push(FragChannel::new(pair, ChannelLabel::new(f1, m1, f2, m2)));
                }
            }
        }
    }
    out.sort_by(frag_order);
    out
}

/// S ascending, then I, then MS.
pub fn enumerate_eigenchannels(pair: &SpeciesPair, m: HalfInt) -> Vec<EigenChannel> {
    let (i1, i2) = (pair.first.nuclear_spin, pair.second.nuclear_spin);
    let mut out = Vec::new();
    for s in [HalfInt::ZERO, HalfInt::ONE] {
        for i in HalfInt::range_inclusive((i1 - i2).abs(), i1 + i2) {
            for ms in s.projections() {
                let mi = m - ms;
                if mi.abs() <= i && (mi - i).is_integer() {
                    out.push(EigenLabel { s, ms, i, mi });
                }
            }
        }
    }
    out.sort_by_key(|e| (e.s, e.i, e.ms));
    out
}

/// U_{i alpha}: rows follow `frag`, columns follow `eigen`.
pub fn frame_transform(
    pair: &SpeciesPair,
    frag: &[FragChannel],
    eigen: &[EigenChannel],
) -> Result<DMatrix<f64>, AngularError> {
    if frag.len() != eigen.len() {
        return Err(AngularError::DimensionMismatch { frag: frag.len(), eigen: eigen.len() });
    }
    let (s1, s2) = (pair.first.electron_spin(), pair.second.electron_spin());
    let (i1, i2) = (pair.first.nuclear_spin, pair.second.nuclear_spin);
    let mut u = DMatrix::zeros(frag.len(), eigen.len());
    for (r, fc) in frag.iter().enumerate() {
        let c = fc.label;
        for (col, e) in eigen.iter().enumerate() {
            let mut acc = 0.0;
            for ms1 in s1.projections() {
                let mi1 = c.m1 - ms1;
                if mi1.abs() > i1 {
                    continue;
                }
                let a = cg(s1, ms1, i1, mi1, c.f1, c.m1);
                if a == 0.0 {
                    continue;
                }
                for ms2 in s2.projections() {
                    let mi2 = c.m2 - ms2;
                    if mi2.abs() > i2 || ms1 + ms2 != e.ms || mi1 + mi2 != e.mi {
                        continue;
                    }
                    acc += a
                        * cg(s2, ms2, i2, mi2, c.f2, c.m2)
                        * cg(s1, ms1, s2, ms2, e.s, e.ms)
                        * cg(i1, mi1, i2, mi2, e.i, e.mi);
                }
            }
            u[(r, col)] = acc;
        }
    }
    Ok(u)
}

/// All channels at one total projection M together with U.
#[derive(Debug, Clone)]
pub struct ChannelSpace {
    pub pair: SpeciesPair,
    pub m: HalfInt,
    pub frag: Vec<FragChannel>,
    pub eigen: Vec<EigenChannel>,
    pub u: DMatrix<f64>,
}

impl ChannelSpace {
    pub fn build(pair: &SpeciesPair, m: HalfInt) -> Result<Self, AngularError> {
        let frag = enumerate_frag_channels(pair, m);
        let eigen = enumerate_eigenchannels(pair, m);
        let u = frame_transform(pair, &frag, &eigen)?;
        Ok(ChannelSpace { pair: pair.clone(), m, frag, eigen, u })
    }

    pub fn len(&self) -> usize {
        self.frag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frag.is_empty()
    }

    pub fn frag_index(&self, label: &ChannelLabel) -> Option<usize> {
        self.frag.iter().position(|c| c.label == *label)
    }

    pub fn eigen_index(&self, label: &EigenLabel) -> Option<usize> {
        self.eigen.iter().position(|e| e == label)
    }

    /// Largest deviation of U U^T from the identity.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.len();
        let p = &self.u * self.u.transpose();
        (p - DMatrix::<f64>::identity(n, n)).amax()
    }

    /// Plain-text listing used by the `channels` command.
    pub fn to_table(&self) -> String {
        let mut s = format!("# M = {}\n# fragmentation channels (F1,mF1;F2,mF2) threshold_GHz\n", self.m);
        for (k, c) in self.frag.iter().enumerate() {
            s.push_str(&format!("{k:>3}  {:<16} {:.9}\n", c.label.to_string(), c.threshold_ghz));
        }
        s.push_str("# eigenchannels (S,MS;I,MI)\n");
        for (k, e) in self.eigen.iter().enumerate() {
            s.push_str(&format!("{k:>3}  {e}\n"));
        }
        s.push_str("# U (rows: fragmentation, columns: eigen)\n");
        for r in 0..self.len() {
            let row: Vec<String> = (0..self.len()).map(|c| format!("{:>10.6}", self.u[(r, c)])).collect();
            s.push_str(&row.join(" "));
            s.push('\n');
        }
        s
    }
}
