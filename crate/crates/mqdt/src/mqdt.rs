//! Short-range K matrix from eigenchannel quantum defects, closed-channel
//! elimination, and the scattering length of the single open channel.

use std::f64::consts::PI;
use std::fmt;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::angular::{AngularError, ChannelLabel, ChannelSpace, EigenLabel};
use crate::halfint::HalfInt;
use crate::longrange::{LongRangeError, LongRangeSolver};
use crate::physics::{SpeciesPair, VdwScales};

/// tan(pi/8)
pub const TAN_PI_8: f64 = 0.414_213_562_373_095_05;

/// a = P * beta6 * (K + tan(pi/8)) / (K - tan(pi/8)) with
/// P = Gamma(3/4) / (2 Gamma(5/4)) = 2^(3/2) pi / Gamma(1/4)^2.
pub const LENGTH_PREFACTOR: f64 = 0.675_978_240_067_284_7;

/// Mean scattering length over beta6: 2 pi / Gamma(1/4)^2. Reached at
/// K = -cot(pi/8), where the Moebius factor equals 1/sqrt(2).
pub const MEAN_LENGTH_RATIO: f64 = 0.477_988_797_486_125;

/// Condition number of (chi - Kcc) beyond which elimination is refused.
pub const RESONANCE_CONDITION: f64 = 1e12;

#[derive(Debug, Error)]
pub enum MqdtError {
    #[error(transparent)]
    Angular(#[from] AngularError),
    #[error(transparent)]
    LongRange(#[from] LongRangeError),
    #[error("quantum defect {0} is not finite")]
    BadDefect(f64),
    #[error("tan(pi mu + pi/8) diverges for mu = {mu} (eigenchannel {channel})")]
    TangentPole { mu: f64, channel: EigenLabel },
    #[error("eigenchannel {eigen} is equally dominated by {candidates:?} with conflicting classes; set an explicit class override")]
    AmbiguousDominance { eigen: EigenLabel, candidates: Vec<ChannelLabel> },
    #[error("class override names {0}, which is not an eigenchannel of this space")]
    UnknownOverride(EigenLabel),
    #[error("entrance channel {channel} is not in the M = {m} space")]
    EntranceNotInSpace { channel: ChannelLabel, m: HalfInt },
    #[error("near resonance: chi - Kcc has eigenvalue {eigenvalue:.3e} (condition number {condition:.3e})")]
    NearResonance { eigenvalue: f64, condition: f64 },
    #[error("scattering length diverges: K = {0} sits on tan(pi/8)")]
    Resonance(f64),
    #[error("{0} open channels; the scattering-length formula needs exactly one")]
    OpenChannelCount(usize),
    #[error("expected {expected} chi values for the closed channels, got {got}")]
    ChiCount { expected: usize, got: usize },
    #[error("chi for closed channel {channel} is not finite")]
    NonFiniteChi { channel: ChannelLabel },
    #[error("no chi value for closed channel {0} and no long-range solver configured")]
    MissingChi(ChannelLabel),
    #[error("chi override names {0}, which is not a closed channel here")]
    UnknownChiChannel(ChannelLabel),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DefectClass {
    /// energy insensitive
    Ei,
    /// energy sensitive
    Es,
}

impl fmt::Display for DefectClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DefectClass::Ei => "EI",
            DefectClass::Es => "ES",
        })
    }
}

impl std::str::FromStr for DefectClass {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "EI" => Ok(DefectClass::Ei),
            "ES" => Ok(DefectClass::Es),
            other => Err(format!("unknown defect class `{other}` (expected EI or ES)")),
        }
    }
}

/// Singlet and triplet defects, stored modulo 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectSet {
    pub mu_s: f64,
    pub mu_t: f64,
    pub mu_t_es: Option<f64>,
}

fn reduce(mu: f64) -> Result<f64, MqdtError> {
    if !mu.is_finite() {
        return Err(MqdtError::BadDefect(mu));
    }
    let r = mu.rem_euclid(1.0);
    Ok(if r >= 1.0 { 0.0 } else { r })
}

impl DefectSet {
    pub fn new(mu_s: f64, mu_t: f64, mu_t_es: Option<f64>) -> Result<Self, MqdtError> {
        Ok(DefectSet { mu_s: reduce(mu_s)?, mu_t: reduce(mu_t)?, mu_t_es: mu_t_es.map(reduce).transpose()? })
    }

    pub fn has_split(&self) -> bool {
        self.mu_t_es.is_some()
    }

    pub fn for_channel(&self, e: &EigenLabel, class: DefectClass) -> f64 {
        if !e.is_triplet() {
            return self.mu_s;
        }
        match (class, self.mu_t_es) {
            (DefectClass::Es, Some(es)) => es,
            _ => self.mu_t,
        }
    }
}

/// Triplet eigenchannels whose dominant fragmentation channel closes at a
/// classical turning point inside `reaction_zone_a0` are tagged ES.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationRule {
    pub reaction_zone_a0: f64,
    pub overrides: Vec<(EigenLabel, DefectClass)>,
}

impl Default for ClassificationRule {
    fn default() -> Self {
        ClassificationRule { reaction_zone_a0: 43.0, overrides: Vec::new() }
    }
}

/// Outer classical turning point (a0) of -C6/R^6 for a channel lying
/// `gap_ghz` above the collision energy; infinite for open channels.
pub fn turning_point_a0(gap_ghz: f64, scales: &VdwScales) -> f64 {
    if gap_ghz <= 0.0 {
        return f64::INFINITY;
    }
    let eps = gap_ghz * 1e3 / scales.energy_mhz;
    scales.beta6_a0 * eps.powf(-1.0 / 6.0)
}

const DOMINANCE_TIE: f64 = 1e-9;

pub fn classify_eigenchannels(
    space: &ChannelSpace,
    entrance: &ChannelLabel,
    scales: &VdwScales,
    rule: &ClassificationRule,
) -> Result<Vec<DefectClass>, MqdtError> {
    let ent = space.frag_index(entrance).ok_or(MqdtError::EntranceNotInSpace { channel: *entrance, m: space.m })?;
    for (label, _) in &rule.overrides {
        if space.eigen_index(label).is_none() {
            return Err(MqdtError::UnknownOverride(*label));
        }
    }
    let e0 = space.frag[ent].threshold_ghz;
    let verdict = |row: usize| {
        let gap = space.frag[row].threshold_ghz - e0;
        if turning_point_a0(gap, scales) < rule.reaction_zone_a0 {
            DefectClass::Es
        } else {
            DefectClass::Ei
        }
    };
    let mut out = Vec::with_capacity(space.eigen.len());
    for (col, e) in space.eigen.iter().enumerate() {
        if let Some((_, c)) = rule.overrides.iter().find(|(l, _)| l == e) {
            out.push(*c);
            continue;
        }
        if !e.is_triplet() {
            out.push(DefectClass::Ei);
            continue;
        }
        let column = space.u.column(col);
        let peak = column.amax();
        let tied: Vec<usize> = (0..space.len()).filter(|&r| column[r].abs() >= peak - DOMINANCE_TIE).collect();
        let first = verdict(tied[0]);
        if tied.iter().any(|&r| verdict(r) != first) {
            return Err(MqdtError::AmbiguousDominance {
                eigen: *e,
                candidates: tied.iter().map(|&r| space.frag[r].label).collect(),
            });
        }
        out.push(first);
    }
    Ok(out)
}

/// K^c in the fragmentation basis.
#[derive(Debug, Clone, PartialEq)]
pub struct KMatrix(pub DMatrix<f64>);

impl KMatrix {
    pub fn asymmetry(&self) -> f64 {
        let k = &self.0;
        let mut worst = 0.0f64;
        for i in 0..k.nrows() {
            for j in 0..k.ncols() {
                worst = worst.max((k[(i, j)] - k[(j, i)]).abs() / k[(i, j)].abs().max(1.0));
            }
        }
        worst
    }
}

pub fn build_kc(u: &DMatrix<f64>, mus: &[f64], labels: &[EigenLabel]) -> Result<KMatrix, MqdtError> {
    let n = u.ncols();
    if mus.len() != n {
        return Err(AngularError::DimensionMismatch { frag: u.nrows(), eigen: mus.len() }.into());
    }
    let mut t = Vec::with_capacity(n);
    for (a, &mu) in mus.iter().enumerate() {
        let arg = PI * mu + PI / 8.0;
        if arg.cos().abs() < 1e-12 {
            let channel = labels.get(a).copied().unwrap_or(EigenLabel::from_ints(0, 0, 0, 0));
            return Err(MqdtError::TangentPole { mu, channel });
        }
        t.push(arg.tan());
    }
    let mut k = DMatrix::zeros(u.nrows(), u.nrows());
    for i in 0..u.nrows() {
        for j in 0..=i {
            let v: f64 = (0..n).map(|a| u[(i, a)] * t[a] * u[(j, a)]).sum();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    Ok(KMatrix(k))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    pub entrance: usize,
    pub open: Vec<usize>,
    pub closed: Vec<usize>,
}

pub fn partition_channels(space: &ChannelSpace, entrance: &ChannelLabel) -> Result<Partition, MqdtError> {
    let ent = space.frag_index(entrance).ok_or(MqdtError::EntranceNotInSpace { channel: *entrance, m: space.m })?;
    let e0 = space.frag[ent].threshold_ghz;
    let (open, closed) = (0..space.len()).partition(|&i| space.frag[i].threshold_ghz <= e0);
    Ok(Partition { entrance: ent, open, closed })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChiOrigin {
    Configured,
    Computed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChiEntry {
    pub channel: ChannelLabel,
    pub gap_ghz: f64,
    pub chi: f64,
    pub origin: ChiOrigin,
}

/// One entry per closed channel, in partition order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ClosedChannelData(pub Vec<ChiEntry>);

impl ClosedChannelData {
    pub fn values(&self) -> Vec<f64> {
        self.0.iter().map(|e| e.chi).collect()
    }
}

/// K_eff = Koo + Koc (chi - Kcc)^-1 Kco.
pub fn eliminate_closed(k: &KMatrix, part: &Partition, chi: &[f64]) -> Result<DMatrix<f64>, MqdtError> {
    let (o, c) = (&part.open, &part.closed);
    if chi.len() != c.len() {
        return Err(MqdtError::ChiCount { expected: c.len(), got: chi.len() });
    }
    let k = &k.0;
    let koo = DMatrix::from_fn(o.len(), o.len(), |i, j| k[(o[i], o[j])]);
    if c.is_empty() {
        return Ok(koo);
    }
    let koc = DMatrix::from_fn(o.len(), c.len(), |i, j| k[(o[i], c[j])]);
    let m = DMatrix::from_fn(c.len(), c.len(), |i, j| if i == j { chi[i] } else { 0.0 } - k[(c[i], c[j])]);
    let eig = m.symmetric_eigen();
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut worst = 0.0;
    for &l in eig.eigenvalues.iter() {
        if l.abs() < lo {
            lo = l.abs();
            worst = l;
        }
        hi = hi.max(l.abs());
    }
    let condition = if lo == 0.0 { f64::INFINITY } else { hi / lo };
    if condition > RESONANCE_CONDITION || !condition.is_finite() {
        return Err(MqdtError::NearResonance { eigenvalue: worst, condition });
    }
    let v = &eig.eigenvectors;
    let inv_diag = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let inv = v * inv_diag * v.transpose();
    Ok(koo + &koc * inv * koc.transpose())
}

pub fn scattering_length(k_eff: f64, scales: &VdwScales) -> Result<f64, MqdtError> {
    if k_eff.is_nan() {
        return Err(MqdtError::Resonance(k_eff));
    }
    if k_eff.abs() > 1e10 {
        return Ok(LENGTH_PREFACTOR * scales.beta6_a0);
    }
    if (k_eff - TAN_PI_8).abs() <= 1e-12 {
        return Err(MqdtError::Resonance(k_eff));
    }
    Ok(LENGTH_PREFACTOR * scales.beta6_a0 * (k_eff + TAN_PI_8) / (k_eff - TAN_PI_8))
}

/// Where chi values for closed channels come from: explicit per-channel
/// values first, then the long-range solver if one is given.
#[derive(Debug, Clone, Default)]
pub struct ChiSource<'a> {
    pub configured: Vec<(ChannelLabel, f64)>,
    pub solver: Option<&'a LongRangeSolver>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringSetup {
    pub pair: SpeciesPair,
    pub entrance: ChannelLabel,
    pub defects: DefectSet,
    pub rule: ClassificationRule,
    pub scales: VdwScales,
}

#[derive(Debug, Clone)]
pub struct ScatteringReport {
    pub a0: f64,
    pub k_eff: f64,
    pub space: ChannelSpace,
    pub partition: Partition,
    /// present only when the ES split is active
    pub classes: Option<Vec<DefectClass>>,
    pub defects: Vec<f64>,
    pub closed: ClosedChannelData,
}

pub fn resolve_chi(
    space: &ChannelSpace,
    part: &Partition,
    source: &ChiSource<'_>,
    scales: &VdwScales,
) -> Result<ClosedChannelData, MqdtError> {
    for (label, _) in &source.configured {
        if !part.closed.iter().any(|&i| space.frag[i].label == *label) {
            return Err(MqdtError::UnknownChiChannel(*label));
        }
    }
    let e0 = space.frag[part.entrance].threshold_ghz;
    let mut out = Vec::with_capacity(part.closed.len());
    // degenerate thresholds share one propagation
    let mut computed: Vec<(f64, f64)> = Vec::new();
    for &i in &part.closed {
        let channel = space.frag[i].label;
        let gap_ghz = space.frag[i].threshold_ghz - e0;
        let (chi, origin) = match source.configured.iter().find(|(l, _)| *l == channel) {
            Some((_, v)) => (*v, ChiOrigin::Configured),
            None => {
                let chi = match computed.iter().find(|(g, _)| *g == gap_ghz) {
                    Some(&(_, c)) => c,
                    None => {
                        let solver = source.solver.ok_or(MqdtError::MissingChi(channel))?;
                        let c = solver.chi_at_gap(gap_ghz, scales)?.chi;
                        computed.push((gap_ghz, c));
                        c
                    }
                };
                (chi, ChiOrigin::Computed)
            }
        };
        if !chi.is_finite() {
            return Err(MqdtError::NonFiniteChi { channel });
        }
        out.push(ChiEntry { channel, gap_ghz, chi, origin });
    }
    Ok(ClosedChannelData(out))
}

/// Full chain inside an already built channel space.
pub fn scattering_length_in_space(
    space: &ChannelSpace,
    setup: &ScatteringSetup,
    source: &ChiSource<'_>,
) -> Result<ScatteringReport, MqdtError> {
    let partition = partition_channels(space, &setup.entrance)?;
    if partition.open.len() != 1 {
        return Err(MqdtError::OpenChannelCount(partition.open.len()));
    }
    let classes = if setup.defects.has_split() {
        Some(classify_eigenchannels(space, &setup.entrance, &setup.scales, &setup.rule)?)
    } else {
        None
    };
    let defects: Vec<f64> = space
        .eigen
        .iter()
        .enumerate()
        .map(|(a, e)| {
            let class = classes.as_ref().map_or(DefectClass::Ei, |c| c[a]);
            setup.defects.for_channel(e, class)
        })
        .collect();
    let k = build_kc(&space.u, &defects, &space.eigen)?;
    let closed = resolve_chi(space, &partition, source, &setup.scales)?;
    let k_eff = eliminate_closed(&k, &partition, &closed.values())?[(0, 0)];
    let a0 = scattering_length(k_eff, &setup.scales)?;
    Ok(ScatteringReport { a0, k_eff, space: space.clone(), partition, classes, defects, closed })
}

/// enumerate, transform, classify, build K, partition, eliminate, convert.
pub fn channel_scattering_length(
    setup: &ScatteringSetup,
    source: &ChiSource<'_>,
) -> Result<ScatteringReport, MqdtError> {
    let space = ChannelSpace::build(&setup.pair, setup.entrance.projection())?;
    scattering_length_in_space(&space, setup, source)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::physics::Dataset;

    fn m4() -> (ChannelSpace, VdwScales) {
        let d = Dataset::bundled();
        let pair = d.rb_pair();
        (ChannelSpace::build(&pair, HalfInt::integer(-4)).unwrap(), d.vdw_scales(&pair))
    }

    #[test]
    fn defects_reduced_modulo_one() {
        let d = DefectSet::new(1.25, -0.25, Some(3.0)).unwrap();
        assert_eq!((d.mu_s, d.mu_t, d.mu_t_es), (0.25, 0.75, Some(0.0)));
        assert!(DefectSet::new(f64::NAN, 0.0, None).is_err());
    }

    #[test]
    fn uniform_defects_give_scaled_identity() {
        let (sp, _) = m4();
        let k = build_kc(&sp.u, &[0.3; 4], &sp.eigen).unwrap();
        let t = (PI * 0.3 + PI / 8.0).tan();
        assert!((k.0.clone() - DMatrix::identity(4, 4) * t).amax() < 1e-12);
        let one = build_kc(&DMatrix::identity(1, 1), &[0.0], &[]).unwrap();
        assert!((one.0[(0, 0)] - TAN_PI_8).abs() < 1e-15);
    }

    #[test]
    fn tangent_pole_rejected() {
        let (sp, _) = m4();
        assert!(matches!(build_kc(&sp.u, &[0.375, 0.1, 0.1, 0.1], &sp.eigen), Err(MqdtError::TangentPole { .. })));
    }

    #[test]
    fn partition_counts() {
        let (sp, _) = m4();
        let p = partition_channels(&sp, &ChannelLabel::from_ints(1, -1, 3, -3)).unwrap();
        assert_eq!((p.open.len(), p.closed.len()), (1, 3));
        let p = partition_channels(&sp, &ChannelLabel::from_ints(2, -1, 3, -3)).unwrap();
        assert_eq!(p.open.len(), 4);
        assert!(partition_channels(&sp, &ChannelLabel::from_ints(1, -1, 2, -2)).is_err());
    }

    #[test]
    fn classification_at_m_minus_four() {
        let (sp, scales) = m4();
        let c =
            classify_eigenchannels(&sp, &ChannelLabel::from_ints(1, -1, 3, -3), &scales, &Default::default()).unwrap();
        use DefectClass::*;
        // (0,0;4,-4) (1,-1;3,-3) (1,-1;4,-3) (1,0;4,-4)
        assert_eq!(c, vec![Ei, Es, Es, Ei]);
    }

    #[test]
    fn singular_elimination_detected() {
        let (sp, _) = m4();
        let k = build_kc(&sp.u, &[0.7253, 0.1822, 0.1822, 0.1822], &sp.eigen).unwrap();
        let p = partition_channels(&sp, &ChannelLabel::from_ints(1, -1, 3, -3)).unwrap();
        // make chi - Kcc exactly singular along its first closed direction
        let kcc = DMatrix::from_fn(3, 3, |i, j| k.0[(p.closed[i], p.closed[j])]);
        let lam = kcc.clone().symmetric_eigen().eigenvalues[0];
        let shifted =
            KMatrix(DMatrix::from_fn(4, 4, |i, j| if i == j && i > 0 { k.0[(i, j)] - lam } else { k.0[(i, j)] }));
        let r = eliminate_closed(&shifted, &p, &[0.0, 0.0, 0.0]);
        assert!(matches!(r, Err(MqdtError::NearResonance { .. })), "{r:?}");
    }

    #[test]
    fn scattering_length_limits() {
        let (_, s) = m4();
        assert!(scattering_length(-TAN_PI_8, &s).unwrap().abs() < 1e-12);
        assert!((scattering_length(1e11, &s).unwrap() - LENGTH_PREFACTOR * s.beta6_a0).abs() < 1e-9);
        let mean = scattering_length(-1.0 / TAN_PI_8, &s).unwrap();
        assert!((mean / s.beta6_a0 - MEAN_LENGTH_RATIO).abs() < 1e-12);
        assert!(scattering_length(TAN_PI_8 + 1e-9, &s).unwrap() > 1e6);
        assert!(scattering_length(TAN_PI_8 - 1e-9, &s).unwrap() < -1e6);
        assert!(matches!(scattering_length(TAN_PI_8, &s), Err(MqdtError::Resonance(_))));
    }

    #[test]
    fn prefactor_constants_consistent() {
        use crate::special::gamma;
        let g = gamma(0.25);
        assert!((LENGTH_PREFACTOR - 2f64.powf(1.5) * PI / (g * g)).abs() < 1e-15);
        assert!((MEAN_LENGTH_RATIO - 2.0 * PI / (g * g)).abs() < 1e-15);
        assert!((LENGTH_PREFACTOR - gamma(0.75) / (2.0 * gamma(1.25))).abs() < 1e-15);
    }
}
