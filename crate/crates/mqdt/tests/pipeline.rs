//! End-to-end runs of the scattering-length chain and the shift fit.

use mqdt::longrange::LongRangeSolver;
use mqdt::mqdt::{channel_scattering_length, ChiSource, ClassificationRule, MqdtError, ScatteringSetup};
use mqdt::physics::Dataset;
use mqdt::shift::{plain_average, Atom, Length, ShiftError, ShiftModel, TransitionSpec};
use mqdt::{ChannelLabel, DefectClass, DefectSet, EigenLabel};

fn label(s: &str) -> ChannelLabel {
    s.parse().unwrap()
}

fn setup(entrance: &str, mu_t_es: Option<f64>) -> ScatteringSetup {
    let d = Dataset::bundled();
    let pair = d.rb_pair();
    ScatteringSetup {
        scales: d.vdw_scales(&pair),
        pair,
        entrance: label(entrance),
        defects: DefectSet::new(0.7253, 0.1822, mu_t_es).unwrap(),
        rule: ClassificationRule::default(),
    }
}

fn published_chi() -> Vec<(ChannelLabel, f64)> {
    vec![(label("(2,-2;2,-2)"), -0.8155366), (label("(2,-2;3,-2)"), 2.5661999), (label("(2,-1;3,-3)"), 2.5668389)]
}

#[test]
fn m4_classification_marks_the_two_upper_triplets() {
    let s = setup("(1,-1;3,-3)", Some(0.1984));
    let r = channel_scattering_length(&s, &ChiSource { configured: published_chi(), solver: None }).unwrap();
    let classes = r.classes.unwrap();
    let es: Vec<String> = r
        .space
        .eigen
        .iter()
        .zip(&classes)
        .filter(|(_, c)| **c == DefectClass::Es)
        .map(|(e, _)| e.to_string())
        .collect();
    assert_eq!(es.len(), 2, "{es:?}");
    assert!(r.defects.iter().filter(|&&m| m == 0.1984).count() == 2);
}

#[test]
fn computed_chi_close_to_published() {
    let solver = LongRangeSolver::from_dataset(Dataset::bundled());
    let s = setup("(1,-1;3,-3)", None);
    let given = channel_scattering_length(&s, &ChiSource { configured: published_chi(), solver: None }).unwrap();
    let computed = channel_scattering_length(&s, &ChiSource { configured: vec![], solver: Some(&solver) }).unwrap();
    assert!((given.a0 - computed.a0).abs() < 0.01 * given.a0);
    for (g, c) in given.closed.0.iter().zip(&computed.closed.0) {
        assert_eq!(g.channel, c.channel);
        assert!((g.chi - c.chi).abs() < 0.02 * g.chi.abs());
    }
}

#[test]
fn missing_chi_without_solver_is_an_error() {
    let s = setup("(1,-1;3,-3)", None);
    let err = channel_scattering_length(&s, &ChiSource { configured: published_chi()[..2].to_vec(), solver: None })
        .unwrap_err();
    assert!(matches!(err, MqdtError::MissingChi(l) if l == label("(2,-1;3,-3)")));
    let bogus = vec![(label("(1,-1;3,-3)"), 1.0)];
    let err = channel_scattering_length(&s, &ChiSource { configured: bogus, solver: None }).unwrap_err();
    assert!(matches!(err, MqdtError::UnknownChiChannel(_)));
}

#[test]
fn m3_tie_needs_an_override() {
    let solver = LongRangeSolver::from_dataset(Dataset::bundled());
    let src = ChiSource { configured: vec![], solver: Some(&solver) };
    let mut s = setup("(1,-1;2,-2)", Some(0.1984));
    let err = channel_scattering_length(&s, &src).unwrap_err();
    let MqdtError::AmbiguousDominance { eigen, candidates } = err else { panic!("{err}") };
    assert_eq!(eigen, "(1,-1;2,-2)".parse::<EigenLabel>().unwrap());
    assert_eq!(candidates.len(), 3);

    s.rule.overrides = vec![(eigen, DefectClass::Es)];
    let es = channel_scattering_length(&s, &src).unwrap().a0;
    s.rule.overrides = vec![(eigen, DefectClass::Ei)];
    let ei = channel_scattering_length(&s, &src).unwrap().a0;
    let plain = channel_scattering_length(&setup("(1,-1;2,-2)", None), &src).unwrap().a0;
    // both resolutions land between the plain triplet result and 5% of it
    for a in [es, ei] {
        assert!(a < plain && a > 0.95 * plain, "{a} vs {plain}");
    }
}

#[test]
fn open_entrance_above_threshold_rejected() {
    let s = setup("(2,-2;3,-2)", None);
    let err = channel_scattering_length(&s, &ChiSource::default()).unwrap_err();
    assert!(matches!(err, MqdtError::OpenChannelCount(n) if n > 1));
}

fn rb87_transition(a_initial: Length, a_final: Length) -> (ShiftModel, TransitionSpec) {
    let d = Dataset::bundled();
    let pair = d.rb_pair();
    let t = TransitionSpec::new(&pair, Atom::First, label("(1,-1;3,-3)"), label("(2,-2;3,-3)"), a_initial, a_final)
        .unwrap();
    (ShiftModel::new(&d.vdw_scales(&pair)), t)
}

fn sweep() -> Vec<f64> {
    (0..10).map(|i| 15.0 + 2.0 * i as f64).collect()
}

const ETA: f64 = 165.0 / 27.0;

#[test]
fn zero_noise_fit_recovers_any_length() {
    let (model, t) = rb87_transition(Length::Unknown, Length::Known(213.0));
    for a_true in [100.0, 180.0, 260.0, 340.0, 400.0] {
        let data = model.synthesize_measurements(&t, ETA, &sweep(), a_true, 0.0, 7).unwrap();
        let fit = model.fit_scattering_length(&data, &t, ETA).unwrap();
        assert!((fit.a_hat - a_true).abs() < 0.1, "{a_true}: {}", fit.a_hat);
        assert_eq!(fit.residuals.len(), data.len());
        assert!(fit.chi2 >= 0.0);
    }
}

#[test]
fn chi2_is_unimodal_over_the_bracket() {
    let (model, t) = rb87_transition(Length::Unknown, Length::Known(213.0));
    let data = model.synthesize_measurements(&t, ETA, &sweep(), 314.8, 1.0, 3).unwrap();
    let obj = model.objective(&data, &t, ETA).unwrap();
    let values: Vec<f64> = (0..50).map(|i| obj.chi2(-1000.0 + 2000.0 * i as f64 / 49.0).unwrap()).collect();
    let turns = values.windows(3).filter(|w| (w[1] - w[0]).signum() != (w[2] - w[1]).signum()).count();
    assert!(turns <= 1, "{values:?}");
}

#[test]
fn synthetic_noise_is_seeded_and_calibrated() {
    let (model, t) = rb87_transition(Length::Unknown, Length::Known(213.0));
    let w: Vec<f64> = (0..1000).map(|i| 15.0 + 0.02 * i as f64).collect();
    let a = model.synthesize_measurements(&t, ETA, &w, 314.8, 1.0, 11).unwrap();
    let b = model.synthesize_measurements(&t, ETA, &w, 314.8, 1.0, 11).unwrap();
    assert_eq!(a, b);
    let clean = model.synthesize_measurements(&t, ETA, &w, 314.8, 0.0, 11).unwrap();
    let r: Vec<f64> = a.iter().zip(&clean).map(|(n, c)| n.shift_khz - c.shift_khz).collect();
    let mean = r.iter().sum::<f64>() / r.len() as f64;
    let sd = (r.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (r.len() - 1) as f64).sqrt();
    assert!((sd - 1.0).abs() < 0.1, "{sd}");
}

#[test]
fn fit_rejects_bad_inputs() {
    let (model, t) = rb87_transition(Length::Unknown, Length::Known(213.0));
    let data = model.synthesize_measurements(&t, ETA, &sweep(), 314.8, 0.0, 1).unwrap();
    assert!(matches!(model.fit_scattering_length(&data[..1], &t, ETA), Err(ShiftError::TooFewPoints(1))));
    let (_, both) = rb87_transition(Length::Known(1.0), Length::Known(2.0));
    assert!(matches!(model.fit_scattering_length(&data, &both, ETA), Err(ShiftError::UnknownCount(0))));
}

#[test]
fn equal_lengths_give_no_shift_and_averages_are_plain() {
    let (model, t) = rb87_transition(Length::Known(250.0), Length::Known(250.0));
    let trap = model.trap(165.0, 27.0).unwrap();
    assert_eq!(model.predict_shift(&t, &trap).unwrap(), 0.0);
    let (_, zero) = rb87_transition(Length::Known(0.0), Length::Known(0.0));
    assert_eq!(model.predict_shift(&zero, &trap).unwrap(), 0.0);
    assert_eq!(plain_average(&[3.2e2, 3.0e2]), Some(3.1e2));
}

#[test]
fn shift_magnitude_grows_with_trap_frequency() {
    let (model, t) = rb87_transition(Length::Known(100.0), Length::Known(110.0));
    let curve = model.shift_curve(&t, &[5.0, 10.0, 15.0, 20.0, 25.0], 6.0);
    let s: Vec<f64> = curve.iter().map(|p| p.shift_khz.clone().unwrap()).collect();
    assert!(s.iter().all(|&v| v > 0.0));
    assert!(s.windows(2).all(|w| w[1] > w[0]), "{s:?}");
}
