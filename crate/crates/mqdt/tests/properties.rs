//! Invariants checked over random inputs.

use mqdt::angular::ChannelSpace;
use mqdt::measurements::{read_csv, write_csv, Measurement};
use mqdt::mqdt::{build_kc, eliminate_closed, partition_channels, scattering_length, TAN_PI_8};
use mqdt::physics::{vdw_scales, Dataset};
use mqdt::shift::{Atom, Length, ShiftModel, TransitionSpec};
use mqdt::trap::{a_to_energy, energy_to_a, TrapGeometry};
use mqdt::{ChannelLabel, HalfInt};
use proptest::prelude::*;

fn space(m: i32) -> ChannelSpace {
    ChannelSpace::build(&Dataset::bundled().rb_pair(), HalfInt::integer(m)).unwrap()
}

/// Lowest channel of the space, which is the single open one.
fn lowest(sp: &ChannelSpace) -> ChannelLabel {
    sp.frag[0].label
}

fn defect() -> impl Strategy<Value = f64> {
    // keep away from the tan(pi mu + pi/8) pole at mu = 3/8
    (0.0..1.0f64).prop_filter("pole", |m| (m - 0.375).abs() > 1e-3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn recoupling_is_orthogonal(m in -5i32..=5) {
        let sp = space(m);
        prop_assert!(sp.orthogonality_defect() < 1e-12);
        prop_assert_eq!(sp.frag.len(), sp.eigen.len());
    }

    #[test]
    fn k_matrix_is_symmetric(m in -4i32..=4, mus in prop::collection::vec(defect(), 16)) {
        let sp = space(m);
        let k = build_kc(&sp.u, &mus[..sp.len()], &sp.eigen).unwrap();
        prop_assert!(k.asymmetry() < 1e-12);
    }

    #[test]
    fn uniform_defects_ignore_chi(mu in defect(), chi in prop::collection::vec(-50.0..50.0f64, 8)) {
        let sp = space(-3);
        let part = partition_channels(&sp, &lowest(&sp)).unwrap();
        let k = build_kc(&sp.u, &vec![mu; sp.len()], &sp.eigen).unwrap();
        let want = (std::f64::consts::PI * (mu + 0.125)).tan();
        if let Ok(eff) = eliminate_closed(&k, &part, &chi[..part.closed.len()]) {
            prop_assert!((eff[(0, 0)] - want).abs() < 1e-10 * want.abs().max(1.0));
        }
    }

    #[test]
    fn huge_chi_decouples_closed_channels(mus in prop::collection::vec(defect(), 4)) {
        let sp = space(-4);
        let part = partition_channels(&sp, &lowest(&sp)).unwrap();
        let k = build_kc(&sp.u, &mus, &sp.eigen).unwrap();
        let chi = 1e8;
        let eff = eliminate_closed(&k, &part, &[chi; 3]).unwrap()[(0, 0)];
        let open = part.open[0];
        // |K_oc (chi - K_cc)^-1 K_co| <= |K_oc|^2 / (chi - |K_cc|); near a defect pole |K| reaches ~1e2
        let coupling: f64 = part.closed.iter().map(|&c| k.0[(open, c)].powi(2)).sum();
        let kcc = part.closed.iter().flat_map(|&i| part.closed.iter().map(move |&j| (i, j))).map(|(i, j)| k.0[(i, j)].powi(2)).sum::<f64>().sqrt();
        prop_assert!(kcc < chi / 2.0);
        let bound = coupling / (chi - kcc);
        prop_assert!((eff - k.0[(open, open)]).abs() <= bound * (1.0 + 1e-6) + 1e-12 * k.0[(open, open)].abs().max(1.0));
        prop_assert!(bound < 1e-2);
    }

    #[test]
    fn length_decreases_with_k(k1 in -50.0..50.0f64, dk in 1e-3..5.0f64) {
        let d = Dataset::bundled();
        let s = d.vdw_scales(&d.rb_pair());
        let k2 = k1 + dk;
        // same side of the pole at tan(pi/8)
        prop_assume!((k1 - TAN_PI_8) * (k2 - TAN_PI_8) > 0.0 && (k1 - TAN_PI_8).abs() > 1e-6);
        prop_assert!(scattering_length(k2, &s).unwrap() < scattering_length(k1, &s).unwrap());
    }

    #[test]
    fn vdw_length_scales_as_quarter_power(c6 in 100.0..20000.0f64, lambda in 0.1..10.0f64) {
        let c = Dataset::bundled().constants;
        let a = vdw_scales(c6, 42.0, &c).unwrap();
        let b = vdw_scales(lambda * c6, 42.0, &c).unwrap();
        let m = vdw_scales(c6, lambda * 42.0, &c).unwrap();
        prop_assert!((b.beta6_a0 / a.beta6_a0 - lambda.powf(0.25)).abs() < 1e-12);
        prop_assert!((m.beta6_a0 / a.beta6_a0 - lambda.powf(0.25)).abs() < 1e-12);
        prop_assert!((b.energy_mhz / a.energy_mhz - lambda.powf(-0.5)).abs() < 1e-12);
    }

    #[test]
    fn trap_round_trip(a in prop_oneof![-500.0..-1.0f64, 1.0..500.0f64], f_ax in 10.0..40.0f64) {
        let d = Dataset::bundled();
        let trap = TrapGeometry::from_khz(6.0 * f_ax, f_ax, d.rb_pair().reduced_mass_u(), &d.constants).unwrap();
        let eps = a_to_energy(a, &trap, 0).unwrap();
        let back = energy_to_a(eps, &trap).unwrap();
        prop_assert!(((back - a) / a).abs() < 1e-9);
    }

    #[test]
    fn ground_energy_increases_with_length(a in -400.0..400.0f64, da in 0.5..50.0f64) {
        let d = Dataset::bundled();
        let trap = TrapGeometry::from_khz(162.0, 27.0, d.rb_pair().reduced_mass_u(), &d.constants).unwrap();
        let e1 = a_to_energy(a, &trap, 0).unwrap().value;
        let e2 = a_to_energy(a + da, &trap, 0).unwrap().value;
        prop_assert!(e2 > e1);
    }

    #[test]
    fn shift_sign_laws(ai in 50.0..400.0f64, af in 50.0..400.0f64) {
        let d = Dataset::bundled();
        let pair = d.rb_pair();
        let model = ShiftModel::new(&d.vdw_scales(&pair));
        let trap = model.trap(165.0, 27.0).unwrap();
        let lo: ChannelLabel = "(1,-1;3,-3)".parse().unwrap();
        let hi: ChannelLabel = "(2,-2;3,-3)".parse().unwrap();
        let up = TransitionSpec::new(&pair, Atom::First, lo, hi, Length::Known(ai), Length::Known(af)).unwrap();
        let down = TransitionSpec::new(&pair, Atom::First, hi, lo, Length::Known(ai), Length::Known(af)).unwrap();
        let swapped = TransitionSpec::new(&pair, Atom::First, lo, hi, Length::Known(af), Length::Known(ai)).unwrap();
        let s = model.predict_shift(&up, &trap).unwrap();
        prop_assert_eq!(model.predict_shift(&down, &trap).unwrap(), -s);
        prop_assert_eq!(model.predict_shift(&swapped, &trap).unwrap(), -s);
    }

    #[test]
    fn csv_round_trip_is_bit_exact(rows in prop::collection::vec((any::<f64>(), any::<f64>(), 1e-300..1e300f64), 0..20)) {
        let data: Vec<Measurement> = rows
            .into_iter()
            .filter(|(w, s, _)| w.is_finite() && s.is_finite())
            .map(|(w, s, sg)| Measurement::new(w, s, sg).unwrap())
            .collect();
        let mut buf = Vec::new();
        write_csv(&mut buf, &data).unwrap();
        let back = read_csv(buf.as_slice(), None).unwrap();
        prop_assert_eq!(back.len(), data.len());
        for (a, b) in back.iter().zip(&data) {
            prop_assert_eq!(a.omega_ax_khz.to_bits(), b.omega_ax_khz.to_bits());
            prop_assert_eq!(a.shift_khz.to_bits(), b.shift_khz.to_bits());
            prop_assert_eq!(a.sigma_khz.to_bits(), b.sigma_khz.to_bits());
        }
    }

    #[test]
    fn half_integers_print_and_parse(twice in -99i32..=99) {
        let h = HalfInt::from_twice(twice);
        prop_assert_eq!(h.to_string().parse::<HalfInt>().unwrap(), h);
    }
}

#[test]
fn space_sizes() {
    // M = -4 holds four channels, the stretched M = -5 just one
    assert_eq!(space(-4).len(), 4);
    assert_eq!(space(-5).len(), 1);
    assert_eq!(space(-3).len(), 8);
}
