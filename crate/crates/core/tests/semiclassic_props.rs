use std::f64::consts::{FRAC_PI_4, PI};

use magorbits::ladder::C64;
use magorbits::model2::derive_params;
use magorbits::oscillations::{charge_trace, transfer_trace, uniform_grid, TraceSetup};
use magorbits::semiclassic::*;
use magorbits::specfun::laguerre_scaled;
use magorbits::{Error, Exec};
use proptest::prelude::*;

#[test]
fn beating_frequency_limits() {
    let e = 3.0;
    let mut last = 0.0;
    for i in 1..300 {
        let f = freq_fc(e * i as f64 / 300.0, e).unwrap().f;
        assert!(f > last);
        last = f;
    }
    assert!(freq_fc(1e-12, e).unwrap().f < 1e-6);
    assert!((freq_fc(e * (1.0 - 1e-12), e).unwrap().f - e / 4.0).abs() < 1e-6);
    let half = freq_fc(e / 2.0, e).unwrap();
    assert!((half.chi - FRAC_PI_4).abs() < 1e-15);
    assert!((freq_fc(1.0, 3.0).unwrap().f - 0.5189).abs() < 1e-4);
    assert!((freq_fc(1.04, 3.0).unwrap().f - 0.5272).abs() < 1e-3);
    assert!((freq_fc(2.04, 3.0).unwrap().f - 0.6857).abs() < 1e-3);
}

#[test]
fn out_of_range_areas_are_domain_errors() {
    for w in [0.0, -1.0, 3.0, 4.0] {
        assert!(matches!(freq_fc(w, 3.0), Err(Error::Domain(_))));
        assert!(saddle_points(w, 3.0).is_err());
    }
    assert!(g_saddle(0.1, 1.0, 3.0, 0.0).is_err());
}

#[test]
fn pocket_area_examples() {
    let a = area_alpha(3.0, 1.0, 1.0).unwrap();
    assert!((a - 0.8645).abs() < 1e-3);
    let areas = orbit_areas(3.0, 1.0, 1.0).unwrap();
    assert!((areas.f_alpha() - 0.138).abs() < 1e-3);
    assert!((areas.a_alpha + areas.a_beta - 2.0 * PI * 3.0).abs() < 1e-12);
    assert!((areas.f_0() - 1.5).abs() < 1e-15);
    assert!(matches!(area_alpha(2.0, 1.0, 1.0), Err(Error::NoPocket { .. })));
    assert!(matches!(area_alpha(1.5, 1.0, 1.0), Err(Error::NoPocket { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn saddle_points_are_stationary(e in 0.5..10.0f64, frac in 0.02..0.98f64) {
        let w = frac * e;
        for x in saddle_points(w, e).unwrap() {
            prop_assert!(saddle_phase_derivative(C64::new(x, 0.0), w, e).norm() < 1e-10);
        }
    }

    #[test]
    fn envelope_scales_as_root_h(h in 0.01..2.0f64, k in 1.5..4.0f64, frac in 0.05..0.95f64) {
        let e = 3.0;
        let ratio = saddle_envelope(k * h, frac * e, e) / saddle_envelope(h, frac * e, e);
        prop_assert!((ratio - k.sqrt()).abs() < 1e-12);
    }
}

#[test]
fn saddle_tooth_tracks_single_laguerre_terms() {
    // at a large level the saddle pair reproduces e^{−w/h} L_n(2w/h)
    let (e, w) = (3.0, 1.04);
    for n in [40usize, 80, 160] {
        let h = e / (2.0 * n as f64);
        let exact = laguerre_scaled(n, 0, w, h).unwrap().value;
        let approx = saddle_tooth(h, w, e);
        assert!((exact - approx).abs() < 0.05 * saddle_envelope(h, w, e), "n={n}: {exact} vs {approx}");
    }
    assert_eq!(saddle_tooth(0.1, 3.0, 3.0), 0.0);
}

#[test]
fn comb_saddle_approaches_exact_sum() {
    let (e, w, gamma) = (3.0, 1.04, 0.1);
    let rms = |lo: f64, hi: f64| {
        let grid = uniform_grid(lo, hi, 2000).unwrap();
        let mut num = 0.0;
        let mut den = 0.0;
        for u in grid {
            let exact = g_exact(1.0 / u, w, e, gamma).unwrap();
            num += (exact - g_saddle(1.0 / u, w, e, gamma).unwrap()).powi(2);
            den += exact * exact;
        }
        (num / den).sqrt()
    };
    let high = rms(10.0, 20.0);
    assert!(high < 0.1, "{high}");
    assert!(high < rms(1.0, 5.0));
}

#[test]
fn semiclassical_traces_improve_at_small_h() {
    let p = derive_params(0.2, 1.0, 1.0, 1.0).unwrap();
    let s = TraceSetup::new(p, 3.0, 0.1).unwrap();
    let grid = uniform_grid(1.0, 40.0, 8192).unwrap();
    let te = transfer_trace(&s, &grid, Exec::Parallel).unwrap();
    let ts = transfer_semiclassical(&s, &grid, Exec::Parallel).unwrap();
    let ce = charge_trace(&s, &grid, Exec::Parallel).unwrap();
    let cs = charge_semiclassical(&s, &grid, Exec::Parallel).unwrap();
    for (a, b) in [(&te, &ts), (&ce, &cs)] {
        let r = [relative_rms(a, b, 1.0, 5.0), relative_rms(a, b, 10.0, 20.0), relative_rms(a, b, 20.0, 40.0)];
        assert!(r[0] > r[1] && r[1] > r[2], "{r:?}");
    }
}

#[test]
fn semiclassical_overlap_needs_unit_current() {
    let p = derive_params(0.2, 1.0, 0.7, 1.0).unwrap();
    let s = TraceSetup::new(p, 3.0, 0.1).unwrap();
    assert!(matches!(transfer_semiclassical(&s, &[1.0, 2.0], Exec::Sequential), Err(Error::UnsupportedClosedForm(_))));
    let far = TraceSetup::new(derive_params(0.2, 2.0, 1.0, 1.0).unwrap(), 3.0, 0.1).unwrap();
    assert!(charge_semiclassical(&far, &[1.0, 2.0], Exec::Sequential).is_err());
}
