mod common;

use common::oracle::{self, frozen, Fx};
use common::rel;
use proptest::prelude::*;
use tachyon_bound::bound::{eval_bound, eval_bound_fast_limit, regime_threshold_dt, BoundInputs, PreferredFrame};
use tachyon_bound::budget::{coherence_length, combine_quadrature};
use tachyon_bound::kinematics::{alpha_for_fraction, is_accessible, FrameDirection, SiteGeometry};

#[test]
fn oracle_constants() {
    assert_eq!(oracle::pi().to_f64(), std::f64::consts::PI);
    assert_eq!(oracle::ln2().to_f64(), std::f64::consts::LN_2);
    assert_eq!(Fx::dec("1.83e-7").to_f64(), 1.83e-7);
    assert_eq!(Fx::dec("-2.5").to_f64(), -2.5);
    assert!(rel(oracle::sin(&oracle::radians("30")).to_f64(), 0.5) < 1e-16);
}

#[test]
fn oracle_reproduces_frozen_values() {
    let w = "7.29e-5";
    let checks = [
        (oracle::bound("1.83e-7", "0.492", "1.3e-3", "83.6", w), frozen::RED_CMB),
        (oracle::bound("1.83e-7", "200", "1.3e-3", "83.6", w), frozen::GREEN_CMB),
        (oracle::bound("2.6e-5", "100", "1.3e-3", "90", w), frozen::BLUE_CMB),
        (oracle::bound("1.83e-7", "0.492", "1e-2", "90", w), frozen::RED_WORST_BETA_1E2),
        (oracle::fast_limit("1.83e-7", "1.3e-3"), frozen::FAST_LIMIT_CMB),
        (oracle::coherence_length("813e-9", "40e-9"), frozen::COHERENCE_40NM),
        (oracle::coherence_length("813e-9", "70e-9"), frozen::COHERENCE_70NM),
        (oracle::quadrature(&["215", "7.3"]), frozen::QUADRATURE_215_7_3),
        (oracle::alpha_for_fraction_deg("0.05"), frozen::ALPHA_5_PERCENT_DEG),
    ];
    for (i, (got, want)) in checks.iter().enumerate() {
        assert!(rel(*got, *want) < 1e-15, "check {i}: {got} vs {want}");
    }
}

#[test]
fn library_matches_frozen_values() {
    let red = BoundInputs::new(1.83e-7, 0.492).unwrap();
    let cmb = PreferredFrame::new(1.3e-3, 83.6f64.to_radians()).unwrap();
    assert!(rel(eval_bound(&red, &cmb).unwrap(), frozen::RED_CMB) < 1e-13);
    let green = BoundInputs::new(1.83e-7, 200.0).unwrap();
    assert!(rel(eval_bound(&green, &cmb).unwrap(), frozen::GREEN_CMB) < 1e-13);
    assert!(rel(eval_bound_fast_limit(1.83e-7, 1.3e-3).unwrap(), frozen::FAST_LIMIT_CMB) < 1e-14);
    assert!(rel(regime_threshold_dt(1.83e-7, 7.29e-5).unwrap(), frozen::THRESHOLD_RED) < 1e-15);
    assert!(rel(regime_threshold_dt(2.6e-5, 7.29e-5).unwrap(), frozen::THRESHOLD_BLUE) < 1e-15);
    assert!(rel(coherence_length(813e-9, 40e-9).unwrap(), frozen::COHERENCE_40NM) < 1e-14);
    assert!(rel(combine_quadrature(&[215.0, 7.3]).unwrap(), frozen::QUADRATURE_215_7_3) < 1e-15);
    assert!(rel(alpha_for_fraction(0.05).unwrap().to_degrees(), frozen::ALPHA_5_PERCENT_DEG) < 1e-13);
}

fn dec(v: f64) -> String {
    format!("{v:e}")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn bound_matches_oracle(
        lr in -10.0f64..-0.5,
        ldt in -4.0f64..5.0,
        beta in 0.0f64..0.999,
        chi_deg in 0.0f64..180.0,
    ) {
        let rho = 10f64.powf(lr);
        let dt = 10f64.powf(ldt);
        let lib = eval_bound(
            &BoundInputs::new(rho, dt).unwrap(),
            &PreferredFrame::new(beta, chi_deg.to_radians()).unwrap(),
        ).unwrap();
        let reference = oracle::bound(&dec(rho), &dec(dt), &dec(beta), &dec(chi_deg), "7.29e-5");
        // The degree-to-radian conversion in f64 moves sinχ by a few ulps.
        prop_assert!(rel(lib, reference) < 1e-12, "{lib} vs {reference}");
    }

    #[test]
    fn accessibility_matches_brute_force(
        alpha in 0.05f64..std::f64::consts::FRAC_PI_2,
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
    ) {
        let geo = SiteGeometry::new(alpha, 1.0, 0.0).unwrap();
        let dir = FrameDirection::new(theta, phi).unwrap();
        // Skip directions within a hair of the boundary |cosα cosθ| = sinα sinθ.
        let margin = (alpha.sin() * theta.sin()) - (alpha.cos() * theta.cos()).abs();
        prop_assume!(margin.abs() > 1e-3);
        prop_assert_eq!(is_accessible(&geo, &dir), oracle::brute_force_accessible(alpha, theta, phi, 20_000));
    }
}
