use proptest::prelude::*;
use qdcav_core::analytic::{
    cavity_amplitude, nx_cavity_driven_effective, nx_no_cavity, nx_thermal, DriveFilter, EffectiveModelParams,
};
use qdcav_core::liouvillian::{phonon_rates, SystemConfig};
use qdcav_core::phonon_bath::{BathParams, PhononKernel};

#[test]
fn no_inversion_without_scattering() {
    let n = nx_no_cavity(300.0, 0.0, 0.5, 2.0, 0.0, 0.0).unwrap();
    let expected = 0.5 * (1.0 - 0.5 / (0.5 + 4.0 * 300.0 * 300.0 / 1.25));
    assert!((n - expected).abs() < 1e-15);
    assert!(n < 0.5 && n > 0.4999);
}

#[test]
fn weak_drive_limit_is_ground_state() {
    let mut last = 1.0;
    for eta in [1.0, 0.1, 0.01, 0.001] {
        // rates proportional to η′²
        let r = 1e-3 * eta * eta;
        let n = nx_no_cavity(eta, 0.5, 0.5, 2.0, r, 0.1 * r).unwrap();
        assert!(n < last);
        last = n;
    }
    assert!(last < 1e-8, "{last}");
}

#[test]
fn dominant_up_scattering_inverts() {
    let n = nx_no_cavity(1.0, 2.0, 0.5, 2.0, 20.0, 2.0).unwrap();
    assert!(n > 0.5);
}

#[test]
fn thermal_model_example() {
    let n = nx_thermal(0.3, 0.6, 4.0).unwrap();
    let omega = (0.36f64 + 0.36).sqrt();
    let expected = 0.5 * (1.0 + 0.6 / omega * (omega / (2.0 * 0.086_173_33 * 4.0)).tanh());
    assert!((n - expected).abs() < 1e-15);
    assert!((n - 0.798).abs() < 1e-3);
    assert_eq!(nx_thermal(0.3, 0.0, 4.0).unwrap(), 0.5);
}

#[test]
fn cavity_amplitude_examples() {
    let a = cavity_amplitude(0.3, 0.05, 0.0).unwrap();
    assert!((a.re - 6.0).abs() < 1e-12 && a.im.abs() < 1e-12);
    assert!((a.norm_sqr() - 36.0).abs() < 1e-10);
    assert_eq!(cavity_amplitude(0.0, 0.05, 0.3).unwrap().norm(), 0.0);
    let half = cavity_amplitude(0.3, 0.05, 0.05).unwrap().norm_sqr();
    assert!((half - 18.0).abs() < 1e-10);
}

#[test]
fn effective_model_without_drive_is_empty() {
    let c = SystemConfig::default().with_cavity_drive(0.0).with_detunings(1.6, 1.0);
    let n = nx_cavity_driven_effective(&c, &EffectiveModelParams::default(), 5.0, 0.1).unwrap();
    assert_eq!(n, 0.0);
}

#[test]
fn effective_rates_scale_with_drive_squared() {
    // Γ̃± = |α|²Γ±
    let base = SystemConfig::default().with_detunings(1.6, 1.5);
    let doubled = base.with_cavity_drive(2.0 * base.eta_c_uev);
    let a1 = cavity_amplitude(base.eta_c_uev, 2.5 * base.kappa_uev, base.delta_lc_mev() * 1e3).unwrap();
    let a2 = cavity_amplitude(doubled.eta_c_uev, 2.5 * base.kappa_uev, base.delta_lc_mev() * 1e3).unwrap();
    assert!((a2.norm_sqr() / a1.norm_sqr() - 4.0).abs() < 1e-12);
}

#[test]
fn drive_filters_coincide_when_detunings_do() {
    // Δ_cx = 0 makes Δ_Lc = Δ_Lx.
    let c = SystemConfig::default().with_detunings(0.0, 0.7);
    let printed = EffectiveModelParams::default();
    let cavity = EffectiveModelParams {
        drive_filter: DriveFilter::CavityDetuning,
        ..printed
    };
    let a = nx_cavity_driven_effective(&c, &printed, 3.0, 1.0).unwrap();
    let b = nx_cavity_driven_effective(&c, &cavity, 3.0, 1.0).unwrap();
    assert_eq!(a, b);
}

fn detuning_grid() -> Vec<f64> {
    (0..=80).map(|k| -2.0 + 0.05 * k as f64).collect()
}

fn no_cavity_curve(eta_uev: f64) -> Vec<(f64, f64)> {
    let kernel = PhononKernel::new(BathParams::inas(4.0).unwrap()).unwrap();
    detuning_grid()
        .into_iter()
        .map(|d| {
            let c = SystemConfig {
                g_prime_uev: 0.0,
                ..SystemConfig::default()
            }
            .with_detunings(0.0, d)
            .with_exciton_drive(eta_uev);
            let r = phonon_rates(&c, &kernel).unwrap();
            (d, nx_no_cavity(eta_uev, d, c.gamma_uev, c.gamma_prime_uev, r.gamma_up_x, r.gamma_down_x).unwrap())
        })
        .collect()
}

#[test]
fn thermal_model_overestimates_inverted_populations() {
    for (d, n) in no_cavity_curve(300.0) {
        if n > 0.5 {
            assert!(nx_thermal(0.3, d, 4.0).unwrap() >= n, "Δ = {d}");
        }
    }
}

#[test]
fn thermal_model_fails_at_weak_drive() {
    let worst = no_cavity_curve(30.0)
        .into_iter()
        .map(|(d, n)| (nx_thermal(0.03, d, 4.0).unwrap() - n).abs())
        .fold(0.0, f64::max);
    assert!(worst > 0.2, "largest mismatch {worst}");
}

proptest! {
    #[test]
    fn no_cavity_population_is_bounded(
        eta in 0.0f64..2000.0,
        delta in -5.0f64..5.0,
        gamma in 1e-3f64..50.0,
        gamma_p in 0.0f64..50.0,
        up in 0.0f64..100.0,
        down in 0.0f64..100.0,
    ) {
        let n = nx_no_cavity(eta, delta, gamma, gamma_p, up, down).unwrap();
        prop_assert!((0.0..=1.0).contains(&n));
    }

    #[test]
    fn thermal_model_is_antisymmetric(eta in 0.0f64..1.0, delta in -5.0f64..5.0, t in 0.0f64..40.0) {
        let s = nx_thermal(eta, delta, t).unwrap() + nx_thermal(eta, -delta, t).unwrap();
        prop_assert!((s - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cavity_amplitude_is_lorentzian(eta in 0.0f64..1.0, kappa in 1e-3f64..1.0, delta in -3.0f64..3.0) {
        let a = cavity_amplitude(eta, kappa, delta).unwrap().norm_sqr();
        let expected = eta * eta / (kappa * kappa + delta * delta);
        prop_assert!((a - expected).abs() <= 1e-12 * expected.max(1e-300));
    }
}
