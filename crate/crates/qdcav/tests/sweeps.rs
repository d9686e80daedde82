use proptest::prelude::*;
use qdcav::sweep::{jc_term_toggle, run_sweep, Axis, SweepParameter, SweepPlan};
use qdcav_core::liouvillian::{build_liouvillian, phonon_rates};
use qdcav_core::phonon_bath::{BathParams, PhononKernel};
use qdcav_core::solver::steady_state;
use qdcav_core::SystemConfig;

fn small_system() -> SystemConfig {
    SystemConfig {
        n_max: 4,
        ..SystemConfig::default()
    }
    .with_detunings(1.6, 0.0)
}

#[test]
fn single_point_equals_direct_solve() {
    let bath = BathParams::inas(4.0).unwrap();
    let plan = SweepPlan::new(
        "one",
        vec![Axis::fixed(SweepParameter::LaserDetuning, 1.7)],
        small_system(),
        bath,
    );
    let table = run_sweep(&plan, Some(1)).unwrap();
    assert_eq!(table.rows.len(), 1);
    let row = &table.rows[0];

    let config = small_system().with_detunings(1.6, 1.7);
    let rates = phonon_rates(&config, &PhononKernel::new(bath).unwrap()).unwrap();
    let ss = steady_state(&build_liouvillian(&config, &rates).unwrap()).unwrap();
    assert_eq!(row.n_x, ss.n_x);
    assert_eq!(row.n_c, ss.n_c);
    assert_eq!(row.rates, rates);
    assert!(row.is_ok());
}

#[test]
fn rows_are_independent_of_worker_count() {
    let mut plan = SweepPlan::new(
        "grid",
        vec![
            Axis::new(SweepParameter::Temperature, 4.0, 10.0, 6.0),
            Axis::new(SweepParameter::LaserDetuning, 1.0, 2.0, 0.25),
        ],
        small_system(),
        BathParams::inas(4.0).unwrap(),
    );
    plan.pair_phonons = true;
    let one = run_sweep(&plan, Some(1)).unwrap();
    let three = run_sweep(&plan, Some(3)).unwrap();
    assert_eq!(one, three);
    assert_eq!(one.rows.len(), 20);
    assert!(one.rows[..10].iter().all(|r| r.phonons));
    assert_eq!(one.rows[5].temperature_k, 10.0);
    assert_eq!(one.rows[5].values, vec![10.0, 1.0]);
    assert!(one.block(false).all(|r| r.rates.gamma_up_cav == 0.0));
}

#[test]
fn hotter_baths_scatter_faster() {
    let plan = SweepPlan::new(
        "temperature",
        vec![Axis::new(SweepParameter::Temperature, 2.0, 12.0, 5.0)],
        small_system().with_detunings(1.0, 1.0),
        BathParams::inas(4.0).unwrap(),
    );
    let t = run_sweep(&plan, None).unwrap();
    let up: Vec<f64> = t.rows.iter().map(|r| r.rates.gamma_up_cav).collect();
    let b: Vec<f64> = t.rows.iter().map(|r| r.rates.mean_displacement).collect();
    assert!(up.windows(2).all(|w| w[1] > w[0]), "{up:?}");
    assert!(b.windows(2).all(|w| w[1] < w[0]), "{b:?}");
}

#[test]
fn drive_axis_sets_the_active_drive() {
    let plan = SweepPlan::new(
        "drive",
        vec![Axis::new(SweepParameter::DriveStrength, 0.0, 100.0, 50.0)],
        small_system().with_exciton_drive(1.0),
        BathParams::inas(4.0).unwrap(),
    );
    let t = run_sweep(&plan, None).unwrap();
    let etas: Vec<f64> = t.rows.iter().map(|r| r.config.eta_x_prime_uev).collect();
    assert_eq!(etas, vec![0.0, 50.0, 100.0]);
    assert!(t.rows.iter().all(|r| r.config.eta_c_uev == 0.0));
    assert_eq!(t.rows[0].n_x, 0.0);
}

#[test]
fn failures_are_recorded_per_row() {
    let lossless = SystemConfig {
        kappa_uev: 0.0,
        gamma_uev: 0.0,
        gamma_prime_uev: 0.0,
        phonons_enabled: false,
        n_max: 2,
        ..SystemConfig::default()
    };
    let plan = SweepPlan::new(
        "closed",
        vec![Axis::new(SweepParameter::LaserDetuning, 0.0, 0.2, 0.1)],
        lossless,
        BathParams::inas(4.0).unwrap(),
    );
    let t = run_sweep(&plan, None).unwrap();
    assert_eq!(t.rows.len(), 3);
    assert_eq!(t.failures(), 3);
    assert!(t.rows.iter().all(|r| r.n_x.is_nan() && r.error.is_some()));
    let table = t.to_table();
    assert!(table.column("n_x").unwrap().iter().all(|v| v.is_nan()));
}

#[test]
fn invalid_plans_are_rejected_up_front() {
    let bath = BathParams::inas(4.0).unwrap();
    let empty = SweepPlan::new("none", vec![], small_system(), bath);
    assert!(run_sweep(&empty, None).is_err());
    let backwards = SweepPlan::new(
        "back",
        vec![Axis::new(SweepParameter::LaserDetuning, 1.0, 0.0, 0.1)],
        small_system(),
        bath,
    );
    assert!(run_sweep(&backwards, None).is_err());
}

#[test]
fn uncoupled_ladders_without_phonons_never_excite_the_dot() {
    let mut plan = SweepPlan::new(
        "ladders",
        vec![Axis::new(SweepParameter::LaserDetuning, -1.0, 2.0, 0.5)],
        SystemConfig {
            phonons_enabled: false,
            ..small_system()
        },
        BathParams::inas(4.0).unwrap(),
    );
    let t = jc_term_toggle(&plan, None).unwrap();
    assert!(t.rows.iter().all(|r| r.n_x == 0.0 && !r.config.jc_coupling));
    plan.system = plan.system.with_exciton_drive(100.0);
    assert!(jc_term_toggle(&plan, None).is_err());
}

#[test]
fn uncoupled_ladders_with_phonons_still_invert() {
    let plan = SweepPlan::new(
        "ladders",
        vec![Axis::fixed(SweepParameter::LaserDetuning, 1.6)],
        SystemConfig { n_max: 12, ..small_system() },
        BathParams::inas(4.0).unwrap(),
    );
    let t = jc_term_toggle(&plan, None).unwrap();
    assert!(t.rows[0].n_x > 0.5, "{}", t.rows[0].n_x);
}

proptest! {
    #[test]
    fn axis_values_stay_inside_and_are_evenly_spaced(
        min in -5.0f64..5.0,
        span in 0.0f64..5.0,
        step in 0.01f64..1.0,
    ) {
        let a = Axis::new(SweepParameter::LaserDetuning, min, min + span, step);
        let v = a.values();
        prop_assert!(!v.is_empty());
        prop_assert_eq!(v[0], min);
        prop_assert!(*v.last().unwrap() <= min + span + 1e-9);
        prop_assert!(min + span - v.last().unwrap() < step + 1e-9);
        for (k, x) in v.iter().enumerate() {
            prop_assert!((x - (min + k as f64 * step)).abs() < 1e-12);
        }
    }

    #[test]
    fn axis_specs_round_trip(min in -5.0f64..5.0, span in 0.0f64..5.0, step in 0.01f64..1.0) {
        let spec = format!("cavity:{min}:{}:{step}", min + span);
        let a = Axis::parse(&spec).unwrap();
        prop_assert_eq!(a, Axis::new(SweepParameter::CavityDetuning, min, min + span, step));
    }
}
