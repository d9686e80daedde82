use qdcav_core::hilbert::DensityMatrix;
use qdcav_core::liouvillian::{build_liouvillian, SystemConfig};
use qdcav_core::phonon_bath::PhononRateSet;
use qdcav_core::solver::time_evolve;
use qdcav_core::trajectory::{
    ensemble_average, mean_and_standard_error, reduce_records, run_trajectory, run_trajectory_from, ChannelTag,
    TrajectoryError, TrajectoryOptions, TrajectorySystem,
};
use qdcav_core::units::uev_to_angular;
use qdcav_core::Complex64;

fn ground(system: &TrajectorySystem) -> Vec<Complex64> {
    let mut psi = vec![Complex64::new(0.0, 0.0); system.space.dim()];
    psi[0] = Complex64::new(1.0, 0.0);
    psi
}

/// Scaled-down cavity-driven system with strong phonon scattering so that
/// all channels fire within a short horizon.
fn desk_config() -> (SystemConfig, PhononRateSet) {
    let config = SystemConfig {
        n_max: 3,
        kappa_uev: 80.0,
        gamma_uev: 10.0,
        gamma_prime_uev: 5.0,
        ..SystemConfig::default()
    }
    .with_detunings(0.4, 0.3)
    .with_cavity_drive(60.0);
    let rates = PhononRateSet {
        gamma_up_cav: 30.0,
        gamma_down_cav: 8.0,
        ..PhononRateSet::zero()
    };
    (config, rates)
}

#[test]
fn photon_waiting_time_is_exponential() {
    let config = SystemConfig {
        n_max: 2,
        g_prime_uev: 0.0,
        gamma_uev: 0.0,
        gamma_prime_uev: 0.0,
        phonons_enabled: false,
        ..SystemConfig::default()
    }
    .with_cavity_drive(0.0);
    let system = TrajectorySystem::new(&config, &PhononRateSet::zero()).unwrap();
    let mut psi = vec![Complex64::new(0.0, 0.0); system.space.dim()];
    psi[system.space.index(1, false)] = Complex64::new(1.0, 0.0);
    let opts = TrajectoryOptions::default();
    let times: Vec<f64> = (0..10_000)
        .map(|seed| {
            let r = run_trajectory_from(&system, &psi, seed, 150.0, 0.5, &opts).unwrap();
            assert_eq!(r.jumps.len(), 1, "seed {seed}");
            assert_eq!(r.jumps[0].channel, ChannelTag::CavityDecay);
            r.jumps[0].t_ps
        })
        .collect();
    let (mean, se) = mean_and_standard_error(&times);
    let expected = 1.0 / (2.0 * uev_to_angular(config.kappa_uev));
    assert!((mean - expected).abs() < 3.0 * se, "{mean} ± {se} vs {expected}");
}

#[test]
fn lossless_evolution_keeps_norm() {
    let config = SystemConfig {
        n_max: 4,
        kappa_uev: 0.0,
        gamma_uev: 0.0,
        gamma_prime_uev: 0.0,
        phonons_enabled: false,
        ..SystemConfig::default()
    }
    .with_detunings(0.2, 0.1)
    .with_cavity_drive(40.0);
    let r = run_trajectory(&config, &PhononRateSet::zero(), 3, 200.0, 1.0).unwrap();
    assert!(r.jumps.is_empty());
    assert!((r.final_norm_sq - 1.0).abs() < 1e-8, "{}", r.final_norm_sq);
    assert!(r.n_c.iter().any(|&n| n > 1e-3));
}

#[test]
fn undriven_ensemble_stays_empty() {
    let (config, rates) = desk_config();
    let config = config.with_cavity_drive(0.0);
    let avg = ensemble_average(&config, &rates, 20, 100, 50.0, 0.5).unwrap();
    assert!(avg.n_x_mean.iter().all(|&n| n == 0.0));
    assert!(avg.n_c_mean.iter().all(|&n| n == 0.0));
}

#[test]
fn single_trajectory_ensemble_is_the_record() {
    let (config, rates) = desk_config();
    let avg = ensemble_average(&config, &rates, 1, 42, 40.0, 0.1).unwrap();
    let r = run_trajectory(&config, &rates, 42, 40.0, 0.1).unwrap();
    assert_eq!(avg.n_x_mean, r.n_x);
    assert!(avg.n_x_se.iter().all(|&s| s == 0.0));
}

#[test]
fn records_are_reproducible_and_jump_times_ordered() {
    let (config, rates) = desk_config();
    let a = run_trajectory(&config, &rates, 9, 150.0, 0.1).unwrap();
    let b = run_trajectory(&config, &rates, 9, 150.0, 0.1).unwrap();
    assert_eq!(a, b);
    assert!(!a.jumps.is_empty());
    assert!(a.jumps.windows(2).all(|w| w[0].t_ps <= w[1].t_ps));
    assert!(a.jumps.iter().all(|j| j.t_ps > 0.0 && j.t_ps <= 150.0));
    assert_eq!(a.jump_counts.iter().sum::<usize>(), a.jumps.len());
    assert!(a.max_norm_error < 1e-8);
}

#[test]
fn coarse_sampling_is_rejected() {
    let (config, rates) = desk_config();
    let err = run_trajectory(&config, &rates, 1, 100.0, 20.0).unwrap_err();
    assert!(matches!(err, TrajectoryError::SamplingTooCoarse { .. }), "{err:?}");
}

#[test]
fn ensemble_matches_master_equation() {
    let (config, rates) = desk_config();
    let t_final = 60.0;
    let dt = 0.1;
    let avg = ensemble_average(&config, &rates, 3000, 1_000, t_final, dt).unwrap();
    let l = build_liouvillian(&config, &rates).unwrap();
    let rho0 = DensityMatrix::basis_projector(l.space, 0, false);
    let me = time_evolve(&rho0, &l, t_final, dt).unwrap();
    for k in (60..=600).step_by(60) {
        let (mx, sx) = (avg.n_x_mean[k], avg.n_x_se[k]);
        let (mc, sc) = (avg.n_c_mean[k], avg.n_c_se[k]);
        assert!((mx - me.n_x[k]).abs() < 3.0 * sx, "n_x at t={}: {mx}±{sx} vs {}", me.times[k], me.n_x[k]);
        assert!((mc - me.n_c[k]).abs() < 3.0 * sc, "n_c at t={}: {mc}±{sc} vs {}", me.times[k], me.n_c[k]);
    }
}

#[test]
fn jump_counts_match_master_equation_flux() {
    let (config, rates) = desk_config();
    let t_final = 60.0;
    let dt = 0.05;
    let system = TrajectorySystem::new(&config, &rates).unwrap();
    let psi = ground(&system);
    let opts = TrajectoryOptions::default();
    let records: Vec<_> = (0..2000)
        .map(|s| run_trajectory_from(&system, &psi, 5_000 + s, t_final, dt, &opts).unwrap())
        .collect();
    let avg = reduce_records(&records, 5_000).unwrap();
    assert_eq!(avg.n_traj, 2000);

    // ∫⟨c†c⟩dt along the master-equation solution by the trapezoid rule
    let l = build_liouvillian(&config, &rates).unwrap();
    let rho0 = DensityMatrix::basis_projector(l.space, 0, false);
    let fine = 0.01;
    let steps = (t_final / fine).round() as usize;
    let mut rho = rho0;
    let mut flux = vec![0.0; system.channels.len()];
    let rate_at = |rho: &DensityMatrix| -> Vec<f64> {
        system
            .channels
            .iter()
            .map(|ch| {
                let cdc = &ch.collapse.adjoint() * &ch.collapse;
                rho.expectation_real(&cdc).unwrap()
            })
            .collect()
    };
    let mut prev = rate_at(&rho);
    for _ in 0..steps {
        rho = time_evolve(&rho, &l, fine, fine).unwrap().final_state;
        let now = rate_at(&rho);
        for (f, (a, b)) in flux.iter_mut().zip(prev.iter().zip(&now)) {
            *f += 0.5 * fine * (a + b);
        }
        prev = now;
    }
    for (ch, expected) in system.channels.iter().zip(&flux) {
        let per_traj: Vec<f64> = records.iter().map(|r| r.count(ch.tag) as f64).collect();
        let (mean, se) = mean_and_standard_error(&per_traj);
        assert!(
            (mean - expected).abs() < 3.0 * se.max(1e-3),
            "{:?}: {mean} ± {se} vs {expected}",
            ch.tag
        );
    }
}
