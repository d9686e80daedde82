use proptest::prelude::*;
use qdcav_core::analytic::nx_no_cavity;
use qdcav_core::hilbert::{build_operators, DensityMatrix};
use qdcav_core::liouvillian::{build_hamiltonian, build_liouvillian, dissipators, DriveMode, SystemConfig};
use qdcav_core::phonon_bath::PhononRateSet;
use qdcav_core::solver::{
    steady_state, steady_state_with, time_evolve, truncation_certify, SolverError, SolverMethod, SteadyStateOptions,
};
use qdcav_core::units::HBAR_MEV_PS;
use qdcav_core::{Complex64, SparseMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Dense column-major product.
fn matmul(n: usize, a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); n * n];
    for j in 0..n {
        for k in 0..n {
            let bkj = b[k + j * n];
            for i in 0..n {
                out[i + j * n] += a[i + k * n] * bkj;
            }
        }
    }
    out
}

fn dagger(n: usize, a: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![c(0.0, 0.0); n * n];
    for j in 0..n {
        for i in 0..n {
            out[j + i * n] = a[i + j * n].conj();
        }
    }
    out
}

/// `−(i/ħ)[H, ρ] + Σ r (2cρc† − c†cρ − ρc†c)` with dense matrices.
fn generator_by_matrices(config: &SystemConfig, rates: &PhononRateSet, rho: &[Complex64]) -> Vec<Complex64> {
    let ops = build_operators(config.space().unwrap());
    let n = ops.space.dim();
    let h: Vec<_> = build_hamiltonian(config, &ops)
        .to_dense_col_major()
        .into_iter()
        .map(|v| v / HBAR_MEV_PS)
        .collect();
    let hr = matmul(n, &h, rho);
    let rh = matmul(n, rho, &h);
    let mut out: Vec<_> = hr.iter().zip(&rh).map(|(a, b)| (a - b) * c(0.0, -1.0)).collect();
    for d in dissipators(config, rates, &ops) {
        let op = d.op.to_dense_col_major();
        let opd = dagger(n, &op);
        let jump = matmul(n, &matmul(n, &op, rho), &opd);
        let cdc = matmul(n, &opd, &op);
        let left = matmul(n, &cdc, rho);
        let right = matmul(n, rho, &cdc);
        for k in 0..n * n {
            out[k] += (jump[k] * 2.0 - left[k] - right[k]) * d.rate;
        }
    }
    out
}

fn random_hermitian(n: usize, entries: &[(f64, f64)]) -> Vec<Complex64> {
    let mut m = vec![c(0.0, 0.0); n * n];
    let mut it = entries.iter().cycle();
    for j in 0..n {
        for i in j..n {
            let &(re, im) = it.next().unwrap();
            if i == j {
                m[i + j * n] = c(re, 0.0);
            } else {
                m[i + j * n] = c(re, im);
                m[j + i * n] = c(re, -im);
            }
        }
    }
    m
}

prop_compose! {
    fn small_config()(
        n_max in 1usize..4,
        g in 0.0f64..200.0,
        kappa in 5.0f64..100.0,
        gamma in 0.1f64..5.0,
        gamma_p in 0.0f64..5.0,
        exciton in any::<bool>(),
        eta in 0.0f64..300.0,
        d_cx in -2.0f64..2.0,
        d_lx in -2.0f64..2.0,
        jc in any::<bool>(),
    ) -> SystemConfig {
        let base = SystemConfig {
            n_max,
            g_prime_uev: g,
            kappa_uev: kappa,
            gamma_uev: gamma,
            gamma_prime_uev: gamma_p,
            jc_coupling: jc,
            ..SystemConfig::default()
        }
        .with_detunings(d_cx, d_lx);
        if exciton { base.with_exciton_drive(eta) } else { base.with_cavity_drive(eta) }
    }
}

prop_compose! {
    fn rate_set()(r in proptest::array::uniform4(0.0f64..20.0)) -> PhononRateSet {
        PhononRateSet {
            gamma_up_cav: r[0],
            gamma_down_cav: r[1],
            gamma_up_x: r[2],
            gamma_down_x: r[3],
            mean_displacement: 0.9,
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn superoperator_matches_matrix_form(
        config in small_config(),
        rates in rate_set(),
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
    ) {
        let l = build_liouvillian(&config, &rates).unwrap();
        let n = l.dim();
        let rho = random_hermitian(n, &entries);
        let by_superop = l.matrix.mul_vec(&rho);
        let by_matrices = generator_by_matrices(&config, &rates, &rho);
        let scale = l.matrix.norm_inf();
        for (a, b) in by_superop.iter().zip(&by_matrices) {
            prop_assert!((a - b).norm() <= 1e-12 * scale);
        }
    }

    #[test]
    fn generator_preserves_trace_and_hermiticity(
        config in small_config(),
        rates in rate_set(),
        entries in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..40),
    ) {
        let l = build_liouvillian(&config, &rates).unwrap();
        prop_assert!(l.trace_preservation_error() <= 1e-13 * l.matrix.norm_inf());
        let rho = DensityMatrix::from_col_major(l.dim(), random_hermitian(l.dim(), &entries)).unwrap();
        let out = l.apply(&rho).unwrap();
        prop_assert!(out.trace().norm() <= 1e-12 * l.matrix.norm_inf());
        prop_assert!(out.hermiticity_error() <= 1e-12 * l.matrix.norm_inf());
    }

    #[test]
    fn steady_states_are_physical(config in small_config(), rates in rate_set()) {
        let l = build_liouvillian(&config, &rates).unwrap();
        let ss = steady_state(&l).unwrap();
        prop_assert!(ss.physicality.is_physical(), "{:?}", ss.physicality);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ss.n_x));
        prop_assert!(ss.n_c >= -1e-12);
    }

    #[test]
    fn decoupled_cavity_reproduces_two_level_formula(
        eta in 1.0f64..400.0,
        d_lx in -2.0f64..2.0,
        up in 0.0f64..30.0,
        down in 0.0f64..30.0,
        gamma in 0.1f64..5.0,
        gamma_p in 0.0f64..5.0,
    ) {
        let config = SystemConfig {
            n_max: 1,
            g_prime_uev: 0.0,
            gamma_uev: gamma,
            gamma_prime_uev: gamma_p,
            ..SystemConfig::default()
        }
        .with_detunings(1.6, d_lx)
        .with_exciton_drive(eta);
        let rates = PhononRateSet { gamma_up_x: up, gamma_down_x: down, ..PhononRateSet::zero() };
        let ss = steady_state(&build_liouvillian(&config, &rates).unwrap()).unwrap();
        let expected = nx_no_cavity(eta, d_lx, gamma, gamma_p, up, down).unwrap();
        prop_assert!((ss.n_x - expected).abs() < 1e-8, "{} vs {}", ss.n_x, expected);
    }
}

#[test]
fn iterative_solver_agrees_with_factorization() {
    let config = SystemConfig {
        n_max: 8,
        ..SystemConfig::default()
    }
    .with_detunings(1.6, 1.5);
    let rates = PhononRateSet {
        gamma_up_cav: 3.0,
        gamma_down_cav: 0.05,
        ..PhononRateSet::zero()
    };
    let l = build_liouvillian(&config, &rates).unwrap();
    let direct = steady_state(&l).unwrap();
    let opts = SteadyStateOptions {
        method: SolverMethod::Iterative,
        ..SteadyStateOptions::default()
    };
    let gmres = steady_state_with(&l, &opts).unwrap();
    assert!((direct.n_x - gmres.n_x).abs() < 1e-9);
    assert!((direct.n_c - gmres.n_c).abs() < 1e-8);
    assert!(gmres.physicality.is_physical(), "{:?}", gmres.physicality);
}

#[test]
fn time_evolution_relaxes_to_steady_state() {
    let config = SystemConfig {
        n_max: 4,
        eta_c_uev: 100.0,
        drive_mode: DriveMode::Cavity,
        kappa_uev: 100.0,
        gamma_uev: 20.0,
        ..SystemConfig::default()
    }
    .with_detunings(0.5, 0.3);
    let rates = PhononRateSet {
        gamma_up_cav: 4.0,
        gamma_down_cav: 1.0,
        ..PhononRateSet::zero()
    };
    let l = build_liouvillian(&config, &rates).unwrap();
    let ss = steady_state(&l).unwrap();
    let rho0 = DensityMatrix::basis_projector(l.space, 0, false);
    let ts = time_evolve(&rho0, &l, 1500.0, 50.0).unwrap();
    assert_eq!(ts.times.len(), 31);
    assert!((ts.n_x.last().unwrap() - ss.n_x).abs() < 1e-6, "{} vs {}", ts.n_x.last().unwrap(), ss.n_x);
    assert!((ts.n_c.last().unwrap() - ss.n_c).abs() < 1e-6);
    assert!(ts.max_trace_drift < 1e-9);
    assert!(ts.max_hermiticity_drift < 1e-9);
}

#[test]
fn time_evolution_rejects_bad_arguments() {
    let config = SystemConfig {
        n_max: 1,
        ..SystemConfig::default()
    };
    let l = build_liouvillian(&config, &PhononRateSet::zero()).unwrap();
    let rho0 = DensityMatrix::basis_projector(l.space, 0, false);
    assert!(matches!(time_evolve(&rho0, &l, 0.0, 1.0), Err(SolverError::InvalidArgument(_))));
    assert!(matches!(time_evolve(&rho0, &l, 1.0, -1.0), Err(SolverError::InvalidArgument(_))));
    let wrong = DensityMatrix::maximally_mixed(6);
    assert!(time_evolve(&wrong, &l, 1.0, 0.5).is_err());
}

#[test]
fn weak_drive_truncation_converges_early() {
    let config = SystemConfig::default().with_detunings(1.6, 1.7).with_cavity_drive(30.0);
    let rates = PhononRateSet {
        gamma_up_cav: 4.3,
        gamma_down_cav: 0.04,
        ..PhononRateSet::zero()
    };
    let report = truncation_certify(&config, &rates, &[2, 4, 6, 8], 1e-6).unwrap();
    assert!(report.is_converged(), "{report:?}");
    assert!(!report.non_monotone);
    assert!(report.converged_at.unwrap() <= 6);
}

#[test]
fn undriven_generator_has_vacuum_steady_state() {
    let config = SystemConfig::default().with_cavity_drive(0.0);
    let config = SystemConfig { n_max: 5, ..config };
    let rates = PhononRateSet {
        gamma_up_cav: 4.3,
        gamma_down_cav: 0.04,
        ..PhononRateSet::zero()
    };
    let ss = steady_state(&build_liouvillian(&config, &rates).unwrap()).unwrap();
    assert!(ss.n_x.abs() < 1e-14 && ss.n_c.abs() < 1e-14);
}

#[test]
fn triplet_export_lists_every_entry() {
    let config = SystemConfig {
        n_max: 1,
        ..SystemConfig::default()
    };
    let l = build_liouvillian(&config, &PhononRateSet::zero()).unwrap();
    let text = l.matrix.to_triplet_text("photon-major,exciton-fastest");
    let data_lines = text.lines().filter(|s| !s.starts_with('#') && !s.is_empty()).count();
    assert_eq!(data_lines, l.matrix.nnz());
    let round = SparseMatrix::from_triplets(l.matrix.rows(), l.matrix.cols(), &l.matrix.triplets());
    assert_eq!(round, l.matrix);
}
