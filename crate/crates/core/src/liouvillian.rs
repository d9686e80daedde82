//! Polaron-frame Hamiltonian and the Lindblad generator as a sparse
//! superoperator.
//!
//! The generator is
//!
//! ```text
//! ρ̇ = −(i/ħ)[H, ρ] + κℒ[a]ρ + (γ/2)ℒ[σ⁻]ρ + (γ′/2)ℒ[σ⁺σ⁻]ρ
//!     + (Γ^{σ⁺a}/2)ℒ[σ⁺a]ρ + (Γ^{a†σ⁻}/2)ℒ[a†σ⁻]ρ
//!     + (Γ^{σ⁺}/2)ℒ[σ⁺]ρ + (Γ^{σ⁻}/2)ℒ[σ⁻]ρ        (exciton drive only)
//! ```
//!
//! with `ℒ[ξ]ρ = 2ξρξ† − ξ†ξρ − ρξ†ξ` and
//! `H = Δ_xL σ⁺σ⁻ + Δ_cL a†a + g′(a†σ⁻ + σ⁺a) + η′_x(σ⁺ + σ⁻) + η_c(a + a†)`.
//!
//! Density matrices are vectorized by column stacking, so
//! `vec(AXB) = (Bᵀ ⊗ A) vec X`.

use alloc::string::String;
use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{build_operators, DensityMatrix, HilbertError, OperatorSet, SpaceSpec, BASIS_ORDERING};
use crate::phonon_bath::{BathError, PhononKernel, PhononRateSet};
use crate::sparse::SparseMatrix;
use crate::units::{uev_to_angular, HBAR_MEV_PS};

/// Name of the vectorization convention, recorded in provenance.
pub const VECTORIZATION: &str = "column-stacking";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LiouvillianError {
    #[error("invalid configuration value {field} = {value}")]
    InvalidConfig { field: &'static str, value: f64 },
    #[error("both exciton and cavity drives are nonzero; at most one drive may be active")]
    DriveConflict,
    #[error("drive mode {mode:?} does not match the nonzero drive amplitude")]
    DriveModeMismatch { mode: DriveMode },
    #[error("phonon rate {name} = {value} μeV must be finite and nonnegative")]
    NegativeRate { name: &'static str, value: f64 },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Bath(#[from] BathError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveMode {
    Exciton,
    Cavity,
}

/// Physical parameters of the dot–cavity system. Couplings and rates are in
/// μeV (as `ħ × rate`), detunings in meV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// `ħg′`, or the bare `ħg` when `renormalize_with_b` is set.
    pub g_prime_uev: f64,
    /// Cavity field decay `ħκ`.
    pub kappa_uev: f64,
    /// Radiative exciton decay `ħγ`.
    pub gamma_uev: f64,
    /// Pure dephasing `ħγ′`.
    pub gamma_prime_uev: f64,
    pub drive_mode: DriveMode,
    /// `ħη′_x`, or the bare `ħη_x` when `renormalize_with_b` is set.
    pub eta_x_prime_uev: f64,
    pub eta_c_uev: f64,
    /// `ħ(ω_x − ω_L)`, polaron shift included.
    pub delta_xl_mev: f64,
    /// `ħ(ω_c − ω_L)`.
    pub delta_cl_mev: f64,
    pub phonons_enabled: bool,
    pub n_max: usize,
    /// Keep the coherent exciton–cavity term in H. When false the two
    /// ladders couple only through phonon scattering.
    pub jc_coupling: bool,
    /// Treat the coupling fields as bare values and multiply by ⟨B⟩.
    pub renormalize_with_b: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        Self {
            g_prime_uev: 100.0,
            kappa_uev: 50.0,
            gamma_uev: 0.5,
            gamma_prime_uev: 2.0,
            drive_mode: DriveMode::Cavity,
            eta_x_prime_uev: 0.0,
            eta_c_uev: 300.0,
            delta_xl_mev: 0.0,
            delta_cl_mev: 0.0,
            phonons_enabled: true,
            n_max: 60,
            jc_coupling: true,
            renormalize_with_b: false,
        }
    }
}

impl SystemConfig {
    /// Sets the detunings from `Δ_cx = ω_c − ω_x` and `Δ_Lx = ω_L − ω_x`.
    pub fn with_detunings(mut self, delta_cx_mev: f64, delta_lx_mev: f64) -> Self {
        self.delta_xl_mev = -delta_lx_mev;
        self.delta_cl_mev = delta_cx_mev - delta_lx_mev;
        self
    }

    /// Exciton drive of strength `ħη′_x` with the cavity drive switched off.
    pub fn with_exciton_drive(mut self, eta_uev: f64) -> Self {
        self.drive_mode = DriveMode::Exciton;
        self.eta_x_prime_uev = eta_uev;
        self.eta_c_uev = 0.0;
        self
    }

    /// Cavity drive of strength `ħη_c` with the exciton drive switched off.
    pub fn with_cavity_drive(mut self, eta_uev: f64) -> Self {
        self.drive_mode = DriveMode::Cavity;
        self.eta_c_uev = eta_uev;
        self.eta_x_prime_uev = 0.0;
        self
    }

    /// `ω_c − ω_x` in meV.
    pub fn delta_cx_mev(&self) -> f64 {
        self.delta_cl_mev - self.delta_xl_mev
    }

    /// `ω_L − ω_x` in meV.
    pub fn delta_lx_mev(&self) -> f64 {
        -self.delta_xl_mev
    }

    /// `ω_L − ω_c` in meV.
    pub fn delta_lc_mev(&self) -> f64 {
        -self.delta_cl_mev
    }

    pub fn space(&self) -> Result<SpaceSpec, LiouvillianError> {
        Ok(SpaceSpec::new(self.n_max)?)
    }

    pub fn validate(&self) -> Result<(), LiouvillianError> {
        let nonneg = [
            ("g_prime_uev", self.g_prime_uev),
            ("kappa_uev", self.kappa_uev),
            ("gamma_uev", self.gamma_uev),
            ("gamma_prime_uev", self.gamma_prime_uev),
        ];
        for (field, value) in nonneg {
            if !(value.is_finite() && value >= 0.0) {
                return Err(LiouvillianError::InvalidConfig { field, value });
            }
        }
        let finite = [
            ("eta_x_prime_uev", self.eta_x_prime_uev),
            ("eta_c_uev", self.eta_c_uev),
            ("delta_xl_mev", self.delta_xl_mev),
            ("delta_cl_mev", self.delta_cl_mev),
        ];
        for (field, value) in finite {
            if !value.is_finite() {
                return Err(LiouvillianError::InvalidConfig { field, value });
            }
        }
        if self.eta_x_prime_uev != 0.0 && self.eta_c_uev != 0.0 {
            return Err(LiouvillianError::DriveConflict);
        }
        let mismatch = match self.drive_mode {
            DriveMode::Exciton => self.eta_c_uev != 0.0,
            DriveMode::Cavity => self.eta_x_prime_uev != 0.0,
        };
        if mismatch {
            return Err(LiouvillianError::DriveModeMismatch {
                mode: self.drive_mode,
            });
        }
        self.space()?;
        Ok(())
    }

    /// Copy with `g′ = ⟨B⟩g` and `η′_x = ⟨B⟩η_x` applied if
    /// `renormalize_with_b` is set; otherwise an unchanged copy.
    pub fn renormalized(&self, mean_displacement: f64) -> Self {
        let mut c = *self;
        if c.renormalize_with_b {
            c.g_prime_uev *= mean_displacement;
            c.eta_x_prime_uev *= mean_displacement;
            c.renormalize_with_b = false;
        }
        c
    }
}

/// Phonon rates for a configuration: the cavity pair at `Δ_cx` with
/// coupling g′ and, for exciton driving, the exciton pair at `Δ_Lx` with
/// coupling η′_x. Returns zero rates when phonons are disabled.
pub fn phonon_rates(config: &SystemConfig, kernel: &PhononKernel) -> Result<PhononRateSet, LiouvillianError> {
    config.validate()?;
    if !config.phonons_enabled {
        return Ok(PhononRateSet::zero());
    }
    let b = kernel.mean_displacement();
    let c = config.renormalized(b);
    let cav = kernel.rate_pair(c.delta_cx_mev(), c.g_prime_uev * 1e-3)?;
    let (up_x, down_x) = match c.drive_mode {
        DriveMode::Exciton => {
            let p = kernel.rate_pair(c.delta_lx_mev(), c.eta_x_prime_uev.abs() * 1e-3)?;
            (p.up, p.down)
        }
        DriveMode::Cavity => (0.0, 0.0),
    };
    Ok(PhononRateSet {
        gamma_up_cav: cav.up,
        gamma_down_cav: cav.down,
        gamma_up_x: up_x,
        gamma_down_x: down_x,
        mean_displacement: b,
    })
}

/// System Hamiltonian in meV. Renormalization by ⟨B⟩ is not applied here;
/// pass a config from [`SystemConfig::renormalized`] if needed.
pub fn build_hamiltonian(config: &SystemConfig, ops: &OperatorSet) -> SparseMatrix {
    let re = |x: f64| Complex64::new(x, 0.0);
    let mut h = &ops.sigma_ee * re(config.delta_xl_mev);
    h = &h + &(&ops.number * re(config.delta_cl_mev));
    if config.jc_coupling && config.g_prime_uev != 0.0 {
        let jc = &ops.a_dag_sigma_minus + &ops.sigma_plus_a;
        h = &h + &(&jc * re(config.g_prime_uev * 1e-3));
    }
    if config.eta_x_prime_uev != 0.0 {
        let drive = &ops.sigma_plus + &ops.sigma_minus;
        h = &h + &(&drive * re(config.eta_x_prime_uev * 1e-3));
    }
    if config.eta_c_uev != 0.0 {
        let drive = &ops.a + &ops.a_dag;
        h = &h + &(&drive * re(config.eta_c_uev * 1e-3));
    }
    h
}

/// A collapse operator with its rate prefactor in 1/ps: the dissipator is
/// `rate · ℒ[op]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissipator {
    pub name: &'static str,
    pub op: SparseMatrix,
    pub rate: f64,
}

/// All dissipators of the generator, including those with zero rate.
pub fn dissipators(config: &SystemConfig, rates: &PhononRateSet, ops: &OperatorSet) -> Vec<Dissipator> {
    let mut d = Vec::with_capacity(7);
    let mut push = |name, op: &SparseMatrix, rate_uev: f64| {
        d.push(Dissipator {
            name,
            op: op.clone(),
            rate: uev_to_angular(rate_uev),
        })
    };
    push("cavity_decay", &ops.a, config.kappa_uev);
    push("exciton_decay", &ops.sigma_minus, 0.5 * config.gamma_uev);
    push("dephasing", &ops.sigma_ee, 0.5 * config.gamma_prime_uev);
    push("phonon_up", &ops.sigma_plus_a, 0.5 * rates.gamma_up_cav);
    push("phonon_down", &ops.a_dag_sigma_minus, 0.5 * rates.gamma_down_cav);
    if config.drive_mode == DriveMode::Exciton {
        push("phonon_up_x", &ops.sigma_plus, 0.5 * rates.gamma_up_x);
        push("phonon_down_x", &ops.sigma_minus, 0.5 * rates.gamma_down_x);
    }
    d
}

/// Everything a generator was built from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub config: SystemConfig,
    pub rates: PhononRateSet,
    pub basis_ordering: String,
    pub vectorization: String,
}

/// Sparse generator acting on `vec ρ`, in 1/ps.
#[derive(Debug, Clone)]
pub struct Liouvillian {
    pub matrix: SparseMatrix,
    pub space: SpaceSpec,
    pub provenance: Provenance,
}

fn lindblad_superop(op: &SparseMatrix, id: &SparseMatrix) -> SparseMatrix {
    let cdc = &op.adjoint() * op;
    let jump = &op.conj().kron(op) * 2.0;
    let left = id.kron(&cdc);
    let right = cdc.transpose().kron(id);
    &(&jump - &left) - &right
}

/// Validated configuration and rates as the generator uses them: phonon
/// rates zeroed when phonons are off (⟨B⟩ kept) and ⟨B⟩ renormalization
/// applied.
pub fn effective_inputs(
    config: &SystemConfig,
    rates: &PhononRateSet,
) -> Result<(SystemConfig, PhononRateSet), LiouvillianError> {
    config.validate()?;
    let named = [
        ("gamma_up_cav", rates.gamma_up_cav),
        ("gamma_down_cav", rates.gamma_down_cav),
        ("gamma_up_x", rates.gamma_up_x),
        ("gamma_down_x", rates.gamma_down_x),
    ];
    for (name, value) in named {
        if !(value.is_finite() && value >= 0.0) {
            return Err(LiouvillianError::NegativeRate { name, value });
        }
    }
    let rates = if config.phonons_enabled {
        *rates
    } else {
        PhononRateSet {
            mean_displacement: rates.mean_displacement,
            ..PhononRateSet::zero()
        }
    };
    Ok((config.renormalized(rates.mean_displacement), rates))
}

pub fn build_liouvillian(config: &SystemConfig, rates: &PhononRateSet) -> Result<Liouvillian, LiouvillianError> {
    let (config, rates) = effective_inputs(config, rates)?;
    let space = config.space()?;
    let ops = build_operators(space);
    let id = &ops.identity;

    let h = &build_hamiltonian(&config, &ops) * (1.0 / HBAR_MEV_PS);
    let commutator = &id.kron(&h) - &h.transpose().kron(id);
    let mut parts = alloc::vec![&commutator * Complex64::new(0.0, -1.0)];
    for d in dissipators(&config, &rates, &ops) {
        if d.rate != 0.0 {
            parts.push(&lindblad_superop(&d.op, id) * d.rate);
        }
    }
    let n2 = space.dim() * space.dim();
    let mut triplets = Vec::with_capacity(parts.iter().map(|p| p.nnz()).sum());
    for p in &parts {
        triplets.extend(p.iter());
    }
    let matrix = SparseMatrix::from_triplets(n2, n2, &triplets).pruned(0.0);
    Ok(Liouvillian {
        matrix,
        space,
        provenance: Provenance {
            config,
            rates,
            basis_ordering: BASIS_ORDERING.into(),
            vectorization: VECTORIZATION.into(),
        },
    })
}

impl Liouvillian {
    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn config(&self) -> &SystemConfig {
        &self.provenance.config
    }

    pub fn rates(&self) -> &PhononRateSet {
        &self.provenance.rates
    }

    /// `L(ρ)` as a (generally traceless) matrix.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix, LiouvillianError> {
        self.check(rho.dim())?;
        let v = self.matrix.mul_vec(rho.as_vec());
        Ok(DensityMatrix::from_col_major(self.dim(), v)?)
    }

    /// Heisenberg-picture generator `L†(X)` for an operator given as a
    /// column-major matrix.
    pub fn apply_adjoint(&self, x: &DensityMatrix) -> Result<DensityMatrix, LiouvillianError> {
        self.check(x.dim())?;
        let v = self.matrix.adjoint_mul_vec(x.as_vec());
        Ok(DensityMatrix::from_col_major(self.dim(), v)?)
    }

    /// Largest entry of `L†(𝟙)`, zero for a trace-preserving generator.
    pub fn trace_preservation_error(&self) -> f64 {
        let n = self.dim();
        let mut id = alloc::vec![Complex64::new(0.0, 0.0); n * n];
        for k in 0..n {
            id[k + k * n] = Complex64::new(1.0, 0.0);
        }
        self.matrix
            .adjoint_mul_vec(&id)
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max)
    }

    fn check(&self, dim: usize) -> Result<(), LiouvillianError> {
        if dim != self.dim() {
            return Err(LiouvillianError::DimensionMismatch {
                expected: self.dim(),
                found: dim,
            });
        }
        Ok(())
    }
}
