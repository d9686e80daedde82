//! Closed-form exciton populations: the driven two-level steady state with
//! phonon scattering, the thermal dressed-state estimate, the coherent
//! cavity amplitude and the cavity-filtered effective model.
//!
//! Rates and couplings are in μeV (as `ħ × rate`), detunings in meV.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::liouvillian::SystemConfig;
use crate::math;
use crate::units::KB_MEV_PER_K;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("invalid parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("population denominator is not positive ({0:e}); a decay channel is required")]
    DegenerateDenominator(f64),
}

fn check(name: &'static str, value: f64, ok: bool) -> Result<(), AnalyticError> {
    if value.is_finite() && ok {
        Ok(())
    } else {
        Err(AnalyticError::InvalidParameter { name, value })
    }
}

/// Steady-state exciton population of a driven, phonon-scattered two-level
/// system:
///
/// ```text
/// N_x = ½[1 + (Γ⁺ − Γ⁻ − γ) / (Γ⁺ + Γ⁻ + γ + 4η′²Γ_pol/(Γ_pol² + Δ_Lx²))]
/// Γ_pol = ½(Γ⁺ + Γ⁻ + γ + γ′)
/// ```
pub fn nx_no_cavity(
    eta_x_prime_uev: f64,
    delta_lx_mev: f64,
    gamma_uev: f64,
    gamma_prime_uev: f64,
    gamma_up_uev: f64,
    gamma_down_uev: f64,
) -> Result<f64, AnalyticError> {
    check("eta_x_prime_uev", eta_x_prime_uev, true)?;
    check("delta_lx_mev", delta_lx_mev, true)?;
    check("gamma_uev", gamma_uev, gamma_uev >= 0.0)?;
    check("gamma_prime_uev", gamma_prime_uev, gamma_prime_uev >= 0.0)?;
    check("gamma_up_uev", gamma_up_uev, gamma_up_uev >= 0.0)?;
    check("gamma_down_uev", gamma_down_uev, gamma_down_uev >= 0.0)?;
    let delta = delta_lx_mev * 1e3;
    let total = gamma_up_uev + gamma_down_uev + gamma_uev;
    let pol = 0.5 * (total + gamma_prime_uev);
    let saturation = if eta_x_prime_uev == 0.0 {
        0.0
    } else {
        4.0 * eta_x_prime_uev * eta_x_prime_uev * pol / (pol * pol + delta * delta)
    };
    let denom = total + saturation;
    if !(denom > 0.0) {
        return Err(AnalyticError::DegenerateDenominator(denom));
    }
    Ok(0.5 * (1.0 + (gamma_up_uev - gamma_down_uev - gamma_uev) / denom))
}

/// Thermal occupation of the dressed states,
/// `½[1 + (Δ_Lx/Ω̃) tanh(Ω̃/2k_BT)]` with `Ω̃ = √(Δ_Lx² + 4η′²)`.
/// `T = 0` takes the `tanh → 1` limit.
pub fn nx_thermal(eta_x_prime_mev: f64, delta_lx_mev: f64, temperature_k: f64) -> Result<f64, AnalyticError> {
    check("eta_x_prime_mev", eta_x_prime_mev, true)?;
    check("delta_lx_mev", delta_lx_mev, true)?;
    check("temperature_k", temperature_k, temperature_k >= 0.0)?;
    let omega = math::sqrt(delta_lx_mev * delta_lx_mev + 4.0 * eta_x_prime_mev * eta_x_prime_mev);
    if omega == 0.0 {
        return Ok(0.5);
    }
    let t = if temperature_k == 0.0 {
        1.0
    } else {
        math::tanh(omega / (2.0 * KB_MEV_PER_K * temperature_k))
    };
    Ok(0.5 * (1.0 + delta_lx_mev / omega * t))
}

/// Coherent cavity amplitude `α = η_c/(κ − iΔ_Lc)`; all arguments in the
/// same energy unit.
pub fn cavity_amplitude(eta_c: f64, kappa: f64, delta_lc: f64) -> Result<Complex64, AnalyticError> {
    check("eta_c", eta_c, true)?;
    check("kappa", kappa, kappa > 0.0)?;
    check("delta_lc", delta_lc, true)?;
    Ok(Complex64::new(eta_c, 0.0) / Complex64::new(kappa, -delta_lc))
}

/// Detuning used in the Lorentzian filter of the effective exciton drive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DriveFilter {
    /// `η′_x = g′η_c/√(κ̃² + Δ_Lx²)`.
    #[default]
    AsPrinted,
    /// `η′_x = g′η_c/√(κ̃² + Δ_Lc²)`.
    CavityDetuning,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EffectiveModelParams {
    /// Decay enhancement: `κ̃ = pκ`, `γ̃ = pγ`.
    pub p: f64,
    pub drive_filter: DriveFilter,
}

impl Default for EffectiveModelParams {
    fn default() -> Self {
        Self {
            p: 2.5,
            drive_filter: DriveFilter::AsPrinted,
        }
    }
}

/// Effective cavity-driven population: the two-level form with
/// `Γ̃± = |α|²Γ^{σ⁺a / a†σ⁻}`, `α` evaluated with `κ̃`, the exciton driven
/// at `η′_x = g′η_c/√(κ̃² + Δ²)` and `γ` replaced by `γ̃`.
///
/// `gamma_up_uev`/`gamma_down_uev` are the cavity-channel rates at `Δ_cx`
/// with coupling g′.
pub fn nx_cavity_driven_effective(
    config: &SystemConfig,
    params: &EffectiveModelParams,
    gamma_up_uev: f64,
    gamma_down_uev: f64,
) -> Result<f64, AnalyticError> {
    check("p", params.p, params.p >= 1.0)?;
    check("kappa_uev", config.kappa_uev, config.kappa_uev > 0.0)?;
    let kappa_t = params.p * config.kappa_uev;
    let gamma_t = params.p * config.gamma_uev;
    let delta_lc = config.delta_lc_mev() * 1e3;
    let delta_lx = config.delta_lx_mev() * 1e3;
    let alpha2 = cavity_amplitude(config.eta_c_uev, kappa_t, delta_lc)?.norm_sqr();
    let filter = match params.drive_filter {
        DriveFilter::AsPrinted => delta_lx,
        DriveFilter::CavityDetuning => delta_lc,
    };
    let eta = config.g_prime_uev * config.eta_c_uev / math::sqrt(kappa_t * kappa_t + filter * filter);
    nx_no_cavity(
        eta,
        config.delta_lx_mev(),
        gamma_t,
        config.gamma_prime_uev,
        alpha2 * gamma_up_uev,
        alpha2 * gamma_down_uev,
    )
}
