//! Acoustic-phonon bath: spectral density, phase function, mean phonon
//! displacement, polaron shift and the phonon-mediated scattering rates.
//!
//! The spectral density is `J(ω) = α_p ω³ exp(−ω²/2ω_b²)` with ω angular
//! (rad/ps) and `α_p` in ps². The phase function is
//!
//! ```text
//! φ(t) = ∫₀^∞ dω J(ω)/ω² [coth(ħω/2k_BT) cos ωt − i sin ωt]
//! ```
//!
//! and the scattering rates are half-line Fourier transforms of the
//! multiphonon kernel `C(τ) = e^{φ(τ)} − 1`.
//!
//! Calibration: `α_p = 0.06 ps²` with ω in rad/ps gives ⟨B⟩ ≈ 0.912 at 4 K
//! and ≈ 0.848 at 10 K. `α_p` is exposed directly so it can be re-fitted.

use alloc::vec::Vec;
use core::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;
use crate::quadrature::{self, QuadratureError, Tolerance};
use crate::units::{mev_to_angular, thermal_energy_mev, HBAR_MEV_PS};

/// Upper frequency limit in units of the cutoff; the Gaussian factor is
/// e^{−32} there.
const OMEGA_MAX_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BathError {
    #[error("invalid bath parameter {name} = {value}")]
    InvalidParameter { name: &'static str, value: f64 },
    #[error("spectral density requested at negative frequency {0} meV")]
    NegativeFrequency(f64),
    #[error("coupling must be finite and nonnegative, got {0} meV")]
    InvalidCoupling(f64),
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
    #[error("phonon correlation tail did not decay below {tolerance:e} by τ = {tau_max} ps (residual {residual:e})")]
    TailNotConverged {
        tau_max: f64,
        residual: f64,
        tolerance: f64,
    },
    #[error("scattering rate {rate:e} μeV at detuning {detuning} meV is negative beyond the quadrature bound {bound:e} μeV")]
    NegativeRate { detuning: f64, rate: f64, bound: f64 },
}

/// Spectral-density parameters and temperature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BathParams {
    /// Coupling strength, ps².
    pub alpha_p: f64,
    /// Phonon cutoff energy, meV.
    pub omega_b: f64,
    /// Temperature, K.
    pub temperature: f64,
}

impl BathParams {
    pub fn new(alpha_p: f64, omega_b: f64, temperature: f64) -> Result<Self, BathError> {
        let bath = Self {
            alpha_p,
            omega_b,
            temperature,
        };
        bath.validate()?;
        Ok(bath)
    }

    /// InGaAs/GaAs dot parameters: `α_p = 0.06 ps²`, `ω_b = 1 meV`.
    pub fn inas(temperature: f64) -> Result<Self, BathError> {
        Self::new(0.06, 1.0, temperature)
    }

    pub fn validate(&self) -> Result<(), BathError> {
        if !(self.alpha_p.is_finite() && self.alpha_p >= 0.0) {
            return Err(BathError::InvalidParameter {
                name: "alpha_p",
                value: self.alpha_p,
            });
        }
        if !(self.omega_b.is_finite() && self.omega_b > 0.0) {
            return Err(BathError::InvalidParameter {
                name: "omega_b",
                value: self.omega_b,
            });
        }
        if !(self.temperature.is_finite() && self.temperature >= 0.0) {
            return Err(BathError::InvalidParameter {
                name: "temperature",
                value: self.temperature,
            });
        }
        Ok(())
    }

    /// Cutoff as an angular frequency, rad/ps.
    fn sigma(&self) -> f64 {
        mev_to_angular(self.omega_b)
    }

    /// `ħ/k_BT` in ps, `None` at zero temperature.
    fn beta_hbar(&self) -> Option<f64> {
        (self.temperature > 0.0).then(|| HBAR_MEV_PS / thermal_energy_mev(self.temperature))
    }

    /// `J(ω)/ω²` at angular frequency ω.
    fn j_over_omega2(&self, omega: f64) -> f64 {
        let s = self.sigma();
        self.alpha_p * omega * math::exp(-omega * omega / (2.0 * s * s))
    }

    /// `coth(ħω/2k_BT) − 1 = 2/(e^{ħω/k_BT} − 1)`, zero at T = 0.
    fn thermal_excess(&self, omega: f64) -> f64 {
        match self.beta_hbar() {
            Some(bh) => 2.0 / math::expm1(bh * omega),
            None => 0.0,
        }
    }

    fn coth_factor(&self, omega: f64) -> f64 {
        1.0 + self.thermal_excess(omega)
    }
}

/// `J(ω) = α_p ω³ exp(−ω²/2ω_b²)` for a phonon energy `omega_mev` (meV),
/// returned as an angular rate in 1/ps.
pub fn spectral_density(omega_mev: f64, bath: &BathParams) -> Result<f64, BathError> {
    bath.validate()?;
    if omega_mev.is_nan() || omega_mev < 0.0 {
        return Err(BathError::NegativeFrequency(omega_mev));
    }
    let w = mev_to_angular(omega_mev);
    Ok(w * w * bath.j_over_omega2(w))
}

fn omega_max(bath: &BathParams) -> f64 {
    OMEGA_MAX_FACTOR * bath.sigma()
}

/// Phase function φ(t) by adaptive quadrature over ω.
pub fn phase_function(t_ps: f64, bath: &BathParams) -> Result<Complex64, BathError> {
    bath.validate()?;
    if bath.alpha_p == 0.0 {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let w_max = omega_max(bath);
    let periods = (w_max * t_ps.abs() / (2.0 * PI)) as usize;
    let tol = Tolerance {
        abs_tol: 1e-12,
        rel_tol: 1e-11,
        max_subdivisions: 8000 + 4 * periods,
        initial_pieces: 4 + periods,
    };
    let est = quadrature::integrate_complex(
        |w| {
            let (s, c) = math::sin_cos(w * t_ps);
            Complex64::new(bath.coth_factor(w) * c, -s) * bath.j_over_omega2(w)
        },
        0.0,
        w_max,
        tol,
    )?;
    Ok(est.value)
}

/// Mean phonon displacement ⟨B⟩ = exp(−½∫ J/ω² coth(ħω/2k_BT) dω).
pub fn mean_displacement(bath: &BathParams) -> Result<f64, BathError> {
    bath.validate()?;
    if bath.alpha_p == 0.0 {
        return Ok(1.0);
    }
    let tol = Tolerance {
        abs_tol: 1e-14,
        rel_tol: 1e-13,
        max_subdivisions: 4000,
        initial_pieces: 8,
    };
    let (integral, _) = quadrature::integrate(
        |w| bath.j_over_omega2(w) * bath.coth_factor(w),
        0.0,
        omega_max(bath),
        tol,
    )?;
    Ok(math::exp(-0.5 * integral))
}

/// Polaron shift `ħ∫J(ω)/ω dω = ħ α_p ω_b³ √(π/2)` (ω_b angular), in meV.
pub fn polaron_shift(bath: &BathParams) -> Result<f64, BathError> {
    bath.validate()?;
    let s = bath.sigma();
    Ok(HBAR_MEV_PS * bath.alpha_p * s * s * s * math::sqrt(PI / 2.0))
}

/// Dawson's integral `D(x) = e^{−x²}∫₀^x e^{t²} dt` (Rybicki's method).
pub(crate) fn dawson(x: f64) -> f64 {
    const H: f64 = 0.2;
    const TERMS: usize = 20;
    let ax = x.abs();
    if ax < 0.2 {
        // Maclaurin series Σ (−2)^n x^{2n+1} / (2n+1)!!
        let x2 = x * x;
        let mut term = x;
        let mut sum = x;
        let mut n = 0;
        while term.abs() > 1e-18 * ax {
            n += 1;
            term *= -2.0 * x2 / (2 * n + 1) as f64;
            sum += term;
        }
        return sum;
    }
    let n0 = 2.0 * math::round(0.5 * ax / H);
    let xp = ax - n0 * H;
    let mut e1 = math::exp(2.0 * xp * H);
    let e2 = e1 * e1;
    let mut d1 = n0 + 1.0;
    let mut d2 = d1 - 2.0;
    let mut sum = 0.0;
    for i in 0..TERMS {
        let c = (2 * i + 1) as f64 * H;
        sum += math::exp(-c * c) * (e1 / d1 + 1.0 / (d2 * e1));
        d1 += 2.0;
        d2 -= 2.0;
        e1 *= e2;
    }
    let v = math::exp(-xp * xp) * sum / math::sqrt(PI);
    if x < 0.0 {
        -v
    } else {
        v
    }
}

/// Zero-temperature phase function in closed form, with `s = σt`:
/// `φ₀(t) = ασ²[1 − √2 s D(s/√2)] − i ασ³ t √(π/2) e^{−s²/2}`.
fn phase_zero_temperature(t: f64, alpha: f64, sigma: f64) -> Complex64 {
    let s = sigma * t;
    let r2 = core::f64::consts::SQRT_2;
    let re = alpha * sigma * sigma * (1.0 - r2 * s * dawson(s / r2));
    let im = -alpha * sigma * sigma * sigma * t * math::sqrt(PI / 2.0) * math::exp(-0.5 * s * s);
    Complex64::new(re, im)
}

/// Tabulation settings for [`PhononKernel`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelOptions {
    /// Grid step in τ, ps.
    pub step: f64,
    /// Initial integration horizon, ps.
    pub tau_max: f64,
    /// The horizon is doubled until the tail converges, up to this cap.
    pub tau_cap: f64,
    /// Bound on `|e^φ − 1 − φ|` over the final picosecond of the horizon.
    pub tail_tol: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            step: 1e-3,
            tau_max: 10.0,
            tau_cap: 200.0,
            tail_tol: 1e-10,
        }
    }
}

/// Up and down rates of one scattering pair, μeV.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    pub up: f64,
    pub down: f64,
    /// Estimated absolute quadrature error of either rate, μeV.
    pub error: f64,
}

/// Tabulated phonon correlation data for one bath.
///
/// The phase function splits into the zero-temperature part, known in
/// closed form, and a real thermal part computed by composite
/// Gauss–Legendre quadrature. For the rates the kernel is split as
/// `e^φ − 1 = φ + R` with `R = e^φ − 1 − φ`: the one-phonon term φ has an
/// exact half-line transform, and only the fast-decaying multiphonon
/// remainder `R` is integrated on the grid.
#[derive(Debug, Clone)]
pub struct PhononKernel {
    bath: BathParams,
    options: KernelOptions,
    thermal_nodes: Vec<(f64, f64)>,
    remainder: Vec<Complex64>,
    tail_residual: f64,
    phi0: Complex64,
}

impl PhononKernel {
    pub fn new(bath: BathParams) -> Result<Self, BathError> {
        Self::with_options(bath, KernelOptions::default())
    }

    pub fn with_options(bath: BathParams, options: KernelOptions) -> Result<Self, BathError> {
        bath.validate()?;
        let valid = options.step > 0.0
            && options.tau_max > 1.0
            && options.tau_cap >= options.tau_max
            && options.tail_tol > 0.0;
        if !valid {
            return Err(BathError::InvalidParameter {
                name: "kernel options",
                value: options.step,
            });
        }
        let mut tau_max = options.tau_max;
        loop {
            let nodes = thermal_nodes(&bath, tau_max);
            let mut intervals = math::ceil(tau_max / options.step) as usize;
            intervals += intervals % 2;
            let step = tau_max / intervals as f64;
            let phi = tabulate_phase(&bath, &nodes, step, intervals + 1);
            let remainder: Vec<Complex64> = phi.iter().map(|&p| p.exp() - 1.0 - p).collect();
            let last_ps = (1.0 / step) as usize;
            let tail_residual = remainder[remainder.len() - last_ps.min(remainder.len())..]
                .iter()
                .map(|r| r.norm())
                .fold(0.0, f64::max);
            if tail_residual <= options.tail_tol || bath.alpha_p == 0.0 {
                return Ok(Self {
                    bath,
                    options: KernelOptions {
                        step,
                        tau_max,
                        ..options
                    },
                    thermal_nodes: nodes,
                    remainder,
                    tail_residual,
                    phi0: phi[0],
                });
            }
            if tau_max >= options.tau_cap {
                return Err(BathError::TailNotConverged {
                    tau_max,
                    residual: tail_residual,
                    tolerance: options.tail_tol,
                });
            }
            tau_max = (2.0 * tau_max).min(options.tau_cap);
        }
    }

    pub fn bath(&self) -> &BathParams {
        &self.bath
    }

    /// Settings actually used (step and horizon after tail extension).
    pub fn options(&self) -> &KernelOptions {
        &self.options
    }

    /// Largest `|e^φ − 1 − φ|` over the last picosecond of the horizon.
    pub fn tail_residual(&self) -> f64 {
        self.tail_residual
    }

    /// φ(t); exact evaluation, not an interpolation of the grid.
    pub fn phase(&self, t: f64) -> Complex64 {
        let p = phase_zero_temperature(t.abs(), self.bath.alpha_p, self.bath.sigma())
            + thermal_phase(&self.thermal_nodes, t.abs());
        if t < 0.0 {
            p.conj()
        } else {
            p
        }
    }

    /// Multiphonon correlation kernel `C(t) = e^{φ(t)} − 1`.
    pub fn correlation(&self, t: f64) -> Complex64 {
        self.phase(t).exp() - 1.0
    }

    /// `(G_g, G_u) = (cosh φ − 1, sinh φ)`.
    pub fn green_functions(&self, t: f64) -> (Complex64, Complex64) {
        let p = self.phase(t);
        (p.cosh() - 1.0, p.sinh())
    }

    /// ⟨B⟩ from the tabulated φ(0).
    pub fn mean_displacement(&self) -> f64 {
        math::exp(-0.5 * self.phi0.re)
    }

    /// `Γ± = 2g² Re∫₀^∞ e^{±iΔτ}(e^{φ(τ)} − 1) dτ` for a detuning Δ (meV) and
    /// coupling g (meV); rates in μeV.
    pub fn rate_pair(&self, detuning_mev: f64, coupling_mev: f64) -> Result<RatePair, BathError> {
        if !(coupling_mev.is_finite() && coupling_mev >= 0.0) {
            return Err(BathError::InvalidCoupling(coupling_mev));
        }
        if !detuning_mev.is_finite() {
            return Err(BathError::InvalidParameter {
                name: "detuning",
                value: detuning_mev,
            });
        }
        if coupling_mev == 0.0 || self.bath.alpha_p == 0.0 {
            return Ok(RatePair {
                up: 0.0,
                down: 0.0,
                error: 0.0,
            });
        }
        let delta = mev_to_angular(detuning_mev);
        let g = mev_to_angular(coupling_mev);
        let prefactor = 2.0 * g * g * HBAR_MEV_PS * 1e3;

        let (up_r, up_err) = self.remainder_transform(delta);
        let (down_r, down_err) = self.remainder_transform(-delta);
        let up = prefactor * (self.one_phonon(delta) + up_r);
        let down = prefactor * (self.one_phonon(-delta) + down_r);
        // Bounds the truncated tail for any decay at least as fast as τ⁻⁴
        // (the zero-temperature remainder), with a factor 2 of margin.
        let tail = 2.0 * self.tail_residual * self.options.tau_max / 3.0;
        let error = prefactor * (up_err.max(down_err) + tail);

        let floor = |rate: f64| -> Result<f64, BathError> {
            if rate >= 0.0 {
                Ok(rate)
            } else if -rate <= error {
                Ok(0.0)
            } else {
                Err(BathError::NegativeRate {
                    detuning: detuning_mev,
                    rate,
                    bound: error,
                })
            }
        };
        Ok(RatePair {
            up: floor(up)?,
            down: floor(down)?,
            error,
        })
    }

    /// `Re∫₀^∞ e^{iΔτ} φ(τ) dτ = π J(|Δ|)/Δ² × (n+1 for Δ > 0, n for Δ < 0)`.
    fn one_phonon(&self, delta: f64) -> f64 {
        let w = delta.abs();
        if w == 0.0 {
            // J/ω² · n → α_p k_BT/ħ as ω → 0
            return match self.bath.beta_hbar() {
                Some(bh) => PI * self.bath.alpha_p / bh,
                None => 0.0,
            };
        }
        let n = 0.5 * self.bath.thermal_excess(w);
        let occupation = if delta > 0.0 { n + 1.0 } else { n };
        PI * self.bath.j_over_omega2(w) * occupation
    }

    /// Simpson transform of the multiphonon remainder with a Richardson
    /// error estimate.
    fn remainder_transform(&self, delta: f64) -> (f64, f64) {
        let h = self.options.step;
        let n = self.remainder.len();
        let rot = Complex64::from_polar(1.0, delta * h);
        let mut phase = Complex64::new(1.0, 0.0);
        let mut fine_odd = 0.0;
        let mut fine_even = 0.0;
        let mut coarse_odd = 0.0;
        let mut ends = 0.0;
        for (k, r) in self.remainder.iter().enumerate() {
            if k % 512 == 0 {
                let (s, c) = math::sin_cos(delta * h * k as f64);
                phase = Complex64::new(c, s);
            }
            let v = (phase * r).re;
            if k == 0 || k == n - 1 {
                ends += v;
            } else if k % 2 == 1 {
                fine_odd += v;
            } else {
                fine_even += v;
                if k % 4 == 2 {
                    coarse_odd += v;
                }
            }
            phase *= rot;
        }
        let fine = h / 3.0 * (ends + 4.0 * fine_odd + 2.0 * fine_even);
        let coarse_even = fine_even - coarse_odd;
        let richardson = if (n - 1) % 4 == 0 {
            let coarse = 2.0 * h / 3.0 * (ends + 4.0 * coarse_odd + 2.0 * coarse_even);
            (fine - coarse).abs() / 15.0
        } else {
            0.0
        };
        let rounding = 1e-14 * h * self.remainder.iter().map(|r| r.norm()).sum::<f64>();
        (fine, richardson + rounding)
    }
}

/// Composite Gauss–Legendre nodes for the thermal part of φ, with the
/// weight already multiplied into `J(ω)/ω² (coth − 1)`.
fn thermal_nodes(bath: &BathParams, tau_max: f64) -> Vec<(f64, f64)> {
    let Some(bh) = bath.beta_hbar() else {
        return Vec::new();
    };
    if bath.alpha_p == 0.0 {
        return Vec::new();
    }
    // coth − 1 ~ 2e^{−βħω}: nothing survives beyond ~60 k_BT/ħ.
    let w_max = omega_max(bath).min(60.0 / bh);
    let panels = ((w_max * tau_max / (2.0 * PI)) as usize + 1).max(32);
    let (x, w) = quadrature::gauss_legendre(16);
    let width = w_max / panels as f64;
    let mut nodes = Vec::with_capacity(panels * 16);
    for p in 0..panels {
        let mid = width * (p as f64 + 0.5);
        for (xi, wi) in x.iter().zip(&w) {
            let omega = mid + 0.5 * width * xi;
            let weight = 0.5 * width * wi * bath.j_over_omega2(omega) * bath.thermal_excess(omega);
            nodes.push((omega, weight));
        }
    }
    nodes
}

fn thermal_phase(nodes: &[(f64, f64)], t: f64) -> Complex64 {
    let re: f64 = nodes.iter().map(|&(w, c)| c * math::cos(w * t)).sum();
    Complex64::new(re, 0.0)
}

/// φ on the grid `τ_k = k·step`, `k < len`.
fn tabulate_phase(bath: &BathParams, nodes: &[(f64, f64)], step: f64, len: usize) -> Vec<Complex64> {
    let sigma = bath.sigma();
    let mut phi: Vec<Complex64> = (0..len)
        .map(|k| phase_zero_temperature(k as f64 * step, bath.alpha_p, sigma))
        .collect();
    let mut thermal = alloc::vec![0.0; len];
    const RESEED: usize = 256;
    for &(w, c) in nodes {
        let two_cos = 2.0 * math::cos(w * step);
        let mut k = 0;
        while k < len {
            let end = (k + RESEED).min(len);
            let mut prev = c * math::cos(w * step * (k as f64 - 1.0));
            let mut cur = c * math::cos(w * step * k as f64);
            for slot in &mut thermal[k..end] {
                *slot += cur;
                let next = two_cos * cur - prev;
                prev = cur;
                cur = next;
            }
            k = end;
        }
    }
    for (p, t) in phi.iter_mut().zip(&thermal) {
        p.re += t;
    }
    phi
}

/// Scattering-rate pair for a single bath; builds a fresh kernel.
pub fn scattering_rate_pair(
    detuning_mev: f64,
    coupling_mev: f64,
    bath: &BathParams,
) -> Result<RatePair, BathError> {
    PhononKernel::new(*bath)?.rate_pair(detuning_mev, coupling_mev)
}

/// The four phonon-mediated rates entering the generator, μeV, together
/// with ⟨B⟩ of the bath they were computed from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhononRateSet {
    /// Γ^{σ⁺a}, evaluated at Δ_cx with coupling g′.
    pub gamma_up_cav: f64,
    /// Γ^{a†σ⁻}.
    pub gamma_down_cav: f64,
    /// Γ^{σ⁺}, evaluated at Δ_Lx with coupling η′_x.
    pub gamma_up_x: f64,
    /// Γ^{σ⁻}.
    pub gamma_down_x: f64,
    pub mean_displacement: f64,
}

impl PhononRateSet {
    pub fn zero() -> Self {
        Self {
            gamma_up_cav: 0.0,
            gamma_down_cav: 0.0,
            gamma_up_x: 0.0,
            gamma_down_x: 0.0,
            mean_displacement: 1.0,
        }
    }

    pub fn rates(&self) -> [f64; 4] {
        [
            self.gamma_up_cav,
            self.gamma_down_cav,
            self.gamma_up_x,
            self.gamma_down_x,
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bath(t: f64) -> BathParams {
        BathParams::inas(t).unwrap()
    }

    #[test]
    fn dawson_matches_direct_integral() {
        for &x in &[0.05, 0.19, 0.21, 0.5, 0.924_138_873_5, 1.7, 3.3, 7.0, 12.0] {
            let (i, _) = quadrature::integrate(
                |t| math::exp(t * t - x * x),
                0.0,
                x,
                Tolerance {
                    initial_pieces: 8,
                    ..Tolerance::default()
                },
            )
            .unwrap();
            assert!((dawson(x) - i).abs() < 1e-13 * i.max(1e-3), "x = {x}");
            assert_eq!(dawson(-x), -dawson(x));
        }
        // asymptotic series at large argument
        let x = 80.0;
        let asym = 1.0 / (2.0 * x) * (1.0 + 1.0 / (2.0 * x * x) + 3.0 / (4.0 * x * x * x * x));
        assert!((dawson(x) / asym - 1.0).abs() < 1e-11);
    }

    #[test]
    fn closed_form_zero_temperature_phase_matches_quadrature() {
        let b = bath(0.0);
        let k = PhononKernel::new(b).unwrap();
        for &t in &[0.0, 0.3, 1.0, 2.5, 7.0] {
            let q = phase_function(t, &b).unwrap();
            assert!((k.phase(t) - q).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn thermal_phase_matches_quadrature() {
        let b = bath(4.0);
        let k = PhononKernel::new(b).unwrap();
        for &t in &[0.0, 0.4, 1.3, 4.0, 9.0] {
            let q = phase_function(t, &b).unwrap();
            assert!((k.phase(t) - q).norm() < 1e-10, "t = {t}");
        }
    }

    #[test]
    fn tabulated_grid_agrees_with_direct_phase() {
        let b = bath(10.0);
        let k = PhononKernel::new(b).unwrap();
        let h = k.options().step;
        for idx in [0usize, 1, 777, 4096, k.remainder.len() - 1] {
            let p = k.phase(idx as f64 * h);
            let r = p.exp() - 1.0 - p;
            assert!((r - k.remainder[idx]).norm() < 1e-12, "idx = {idx}");
        }
    }

    #[test]
    fn zero_coupling_bath_is_inert() {
        let b = BathParams::new(0.0, 1.0, 4.0).unwrap();
        assert_eq!(mean_displacement(&b).unwrap(), 1.0);
        let k = PhononKernel::new(b).unwrap();
        let r = k.rate_pair(1.0, 0.1).unwrap();
        assert_eq!((r.up, r.down), (0.0, 0.0));
        assert_eq!(spectral_density(2.0, &b).unwrap(), 0.0);
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(BathParams::new(-1.0, 1.0, 4.0).is_err());
        assert!(BathParams::new(0.06, 0.0, 4.0).is_err());
        assert!(BathParams::new(0.06, 1.0, -1.0).is_err());
        assert!(spectral_density(-0.1, &bath(4.0)).is_err());
        assert!(PhononKernel::new(bath(4.0)).unwrap().rate_pair(1.0, -0.1).is_err());
    }

    #[test]
    fn kernel_mean_displacement_matches_adaptive_quadrature() {
        for t in [0.0, 1.0, 4.0, 10.0, 20.0] {
            let b = bath(t);
            let k = PhononKernel::new(b).unwrap();
            let direct = mean_displacement(&b).unwrap();
            assert!((k.mean_displacement() / direct - 1.0).abs() < 1e-8, "T = {t}");
        }
    }
}
