//! Canonical unit system.
//!
//! Energies are stored in meV and times in ps. Frequencies that enter the
//! phonon spectral density and the phase function are angular (rad/ps),
//! obtained as `E / ħ`. Decay rates and couplings of the system
//! configuration are quoted in μeV because that is how they are usually
//! reported; they are converted to 1/ps when a generator is assembled.

/// Reduced Planck constant, meV·ps.
pub const HBAR_MEV_PS: f64 = 0.658_211_956_9;

/// Boltzmann constant, meV/K.
pub const KB_MEV_PER_K: f64 = 0.086_173_33;

/// meV → rad/ps.
#[inline]
pub fn mev_to_angular(energy_mev: f64) -> f64 {
    energy_mev / HBAR_MEV_PS
}

/// rad/ps → meV.
#[inline]
pub fn angular_to_mev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS
}

/// μeV → rad/ps.
#[inline]
pub fn uev_to_angular(energy_uev: f64) -> f64 {
    energy_uev * 1e-3 / HBAR_MEV_PS
}

/// rad/ps → μeV.
#[inline]
pub fn angular_to_uev(omega: f64) -> f64 {
    omega * HBAR_MEV_PS * 1e3
}

/// Thermal energy `k_B T` in meV.
#[inline]
pub fn thermal_energy_mev(temperature_k: f64) -> f64 {
    KB_MEV_PER_K * temperature_k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conversions_round_trip() {
        let e = 1.6;
        assert!((angular_to_mev(mev_to_angular(e)) - e).abs() < 1e-15);
        assert!((angular_to_uev(uev_to_angular(50.0)) - 50.0).abs() < 1e-12);
        // 1 meV is about 1.519 rad/ps
        assert!((mev_to_angular(1.0) - 1.519_267_447).abs() < 1e-8);
    }
}
