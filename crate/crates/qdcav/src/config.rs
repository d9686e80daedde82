//! Run configuration: a TOML document with `[bath]`, `[system]`, `[sweep]`
//! and `[trajectory]` sections. Every key is optional; missing keys take
//! the InGaAs dot–cavity defaults.
//!
//! ```toml
//! [bath]
//! temperature = 10.0
//!
//! [system]
//! drive_mode = "cavity"
//! eta_c_uev = 300.0
//! delta_xl_mev = -1.7
//! delta_cl_mev = -0.1
//! n_max = 60
//!
//! [sweep]
//! step = 0.05
//!
//! [trajectory]
//! seed = 7
//! ```

use std::path::Path;

use qdcav_core::phonon_bath::BathParams;
use qdcav_core::SystemConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BathSection {
    /// ps²
    pub alpha_p: f64,
    /// meV
    pub omega_b: f64,
    /// K
    pub temperature: f64,
}

impl Default for BathSection {
    fn default() -> Self {
        Self {
            alpha_p: 0.06,
            omega_b: 1.0,
            temperature: 4.0,
        }
    }
}

impl BathSection {
    pub fn params(&self) -> Result<BathParams> {
        BathParams::new(self.alpha_p, self.omega_b, self.temperature).map_err(Error::config)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    /// Laser axis bounds `ω_L − ω_x` in meV; `None` selects
    /// `[−3, max(3, Δ_cx + 2)]`.
    pub laser_min: Option<f64>,
    pub laser_max: Option<f64>,
    /// Laser step, meV.
    pub step: f64,
    /// Coarse step used when previewing, meV.
    pub preview_step: f64,
    pub preview: bool,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self {
            laser_min: None,
            laser_max: None,
            step: 0.01,
            preview_step: 0.05,
            preview: false,
        }
    }
}

impl SweepSection {
    pub fn effective_step(&self) -> f64 {
        if self.preview {
            self.preview_step
        } else {
            self.step
        }
    }

    /// Laser axis bounds for a cavity–exciton detuning.
    pub fn laser_range(&self, delta_cx_mev: f64) -> (f64, f64) {
        (
            self.laser_min.unwrap_or(-3.0),
            self.laser_max.unwrap_or_else(|| 3.0f64.max(delta_cx_mev + 2.0)),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrajectorySection {
    pub seed: u64,
    pub n_traj: usize,
    /// ps
    pub t_final: f64,
    /// Output sampling interval, ps.
    pub dt: f64,
}

impl Default for TrajectorySection {
    fn default() -> Self {
        Self {
            seed: 1,
            n_traj: 1,
            t_final: 2000.0,
            dt: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub bath: BathSection,
    pub system: SystemConfig,
    pub sweep: SweepSection,
    pub trajectory: TrajectorySection,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> std::result::Result<Self, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text).map_err(|e| Error::ConfigFile {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    /// Checks every section and returns the bath parameters.
    pub fn validate(&self) -> Result<BathParams> {
        let bath = self.bath.params()?;
        self.system.validate().map_err(Error::config)?;
        let s = &self.sweep;
        for (name, v) in [("sweep.step", s.step), ("sweep.preview_step", s.preview_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        let t = &self.trajectory;
        if !(t.t_final > 0.0 && t.dt > 0.0 && t.t_final.is_finite() && t.dt.is_finite()) {
            return Err(Error::Config("trajectory.t_final and trajectory.dt must be positive".into()));
        }
        if t.n_traj == 0 {
            return Err(Error::Config("trajectory.n_traj must be at least 1".into()));
        }
        Ok(bath)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document_gives_defaults() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.system.g_prime_uev, 100.0);
        assert_eq!(c.bath.temperature, 4.0);
    }

    #[test]
    fn unknown_section_keys_are_rejected() {
        assert!(RunConfig::from_toml("[bath]\ntemprature = 4.0\n").is_err());
    }

    #[test]
    fn laser_range_default_covers_cavity() {
        let s = SweepSection::default();
        assert_eq!(s.laser_range(1.6), (-3.0, 3.6));
        assert_eq!(s.laser_range(-1.6), (-3.0, 3.0));
    }
}
