//! Parameter sweeps over laser detuning, cavity detuning, temperature and
//! drive strength, solved on a worker pool with index-ordered results.

use std::collections::BTreeMap;
use std::path::PathBuf;

use qdcav_core::liouvillian::{build_liouvillian, phonon_rates, DriveMode};
use qdcav_core::phonon_bath::{BathParams, PhononKernel, PhononRateSet};
use qdcav_core::solver::{steady_state, Physicality};
use qdcav_core::SystemConfig;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::output::{Cell, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParameter {
    /// `ω_L − ω_x` in meV at fixed `Δ_cx`.
    LaserDetuning,
    /// `ω_c − ω_x` in meV at fixed `ω_L − ω_x`.
    CavityDetuning,
    /// Bath temperature in K.
    Temperature,
    /// Amplitude of the active drive in μeV.
    DriveStrength,
}

impl SweepParameter {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepParameter::LaserDetuning => "laser",
            SweepParameter::CavityDetuning => "cavity",
            SweepParameter::Temperature => "temperature",
            SweepParameter::DriveStrength => "drive",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            SweepParameter::LaserDetuning,
            SweepParameter::CavityDetuning,
            SweepParameter::Temperature,
            SweepParameter::DriveStrength,
        ]
        .into_iter()
        .find(|p| p.as_str() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub parameter: SweepParameter,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl Axis {
    pub fn new(parameter: SweepParameter, min: f64, max: f64, step: f64) -> Self {
        Self {
            parameter,
            min,
            max,
            step,
        }
    }

    /// A one-point axis.
    pub fn fixed(parameter: SweepParameter, value: f64) -> Self {
        Self::new(parameter, value, value, 1.0)
    }

    /// Parses `name:min:max:step`.
    pub fn parse(spec: &str) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let bad = || Error::Config(format!("axis `{spec}` must read name:min:max:step"));
        if parts.len() != 4 {
            return Err(bad());
        }
        let parameter = SweepParameter::from_name(parts[0])
            .ok_or_else(|| Error::Config(format!("unknown sweep parameter `{}`", parts[0])))?;
        let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad());
        let axis = Self::new(parameter, num(parts[1])?, num(parts[2])?, num(parts[3])?);
        axis.validate()?;
        Ok(axis)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = self.min.is_finite() && self.max.is_finite() && self.max >= self.min;
        if !ok || !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::Config(format!(
                "axis {} needs finite min ≤ max and a positive step",
                self.parameter.as_str()
            )));
        }
        if self.parameter == SweepParameter::Temperature && self.min < 0.0 {
            return Err(Error::Config("temperature axis must be nonnegative".into()));
        }
        Ok(())
    }

    /// `min + k·step` for `k = 0..=round((max − min)/step)`.
    pub fn values(&self) -> Vec<f64> {
        let n = ((self.max - self.min) / self.step + 1e-9).floor() as usize;
        (0..=n).map(|k| self.min + k as f64 * self.step).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub scenario: String,
    /// Grid is the Cartesian product, first axis slowest.
    pub axes: Vec<Axis>,
    pub system: SystemConfig,
    pub bath: BathParams,
    /// Solve every point with phonons on and off.
    pub pair_phonons: bool,
    pub output: Option<PathBuf>,
}

impl SweepPlan {
    pub fn new(scenario: &str, axes: Vec<Axis>, system: SystemConfig, bath: BathParams) -> Self {
        Self {
            scenario: scenario.to_string(),
            axes,
            system,
            bath,
            pair_phonons: false,
            output: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.axes.is_empty() {
            return Err(Error::Config("a sweep needs at least one axis".into()));
        }
        for a in &self.axes {
            a.validate()?;
        }
        self.bath.validate().map_err(Error::config)?;
        self.system.validate().map_err(Error::config)
    }

    /// Grid points in axis order.
    pub fn grid(&self) -> Vec<Vec<f64>> {
        let mut grid = vec![Vec::new()];
        for axis in &self.axes {
            let values = axis.values();
            grid = grid
                .into_iter()
                .flat_map(|prefix| {
                    values.iter().map(move |&v| {
                        let mut p = prefix.clone();
                        p.push(v);
                        p
                    })
                })
                .collect();
        }
        grid
    }

    fn variants(&self) -> Vec<bool> {
        if self.pair_phonons {
            vec![true, false]
        } else {
            vec![self.system.phonons_enabled]
        }
    }

    /// System and temperature at one grid point.
    fn point(&self, values: &[f64], phonons: bool) -> (SystemConfig, f64) {
        let mut c = SystemConfig {
            phonons_enabled: phonons,
            ..self.system
        };
        let mut t = self.bath.temperature;
        for (axis, &v) in self.axes.iter().zip(values) {
            match axis.parameter {
                SweepParameter::LaserDetuning => c = c.with_detunings(c.delta_cx_mev(), v),
                SweepParameter::CavityDetuning => c = c.with_detunings(v, c.delta_lx_mev()),
                SweepParameter::Temperature => t = v,
                SweepParameter::DriveStrength => match c.drive_mode {
                    DriveMode::Cavity => c.eta_c_uev = v,
                    DriveMode::Exciton => c.eta_x_prime_uev = v,
                },
            }
        }
        (c, t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub phonons: bool,
    /// Axis values, in plan order.
    pub values: Vec<f64>,
    pub config: SystemConfig,
    pub temperature_k: f64,
    pub rates: PhononRateSet,
    pub n_x: f64,
    pub n_c: f64,
    pub residual: f64,
    pub physicality: Option<Physicality>,
    pub error: Option<String>,
}

impl SweepRow {
    pub fn delta_lx_mev(&self) -> f64 {
        self.config.delta_lx_mev()
    }

    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub scenario: String,
    pub axes: Vec<Axis>,
    /// Phonons-on block first when paired, each block in grid order.
    pub rows: Vec<SweepRow>,
}

pub const SWEEP_COLUMNS: [&str; 21] = [
    "phonons",
    "jc",
    "drive",
    "eta_ueV",
    "delta_lx_meV",
    "delta_cx_meV",
    "delta_lc_meV",
    "T_K",
    "n_max",
    "mean_B",
    "gamma_up_cav_ueV",
    "gamma_down_cav_ueV",
    "gamma_up_x_ueV",
    "gamma_down_x_ueV",
    "n_x",
    "n_c",
    "residual",
    "trace_error",
    "hermiticity_error",
    "min_eigenvalue",
    "error",
];

impl SweepTable {
    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.is_ok()).count()
    }

    /// Rows of one phonon variant, in grid order.
    pub fn block(&self, phonons: bool) -> impl Iterator<Item = &SweepRow> {
        self.rows.iter().filter(move |r| r.phonons == phonons)
    }

    pub fn to_table(&self) -> Table {
        let mut t = Table::new(SWEEP_COLUMNS);
        for r in &self.rows {
            let c = &r.config;
            let eta = match c.drive_mode {
                DriveMode::Cavity => c.eta_c_uev,
                DriveMode::Exciton => c.eta_x_prime_uev,
            };
            let drive = match c.drive_mode {
                DriveMode::Cavity => "cavity",
                DriveMode::Exciton => "exciton",
            };
            let p = r.physicality.unwrap_or(Physicality {
                trace_error: f64::NAN,
                hermiticity_error: f64::NAN,
                min_eigenvalue: f64::NAN,
                residual: f64::NAN,
            });
            t.push(vec![
                r.phonons.into(),
                c.jc_coupling.into(),
                drive.into(),
                eta.into(),
                c.delta_lx_mev().into(),
                c.delta_cx_mev().into(),
                c.delta_lc_mev().into(),
                r.temperature_k.into(),
                c.n_max.into(),
                r.rates.mean_displacement.into(),
                r.rates.gamma_up_cav.into(),
                r.rates.gamma_down_cav.into(),
                r.rates.gamma_up_x.into(),
                r.rates.gamma_down_x.into(),
                r.n_x.into(),
                r.n_c.into(),
                r.residual.into(),
                p.trace_error.into(),
                p.hermiticity_error.into(),
                p.min_eigenvalue.into(),
                Cell::Text(r.error.clone().unwrap_or_default()),
            ]);
        }
        t
    }
}

/// Thread pool of the given size; `None` uses the available parallelism.
pub fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        if n == 0 {
            return Err(Error::Config("worker count must be at least 1".into()));
        }
        b = b.num_threads(n);
    }
    b.build().map_err(Error::config)
}

/// Kernels for every temperature in `temps`, keyed by bit pattern.
pub(crate) fn kernels_for(bath: &BathParams, temps: &[f64]) -> Result<BTreeMap<u64, PhononKernel>> {
    let mut distinct: Vec<f64> = temps.to_vec();
    distinct.sort_by(f64::total_cmp);
    distinct.dedup();
    let built: Vec<_> = distinct
        .par_iter()
        .map(|&t| {
            let b = BathParams {
                temperature: t,
                ..*bath
            };
            PhononKernel::new(b).map(|k| (t.to_bits(), k))
        })
        .collect::<std::result::Result<_, _>>()
        .map_err(Error::config)?;
    Ok(built.into_iter().collect())
}

fn solve_point(config: SystemConfig, temperature: f64, kernel: &PhononKernel, values: Vec<f64>) -> SweepRow {
    let mut row = SweepRow {
        phonons: config.phonons_enabled,
        values,
        config,
        temperature_k: temperature,
        rates: PhononRateSet::zero(),
        n_x: f64::NAN,
        n_c: f64::NAN,
        residual: f64::NAN,
        physicality: None,
        error: None,
    };
    let rates = match phonon_rates(&config, kernel) {
        Ok(r) => r,
        Err(e) => {
            row.error = Some(e.to_string());
            return row;
        }
    };
    row.rates = rates;
    let solved = build_liouvillian(&config, &rates)
        .map_err(|e| e.to_string())
        .and_then(|l| steady_state(&l).map_err(|e| e.to_string()));
    match solved {
        Ok(ss) => {
            row.n_x = ss.n_x;
            row.n_c = ss.n_c;
            row.residual = ss.residual;
            row.physicality = Some(ss.physicality);
            if !ss.physicality.is_physical() {
                row.error = Some(format!("unphysical steady state: {:?}", ss.physicality));
            }
        }
        Err(e) => row.error = Some(e),
    }
    row
}

/// Solves every grid point. Point failures are recorded in the row's
/// `error` field; only an invalid plan is an error.
pub fn run_sweep(plan: &SweepPlan, workers: Option<usize>) -> Result<SweepTable> {
    plan.validate()?;
    let pool = pool(workers)?;
    let grid = plan.grid();
    let points: Vec<(SystemConfig, f64, Vec<f64>)> = plan
        .variants()
        .into_iter()
        .flat_map(|ph| {
            grid.iter().map(move |v| {
                let (c, t) = plan.point(v, ph);
                (c, t, v.clone())
            })
        })
        .collect();
    let temps: Vec<f64> = points.iter().map(|p| p.1).collect();
    let rows = pool.install(|| -> Result<Vec<SweepRow>> {
        let kernels = kernels_for(&plan.bath, &temps)?;
        Ok(points
            .into_par_iter()
            .map(|(c, t, v)| solve_point(c, t, &kernels[&t.to_bits()], v))
            .collect())
    })?;
    Ok(SweepTable {
        scenario: plan.scenario.clone(),
        axes: plan.axes.clone(),
        rows,
    })
}

/// The same sweep with the coherent exciton–cavity term removed from H
/// while the phonon channels keep g′.
pub fn jc_term_toggle(plan: &SweepPlan, workers: Option<usize>) -> Result<SweepTable> {
    if plan.system.drive_mode != DriveMode::Cavity {
        return Err(Error::Config("the coupling toggle applies to cavity-driven sweeps".into()));
    }
    let mut p = plan.clone();
    p.system.jc_coupling = false;
    p.scenario = format!("{}-no-jc", plan.scenario);
    run_sweep(&p, workers)
}
