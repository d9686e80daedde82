//! Parallel trajectory ensembles and their tables.

use qdcav_core::phonon_bath::PhononRateSet;
use qdcav_core::trajectory::{
    reduce_records, run_trajectory_from, EnsembleAverage, JumpEvent, TrajectoryOptions, TrajectoryRecord,
    TrajectorySystem,
};
use qdcav_core::{Complex64, SystemConfig};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::output::Table;

/// `n_traj` trajectories from `|g, 0⟩` seeded `seed0 + i` (wrapping), run
/// on the current rayon pool and returned in seed order.
pub fn run_records(
    config: &SystemConfig,
    rates: &PhononRateSet,
    n_traj: usize,
    seed0: u64,
    t_final: f64,
    dt: f64,
) -> Result<Vec<TrajectoryRecord>> {
    if n_traj == 0 {
        return Err(Error::Config("n_traj must be at least 1".into()));
    }
    let system = TrajectorySystem::new(config, rates).map_err(Error::config)?;
    let mut psi0 = vec![Complex64::new(0.0, 0.0); system.space.dim()];
    psi0[0] = Complex64::new(1.0, 0.0);
    let opts = TrajectoryOptions::default();
    (0..n_traj as u64)
        .into_par_iter()
        .map(|i| run_trajectory_from(&system, &psi0, seed0.wrapping_add(i), t_final, dt, &opts))
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(Error::numerical)
}

pub fn ensemble(
    config: &SystemConfig,
    rates: &PhononRateSet,
    n_traj: usize,
    seed0: u64,
    t_final: f64,
    dt: f64,
) -> Result<EnsembleAverage> {
    let records = run_records(config, rates, n_traj, seed0, t_final, dt)?;
    reduce_records(&records, seed0).map_err(Error::numerical)
}

/// Conditioned expectations of one record; `n_c` is also given divided by
/// `n_max` for overlay plots.
pub fn record_table(record: &TrajectoryRecord, n_max: usize) -> Table {
    let mut t = Table::new(["t_ps", "n_x", "n_c", "n_c_over_n_max"]);
    for k in 0..record.times.len() {
        t.push(vec![
            record.times[k].into(),
            record.n_x[k].into(),
            record.n_c[k].into(),
            (record.n_c[k] / n_max as f64).into(),
        ]);
    }
    t
}

pub fn ensemble_table(avg: &EnsembleAverage) -> Table {
    let mut t = Table::new(["t_ps", "n_x_mean", "n_x_se", "n_c_mean", "n_c_se"]);
    for k in 0..avg.times.len() {
        t.push(vec![
            avg.times[k].into(),
            avg.n_x_mean[k].into(),
            avg.n_x_se[k].into(),
            avg.n_c_mean[k].into(),
            avg.n_c_se[k].into(),
        ]);
    }
    t
}

/// Jump record written next to a trajectory table.
#[derive(Debug, Clone, Serialize)]
pub struct JumpSidecar<'a> {
    pub seed: u64,
    pub jump_counts: Vec<(&'static str, usize)>,
    /// Population-changing jumps; dephasing events are counted only.
    pub events: Vec<&'a JumpEvent>,
    pub max_norm_error: f64,
}

impl<'a> JumpSidecar<'a> {
    pub fn new(record: &'a TrajectoryRecord) -> Self {
        use qdcav_core::trajectory::ChannelTag;
        Self {
            seed: record.seed,
            jump_counts: ChannelTag::ALL.iter().map(|t| (t.as_str(), record.count(*t))).collect(),
            events: record.overlay_events().collect(),
            max_norm_error: record.max_norm_error,
        }
    }
}
