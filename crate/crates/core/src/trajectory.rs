//! Monte-Carlo wavefunction unraveling of the master equation.
//!
//! Waiting-time algorithm: the unnormalized state evolves under
//! `H_eff = H − (iħ/2)Σ c_k†c_k` until `‖ψ‖²` falls to a uniform random
//! threshold; a channel is then chosen with probability `∝ ‖c_k ψ‖²` and the
//! state is collapsed and renormalized. The threshold crossing is located on
//! the dense-output interpolant and the step is then redone exactly up to it.
//!
//! Each trajectory owns a ChaCha8 stream seeded with its own seed, so
//! results do not depend on scheduling.

use alloc::vec::Vec;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{build_operators, DensityMatrix, HilbertError, SpaceSpec};
use crate::liouvillian::{build_hamiltonian, dissipators, effective_inputs, LiouvillianError, SystemConfig};
use crate::math;
use crate::ode::{Dopri5, OdeError, OdeOptions};
use crate::phonon_bath::PhononRateSet;
use crate::solver::output_grid;
use crate::sparse::SparseMatrix;
use crate::units::HBAR_MEV_PS;

/// Largest allowed expected number of jumps per output interval.
pub const MAX_JUMPS_PER_SAMPLE: f64 = 0.1;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrajectoryError {
    #[error("sampling step {dt} ps is too coarse: {expected_jumps:.3} expected jumps per step at t = {t} ps")]
    SamplingTooCoarse { dt: f64, t: f64, expected_jumps: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("initial state has dimension {found}, expected {expected}")]
    InitialState { expected: usize, found: usize },
    #[error("no trajectories to average")]
    EmptyEnsemble,
    #[error("trajectory records have different time grids")]
    GridMismatch,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelTag {
    CavityDecay,
    ExcitonDecay,
    Dephasing,
    /// `σ⁺a`
    PhononUp,
    /// `a†σ⁻`
    PhononDown,
    /// `σ⁺`
    PhononUpX,
    /// `σ⁻`
    PhononDownX,
}

impl ChannelTag {
    pub const ALL: [ChannelTag; 7] = [
        ChannelTag::CavityDecay,
        ChannelTag::ExcitonDecay,
        ChannelTag::Dephasing,
        ChannelTag::PhononUp,
        ChannelTag::PhononDown,
        ChannelTag::PhononUpX,
        ChannelTag::PhononDownX,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ChannelTag::CavityDecay => "cavity_decay",
            ChannelTag::ExcitonDecay => "exciton_decay",
            ChannelTag::Dephasing => "dephasing",
            ChannelTag::PhononUp => "phonon_up",
            ChannelTag::PhononDown => "phonon_down",
            ChannelTag::PhononUpX => "phonon_up_x",
            ChannelTag::PhononDownX => "phonon_down_x",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|t| t.as_str() == name)
    }

    /// Position in [`ChannelTag::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    /// Dephasing leaves populations unchanged and is hidden from event
    /// overlays by default.
    pub fn changes_populations(self) -> bool {
        self != ChannelTag::Dephasing
    }
}

/// Collapse operator `c = √(2·rate)·ξ` for a dissipator `rate·ℒ[ξ]`.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpChannel {
    pub tag: ChannelTag,
    pub collapse: SparseMatrix,
    /// Lindblad prefactor in 1/ps.
    pub rate: f64,
}

/// Effective Hamiltonian and jump channels of a configuration.
#[derive(Debug, Clone)]
pub struct TrajectorySystem {
    pub space: SpaceSpec,
    /// `−i H_eff/ħ` in 1/ps.
    generator: SparseMatrix,
    pub channels: Vec<JumpChannel>,
    /// Upper bound of the total jump rate over the truncated space, 1/ps.
    pub max_total_rate: f64,
}

impl TrajectorySystem {
    pub fn new(config: &SystemConfig, rates: &PhononRateSet) -> Result<Self, TrajectoryError> {
        let (config, rates) = effective_inputs(config, rates)?;
        let space = config.space()?;
        let ops = build_operators(space);
        let h = &build_hamiltonian(&config, &ops) * (1.0 / HBAR_MEV_PS);
        let mut channels = Vec::new();
        let mut loss = SparseMatrix::zeros(space.dim(), space.dim());
        for d in dissipators(&config, &rates, &ops) {
            if d.rate == 0.0 {
                continue;
            }
            let tag = ChannelTag::from_name(d.name).expect("dissipator names match channel tags");
            let collapse = &d.op * math::sqrt(2.0 * d.rate);
            loss = &loss + &(&collapse.adjoint() * &collapse);
            channels.push(JumpChannel {
                tag,
                collapse,
                rate: d.rate,
            });
        }
        // −i(H − (i/2)Σc†c) = −iH − ½Σc†c
        let generator = &(&h * Complex64::new(0.0, -1.0)) - &(&loss * 0.5);
        let max_total_rate = (0..space.dim()).map(|k| loss.get(k, k).re).fold(0.0, f64::max);
        Ok(Self {
            space,
            generator,
            channels,
            max_total_rate,
        })
    }

    fn observables(&self, psi: &[Complex64]) -> (f64, f64, f64) {
        let mut norm = 0.0;
        let mut nx = 0.0;
        let mut nc = 0.0;
        for (k, c) in psi.iter().enumerate() {
            let p = c.norm_sqr();
            let (photons, excited) = self.space.state(k);
            norm += p;
            nc += photons as f64 * p;
            if excited {
                nx += p;
            }
        }
        (norm, nx / norm, nc / norm)
    }

    fn total_rate(&self, psi: &[Complex64]) -> f64 {
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        self.channels
            .iter()
            .map(|ch| ch.collapse.mul_vec(psi).iter().map(|c| c.norm_sqr()).sum::<f64>())
            .sum::<f64>()
            / norm
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpEvent {
    pub t_ps: f64,
    pub channel: ChannelTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub seed: u64,
    pub times: Vec<f64>,
    /// Conditioned expectations on the time grid.
    pub n_x: Vec<f64>,
    pub n_c: Vec<f64>,
    pub jumps: Vec<JumpEvent>,
    /// Jump counts indexed like [`ChannelTag::ALL`].
    pub jump_counts: [usize; 7],
    /// Largest `|‖ψ‖ − 1|` right after a renormalization.
    pub max_norm_error: f64,
    /// `‖ψ‖²` of the unnormalized state at the final time: the survival
    /// probability since the last jump.
    pub final_norm_sq: f64,
}

impl TrajectoryRecord {
    pub fn count(&self, tag: ChannelTag) -> usize {
        self.jump_counts[tag.index()]
    }

    /// Jumps that change populations (all but dephasing).
    pub fn overlay_events(&self) -> impl Iterator<Item = &JumpEvent> {
        self.jumps.iter().filter(|j| j.channel.changes_populations())
    }

    /// Time average of the conditioned `n_x` over samples with `t ≥ t_from`.
    pub fn time_average_nx(&self, t_from: f64) -> f64 {
        let v: Vec<f64> = self
            .times
            .iter()
            .zip(&self.n_x)
            .filter(|(t, _)| **t >= t_from)
            .map(|(_, n)| *n)
            .collect();
        if v.is_empty() {
            return f64::NAN;
        }
        pairwise_sum(&v) / v.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryOptions {
    pub ode: OdeOptions,
    /// Skip the coarse-sampling check.
    pub allow_coarse_sampling: bool,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions {
                rtol: 1e-9,
                atol: 1e-11,
                ..OdeOptions::default()
            },
            allow_coarse_sampling: false,
        }
    }
}

/// Uniform sample in `(0, 1]`.
fn uniform(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
}

fn norm_sq(psi: &[Complex64]) -> f64 {
    psi.iter().map(|c| c.norm_sqr()).sum()
}

/// Single trajectory from `|g, 0⟩`.
pub fn run_trajectory(
    config: &SystemConfig,
    rates: &PhononRateSet,
    seed: u64,
    t_final: f64,
    dt: f64,
) -> Result<TrajectoryRecord, TrajectoryError> {
    let system = TrajectorySystem::new(config, rates)?;
    let mut psi0 = alloc::vec![Complex64::new(0.0, 0.0); system.space.dim()];
    psi0[0] = Complex64::new(1.0, 0.0);
    run_trajectory_from(&system, &psi0, seed, t_final, dt, &TrajectoryOptions::default())
}

pub fn run_trajectory_from(
    system: &TrajectorySystem,
    psi0: &[Complex64],
    seed: u64,
    t_final: f64,
    dt: f64,
    opts: &TrajectoryOptions,
) -> Result<TrajectoryRecord, TrajectoryError> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(TrajectoryError::InvalidArgument("t_final must be positive"));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(TrajectoryError::InvalidArgument("dt must be positive"));
    }
    if psi0.len() != system.space.dim() {
        return Err(TrajectoryError::InitialState {
            expected: system.space.dim(),
            found: psi0.len(),
        });
    }
    let n0 = norm_sq(psi0);
    if !(n0 > 0.0) {
        return Err(HilbertError::ZeroNorm.into());
    }
    let s = 1.0 / math::sqrt(n0);
    let psi: Vec<Complex64> = psi0.iter().map(|c| c * s).collect();

    let grid = output_grid(t_final, dt);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| system.generator.mul_vec_into(y, dy);
    let mut integ = Dopri5::new(0.0, psi, opts.ode);
    let mut threshold = uniform(&mut rng);
    let mut record = TrajectoryRecord {
        seed,
        times: Vec::with_capacity(grid.len()),
        n_x: Vec::with_capacity(grid.len()),
        n_c: Vec::with_capacity(grid.len()),
        jumps: Vec::new(),
        jump_counts: [0; 7],
        max_norm_error: (math::sqrt(norm_sq(integ.y())) - 1.0).abs(),
        final_norm_sq: 1.0,
    };
    let mut scratch = alloc::vec![Complex64::new(0.0, 0.0); system.space.dim()];
    for (i, &t_sample) in grid.iter().enumerate() {
        while integ.t() < t_sample {
            integ.step(&mut rhs, t_sample)?;
            if norm_sq(integ.y()) >= threshold {
                continue;
            }
            let t_jump = locate_crossing(&integ, threshold, &mut scratch);
            integ.rewind();
            integ.integrate_to(&mut rhs, t_jump)?;
            let psi = collapse(system, integ.y(), &mut rng, t_jump, &mut record);
            record.max_norm_error = record.max_norm_error.max((math::sqrt(norm_sq(&psi)) - 1.0).abs());
            integ.reset(t_jump, &psi);
            threshold = uniform(&mut rng);
        }
        let (_, nx, nc) = system.observables(integ.y());
        record.times.push(t_sample);
        record.n_x.push(nx);
        record.n_c.push(nc);
        if !opts.allow_coarse_sampling && i + 1 < grid.len() {
            let step = grid[i + 1] - t_sample;
            let expected = system.total_rate(integ.y()) * step;
            if expected > MAX_JUMPS_PER_SAMPLE {
                return Err(TrajectoryError::SamplingTooCoarse {
                    dt,
                    t: t_sample,
                    expected_jumps: expected,
                });
            }
        }
    }
    record.final_norm_sq = norm_sq(integ.y());
    Ok(record)
}

/// Time in the last step where `‖ψ‖²` equals the threshold; the norm is
/// nonincreasing under `H_eff`, so bisection on the interpolant suffices.
fn locate_crossing(integ: &Dopri5, threshold: f64, scratch: &mut [Complex64]) -> f64 {
    let (mut lo, mut hi) = integ.last_interval();
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        integ.interpolate(mid, scratch);
        if norm_sq(scratch) >= threshold {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

fn collapse(
    system: &TrajectorySystem,
    psi: &[Complex64],
    rng: &mut ChaCha8Rng,
    t: f64,
    record: &mut TrajectoryRecord,
) -> Vec<Complex64> {
    let candidates: Vec<(ChannelTag, Vec<Complex64>, f64)> = system
        .channels
        .iter()
        .map(|ch| {
            let v = ch.collapse.mul_vec(psi);
            let w = norm_sq(&v);
            (ch.tag, v, w)
        })
        .collect();
    let total: f64 = candidates.iter().map(|c| c.2).sum();
    let target = uniform(rng) * total;
    let mut acc = 0.0;
    let mut chosen = candidates.len() - 1;
    for (k, c) in candidates.iter().enumerate() {
        acc += c.2;
        if c.2 > 0.0 && target <= acc {
            chosen = k;
            break;
        }
    }
    let (tag, v, w) = &candidates[chosen];
    record.jumps.push(JumpEvent { t_ps: t, channel: *tag });
    record.jump_counts[tag.index()] += 1;
    let s = 1.0 / math::sqrt(*w);
    v.iter().map(|c| c * s).collect()
}

/// Recursive pairwise sum in index order.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        n if n <= 8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

/// Mean and standard error of the mean; the error is zero for one sample.
pub fn mean_and_standard_error(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let dev: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&dev) / (n - 1) as f64;
    (mean, math::sqrt(var / n as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleAverage {
    pub n_traj: usize,
    pub seed0: u64,
    pub times: Vec<f64>,
    pub n_x_mean: Vec<f64>,
    pub n_x_se: Vec<f64>,
    pub n_c_mean: Vec<f64>,
    pub n_c_se: Vec<f64>,
    /// Summed over trajectories, indexed like [`ChannelTag::ALL`].
    pub jump_counts: [usize; 7],
}

/// Reduces records (in their given order) to means and standard errors.
pub fn reduce_records(records: &[TrajectoryRecord], seed0: u64) -> Result<EnsembleAverage, TrajectoryError> {
    let first = records.first().ok_or(TrajectoryError::EmptyEnsemble)?;
    if records.iter().any(|r| r.times != first.times) {
        return Err(TrajectoryError::GridMismatch);
    }
    let m = first.times.len();
    let mut out = EnsembleAverage {
        n_traj: records.len(),
        seed0,
        times: first.times.clone(),
        n_x_mean: Vec::with_capacity(m),
        n_x_se: Vec::with_capacity(m),
        n_c_mean: Vec::with_capacity(m),
        n_c_se: Vec::with_capacity(m),
        jump_counts: [0; 7],
    };
    let mut column = Vec::with_capacity(records.len());
    for k in 0..m {
        column.clear();
        column.extend(records.iter().map(|r| r.n_x[k]));
        let (mx, sx) = mean_and_standard_error(&column);
        column.clear();
        column.extend(records.iter().map(|r| r.n_c[k]));
        let (mc, sc) = mean_and_standard_error(&column);
        out.n_x_mean.push(mx);
        out.n_x_se.push(sx);
        out.n_c_mean.push(mc);
        out.n_c_se.push(sc);
    }
    for r in records {
        for (total, c) in out.jump_counts.iter_mut().zip(r.jump_counts) {
            *total += c;
        }
    }
    Ok(out)
}

/// Sequential ensemble of `n_traj` trajectories seeded `seed0, seed0 + 1, …`
/// (wrapping).
pub fn ensemble_average(
    config: &SystemConfig,
    rates: &PhononRateSet,
    n_traj: usize,
    seed0: u64,
    t_final: f64,
    dt: f64,
) -> Result<EnsembleAverage, TrajectoryError> {
    if n_traj == 0 {
        return Err(TrajectoryError::EmptyEnsemble);
    }
    let system = TrajectorySystem::new(config, rates)?;
    let mut psi0 = alloc::vec![Complex64::new(0.0, 0.0); system.space.dim()];
    psi0[0] = Complex64::new(1.0, 0.0);
    let opts = TrajectoryOptions::default();
    let records = (0..n_traj as u64)
        .map(|i| run_trajectory_from(&system, &psi0, seed0.wrapping_add(i), t_final, dt, &opts))
        .collect::<Result<Vec<_>, _>>()?;
    reduce_records(&records, seed0)
}

/// Pure state of a trajectory as a density matrix (normalized).
pub fn conditioned_state(psi: &[Complex64]) -> Result<DensityMatrix, TrajectoryError> {
    Ok(DensityMatrix::pure(psi)?)
}
