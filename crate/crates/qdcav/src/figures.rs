//! Scenario presets: one bundle of tables per figure of the study.

use std::path::Path;

use qdcav_core::analytic::{nx_cavity_driven_effective, nx_no_cavity, nx_thermal, DriveFilter, EffectiveModelParams};
use qdcav_core::liouvillian::phonon_rates;
use qdcav_core::phonon_bath::{BathParams, PhononKernel};
use qdcav_core::SystemConfig;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::output::{sidecar_path, write_json, write_table, Cell, Provenance, Table};
use crate::sweep::{jc_term_toggle, kernels_for, pool, run_sweep, Axis, SweepParameter, SweepPlan, SweepTable};
use crate::trajectories::{record_table, run_records, JumpSidecar};

pub const FIGURES: [&str; 6] = ["fig3", "fig4", "fig5", "fig6", "fig7", "fig8"];

/// Cavity–exciton detunings of the cavity-driven panels, meV.
pub const FIG6_DETUNINGS: [f64; 6] = [-1.6, -0.8, 0.0, 0.8, 1.6, 3.0];
/// Photon cutoff for the exciton-driven two-photon panels, where the
/// cavity holds well under one photon.
pub const FIG5_N_MAX: usize = 12;
/// Laser detuning `ω_L − ω_x` of the trajectory runs, meV.
pub const FIG7_LASER_DETUNING: f64 = 1.7;
pub const DRIVE_UEV: f64 = 300.0;

/// Named tables and JSON documents produced by one command.
#[derive(Debug, Default)]
pub struct Bundle {
    pub tables: Vec<(String, Table)>,
    pub documents: Vec<(String, serde_json::Value)>,
    pub seeds: Vec<u64>,
    pub failures: usize,
}

impl Bundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|(n, _)| n == name).map(|(_, t)| t)
    }

    fn add_sweep(&mut self, name: String, sweep: &SweepTable) {
        self.failures += sweep.failures();
        self.tables.push((name, sweep.to_table()));
    }

    /// Writes `<name>.csv` with a `<name>.json` provenance sidecar for every
    /// table and `<name>.json` for every document.
    pub fn write(&self, dir: &Path, command: &str, parameters: &impl Serialize) -> Result<()> {
        let prov = Provenance::new(command, parameters).with_seeds(self.seeds.clone());
        for (name, table) in &self.tables {
            write_table(&dir.join(format!("{name}.csv")), table, &prov)?;
        }
        for (name, doc) in &self.documents {
            let path = dir.join(format!("{name}.json"));
            if self.tables.iter().any(|(n, _)| sidecar_path(&dir.join(format!("{n}.csv"))) == path) {
                return Err(Error::Config(format!("document {name} clashes with a table sidecar")));
            }
            write_json(&path, doc)?;
        }
        Ok(())
    }
}

pub const RATE_COLUMNS: [&str; 5] = ["delta_meV", "T_K", "gamma_up_ueV", "gamma_down_ueV", "error_ueV"];

/// Cavity-pair rates on a detuning grid at each temperature, temperature
/// slowest.
pub fn rates_table(bath: &BathParams, temps: &[f64], axis: &Axis, coupling_mev: f64) -> Result<Table> {
    axis.validate()?;
    let kernels = kernels_for(bath, temps)?;
    let deltas = axis.values();
    let mut t = Table::new(RATE_COLUMNS);
    for &temp in temps {
        let k = &kernels[&temp.to_bits()];
        let pairs = deltas
            .par_iter()
            .map(|&d| k.rate_pair(d, coupling_mev))
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(Error::config)?;
        for (d, p) in deltas.iter().zip(pairs) {
            t.push(vec![(*d).into(), temp.into(), p.up.into(), p.down.into(), p.error.into()]);
        }
    }
    Ok(t)
}

pub const CORRELATION_COLUMNS: [&str; 4] = ["t_ps", "T_K", "re_C", "im_C"];

/// `C(t) = e^{φ(t)} − 1` on `[0, t_max]`.
pub fn correlation_table(bath: &BathParams, temps: &[f64], t_max: f64, step: f64) -> Result<Table> {
    let axis = Axis::new(SweepParameter::LaserDetuning, 0.0, t_max, step);
    axis.validate()?;
    let mut t = Table::new(CORRELATION_COLUMNS);
    for &temp in temps {
        let k = PhononKernel::new(BathParams {
            temperature: temp,
            ..*bath
        })
        .map_err(Error::config)?;
        for time in axis.values() {
            let c = k.correlation(time);
            t.push(vec![time.into(), temp.into(), c.re.into(), c.im.into()]);
        }
    }
    Ok(t)
}

fn laser_axis(run: &RunConfig, delta_cx: f64) -> Axis {
    let (lo, hi) = run.sweep.laser_range(delta_cx);
    Axis::new(SweepParameter::LaserDetuning, lo, hi, run.sweep.effective_step())
}

fn tag(delta: f64) -> String {
    format!("{delta:+.1}")
}

pub fn fig3(run: &RunConfig) -> Result<Bundle> {
    let bath = run.bath.params()?;
    let axis = Axis::new(SweepParameter::CavityDetuning, -4.0, 4.0, run.sweep.effective_step());
    let temps = [4.0, 10.0];
    let mut b = Bundle::default();
    b.tables.push(("fig3_rates".into(), rates_table(&bath, &temps, &axis, 0.1)?));
    b.tables.push(("fig3_correlation".into(), correlation_table(&bath, &temps, 5.0, 0.01)?));
    Ok(b)
}

/// Exciton drive without cavity coupling: full solution, two-level formula
/// and the thermal dressed-state model.
pub fn fig4(run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    let bath = run.bath.params()?;
    let mut b = Bundle::default();
    for (name, eta) in [("fig4_weak", 30.0), ("fig4_strong", DRIVE_UEV)] {
        let system = SystemConfig {
            g_prime_uev: 0.0,
            n_max: 1,
            ..run.system
        }
        .with_exciton_drive(eta)
        .with_detunings(run.system.delta_cx_mev(), 0.0);
        let mut plan = SweepPlan::new(name, vec![laser_axis(run, 0.0)], system, bath);
        plan.pair_phonons = true;
        let sweep = run_sweep(&plan, workers)?;
        let mut table = sweep.to_table();
        let two_level = sweep
            .rows
            .iter()
            .map(|r| {
                let c = r.config.renormalized(r.rates.mean_displacement);
                let v = nx_no_cavity(
                    c.eta_x_prime_uev,
                    c.delta_lx_mev(),
                    c.gamma_uev,
                    c.gamma_prime_uev,
                    r.rates.gamma_up_x,
                    r.rates.gamma_down_x,
                );
                Cell::Float(v.unwrap_or(f64::NAN))
            })
            .collect();
        let thermal = sweep
            .rows
            .iter()
            .map(|r| Cell::Float(nx_thermal(eta * 1e-3, r.delta_lx_mev(), r.temperature_k).unwrap_or(f64::NAN)))
            .collect();
        table.add_column("nx_two_level", two_level);
        table.add_column("nx_thermal", thermal);
        b.failures += sweep.failures();
        b.tables.push((name.into(), table));
    }
    Ok(b)
}

/// Exciton drive with the cavity detuned by ±1.6 meV.
pub fn fig5(run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    let bath = run.bath.params()?;
    let mut b = Bundle::default();
    for dcx in [-1.6, 1.6] {
        let system = SystemConfig {
            n_max: FIG5_N_MAX,
            ..run.system
        }
        .with_exciton_drive(DRIVE_UEV)
        .with_detunings(dcx, 0.0);
        let mut plan = SweepPlan::new("fig5", vec![laser_axis(run, dcx)], system, bath);
        plan.pair_phonons = true;
        b.add_sweep(format!("fig5_dcx{}", tag(dcx)), &run_sweep(&plan, workers)?);
    }
    Ok(b)
}

fn cavity_plan(run: &RunConfig, bath: BathParams, dcx: f64) -> SweepPlan {
    let system = run.system.with_cavity_drive(DRIVE_UEV).with_detunings(dcx, 0.0);
    SweepPlan::new("cavity-drive", vec![laser_axis(run, dcx)], system, bath)
}

/// Cavity drive at six cavity detunings, phonons on and off, plus the
/// uncoupled-ladder curve at +1.6 meV.
pub fn fig6(run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    let bath = run.bath.params()?;
    let mut b = Bundle::default();
    for dcx in FIG6_DETUNINGS {
        let mut plan = cavity_plan(run, bath, dcx);
        plan.pair_phonons = true;
        b.add_sweep(format!("fig6_dcx{}", tag(dcx)), &run_sweep(&plan, workers)?);
    }
    let plan = cavity_plan(run, bath, 1.6);
    b.add_sweep("fig6_dcx+1.6_no_jc".into(), &jc_term_toggle(&plan, workers)?);
    Ok(b)
}

/// One conditioned trajectory at 4 K and at 10 K.
pub fn fig7(run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    let system = run.system.with_cavity_drive(DRIVE_UEV).with_detunings(1.6, FIG7_LASER_DETUNING);
    let tr = &run.trajectory;
    let pool = pool(workers)?;
    let temps = [4.0, 10.0];
    let records = pool.install(|| {
        temps
            .par_iter()
            .map(|&t| {
                let bath = BathParams {
                    temperature: t,
                    ..run.bath.params()?
                };
                let kernel = PhononKernel::new(bath).map_err(Error::config)?;
                let rates = phonon_rates(&system, &kernel).map_err(Error::config)?;
                let mut r = run_records(&system, &rates, 1, tr.seed, tr.t_final, tr.dt)?;
                Ok(r.remove(0))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut b = Bundle::default();
    for (t, rec) in temps.iter().zip(&records) {
        let name = format!("fig7_{t:.0}K");
        b.tables.push((name.clone(), record_table(rec, system.n_max)));
        let doc = serde_json::to_value(JumpSidecar::new(rec)).map_err(Error::numerical)?;
        b.documents.push((format!("{name}_jumps"), doc));
    }
    b.seeds = vec![tr.seed];
    Ok(b)
}

/// Full solution at Δ_cx = ±1.6 meV against the cavity-filtered effective
/// model, with the drive filter as printed and with the cavity detuning.
pub fn fig8(run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    let bath = run.bath.params()?;
    let mut b = Bundle::default();
    for dcx in [1.6, -1.6] {
        let mut plan = cavity_plan(run, bath, dcx);
        plan.system.phonons_enabled = true;
        let sweep = run_sweep(&plan, workers)?;
        let mut table = sweep.to_table();
        for (col, filter) in [
            ("nx_effective", DriveFilter::AsPrinted),
            ("nx_effective_lc", DriveFilter::CavityDetuning),
        ] {
            let params = EffectiveModelParams {
                drive_filter: filter,
                ..EffectiveModelParams::default()
            };
            let values = sweep
                .rows
                .iter()
                .map(|r| {
                    let c = r.config.renormalized(r.rates.mean_displacement);
                    let v = nx_cavity_driven_effective(&c, &params, r.rates.gamma_up_cav, r.rates.gamma_down_cav);
                    Cell::Float(v.unwrap_or(f64::NAN))
                })
                .collect();
            table.add_column(col, values);
        }
        b.failures += sweep.failures();
        b.tables.push((format!("fig8_dcx{}", tag(dcx)), table));
    }
    Ok(b)
}

pub fn figure(name: &str, run: &RunConfig, workers: Option<usize>) -> Result<Bundle> {
    match name {
        "fig3" => fig3(run),
        "fig4" => fig4(run, workers),
        "fig5" => fig5(run, workers),
        "fig6" => fig6(run, workers),
        "fig7" => fig7(run, workers),
        "fig8" => fig8(run, workers),
        _ => Err(Error::Config(format!(
            "unknown figure `{name}`; expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}
