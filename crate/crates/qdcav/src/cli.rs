//! Command-line interface.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use qdcav_core::liouvillian::{build_liouvillian, phonon_rates};
use qdcav_core::phonon_bath::PhononKernel;
use qdcav_core::solver::{steady_state, truncation_certify};
use serde_json::json;

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::figures::{correlation_table, figure, rates_table};
use crate::output::{write_json, write_table, Provenance};
use crate::sweep::{jc_term_toggle, pool, run_sweep, Axis, SweepParameter, SweepPlan};
use crate::trajectories::{ensemble_table, record_table, run_records, JumpSidecar};

#[derive(Debug, Parser)]
#[command(name = "qdcav", version, about = "Phonon-mediated inversion in a driven quantum-dot cavity")]
pub struct Cli {
    /// TOML file with [bath], [system], [sweep] and [trajectory] sections.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Sweep worker threads (default: available parallelism).
    #[arg(long, global = true, env = "QDCAV_WORKERS")]
    pub workers: Option<usize>,
    /// Use the coarse preview step on laser axes.
    #[arg(long, global = true)]
    pub preview: bool,
    #[command(subcommand)]
    pub command: Command,
}

/// Flags that override values from the config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Bath temperature, K.
    #[arg(long, allow_hyphen_values = true)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub n_max: Option<usize>,
    /// ω_c − ω_x, meV.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_cx: Option<f64>,
    /// ω_L − ω_x, meV.
    #[arg(long, allow_hyphen_values = true)]
    pub delta_lx: Option<f64>,
    /// Cavity drive ħη_c, μeV (switches to cavity driving).
    #[arg(long, conflicts_with = "eta_x", allow_hyphen_values = true)]
    pub eta_c: Option<f64>,
    /// Exciton drive ħη′_x, μeV (switches to exciton driving).
    #[arg(long, allow_hyphen_values = true)]
    pub eta_x: Option<f64>,
    /// ħg′, μeV.
    #[arg(long, allow_hyphen_values = true)]
    pub g_prime: Option<f64>,
    /// ħκ, μeV.
    #[arg(long, allow_hyphen_values = true)]
    pub kappa: Option<f64>,
    /// ħγ, μeV.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    /// ħγ′, μeV.
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_prime: Option<f64>,
    #[arg(long)]
    pub no_phonons: bool,
    /// Drop the coherent exciton–cavity term from H.
    #[arg(long)]
    pub no_jc: bool,
}

impl Overrides {
    pub fn apply(&self, run: &mut RunConfig) {
        let s = &mut run.system;
        if let Some(t) = self.temperature {
            run.bath.temperature = t;
        }
        if let Some(n) = self.n_max {
            s.n_max = n;
        }
        if self.delta_cx.is_some() || self.delta_lx.is_some() {
            *s = s.with_detunings(
                self.delta_cx.unwrap_or(s.delta_cx_mev()),
                self.delta_lx.unwrap_or(s.delta_lx_mev()),
            );
        }
        if let Some(e) = self.eta_c {
            *s = s.with_cavity_drive(e);
        }
        if let Some(e) = self.eta_x {
            *s = s.with_exciton_drive(e);
        }
        for (field, v) in [
            (&mut s.g_prime_uev, self.g_prime),
            (&mut s.kappa_uev, self.kappa),
            (&mut s.gamma_uev, self.gamma),
            (&mut s.gamma_prime_uev, self.gamma_prime),
        ] {
            if let Some(v) = v {
                *field = v;
            }
        }
        if self.no_phonons {
            s.phonons_enabled = false;
        }
        if self.no_jc {
            s.jc_coupling = false;
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cavity-pair phonon scattering rates against detuning.
    Rates {
        /// Temperatures, K.
        #[arg(long, value_delimiter = ',', default_values_t = [4.0, 10.0])]
        t_list: Vec<f64>,
        #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
        dmin: f64,
        #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
        dmax: f64,
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        /// Coupling ħg′, meV.
        #[arg(long, default_value_t = 0.1)]
        coupling: f64,
        #[arg(long, default_value = "rates.csv")]
        out: PathBuf,
    },
    /// Phonon correlation function C(t) = e^φ(t) − 1.
    Correlation {
        #[arg(long, value_delimiter = ',', default_values_t = [4.0, 10.0])]
        t_list: Vec<f64>,
        /// ps
        #[arg(long, default_value_t = 5.0)]
        t_max: f64,
        /// ps
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value = "correlation.csv")]
        out: PathBuf,
    },
    /// One steady state, printed as JSON.
    Steady {
        #[command(flatten)]
        overrides: Overrides,
        /// Also write the JSON summary here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Steady states over a parameter grid.
    Sweep {
        #[command(flatten)]
        overrides: Overrides,
        /// `name:min:max:step` with name one of laser, cavity, temperature,
        /// drive. Repeatable; the first axis varies slowest. Default: the
        /// laser axis from the config.
        #[arg(long = "axis")]
        axes: Vec<String>,
        /// Solve every point with phonons on and off.
        #[arg(long)]
        pair_phonons: bool,
        #[arg(long, default_value = "sweep.csv")]
        out: PathBuf,
    },
    /// Quantum trajectories: one record, or an ensemble average.
    Trajectory {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        n_traj: Option<usize>,
        /// ps
        #[arg(long)]
        t_final: Option<f64>,
        /// ps
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, default_value = "trajectory.csv")]
        out: PathBuf,
    },
    /// Data bundle for one figure: fig3 … fig8.
    Figure {
        name: String,
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, default_value = "figures")]
        out_dir: PathBuf,
    },
    /// Steady state at increasing photon cutoffs.
    CertifyTruncation {
        #[command(flatten)]
        overrides: Overrides,
        #[arg(long, value_delimiter = ',', default_values_t = [40usize, 50, 60, 70])]
        n_list: Vec<usize>,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Cli {
    fn base_config(&self) -> Result<RunConfig> {
        let mut run = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if self.preview {
            run.sweep.preview = true;
        }
        Ok(run)
    }

    fn resolved(&self, overrides: &Overrides) -> Result<RunConfig> {
        let mut run = self.base_config()?;
        overrides.apply(&mut run);
        run.validate()?;
        Ok(run)
    }
}

fn temperatures(list: &[f64]) -> Result<()> {
    if list.is_empty() || list.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::Config("temperatures must be finite and nonnegative".into()));
    }
    Ok(())
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(Error::numerical)?;
    let mut stdout = std::io::stdout().lock();
    // A closed pipe only means the reader stopped listening.
    let _ = writeln!(stdout, "{text}");
    if let Some(p) = out {
        write_json(p, value)?;
    }
    Ok(())
}

pub fn run(cli: &Cli) -> Result<()> {
    let workers = cli.workers;
    match &cli.command {
        Command::Rates {
            t_list,
            dmin,
            dmax,
            step,
            coupling,
            out,
        } => {
            temperatures(t_list)?;
            if !(coupling.is_finite() && *coupling >= 0.0) {
                return Err(Error::Config(format!("coupling must be nonnegative, got {coupling}")));
            }
            let run = cli.base_config()?;
            let bath = run.bath.params()?;
            let axis = Axis::new(SweepParameter::CavityDetuning, *dmin, *dmax, *step);
            let table = pool(workers)?.install(|| rates_table(&bath, t_list, &axis, *coupling))?;
            let params = json!({ "bath": run.bath, "t_list": t_list, "axis": axis, "coupling_meV": coupling });
            write_table(out, &table, &Provenance::new("rates", params))
        }
        Command::Correlation {
            t_list,
            t_max,
            step,
            out,
        } => {
            temperatures(t_list)?;
            let run = cli.base_config()?;
            let bath = run.bath.params()?;
            let table = correlation_table(&bath, t_list, *t_max, *step)?;
            let params = json!({ "bath": run.bath, "t_list": t_list, "t_max_ps": t_max, "step_ps": step });
            write_table(out, &table, &Provenance::new("correlation", params))
        }
        Command::Steady { overrides, out } => {
            let run = cli.resolved(overrides)?;
            let kernel = PhononKernel::new(run.validate()?).map_err(Error::config)?;
            let rates = phonon_rates(&run.system, &kernel).map_err(Error::config)?;
            let l = build_liouvillian(&run.system, &rates).map_err(Error::config)?;
            let ss = steady_state(&l).map_err(Error::numerical)?;
            let mut meta = ss.metadata.clone();
            meta.wall_time_s = None;
            let value = json!({
                "provenance": Provenance::new("steady", json!({ "bath": run.bath, "system": run.system })),
                "rates": rates,
                "n_x": ss.n_x,
                "n_c": ss.n_c,
                "residual": ss.residual,
                "physicality": ss.physicality,
                "physical": ss.physicality.is_physical(),
                "solver": meta,
            });
            emit(&value, out.as_deref())?;
            if !ss.physicality.is_physical() {
                return Err(Error::Numerical(format!("unphysical steady state: {:?}", ss.physicality)));
            }
            Ok(())
        }
        Command::Sweep {
            overrides,
            axes,
            pair_phonons,
            out,
        } => {
            let run = cli.resolved(overrides)?;
            let bath = run.validate()?;
            let axes = if axes.is_empty() {
                let (lo, hi) = run.sweep.laser_range(run.system.delta_cx_mev());
                vec![Axis::new(SweepParameter::LaserDetuning, lo, hi, run.sweep.effective_step())]
            } else {
                axes.iter().map(|a| Axis::parse(a)).collect::<Result<_>>()?
            };
            let mut plan = SweepPlan::new("sweep", axes, run.system, bath);
            plan.pair_phonons = *pair_phonons;
            plan.output = Some(out.clone());
            let table = if overrides.no_jc {
                plan.system.jc_coupling = true;
                jc_term_toggle(&plan, workers)?
            } else {
                run_sweep(&plan, workers)?
            };
            write_table(out, &table.to_table(), &Provenance::new("sweep", &plan))?;
            match table.failures() {
                0 => Ok(()),
                count => Err(Error::FailedRows {
                    count,
                    total: table.rows.len(),
                    path: out.display().to_string(),
                }),
            }
        }
        Command::Trajectory {
            overrides,
            seed,
            n_traj,
            t_final,
            dt,
            out,
        } => {
            let mut run = cli.base_config()?;
            overrides.apply(&mut run);
            let tr = &mut run.trajectory;
            tr.seed = seed.unwrap_or(tr.seed);
            tr.n_traj = n_traj.unwrap_or(tr.n_traj);
            tr.t_final = t_final.unwrap_or(tr.t_final);
            tr.dt = dt.unwrap_or(tr.dt);
            let kernel = PhononKernel::new(run.validate()?).map_err(Error::config)?;
            let rates = phonon_rates(&run.system, &kernel).map_err(Error::config)?;
            let tr = run.trajectory;
            let records = pool(workers)?.install(|| run_records(&run.system, &rates, tr.n_traj, tr.seed, tr.t_final, tr.dt))?;
            let seeds: Vec<u64> = records.iter().map(|r| r.seed).collect();
            let prov = Provenance::new("trajectory", json!({ "run": run, "rates": rates })).with_seeds(seeds);
            if let [record] = records.as_slice() {
                write_table(out, &record_table(record, run.system.n_max), &prov)?;
                let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
                write_json(&out.with_file_name(format!("{stem}_jumps.json")), &JumpSidecar::new(record))
            } else {
                let avg = qdcav_core::trajectory::reduce_records(&records, tr.seed).map_err(Error::numerical)?;
                write_table(out, &ensemble_table(&avg), &prov)
            }
        }
        Command::Figure {
            name,
            overrides,
            out_dir,
        } => {
            let run = cli.resolved(overrides)?;
            let bundle = figure(name, &run, workers)?;
            bundle.write(out_dir, &format!("figure {name}"), &run)?;
            match bundle.failures {
                0 => Ok(()),
                count => Err(Error::FailedRows {
                    count,
                    total: bundle.tables.iter().map(|(_, t)| t.rows.len()).sum(),
                    path: out_dir.display().to_string(),
                }),
            }
        }
        Command::CertifyTruncation {
            overrides,
            n_list,
            tol,
            out,
        } => {
            let run = cli.resolved(overrides)?;
            let kernel = PhononKernel::new(run.validate()?).map_err(Error::config)?;
            let rates = phonon_rates(&run.system, &kernel).map_err(Error::config)?;
            let report = truncation_certify(&run.system, &rates, n_list, *tol).map_err(|e| match e {
                qdcav_core::solver::SolverError::TruncationOrder => Error::Config(e.to_string()),
                other => Error::numerical(other),
            })?;
            let value = json!({
                "provenance": Provenance::new("certify-truncation", json!({ "bath": run.bath, "system": run.system })),
                "report": report,
                "converged": report.is_converged(),
            });
            emit(&value, out.as_deref())?;
            if report.is_converged() {
                Ok(())
            } else {
                Err(Error::Numerical(format!("photon cutoff not converged to {tol}")))
            }
        }
    }
}
