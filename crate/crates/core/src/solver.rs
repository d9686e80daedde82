//! Steady states, time evolution and Fock-truncation certification.
//!
//! The steady state solves `L vec ρ = 0` with the equation for `ρ₀₀`
//! replaced by `tr ρ = 1`. The default path is a sparse LU factorization
//! (faer, COLAMD ordering with partial pivoting); restarted GMRES with an
//! ILU(0) preconditioner is available as a fallback.

use alloc::string::String;
use alloc::vec::Vec;

use faer::linalg::solvers::{Solve, SolveCore};
use faer::sparse::{SparseColMat, Triplet};
use faer::{Conj, Mat};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hilbert::{build_operators, DensityMatrix, HilbertError, OperatorSet};
use crate::liouvillian::{build_liouvillian, Liouvillian, LiouvillianError, SystemConfig};
use crate::math;
use crate::ode::{Dopri5, OdeError, OdeOptions};
use crate::phonon_bath::PhononRateSet;
use crate::sparse::SparseMatrix;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Largest number of unknowns (`dim²`) for which the automatic method is
/// always the direct factorization.
pub const DIRECT_LIMIT: usize = 14_884;

/// Condition estimates beyond this mark the steady state as non-unique.
pub const DEGENERACY_CONDITION: f64 = 1e15;

/// Physicality thresholds for solved states.
pub const TRACE_TOL: f64 = 1e-10;
pub const HERMITICITY_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("generator is not trace preserving: ‖L†(1)‖ = {0:e}")]
    NotTracePreserving(f64),
    #[error("steady state is not unique ({reason})")]
    Degenerate { reason: String },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("iterative solver stalled after {iterations} iterations at relative residual {residual:e}")]
    IterativeNotConverged { iterations: usize, residual: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(&'static str),
    #[error("truncation list must be strictly ascending")]
    TruncationOrder,
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error(transparent)]
    Hilbert(#[from] HilbertError),
    #[error(transparent)]
    Liouvillian(#[from] LiouvillianError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMethod {
    Direct,
    Iterative,
    /// Direct factorization; GMRES only if the factorization fails for a
    /// reason other than singularity.
    Auto,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmresOptions {
    pub restart: usize,
    pub rel_tol: f64,
    pub max_iterations: usize,
}

impl Default for GmresOptions {
    fn default() -> Self {
        Self {
            restart: 200,
            rel_tol: 1e-13,
            max_iterations: 20_000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateOptions {
    pub method: SolverMethod,
    pub estimate_conditioning: bool,
    /// Iterative-refinement sweeps after the direct solve.
    pub refinement_steps: usize,
    pub gmres: GmresOptions,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self {
            method: SolverMethod::Auto,
            estimate_conditioning: true,
            refinement_steps: 1,
            gmres: GmresOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverMetadata {
    pub method: String,
    /// Refinement sweeps (direct) or Krylov iterations (GMRES).
    pub iterations: usize,
    /// Filled in by callers that have a clock.
    pub wall_time_s: Option<f64>,
    /// Estimated 2-norm condition number of the constrained system.
    pub conditioning: Option<f64>,
    /// Estimated smallest singular value of the constrained system.
    pub smallest_singular_value: Option<f64>,
}

/// Trace, Hermiticity, positivity and residual of a solved state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Physicality {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
    pub residual: f64,
}

impl Physicality {
    pub fn is_physical(&self) -> bool {
        self.trace_error <= TRACE_TOL
            && self.hermiticity_error <= HERMITICITY_TOL
            && self.min_eigenvalue >= -POSITIVITY_TOL
            && self.residual <= RESIDUAL_TOL
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteadyStateResult {
    pub rho_ss: DensityMatrix,
    /// `max|L vec ρ| / ‖L‖_∞`, dimensionless.
    pub residual: f64,
    pub n_x: f64,
    pub n_c: f64,
    pub physicality: Physicality,
    pub metadata: SolverMetadata,
}

/// Relative residual `max|L vec ρ| / ‖L‖_∞`.
pub fn relative_residual(l: &Liouvillian, rho: &DensityMatrix) -> f64 {
    let r = l.matrix.mul_vec(rho.as_vec());
    let scale = l.matrix.norm_inf().max(f64::MIN_POSITIVE);
    r.iter().map(|v| v.norm()).fold(0.0, f64::max) / scale
}

pub fn physicality(l: &Liouvillian, rho: &DensityMatrix) -> Result<Physicality, SolverError> {
    Ok(Physicality {
        trace_error: (rho.trace() - ONE).norm(),
        hermiticity_error: rho.hermiticity_error(),
        min_eigenvalue: rho.min_eigenvalue()?,
        residual: relative_residual(l, rho),
    })
}

pub fn steady_state(l: &Liouvillian) -> Result<SteadyStateResult, SolverError> {
    steady_state_with(l, &SteadyStateOptions::default())
}

/// Constrained system: row 0 of L replaced by the trace functional.
fn constrained_triplets(l: &Liouvillian) -> Vec<(usize, usize, Complex64)> {
    let n = l.dim();
    let mut t: Vec<_> = l.matrix.iter().filter(|&(r, _, _)| r != 0).collect();
    t.extend((0..n).map(|k| (0, k * (n + 1), ONE)));
    t
}

pub fn steady_state_with(l: &Liouvillian, opts: &SteadyStateOptions) -> Result<SteadyStateResult, SolverError> {
    let tp = l.trace_preservation_error();
    if tp > 1e-10 * l.matrix.norm_inf().max(1.0) {
        return Err(SolverError::NotTracePreserving(tp));
    }
    let n2 = l.dim() * l.dim();
    let triplets = constrained_triplets(l);
    let (x, metadata) = match opts.method {
        SolverMethod::Direct => solve_direct(n2, &triplets, opts)?,
        SolverMethod::Iterative => solve_gmres(n2, &triplets, &opts.gmres)?,
        SolverMethod::Auto => match solve_direct(n2, &triplets, opts) {
            Err(SolverError::Factorization(_)) if n2 > DIRECT_LIMIT => solve_gmres(n2, &triplets, &opts.gmres)?,
            other => other?,
        },
    };
    finish(l, x, metadata)
}

fn finish(l: &Liouvillian, x: Vec<Complex64>, metadata: SolverMetadata) -> Result<SteadyStateResult, SolverError> {
    if x.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(SolverError::Degenerate {
            reason: "solution is not finite".into(),
        });
    }
    if let Some(c) = metadata.conditioning {
        if !(c.is_finite() && c < DEGENERACY_CONDITION) {
            return Err(SolverError::Degenerate {
                reason: alloc::format!("condition estimate {c:e}"),
            });
        }
    }
    let rho = DensityMatrix::from_col_major(l.dim(), x)?;
    let ops = build_operators(l.space);
    let physicality = physicality(l, &rho)?;
    Ok(SteadyStateResult {
        n_x: rho.expectation_real(&ops.sigma_ee)?,
        n_c: rho.expectation_real(&ops.number)?,
        residual: physicality.residual,
        physicality,
        rho_ss: rho,
        metadata,
    })
}

fn unit_rhs(n: usize) -> Vec<Complex64> {
    let mut b = alloc::vec![ZERO; n];
    b[0] = ONE;
    b
}

fn solve_direct(
    n: usize,
    triplets: &[(usize, usize, Complex64)],
    opts: &SteadyStateOptions,
) -> Result<(Vec<Complex64>, SolverMetadata), SolverError> {
    let ft: Vec<_> = triplets.iter().map(|&(r, c, v)| Triplet::new(r, c, v)).collect();
    let a = SparseColMat::<usize, Complex64>::try_new_from_triplets(n, n, &ft)
        .map_err(|e| SolverError::Factorization(alloc::format!("{e:?}")))?;
    let lu = a.sp_lu().map_err(|e| match e {
        faer::sparse::linalg::LuError::SymbolicSingular { index } => SolverError::Degenerate {
            reason: alloc::format!("structurally singular at pivot {index}"),
        },
        other => SolverError::Factorization(alloc::format!("{other:?}")),
    })?;
    let csr = SparseMatrix::from_triplets(n, n, triplets);
    let b = unit_rhs(n);
    let solve = |rhs: &[Complex64]| -> Vec<Complex64> {
        let m = Mat::from_fn(n, 1, |i, _| rhs[i]);
        let x = lu.solve(&m);
        (0..n).map(|i| x[(i, 0)]).collect()
    };
    let mut x = solve(&b);
    for _ in 0..opts.refinement_steps {
        let ax = csr.mul_vec(&x);
        let r: Vec<_> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let dx = solve(&r);
        for (xi, d) in x.iter_mut().zip(&dx) {
            *xi += d;
        }
    }
    let (conditioning, smallest) = if opts.estimate_conditioning {
        let inv_norm = inverse_norm_estimate(n, |v, adjoint| {
            let mut m = Mat::from_fn(n, 1, |i, _| v[i]);
            if adjoint {
                lu.solve_transpose_in_place_with_conj(Conj::Yes, m.as_mut());
            } else {
                lu.solve_in_place_with_conj(Conj::No, m.as_mut());
            }
            for (i, slot) in v.iter_mut().enumerate() {
                *slot = m[(i, 0)];
            }
        });
        let norm = norm_estimate(&csr);
        (Some(norm * inv_norm), Some(1.0 / inv_norm))
    } else {
        (None, None)
    };
    Ok((
        x,
        SolverMetadata {
            method: "direct-sparse-lu".into(),
            iterations: opts.refinement_steps,
            wall_time_s: None,
            conditioning,
            smallest_singular_value: smallest,
        },
    ))
}

fn vec_norm(v: &[Complex64]) -> f64 {
    math::sqrt(v.iter().map(|c| c.norm_sqr()).sum())
}

fn deterministic_start(n: usize) -> Vec<Complex64> {
    // Fixed, non-special start vector so estimates are reproducible.
    let v: Vec<_> = (0..n)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.618_033_988_749_894_9;
            Complex64::new(x - math::round(x) + 0.5, 0.25)
        })
        .collect();
    let s = vec_norm(&v);
    v.into_iter().map(|c| c / s).collect()
}

/// Power iteration on `(A Aᴴ)⁻¹`; returns an estimate of `‖A⁻¹‖₂`.
fn inverse_norm_estimate(n: usize, mut apply: impl FnMut(&mut [Complex64], bool)) -> f64 {
    let mut v = deterministic_start(n);
    let mut est = 0.0;
    for _ in 0..8 {
        apply(&mut v, false);
        apply(&mut v, true);
        let s = vec_norm(&v);
        if !s.is_finite() || s == 0.0 {
            return f64::INFINITY;
        }
        est = math::sqrt(s);
        for c in v.iter_mut() {
            *c /= s;
        }
    }
    est
}

/// Power iteration on `AᴴA`; returns an estimate of `‖A‖₂`.
fn norm_estimate(a: &SparseMatrix) -> f64 {
    let mut v = deterministic_start(a.cols());
    let mut est = 0.0;
    for _ in 0..20 {
        let w = a.adjoint_mul_vec(&a.mul_vec(&v));
        let s = vec_norm(&w);
        if s == 0.0 {
            return 0.0;
        }
        est = math::sqrt(s);
        v = w.into_iter().map(|c| c / s).collect();
    }
    est
}

/// Incomplete LU factorization with the sparsity pattern of the matrix.
struct Ilu0 {
    lu: SparseMatrix,
    diag: Vec<usize>,
}

impl Ilu0 {
    fn new(a: &SparseMatrix) -> Result<Self, SolverError> {
        let n = a.rows();
        let row_ptr = a.row_ptr().to_vec();
        let cols = a.col_indices().to_vec();
        let mut vals = a.values().to_vec();
        let mut diag = alloc::vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if cols[k] == i {
                    diag[i] = k;
                }
            }
            if diag[i] == usize::MAX {
                return Err(SolverError::Factorization(alloc::format!("ILU(0): no diagonal entry in row {i}")));
            }
        }
        let mut pos = alloc::vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = k;
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                let col = cols[k];
                if col >= i {
                    break;
                }
                let pivot = vals[diag[col]];
                if pivot == ZERO {
                    return Err(SolverError::Factorization(alloc::format!("ILU(0): zero pivot in row {col}")));
                }
                let factor = vals[k] / pivot;
                vals[k] = factor;
                for j in diag[col] + 1..row_ptr[col + 1] {
                    let p = pos[cols[j]];
                    if p != usize::MAX {
                        let upper = vals[j];
                        vals[p] -= factor * upper;
                    }
                }
            }
            for k in row_ptr[i]..row_ptr[i + 1] {
                pos[cols[k]] = usize::MAX;
            }
            if vals[diag[i]] == ZERO {
                return Err(SolverError::Factorization(alloc::format!("ILU(0): zero pivot in row {i}")));
            }
        }
        let triplets: Vec<_> = (0..n)
            .flat_map(|i| (row_ptr[i]..row_ptr[i + 1]).map(move |k| (i, k)))
            .map(|(i, k)| (i, cols[k], vals[k]))
            .collect();
        Ok(Self {
            lu: SparseMatrix::from_triplets(n, n, &triplets),
            diag,
        })
    }

    fn apply(&self, v: &mut [Complex64]) {
        let rp = self.lu.row_ptr();
        let ci = self.lu.col_indices();
        let vals = self.lu.values();
        for i in 0..v.len() {
            let mut s = v[i];
            for k in rp[i]..self.diag[i] {
                s -= vals[k] * v[ci[k]];
            }
            v[i] = s;
        }
        for i in (0..v.len()).rev() {
            let mut s = v[i];
            for k in self.diag[i] + 1..rp[i + 1] {
                s -= vals[k] * v[ci[k]];
            }
            v[i] = s / vals[self.diag[i]];
        }
    }
}

fn solve_gmres(
    n: usize,
    triplets: &[(usize, usize, Complex64)],
    opts: &GmresOptions,
) -> Result<(Vec<Complex64>, SolverMetadata), SolverError> {
    let a = SparseMatrix::from_triplets(n, n, triplets);
    let ilu = Ilu0::new(&a)?;
    let b = unit_rhs(n);
    let (x, iterations) = gmres(&a, &b, |v| ilu.apply(v), opts)?;
    Ok((
        x,
        SolverMetadata {
            method: "gmres-ilu0".into(),
            iterations,
            wall_time_s: None,
            conditioning: None,
            smallest_singular_value: None,
        },
    ))
}

/// Right-preconditioned restarted GMRES from a zero initial guess.
pub(crate) fn gmres(
    a: &SparseMatrix,
    b: &[Complex64],
    precondition: impl Fn(&mut [Complex64]),
    opts: &GmresOptions,
) -> Result<(Vec<Complex64>, usize), SolverError> {
    let n = b.len();
    let m = opts.restart.max(1);
    let b_norm = vec_norm(b);
    let mut x = alloc::vec![ZERO; n];
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let mut total = 0;
    let mut rel = 1.0;
    while total < opts.max_iterations {
        let ax = a.mul_vec(&x);
        let r: Vec<_> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let beta = vec_norm(&r);
        rel = beta / b_norm;
        if rel <= opts.rel_tol {
            return Ok((x, total));
        }
        let mut basis: Vec<Vec<Complex64>> = alloc::vec![r.iter().map(|c| c / beta).collect()];
        let mut h = alloc::vec![alloc::vec![ZERO; m]; m + 1];
        let mut cs = alloc::vec![ZERO; m];
        let mut sn = alloc::vec![ZERO; m];
        let mut g = alloc::vec![ZERO; m + 1];
        g[0] = Complex64::new(beta, 0.0);
        let mut used = 0;
        for j in 0..m {
            let mut z = basis[j].clone();
            precondition(&mut z);
            let mut w = a.mul_vec(&z);
            for (i, v) in basis.iter().enumerate() {
                let dot: Complex64 = v.iter().zip(&w).map(|(vi, wi)| vi.conj() * wi).sum();
                h[i][j] = dot;
                for (wk, vk) in w.iter_mut().zip(v) {
                    *wk -= dot * vk;
                }
            }
            let wn = vec_norm(&w);
            h[j + 1][j] = Complex64::new(wn, 0.0);
            for i in 0..j {
                let t = cs[i].conj() * h[i][j] + sn[i].conj() * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            let denom = math::sqrt(h[j][j].norm_sqr() + h[j + 1][j].norm_sqr());
            if denom == 0.0 {
                cs[j] = ONE;
                sn[j] = ZERO;
            } else {
                cs[j] = h[j][j] / denom;
                sn[j] = h[j + 1][j] / denom;
            }
            h[j][j] = cs[j].conj() * h[j][j] + sn[j].conj() * h[j + 1][j];
            h[j + 1][j] = ZERO;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j].conj() * g[j];
            used = j + 1;
            total += 1;
            rel = g[j + 1].norm() / b_norm;
            if rel <= opts.rel_tol || wn == 0.0 || total >= opts.max_iterations {
                break;
            }
            basis.push(w.into_iter().map(|c| c / wn).collect());
        }
        let mut y = alloc::vec![ZERO; used];
        for i in (0..used).rev() {
            let mut s = g[i];
            for k in i + 1..used {
                s -= h[i][k] * y[k];
            }
            y[i] = s / h[i][i];
        }
        let mut update = alloc::vec![ZERO; n];
        for (yi, v) in y.iter().zip(&basis) {
            for (u, vk) in update.iter_mut().zip(v) {
                *u += yi * vk;
            }
        }
        precondition(&mut update);
        for (xi, u) in x.iter_mut().zip(&update) {
            *xi += u;
        }
    }
    let ax = a.mul_vec(&x);
    let r: Vec<_> = b.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let final_rel = vec_norm(&r) / b_norm;
    if final_rel <= opts.rel_tol {
        return Ok((x, total));
    }
    Err(SolverError::IterativeNotConverged {
        iterations: total,
        residual: final_rel.max(rel),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub n_x: Vec<f64>,
    pub n_c: Vec<f64>,
    /// Largest `|tr ρ(t) − tr ρ(0)|` over the output grid.
    pub max_trace_drift: f64,
    /// Largest Hermiticity error over the output grid.
    pub max_hermiticity_drift: f64,
    pub final_state: DensityMatrix,
}

/// Output grid `0, dt, 2dt, …` ending exactly at `t_final`.
pub fn output_grid(t_final: f64, dt_out: f64) -> Vec<f64> {
    let steps = math::ceil(t_final / dt_out - 1e-9) as usize;
    (0..=steps).map(|k| (k as f64 * dt_out).min(t_final)).collect()
}

pub fn time_evolve(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_final: f64,
    dt_out: f64,
) -> Result<TimeSeries, SolverError> {
    time_evolve_with(rho0, l, t_final, dt_out, OdeOptions::default())
}

pub fn time_evolve_with(
    rho0: &DensityMatrix,
    l: &Liouvillian,
    t_final: f64,
    dt_out: f64,
    ode: OdeOptions,
) -> Result<TimeSeries, SolverError> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(SolverError::InvalidArgument("t_final must be positive"));
    }
    if !(dt_out > 0.0 && dt_out.is_finite()) {
        return Err(SolverError::InvalidArgument("dt_out must be positive"));
    }
    if rho0.dim() != l.dim() {
        return Err(HilbertError::DimensionMismatch {
            expected: l.dim(),
            found: rho0.dim(),
        }
        .into());
    }
    let ops = build_operators(l.space);
    let grid = output_grid(t_final, dt_out);
    let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| l.matrix.mul_vec_into(y, dy);
    let mut integ = Dopri5::new(0.0, rho0.as_vec().to_vec(), ode);
    let tr0 = rho0.trace();
    let mut series = TimeSeries {
        times: Vec::with_capacity(grid.len()),
        n_x: Vec::with_capacity(grid.len()),
        n_c: Vec::with_capacity(grid.len()),
        max_trace_drift: 0.0,
        max_hermiticity_drift: 0.0,
        final_state: rho0.clone(),
    };
    for &t in &grid {
        integ.integrate_to(&mut rhs, t)?;
        let rho = DensityMatrix::from_col_major(l.dim(), integ.y().to_vec())?;
        record(&mut series, t, &rho, &ops, tr0)?;
        series.final_state = rho;
    }
    Ok(series)
}

fn record(series: &mut TimeSeries, t: f64, rho: &DensityMatrix, ops: &OperatorSet, tr0: Complex64) -> Result<(), SolverError> {
    series.times.push(t);
    series.n_x.push(rho.expectation(&ops.sigma_ee)?.re);
    series.n_c.push(rho.expectation(&ops.number)?.re);
    series.max_trace_drift = series.max_trace_drift.max((rho.trace() - tr0).norm());
    series.max_hermiticity_drift = series.max_hermiticity_drift.max(rho.hermiticity_error());
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationEntry {
    pub n_max: usize,
    pub n_x: f64,
    pub n_c: f64,
    /// `|n_x(n_max) − n_x(previous n_max)|`, absent for the first entry.
    pub change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub tolerance: f64,
    pub entries: Vec<TruncationEntry>,
    /// Smallest listed `n_max` from which every later change is below the
    /// tolerance (the first entry counts when all changes are small).
    pub converged_at: Option<usize>,
    /// The sequence of changes grows somewhere after falling below the
    /// tolerance, or never falls below it while growing.
    pub non_monotone: bool,
}

impl ConvergenceReport {
    pub fn is_converged(&self) -> bool {
        self.converged_at.is_some()
    }
}

pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-3;

pub fn truncation_certify(
    config: &SystemConfig,
    rates: &PhononRateSet,
    n_list: &[usize],
    tolerance: f64,
) -> Result<ConvergenceReport, SolverError> {
    if n_list.is_empty() || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(SolverError::TruncationOrder);
    }
    let mut entries: Vec<TruncationEntry> = Vec::with_capacity(n_list.len());
    for &n_max in n_list {
        let c = SystemConfig { n_max, ..*config };
        let l = build_liouvillian(&c, rates)?;
        let ss = steady_state(&l)?;
        let change = entries.last().map(|p| (ss.n_x - p.n_x).abs());
        entries.push(TruncationEntry {
            n_max,
            n_x: ss.n_x,
            n_c: ss.n_c,
            change,
        });
    }
    // Converged from the entry after which all changes are within tolerance.
    let mut converged_at = None;
    if entries.len() >= 2 {
        for i in (0..entries.len() - 1).rev() {
            if entries[i + 1].change.is_some_and(|c| c < tolerance) {
                converged_at = Some(entries[i].n_max);
            } else {
                break;
            }
        }
    }
    let changes: Vec<f64> = entries.iter().filter_map(|e| e.change).collect();
    let grows = changes.windows(2).any(|w| w[1] > w[0] && w[1] >= tolerance);
    Ok(ConvergenceReport {
        tolerance,
        entries,
        converged_at,
        non_monotone: grows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liouvillian::DriveMode;

    fn base(n_max: usize) -> SystemConfig {
        SystemConfig {
            n_max,
            eta_c_uev: 0.0,
            phonons_enabled: false,
            ..SystemConfig::default()
        }
    }

    #[test]
    fn dark_state_without_drive() {
        let l = build_liouvillian(&base(3), &PhononRateSet::zero()).unwrap();
        let ss = steady_state(&l).unwrap();
        assert!(ss.n_x.abs() < 1e-14 && ss.n_c.abs() < 1e-14);
        assert!((ss.rho_ss.get(0, 0).re - 1.0).abs() < 1e-12);
        assert!(ss.physicality.is_physical());
    }

    #[test]
    fn gmres_agrees_with_direct() {
        let c = SystemConfig {
            eta_c_uev: 100.0,
            drive_mode: DriveMode::Cavity,
            ..base(4)
        }
        .with_detunings(0.3, 0.1);
        let l = build_liouvillian(&c, &PhononRateSet::zero()).unwrap();
        let direct = steady_state(&l).unwrap();
        let opts = SteadyStateOptions {
            method: SolverMethod::Iterative,
            ..SteadyStateOptions::default()
        };
        let iter = steady_state_with(&l, &opts).unwrap();
        assert_eq!(iter.metadata.method, "gmres-ilu0");
        assert!((direct.n_x - iter.n_x).abs() < 1e-10);
        assert!((direct.n_c - iter.n_c).abs() < 1e-10);
    }

    #[test]
    fn closed_system_is_degenerate() {
        let c = SystemConfig {
            kappa_uev: 0.0,
            gamma_uev: 0.0,
            gamma_prime_uev: 0.0,
            ..base(2)
        };
        let l = build_liouvillian(&c, &PhononRateSet::zero()).unwrap();
        assert!(matches!(steady_state(&l), Err(SolverError::Degenerate { .. })));
    }

    #[test]
    fn output_grid_ends_on_final_time() {
        assert_eq!(output_grid(1.0, 0.25), alloc::vec![0.0, 0.25, 0.5, 0.75, 1.0]);
        let g = output_grid(1.0, 0.3);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(g.len(), 5);
    }

    #[test]
    fn truncation_list_must_ascend() {
        let r = truncation_certify(&base(1), &PhononRateSet::zero(), &[3, 2], 1e-3);
        assert_eq!(r.unwrap_err(), SolverError::TruncationOrder);
    }
}
