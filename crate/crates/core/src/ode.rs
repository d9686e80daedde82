//! Adaptive Dormand–Prince 5(4) integrator for complex linear-algebra
//! right-hand sides, with first-same-as-last reuse and cubic Hermite dense
//! output.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math;

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;

const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;

// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}: h = {h:e}")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("step budget of {0} steps exhausted")]
    TooManySteps(usize),
    #[error("non-finite state at t = {0}")]
    NonFinite(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Initial step; estimated from the right-hand side when `None`.
    pub h_init: Option<f64>,
    pub h_min: f64,
    pub h_max: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_min: 1e-12,
            h_max: f64::INFINITY,
            max_steps: 50_000_000,
        }
    }
}

/// Integrator state. The right-hand side is passed to every call as
/// `f(t, y, dy)`.
#[derive(Debug, Clone)]
pub struct Dopri5 {
    opts: OdeOptions,
    t: f64,
    y: Vec<Complex64>,
    f: Vec<Complex64>,
    h: f64,
    steps: usize,
    rejected: usize,
    fresh: bool,
    prev_t: f64,
    prev_y: Vec<Complex64>,
    prev_f: Vec<Complex64>,
    k: [Vec<Complex64>; 5],
    tmp: Vec<Complex64>,
    y_new: Vec<Complex64>,
    f_new: Vec<Complex64>,
}

fn axpy_into(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut s = Complex64::new(0.0, 0.0);
        for (c, k) in terms {
            s += k[i] * *c;
        }
        *o = y[i] + s * h;
    }
}

impl Dopri5 {
    pub fn new(t0: f64, y0: Vec<Complex64>, opts: OdeOptions) -> Self {
        let n = y0.len();
        let z = || alloc::vec![Complex64::new(0.0, 0.0); n];
        Self {
            opts,
            t: t0,
            h: opts.h_init.unwrap_or(0.0),
            steps: 0,
            rejected: 0,
            fresh: true,
            prev_t: t0,
            prev_y: y0.clone(),
            prev_f: z(),
            f: z(),
            k: [z(), z(), z(), z(), z()],
            tmp: z(),
            y_new: z(),
            f_new: z(),
            y: y0,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> &[Complex64] {
        &self.y
    }

    pub fn accepted_steps(&self) -> usize {
        self.steps
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Restarts from a new state (e.g. after a quantum jump), keeping the
    /// current step size as the first trial.
    pub fn reset(&mut self, t: f64, y: &[Complex64]) {
        self.t = t;
        self.y.copy_from_slice(y);
        self.prev_t = t;
        self.prev_y.copy_from_slice(y);
        self.fresh = true;
    }

    fn error_norm(&self) -> f64 {
        let n = self.y.len().max(1);
        let mut s = 0.0;
        for i in 0..self.y.len() {
            let scale = self.opts.atol + self.opts.rtol * self.y[i].norm().max(self.y_new[i].norm());
            let e = self.tmp[i].norm() / scale;
            s += e * e;
        }
        math::sqrt(s / n as f64)
    }

    fn initial_step<F>(&mut self, rhs: &mut F) -> f64
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let n = self.y.len().max(1) as f64;
        let (atol, rtol) = (self.opts.atol, self.opts.rtol);
        let scaled2 = |v: Complex64, y: Complex64| {
            let r = v.norm() / (atol + rtol * y.norm());
            r * r
        };
        let d0 = math::sqrt(self.y.iter().map(|&v| scaled2(v, v)).sum::<f64>() / n);
        let d1 = math::sqrt(self.y.iter().zip(&self.f).map(|(&y, &f)| scaled2(f, y)).sum::<f64>() / n);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        axpy_into(&mut self.tmp, &self.y, h0, &[(1.0, &self.f)]);
        rhs(self.t + h0, &self.tmp, &mut self.k[0]);
        let d2 = math::sqrt(
            self.y
                .iter()
                .zip(self.k[0].iter().zip(&self.f))
                .map(|(&y, (&f1, &f0))| scaled2(f1 - f0, y))
                .sum::<f64>()
                / n,
        ) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            math::powf(0.01 / d1.max(d2), 0.2)
        };
        (100.0 * h0).min(h1).min(self.opts.h_max)
    }

    /// Takes one accepted step that does not pass `t_limit`.
    pub fn step<F>(&mut self, rhs: &mut F, t_limit: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        if self.fresh {
            rhs(self.t, &self.y, &mut self.f);
            if self.h <= 0.0 {
                self.h = self.initial_step(rhs);
            }
            self.fresh = false;
        }
        loop {
            if self.steps + self.rejected >= self.opts.max_steps {
                return Err(OdeError::TooManySteps(self.opts.max_steps));
            }
            let remaining = t_limit - self.t;
            let last = self.h >= remaining;
            let h = if last { remaining } else { self.h };
            if h < self.opts.h_min && !last {
                return Err(OdeError::StepSizeUnderflow { t: self.t, h });
            }
            self.stages(rhs, h);
            let err = self.error_norm();
            if !err.is_finite() {
                if h <= self.opts.h_min {
                    return Err(OdeError::NonFinite(self.t));
                }
                self.h = h * MIN_FACTOR;
                self.rejected += 1;
                continue;
            }
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * math::powf(err, -0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= 1.0 {
                self.prev_t = self.t;
                core::mem::swap(&mut self.prev_y, &mut self.y);
                core::mem::swap(&mut self.prev_f, &mut self.f);
                core::mem::swap(&mut self.y, &mut self.y_new);
                core::mem::swap(&mut self.f, &mut self.f_new);
                self.t = if last { t_limit } else { self.t + h };
                self.steps += 1;
                // Keep the controller's step when the last step was clipped.
                if !last || h * factor > self.h {
                    self.h = (h * factor).min(self.opts.h_max);
                }
                return Ok(());
            }
            self.rejected += 1;
            self.h = h * factor.min(1.0);
        }
    }

    /// Fills `y_new`, `f_new` and leaves the error vector in `tmp`.
    fn stages<F>(&mut self, rhs: &mut F, h: f64)
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        let t = self.t;
        let [k2, k3, k4, k5, k6] = &mut self.k;
        let k1 = &self.f;
        axpy_into(&mut self.tmp, &self.y, h, &[(A21, k1)]);
        rhs(t + C2 * h, &self.tmp, k2);
        axpy_into(&mut self.tmp, &self.y, h, &[(A31, k1), (A32, k2)]);
        rhs(t + C3 * h, &self.tmp, k3);
        axpy_into(&mut self.tmp, &self.y, h, &[(A41, k1), (A42, k2), (A43, k3)]);
        rhs(t + C4 * h, &self.tmp, k4);
        axpy_into(&mut self.tmp, &self.y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]);
        rhs(t + C5 * h, &self.tmp, k5);
        axpy_into(
            &mut self.tmp,
            &self.y,
            h,
            &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)],
        );
        rhs(t + h, &self.tmp, k6);
        axpy_into(
            &mut self.y_new,
            &self.y,
            h,
            &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)],
        );
        rhs(t + h, &self.y_new, &mut self.f_new);
        for i in 0..self.y.len() {
            self.tmp[i] = (k1[i] * E1
                + k3[i] * E3
                + k4[i] * E4
                + k5[i] * E5
                + k6[i] * E6
                + self.f_new[i] * E7)
                * h;
        }
    }

    /// Integrates up to exactly `t_end`.
    pub fn integrate_to<F>(&mut self, rhs: &mut F, t_end: f64) -> Result<(), OdeError>
    where
        F: FnMut(f64, &[Complex64], &mut [Complex64]),
    {
        while self.t < t_end {
            self.step(rhs, t_end)?;
        }
        Ok(())
    }

    /// Start and end time of the last accepted step.
    pub fn last_interval(&self) -> (f64, f64) {
        (self.prev_t, self.t)
    }

    /// Cubic Hermite interpolant over the last accepted step.
    pub fn interpolate(&self, t: f64, out: &mut [Complex64]) {
        let h = self.t - self.prev_t;
        if h == 0.0 {
            out.copy_from_slice(&self.y);
            return;
        }
        let s = (t - self.prev_t) / h;
        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        for i in 0..out.len() {
            out[i] = self.prev_y[i] * h00
                + self.prev_f[i] * (h10 * h)
                + self.y[i] * h01
                + self.f[i] * (h11 * h);
        }
    }

    /// Rewinds to the start of the last accepted step.
    pub fn rewind(&mut self) {
        self.t = self.prev_t;
        core::mem::swap(&mut self.y, &mut self.prev_y);
        core::mem::swap(&mut self.f, &mut self.prev_f);
        self.prev_y.copy_from_slice(&self.y);
        self.prev_f.copy_from_slice(&self.f);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_phase() {
        // y' = -i ω y
        let w = 3.0;
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, -w) * y[0];
        };
        let mut ode = Dopri5::new(0.0, alloc::vec![Complex64::new(1.0, 0.0)], OdeOptions::default());
        ode.integrate_to(&mut rhs, 10.0).unwrap();
        let exact = Complex64::from_polar(1.0, -w * 10.0);
        assert!((ode.y()[0] - exact).norm() < 1e-7);
        assert_eq!(ode.t(), 10.0);
    }

    #[test]
    fn decay_and_dense_output() {
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = -y[0];
        };
        let mut ode = Dopri5::new(0.0, alloc::vec![Complex64::new(1.0, 0.0)], OdeOptions::default());
        ode.step(&mut rhs, 5.0).unwrap();
        let (a, b) = ode.last_interval();
        let mid = 0.5 * (a + b);
        let mut out = [Complex64::new(0.0, 0.0)];
        ode.interpolate(mid, &mut out);
        let h = b - a;
        assert!((out[0].re - math::exp(-mid)).abs() < h.powi(4));
        ode.rewind();
        assert_eq!(ode.t(), a);
        ode.integrate_to(&mut rhs, 5.0).unwrap();
        assert!((ode.y()[0].re - math::exp(-5.0)).abs() < 1e-9);
    }

    #[test]
    fn step_budget_is_enforced() {
        let mut rhs = |_t: f64, y: &[Complex64], dy: &mut [Complex64]| {
            dy[0] = Complex64::new(0.0, -1000.0) * y[0];
        };
        let opts = OdeOptions {
            max_steps: 10,
            ..OdeOptions::default()
        };
        let mut ode = Dopri5::new(0.0, alloc::vec![Complex64::new(1.0, 0.0)], opts);
        assert!(matches!(
            ode.integrate_to(&mut rhs, 100.0),
            Err(OdeError::TooManySteps(10))
        ));
    }
}
