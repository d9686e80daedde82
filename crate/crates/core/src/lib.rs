//! Polaron master-equation engine for a coherently driven quantum-dot cavity
//! system with acoustic-phonon scattering.
//!
//! The crate is `no_std` (it needs `alloc`) and contains only numerics:
//!
//! * [`phonon_bath`]: spectral density, phonon phase function, mean phonon
//!   displacement and the phonon-mediated scattering rates.
//! * [`hilbert`]: the truncated exciton ⊗ Fock space, its operators and
//!   density matrices.
//! * [`liouvillian`]: the polaron-frame Hamiltonian and the Lindblad generator
//!   as a sparse superoperator.
//! * [`solver`]: steady states, time evolution and truncation certification.
//! * [`trajectory`]: Monte-Carlo wavefunction unraveling with jump records.
//! * [`analytic`]: closed-form population models used for cross-validation.
//!
//! Units are fixed crate-wide: energies in meV (μeV where a field name says
//! so), times in ps, temperatures in K. See [`units`].
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analytic;
pub mod dense;
pub mod hilbert;
pub mod liouvillian;
mod math;
pub mod ode;
pub mod phonon_bath;
pub mod quadrature;
pub mod solver;
pub mod sparse;
pub mod trajectory;
pub mod units;

pub use num_complex::Complex64;

pub use hilbert::{DensityMatrix, OperatorSet, SpaceSpec};
pub use liouvillian::{DriveMode, Liouvillian, SystemConfig};
pub use phonon_bath::{BathParams, PhononKernel, PhononRateSet};
pub use solver::{SteadyStateResult, TimeSeries};
pub use sparse::SparseMatrix;
pub use trajectory::{ChannelTag, TrajectoryRecord};
