//! Truncated exciton ⊗ photon space, its operators and density matrices.
//!
//! Basis ordering is photon-major with the exciton index fastest:
//! `|g,0⟩, |e,0⟩, |g,1⟩, |e,1⟩, …`, i.e. `index = 2n + x` with `x = 0` for
//! the ground state and `x = 1` for the exciton. The photon ladder keeps the
//! vacuum and stops at `n_max`; `a†` annihilates the top level.

use alloc::vec::Vec;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dense;
use crate::math;
use crate::sparse::SparseMatrix;

/// Tag written next to serialized matrices.
pub const BASIS_ORDERING: &str = "photon-major,exciton-fastest";

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HilbertError {
    #[error("photon truncation n_max must be at least 1, got {0}")]
    InvalidTruncation(usize),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("expectation value has imaginary part {imag:e}, observable is not Hermitian")]
    ComplexExpectation { imag: f64 },
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("eigenvalue computation did not converge")]
    Eigensolver,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpaceSpec {
    pub n_max: usize,
}

impl SpaceSpec {
    pub fn new(n_max: usize) -> Result<Self, HilbertError> {
        if n_max < 1 {
            return Err(HilbertError::InvalidTruncation(n_max));
        }
        Ok(Self { n_max })
    }

    pub fn dim(&self) -> usize {
        2 * (self.n_max + 1)
    }

    /// Index of `|x, n⟩` with `excited` selecting `|e⟩`.
    pub fn index(&self, photons: usize, excited: bool) -> usize {
        2 * photons + usize::from(excited)
    }

    /// Inverse of [`SpaceSpec::index`].
    pub fn state(&self, index: usize) -> (usize, bool) {
        (index / 2, index % 2 == 1)
    }
}

/// The operators of the truncated space.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSet {
    pub space: SpaceSpec,
    pub a: SparseMatrix,
    pub a_dag: SparseMatrix,
    pub sigma_minus: SparseMatrix,
    pub sigma_plus: SparseMatrix,
    /// `σ⁺σ⁻ = |e⟩⟨e|`.
    pub sigma_ee: SparseMatrix,
    /// `a†a`.
    pub number: SparseMatrix,
    /// `σ⁺a`.
    pub sigma_plus_a: SparseMatrix,
    /// `a†σ⁻`.
    pub a_dag_sigma_minus: SparseMatrix,
    pub identity: SparseMatrix,
}

pub fn build_operators(space: SpaceSpec) -> OperatorSet {
    let levels = space.n_max + 1;
    let ladder: Vec<_> = (1..levels)
        .map(|n| (n - 1, n, Complex64::new(math::sqrt(n as f64), 0.0)))
        .collect();
    let a_photon = SparseMatrix::from_triplets(levels, levels, &ladder);
    let id_photon = SparseMatrix::identity(levels);
    let sm_exciton = SparseMatrix::from_triplets(2, 2, &[(0, 1, ONE)]);
    let id_exciton = SparseMatrix::identity(2);

    let a = a_photon.kron(&id_exciton);
    let sigma_minus = id_photon.kron(&sm_exciton);
    let a_dag = a.adjoint();
    let sigma_plus = sigma_minus.adjoint();
    OperatorSet {
        space,
        sigma_ee: &sigma_plus * &sigma_minus,
        number: &a_dag * &a,
        sigma_plus_a: &sigma_plus * &a,
        a_dag_sigma_minus: &a_dag * &sigma_minus,
        identity: SparseMatrix::identity(space.dim()),
        a,
        a_dag,
        sigma_minus,
        sigma_plus,
    }
}

/// Truncated coherent state `|α⟩ ⊗ |x⟩`, not renormalized after truncation.
pub fn coherent_ket(space: SpaceSpec, alpha: Complex64, excited: bool) -> Vec<Complex64> {
    let mut ket = alloc::vec![ZERO; space.dim()];
    let mut amp = Complex64::new(math::exp(-0.5 * alpha.norm_sqr()), 0.0);
    for n in 0..=space.n_max {
        if n > 0 {
            amp = amp * alpha / math::sqrt(n as f64);
        }
        ket[space.index(n, excited)] = amp;
    }
    ket
}

/// Basis ket `|x, n⟩`.
pub fn basis_ket(space: SpaceSpec, photons: usize, excited: bool) -> Vec<Complex64> {
    let mut ket = alloc::vec![ZERO; space.dim()];
    ket[space.index(photons, excited)] = ONE;
    ket
}

/// Dense density matrix stored column-major, so `data` is `vec ρ` under
/// column stacking.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl DensityMatrix {
    pub fn from_col_major(dim: usize, data: Vec<Complex64>) -> Result<Self, HilbertError> {
        if data.len() != dim * dim {
            return Err(HilbertError::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn pure(ket: &[Complex64]) -> Result<Self, HilbertError> {
        let norm: f64 = ket.iter().map(|c| c.norm_sqr()).sum();
        if norm == 0.0 {
            return Err(HilbertError::ZeroNorm);
        }
        let dim = ket.len();
        let mut data = alloc::vec![ZERO; dim * dim];
        for j in 0..dim {
            let cj = ket[j].conj() / norm;
            for i in 0..dim {
                data[i + j * dim] = ket[i] * cj;
            }
        }
        Ok(Self { dim, data })
    }

    pub fn basis_projector(space: SpaceSpec, photons: usize, excited: bool) -> Self {
        let dim = space.dim();
        let mut data = alloc::vec![ZERO; dim * dim];
        let k = space.index(photons, excited);
        data[k + k * dim] = ONE;
        Self { dim, data }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let mut data = alloc::vec![ZERO; dim * dim];
        for k in 0..dim {
            data[k + k * dim] = Complex64::new(1.0 / dim as f64, 0.0);
        }
        Self { dim, data }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `vec ρ` (column stacking).
    pub fn as_vec(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i + j * self.dim]
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|k| self.data[k + k * self.dim]).sum()
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for j in 0..n {
            for i in j..n {
                worst = worst.max((self.data[i + j * n] - self.data[j + i * n].conj()).norm());
            }
        }
        worst
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> Result<f64, HilbertError> {
        let n = self.dim;
        let mut herm = self.data.clone();
        for j in 0..n {
            for i in 0..n {
                herm[i + j * n] = 0.5 * (self.data[i + j * n] + self.data[j + i * n].conj());
            }
        }
        dense::hermitian_eigenvalues(n, &herm)
            .and_then(|ev| ev.first().copied())
            .ok_or(HilbertError::Eigensolver)
    }

    /// `tr(ρ·op)`.
    pub fn expectation(&self, op: &SparseMatrix) -> Result<Complex64, HilbertError> {
        if op.rows() != self.dim || op.cols() != self.dim {
            return Err(HilbertError::DimensionMismatch {
                expected: self.dim,
                found: op.rows().max(op.cols()),
            });
        }
        // Σ_{ij} op_ij ρ_ji
        Ok(op.iter().map(|(i, j, v)| v * self.data[j + i * self.dim]).sum())
    }

    /// Real expectation of a Hermitian observable; the imaginary residue
    /// must stay below 10⁻⁸.
    pub fn expectation_real(&self, op: &SparseMatrix) -> Result<f64, HilbertError> {
        let v = self.expectation(op)?;
        if v.im.abs() > 1e-8 {
            return Err(HilbertError::ComplexExpectation { imag: v.im });
        }
        Ok(v.re)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn truncation_must_keep_one_photon() {
        assert!(SpaceSpec::new(0).is_err());
        assert_eq!(SpaceSpec::new(60).unwrap().dim(), 122);
    }

    #[test]
    fn ladder_actions() {
        let space = SpaceSpec::new(4).unwrap();
        let ops = build_operators(space);
        for n in 1..=4 {
            for x in [false, true] {
                let v = ops.a.get(space.index(n - 1, x), space.index(n, x));
                assert!((v.re - math::sqrt(n as f64)).abs() < 1e-15);
                assert!((ops.number.get(space.index(n, x), space.index(n, x)).re - n as f64).abs() < 1e-14);
            }
        }
        // a† kills the top level
        let top = basis_ket(space, 4, false);
        assert!(ops.a_dag.mul_vec(&top).iter().all(|c| *c == ZERO));
    }

    #[test]
    fn basis_projector_expectations() {
        let space = SpaceSpec::new(2).unwrap();
        let ops = build_operators(space);
        let g0 = DensityMatrix::basis_projector(space, 0, false);
        let e0 = DensityMatrix::basis_projector(space, 0, true);
        assert_eq!(g0.expectation_real(&ops.sigma_ee).unwrap(), 0.0);
        assert_eq!(e0.expectation_real(&ops.sigma_ee).unwrap(), 1.0);
        assert_eq!(g0.expectation_real(&ops.number).unwrap(), 0.0);
    }

    #[test]
    fn expectation_rejects_wrong_dimension_and_complex_values() {
        let ops = build_operators(SpaceSpec::new(1).unwrap());
        let rho = DensityMatrix::maximally_mixed(6);
        assert!(matches!(
            rho.expectation(&ops.a),
            Err(HilbertError::DimensionMismatch { .. })
        ));
        let space = SpaceSpec::new(1).unwrap();
        let ket: Vec<_> = (0..4).map(|k| Complex64::new(1.0, k as f64)).collect();
        let rho = DensityMatrix::pure(&ket).unwrap();
        let _ = space;
        assert!(matches!(
            rho.expectation_real(&ops.a),
            Err(HilbertError::ComplexExpectation { .. })
        ));
    }
}
