//! Small dense linear-algebra helpers on column-major complex buffers,
//! backed by `faer`.

use alloc::vec::Vec;

use faer::{Mat, Side};
use num_complex::Complex64;

fn to_mat(n: usize, data: &[Complex64]) -> Mat<Complex64> {
    assert_eq!(data.len(), n * n, "buffer is not {n}x{n}");
    Mat::from_fn(n, n, |i, j| data[i + j * n])
}

/// Eigenvalues of a Hermitian matrix in nondecreasing order. Only the lower
/// triangle is read. Returns `None` if the eigensolver does not converge.
pub fn hermitian_eigenvalues(n: usize, data: &[Complex64]) -> Option<Vec<f64>> {
    to_mat(n, data).self_adjoint_eigenvalues(Side::Lower).ok()
}

/// Eigenvalues of a general complex matrix, unordered.
pub fn eigenvalues(n: usize, data: &[Complex64]) -> Option<Vec<Complex64>> {
    to_mat(n, data).eigenvalues().ok()
}

/// Singular values in nonincreasing order.
pub fn singular_values(n: usize, data: &[Complex64]) -> Option<Vec<f64>> {
    to_mat(n, data).singular_values().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pauli_y_spectrum() {
        let c = |re, im| Complex64::new(re, im);
        // column-major [[0, -i], [i, 0]]
        let y = [c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)];
        let ev = hermitian_eigenvalues(2, &y).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-14 && (ev[1] - 1.0).abs() < 1e-14);
        let sv = singular_values(2, &y).unwrap();
        assert!((sv[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn triangular_eigenvalues_are_diagonal() {
        let c = |re, im| Complex64::new(re, im);
        let m = [c(1.0, 1.0), c(0.0, 0.0), c(5.0, -2.0), c(-2.0, 0.5)];
        let mut ev = eigenvalues(2, &m).unwrap();
        ev.sort_by(|a, b| a.re.total_cmp(&b.re));
        assert!((ev[0] - c(-2.0, 0.5)).norm() < 1e-13);
        assert!((ev[1] - c(1.0, 1.0)).norm() < 1e-13);
    }
}
