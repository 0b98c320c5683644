use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::qstate::{DensityMatrix, C64};

/// Eigenvalues below this fraction of the trace are numerical zeros.
const NULL_EIGENVALUE: f64 = 1e-14;

/// Mixed-state concurrence of two qubits, `C = max(0, mu1 - mu2 - mu3 - mu4)`
/// where `mu_i` are the decreasing square roots of the eigenvalues of
/// `rho (Y x Y) rho* (Y x Y)`.
///
/// The `mu_i` are taken as the singular values of the symmetric matrix
/// `T_jk = v_j^T (Y x Y) v_k` over the subnormalized eigenvectors
/// `v_j = sqrt(lambda_j) e_j`; the spectrum is the same, and null
/// eigenvectors contribute exact zeros instead of square-rooted roundoff.
pub fn wootters_mixed_concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch(format!(
            "two-qubit concurrence needs a 4x4 matrix, got {0}x{0}",
            rho.dim()
        )));
    }
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    // sigma_y x sigma_y
    #[rustfmt::skip]
    let yy = DMatrix::from_row_slice(4, 4, &[
        zero, zero, zero, -one,
        zero, zero, one, zero,
        zero, one, zero, zero,
        -one, zero, zero, zero,
    ]);
    let eig = rho.matrix().clone().symmetric_eigen();
    let cut = NULL_EIGENVALUE * rho.trace().re;
    let kept: Vec<usize> = (0..4).filter(|&k| eig.eigenvalues[k] > cut).collect();
    let w = DMatrix::from_fn(4, kept.len(), |i, j| {
        let k = kept[j];
        eig.eigenvectors[(i, k)] * eig.eigenvalues[k].sqrt()
    });
    let t = w.transpose() * yy * &w;
    let mut mu: Vec<f64> = t.singular_values().iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    let first = mu.first().copied().unwrap_or(0.0);
    let rest: f64 = mu.iter().skip(1).sum();
    Ok((first - rest).max(0.0))
}
