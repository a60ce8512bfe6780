//! Dense real matrix kernels.
//!
//! Matrices are `nalgebra::DMatrix<f64>`. The real Schur form comes from
//! nalgebra's Francis double-shift iteration; everything layered on top of it
//! (Bartels–Stewart, pairing checks, Schur complements, `expm`) lives here.

mod eigen;
mod expm;
mod lyapunov;
mod schur;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

pub use eigen::{eigenvalues, is_hurwitz, max_real_part, sym_eigen, SymEigen};
pub use expm::expm;
pub use lyapunov::{lyapunov_residual, solve_lyapunov};
pub use schur::{schur_complement, schur_complement_unchecked, SchurPath};

/// Dense real matrix, IEEE double precision.
pub type Matrix = DMatrix<f64>;

/// Dense real column vector.
pub type Vector = DVector<f64>;

/// Relative PSD tolerance used throughout: `λ_min ≥ −PSD_TOL·max(1, λ_max)`.
pub const PSD_TOL: f64 = 1e-8;

pub(crate) fn ensure_square(a: &Matrix, what: &str) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(a.nrows())
}

pub(crate) fn ensure_finite(a: &Matrix, what: &str) -> Result<()> {
    if let Some(pos) = a.iter().position(|v| !v.is_finite()) {
        let (r, c) = (pos % a.nrows(), pos / a.nrows());
        return Err(Error::Input(format!("{what} has a non-finite entry at ({r}, {c})")));
    }
    Ok(())
}

/// `(M + Mᵀ)/2`.
pub fn symmetrize(m: &Matrix) -> Matrix {
    (m + m.transpose()) * 0.5
}

/// Largest absolute entry.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, v| acc.max(v.abs()))
}

/// Relative asymmetry `‖M − Mᵀ‖_F / max(1, ‖M‖_F)`.
pub fn asymmetry(m: &Matrix) -> f64 {
    (m - m.transpose()).norm() / m.norm().max(1.0)
}

/// Spectral norm via the singular values.
pub fn norm2(m: &Matrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone()
        .singular_values()
        .iter()
        .fold(0.0_f64, |acc, &s| acc.max(s))
}

/// `S ⊗ I_n`, the node-structure-times-identity product used by every
/// discretization.
pub fn kron_identity(s: &Matrix, n: usize) -> Matrix {
    s.kronecker(&Matrix::identity(n, n))
}

/// Block `(j, k)` of size `n×n`.
pub fn block(m: &Matrix, j: usize, k: usize, n: usize) -> Matrix {
    m.view((j * n, k * n), (n, n)).into_owned()
}

pub(crate) fn set_block(m: &mut Matrix, j: usize, k: usize, b: &Matrix) {
    let n = b.nrows();
    m.view_mut((j * n, k * n), (n, b.ncols())).copy_from(b);
}

/// Real Schur form `A = Q T Qᵀ` with `T` upper quasi-triangular.
pub(crate) fn real_schur(a: &Matrix) -> Result<(Matrix, Matrix)> {
    let dim = a.nrows();
    let schur = nalgebra::linalg::Schur::try_new(a.clone(), f64::EPSILON, 200 * dim.max(10))
        .ok_or_else(|| {
            // nalgebra does not report where it stalled; report the trailing
            // index where deflation is attempted first.
            Error::Convergence {
                index: dim.saturating_sub(1),
                dim,
            }
        })?;
    let (q, mut t) = schur.unpack();
    for j in 0..dim {
        for i in (j + 2)..dim {
            t[(i, j)] = 0.0;
        }
    }
    Ok((q, t))
}

/// Diagonal block boundaries of a quasi-triangular matrix: `(start, size)`
/// with size 1 or 2.
pub(crate) fn quasi_blocks(t: &Matrix) -> Vec<(usize, usize)> {
    let dim = t.nrows();
    let mut blocks = Vec::with_capacity(dim);
    let mut i = 0;
    while i < dim {
        if i + 1 < dim && t[(i + 1, i)] != 0.0 {
            blocks.push((i, 2));
            i += 2;
        } else {
            blocks.push((i, 1));
            i += 1;
        }
    }
    blocks
}
