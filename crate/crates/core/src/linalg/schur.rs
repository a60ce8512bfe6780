//! Generalized Schur complement `P/Z = X − Bᵀ Z⁻ B`.

use super::{ensure_square, sym_eigen, symmetrize, Matrix, PSD_TOL};
use crate::error::{Error, Result};

/// How `Z⁻ B` is formed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SchurPath {
    /// Direct solve when `λ_min(Z) > 1e-10·λ_max(Z)`, Moore–Penrose otherwise.
    #[default]
    Auto,
    /// Always a direct (Cholesky, then LU) solve.
    Solve,
    /// Always the eigen-based Moore–Penrose pseudo-inverse.
    PseudoInverse,
}

const DIRECT_SOLVE_RATIO: f64 = 1e-10;

/// Generalized Schur complement of the leading `split×split` block of a
/// positive semidefinite `P`. The PSD precondition is checked with the
/// tolerance `λ_min(P) ≥ −1e-8·max(1, λ_max(P))`.
pub fn schur_complement(p: &Matrix, split: usize) -> Result<Matrix> {
    let dim = ensure_square(p, "P")?;
    let eig = sym_eigen(p)?;
    if !eig.is_psd(PSD_TOL) {
        return Err(Error::Precondition(format!(
            "P must be positive semidefinite for the generalized Schur complement \
             (λ_min = {:.3e}, λ_max = {:.3e}, dim = {dim})",
            eig.min(),
            eig.max()
        )));
    }
    schur_complement_unchecked(p, split, SchurPath::Auto)
}

/// Same formula without the PSD precondition. For indefinite `P` the result
/// no longer describes a minimum, but it is still well defined.
pub fn schur_complement_unchecked(p: &Matrix, split: usize, path: SchurPath) -> Result<Matrix> {
    let dim = ensure_square(p, "P")?;
    if split > dim {
        return Err(Error::Dimension(format!(
            "split {split} exceeds matrix dimension {dim}"
        )));
    }
    let n = dim - split;
    let x = p.view((split, split), (n, n)).into_owned();
    if split == 0 {
        return Ok(symmetrize(&x));
    }
    let z = symmetrize(&p.view((0, 0), (split, split)).into_owned());
    let b = p.view((0, split), (split, n)).into_owned();

    let zinv_b = match path {
        SchurPath::Solve => direct_solve(&z, &b)?,
        SchurPath::PseudoInverse => pinv_apply(&z, &b)?,
        SchurPath::Auto => {
            let eig = sym_eigen(&z)?;
            if eig.min() > DIRECT_SOLVE_RATIO * eig.max() {
                direct_solve(&z, &b)?
            } else {
                pinv_from_eigen(&eig, split, &b)
            }
        }
    };
    Ok(symmetrize(&(x - b.transpose() * zinv_b)))
}

fn direct_solve(z: &Matrix, b: &Matrix) -> Result<Matrix> {
    if let Some(chol) = z.clone().cholesky() {
        return Ok(chol.solve(b));
    }
    z.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::Precondition("leading block is singular; use the pseudo-inverse path".into()))
}

fn pinv_apply(z: &Matrix, b: &Matrix) -> Result<Matrix> {
    let eig = sym_eigen(z)?;
    Ok(pinv_from_eigen(&eig, z.nrows(), b))
}

/// `Z⁺ B` with rank cutoff `p·ε·λ_max(Z)`. Eigenvalues in the band
/// `[−PSD tolerance, cutoff]` count as zero; clearly negative ones (only
/// possible on the unchecked path) are inverted.
fn pinv_from_eigen(eig: &super::SymEigen, p: usize, b: &Matrix) -> Matrix {
    let cutoff = p as f64 * f64::EPSILON * eig.max().max(0.0);
    let negative_floor = -PSD_TOL * eig.max().max(1.0);
    let v = &eig.eigenvectors;
    let mut coeffs = v.transpose() * b;
    for (i, &lambda) in eig.eigenvalues.iter().enumerate() {
        let scale = if lambda > cutoff || lambda < negative_floor {
            1.0 / lambda
        } else {
            0.0
        };
        coeffs.row_mut(i).scale_mut(scale);
    }
    v * coeffs
}
