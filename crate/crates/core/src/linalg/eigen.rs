use nalgebra::{Complex, SymmetricEigen};

use super::{ensure_finite, ensure_square, quasi_blocks, real_schur, Matrix};
use crate::error::{Error, Result};

/// Eigenvalues of a general square matrix, in Schur-form order. Complex
/// eigenvalues appear as adjacent conjugate pairs.
pub fn eigenvalues(a: &Matrix) -> Result<Vec<Complex<f64>>> {
    ensure_square(a, "eigenvalue input")?;
    ensure_finite(a, "eigenvalue input")?;
    if a.is_empty() {
        return Ok(Vec::new());
    }
    let (_, t) = real_schur(a)?;
    Ok(schur_eigenvalues(&t))
}

pub(crate) fn schur_eigenvalues(t: &Matrix) -> Vec<Complex<f64>> {
    let mut out = Vec::with_capacity(t.nrows());
    for (s, size) in quasi_blocks(t) {
        if size == 1 {
            out.push(Complex::new(t[(s, s)], 0.0));
        } else {
            let (a, b, c, d) = (t[(s, s)], t[(s, s + 1)], t[(s + 1, s)], t[(s + 1, s + 1)]);
            let half_tr = 0.5 * (a + d);
            let half_diff = 0.5 * (a - d);
            let disc = half_diff * half_diff + b * c;
            if disc >= 0.0 {
                let r = disc.sqrt();
                out.push(Complex::new(half_tr + r, 0.0));
                out.push(Complex::new(half_tr - r, 0.0));
            } else {
                let im = (-disc).sqrt();
                out.push(Complex::new(half_tr, im));
                out.push(Complex::new(half_tr, -im));
            }
        }
    }
    out
}

/// Largest real part over a list of eigenvalues (`-inf` when empty).
pub fn max_real_part(eigs: &[Complex<f64>]) -> f64 {
    eigs.iter().fold(f64::NEG_INFINITY, |acc, z| acc.max(z.re))
}

/// Hurwitz test with a stability margin: true iff `max Re λ < −margin`.
pub fn is_hurwitz(a: &Matrix, margin: f64) -> Result<(bool, f64)> {
    if !(margin >= 0.0) {
        return Err(Error::Input(format!("margin must be non-negative, got {margin}")));
    }
    let max_re = max_real_part(&eigenvalues(a)?);
    Ok((max_re < -margin, max_re))
}

/// Symmetric eigendecomposition with ascending eigenvalues and orthonormal
/// eigenvector columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Matrix,
}

impl SymEigen {
    pub fn min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(f64::NAN)
    }

    pub fn max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(f64::NAN)
    }

    /// `λ_min ≥ −tol·max(1, λ_max)`.
    pub fn is_psd(&self, tol: f64) -> bool {
        self.min() >= -tol * self.max().max(1.0)
    }
}

/// Symmetric eigendecomposition. The input must be symmetric to `1e-10`
/// relative; it is symmetrized before decomposition.
pub fn sym_eigen(s: &Matrix) -> Result<SymEigen> {
    let dim = ensure_square(s, "symmetric eigen input")?;
    ensure_finite(s, "symmetric eigen input")?;
    let asym = (s - s.transpose()).norm();
    if asym > 1e-10 * s.norm().max(1.0) {
        return Err(Error::Input(format!(
            "matrix is not symmetric (‖S − Sᵀ‖_F = {asym:.3e})"
        )));
    }
    if dim == 0 {
        return Ok(SymEigen {
            eigenvalues: Vec::new(),
            eigenvectors: Matrix::zeros(0, 0),
        });
    }
    let eig = SymmetricEigen::try_new(super::symmetrize(s), f64::EPSILON, 0)
        .ok_or(Error::Convergence { index: 0, dim })?;
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = Matrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(SymEigen {
        eigenvalues,
        eigenvectors,
    })
}
