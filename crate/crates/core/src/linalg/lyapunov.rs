//! Bartels–Stewart solver for `P A + Aᵀ P = −Q`.

use nalgebra::{Complex, Matrix2, Matrix4, Vector4};

use super::eigen::schur_eigenvalues;
use super::{ensure_finite, ensure_square, quasi_blocks, real_schur, symmetrize, Matrix};
use crate::error::{Error, Result};

/// Relative residual bound enforced on every solve.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Smallest admissible `|λ_i + λ_j|`, relative to `max(1, ‖A‖_F)`.
const PAIRING_TOL: f64 = 1e3 * f64::EPSILON;

/// `‖P A + Aᵀ P + Q‖_F`.
pub fn lyapunov_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    (p * a + a.transpose() * p + q).norm()
}

/// Solves `P A + Aᵀ P = −Q` for symmetric `Q` via the real Schur form of `A`.
///
/// Fails with [`Error::SingularOperator`] when two eigenvalues of `A` (nearly)
/// sum to zero, and with [`Error::NumericalFailure`] when the residual check
/// `‖PA + AᵀP + Q‖_F ≤ 1e-9·max(1, ‖Q‖_F + 2‖A‖_F‖P‖_F)` does not hold.
pub fn solve_lyapunov(a: &Matrix, q: &Matrix) -> Result<Matrix> {
    let dim = ensure_square(a, "A")?;
    if q.shape() != (dim, dim) {
        return Err(Error::Dimension(format!(
            "Q is {}x{}, expected {dim}x{dim}",
            q.nrows(),
            q.ncols()
        )));
    }
    ensure_finite(a, "A")?;
    ensure_finite(q, "Q")?;
    if super::asymmetry(q) > 1e-10 {
        return Err(Error::Input("Q must be symmetric".into()));
    }
    if dim == 0 {
        return Ok(Matrix::zeros(0, 0));
    }

    let (u, t) = real_schur(a)?;
    check_pairing(&schur_eigenvalues(&t), a.norm())?;

    let c = u.transpose() * q * &u;
    let x = solve_quasi_triangular(&t, &c)?;
    let p = symmetrize(&(&u * x * u.transpose()));

    let residual = lyapunov_residual(a, &p, q);
    let bound = RESIDUAL_TOL * (q.norm() + 2.0 * a.norm() * p.norm()).max(1.0);
    if !(residual <= bound) {
        return Err(Error::NumericalFailure { residual, bound });
    }
    Ok(p)
}

fn check_pairing(eigs: &[Complex<f64>], a_norm: f64) -> Result<()> {
    let threshold = PAIRING_TOL * a_norm.max(1.0);
    let mut worst: Option<(usize, usize, f64)> = None;
    for i in 0..eigs.len() {
        for j in i..eigs.len() {
            let gap = (eigs[i] + eigs[j]).norm();
            if worst.is_none_or(|(_, _, g)| gap < g) {
                worst = Some((i, j, gap));
            }
        }
    }
    match worst {
        Some((i, j, gap)) if gap <= threshold => Err(Error::SingularOperator {
            lambda_i: fmt_complex(eigs[i]),
            lambda_j: fmt_complex(eigs[j]),
            gap,
        }),
        _ => Ok(()),
    }
}

fn fmt_complex(z: Complex<f64>) -> String {
    format!("{:.6e}{:+.6e}i", z.re, z.im)
}

/// Solves `X T + Tᵀ X = −C` for upper quasi-triangular `T`, one column block
/// at a time.
fn solve_quasi_triangular(t: &Matrix, c: &Matrix) -> Result<Matrix> {
    let dim = t.nrows();
    let blocks = quasi_blocks(t);
    let mut x = Matrix::zeros(dim, dim);

    for &(js, jn) in &blocks {
        // R_J = −C_J − X[:, ..js] T[..js, J]
        let mut rhs = -c.columns(js, jn).into_owned();
        if js > 0 {
            rhs -= x.columns(0, js) * t.view((0, js), (js, jn));
        }
        let t_jj = t.view((js, js), (jn, jn)).into_owned();

        for &(is, in_) in &blocks {
            let mut r = rhs.rows(is, in_).into_owned();
            if is > 0 {
                r -= t.view((0, is), (is, in_)).transpose() * x.view((0, js), (is, jn));
            }
            let t_ii = t.view((is, is), (in_, in_)).into_owned();
            let sol = small_sylvester(&t_ii, &t_jj, &r)?;
            x.view_mut((is, js), (in_, jn)).copy_from(&sol);
        }
    }
    Ok(x)
}

/// Solves `T_iiᵀ Y + Y T_jj = R` for blocks of size at most 2.
fn small_sylvester(t_ii: &Matrix, t_jj: &Matrix, r: &Matrix) -> Result<Matrix> {
    let (m, n) = (t_ii.nrows(), t_jj.nrows());
    if m == 1 && n == 1 {
        let d = t_ii[(0, 0)] + t_jj[(0, 0)];
        if d == 0.0 {
            return Err(singular_block());
        }
        return Ok(Matrix::from_element(1, 1, r[(0, 0)] / d));
    }
    // vec(Tᵀ Y + Y S) = (I ⊗ Tᵀ + Sᵀ ⊗ I) vec Y, column-major vec.
    let k = m * n;
    let op = Matrix::identity(n, n).kronecker(&t_ii.transpose())
        + t_jj.transpose().kronecker(&Matrix::identity(m, m));
    let sol = if k == 4 {
        let op4 = Matrix4::from_iterator(op.iter().copied());
        let rhs4 = Vector4::from_iterator(r.iter().copied());
        op4.full_piv_lu().solve(&rhs4).map(|v| v.as_slice().to_vec())
    } else {
        let op2 = Matrix2::from_iterator(op.iter().copied());
        let rhs2 = nalgebra::Vector2::from_iterator(r.iter().copied());
        op2.full_piv_lu().solve(&rhs2).map(|v| v.as_slice().to_vec())
    };
    let sol = sol.ok_or_else(singular_block)?;
    Ok(Matrix::from_column_slice(m, n, &sol))
}

fn singular_block() -> Error {
    Error::SingularOperator {
        lambda_i: "block".into(),
        lambda_j: "block".into(),
        gap: 0.0,
    }
}
