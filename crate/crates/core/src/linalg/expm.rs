//! Matrix exponential by scaling and squaring with the diagonal [13/13]
//! Padé approximant (Higham 2005).

use super::{ensure_finite, ensure_square, Matrix};
use crate::error::{Error, Result};

const PADE13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

/// Largest 1-norm for which the [13/13] approximant is accurate to unit
/// roundoff without scaling.
const THETA_13: f64 = 5.371_920_351_148_152;

/// `exp(A)` for a square finite matrix.
pub fn expm(a: &Matrix) -> Result<Matrix> {
    let dim = ensure_square(a, "expm input")?;
    ensure_finite(a, "expm input")?;
    if dim == 0 {
        return Ok(Matrix::zeros(0, 0));
    }

    let norm1 = a.column_iter().map(|c| c.lp_norm(1)).fold(0.0_f64, f64::max);
    let squarings = if norm1 > THETA_13 {
        (norm1 / THETA_13).log2().ceil() as i32
    } else {
        0
    };
    if squarings > 1000 {
        return Err(Error::Range(format!("expm input norm {norm1:.3e} is too large")));
    }
    let scaled = a * 2f64.powi(-squarings);

    let ident = Matrix::identity(dim, dim);
    let a2 = &scaled * &scaled;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE13;

    let u_inner = &a6 * (b[13] * &a6 + b[11] * &a4 + b[9] * &a2)
        + b[7] * &a6
        + b[5] * &a4
        + b[3] * &a2
        + b[1] * &ident;
    let u = &scaled * u_inner;
    let v = &a6 * (b[12] * &a6 + b[10] * &a4 + b[8] * &a2)
        + b[6] * &a6
        + b[4] * &a4
        + b[2] * &a2
        + b[0] * &ident;

    let mut r = (&v - &u)
        .lu()
        .solve(&(&v + &u))
        .ok_or_else(|| Error::Range("Padé denominator is singular".into()))?;
    for _ in 0..squarings {
        r = &r * &r;
    }
    if r.iter().any(|x| !x.is_finite()) {
        return Err(Error::Range(format!(
            "expm overflowed (input 1-norm {norm1:.3e})"
        )));
    }
    Ok(r)
}
