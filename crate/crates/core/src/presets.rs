//! Systems and weights used throughout the tests and the CLI.

use crate::discretize::{CostWeights, RfdeSystem};
use crate::linalg::Matrix;

/// `x' = −0.5 x − x(t − 2.2)`.
pub fn example1() -> RfdeSystem {
    RfdeSystem::scalar(-0.5, -1.0, 2.2).expect("valid preset")
}

/// `Q0 = Q1 = 1`, `Q2 = 0`.
pub fn example1_weights() -> CostWeights {
    CostWeights::scalar(1.0, 1.0, 0.0)
}

/// Two-dimensional system, stable for delays below `arccos(−0.9)/√0.19`.
pub fn example2(h: f64) -> RfdeSystem {
    RfdeSystem::new(
        Matrix::from_row_slice(2, 2, &[-2.0, 0.0, 0.0, -0.9]),
        Matrix::from_row_slice(2, 2, &[-1.0, 0.0, -1.0, -1.0]),
        h,
    )
    .expect("valid preset")
}

/// `Q0 = Q1 = I2`, `Q2 = 0`.
pub fn example2_weights() -> CostWeights {
    CostWeights::identity(2)
}

/// Critical delay of [`example2`].
pub fn example2_critical_delay() -> f64 {
    (-0.9_f64).acos() / (1.0 - 0.81_f64).sqrt()
}

/// Critical delay of [`example1`]'s coefficients: the imaginary-axis
/// crossing at `ω = √(1 − 0.25)`.
pub fn example1_critical_delay() -> f64 {
    let omega = 0.75_f64.sqrt();
    (std::f64::consts::PI - 0.5_f64.acos()) / omega
}

/// `x' = −x`, delay `h` is immaterial.
pub fn delay_free(h: f64) -> RfdeSystem {
    RfdeSystem::scalar(-1.0, 0.0, h).expect("valid preset")
}

/// `Q0 = 1`, `Q1 = Q2 = 0` (not complete-type).
pub fn delay_free_weights() -> CostWeights {
    CostWeights::scalar(1.0, 0.0, 0.0)
}
