//! Complete-type Lyapunov–Krasovskii functionals for the linear single-delay
//! system `x'(t) = A0 x(t) + A1 x(t - h)`, approximated through spectral ODE
//! discretizations (Chebyshev collocation and Legendre tau).
//!
//! The crate is organised bottom-up:
//!
//! * [`linalg`]: dense kernels (eigenvalues, symmetric eigendecomposition,
//!   Bartels–Stewart Lyapunov solver, generalized Schur complement, `expm`).
//! * [`spectral`]: node sets, differentiation matrices, quadrature weights and
//!   the Legendre-coefficient ↔ Chebyshev-value transform.
//! * [`discretize`]: the approximating ODE matrices, Lyapunov right-hand sides
//!   and discretization of argument functions.
//! * [`functional`]: the functional approximation itself, evaluation, the
//!   quadratic lower-bound coefficient `k1`, stability tests and critical delays.
//! * [`oracle`]: an independent route through the delay Lyapunov matrix and
//!   interpolatory quadrature of the known functional formula.

pub mod discretize;
pub mod error;
pub mod functional;
pub mod linalg;
pub mod oracle;
pub mod presets;
pub mod spectral;

pub use discretize::{CostWeights, DiscreteModel, FunctionSpec, RfdeSystem, Scheme};
pub use error::{Error, Result};
pub use functional::FunctionalApprox;
pub use linalg::{Matrix, Vector};
pub use oracle::{DelayLyapunovMatrix, QuadRule};
