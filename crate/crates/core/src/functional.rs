//! Discretized complete-type functional: Lyapunov solve, evaluation, the
//! quadratic lower-bound coefficient `k1`, stability test, baselines and
//! critical delays.

use std::sync::OnceLock;

use crate::discretize::{
    build_model, build_qy, discretize, legendre_rhs_zeta, t_zeta_chi, CostWeights,
    DiscreteModel, FunctionSpec, RfdeSystem, Scheme,
};
use crate::error::{Error, Result};
use crate::linalg::{
    is_hurwitz, lyapunov_residual, norm2, schur_complement,
    schur_complement_unchecked, set_block, solve_lyapunov, sym_eigen, symmetrize, Matrix,
    SchurPath, PSD_TOL,
};

/// Build switches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BuildOptions {
    /// Chebyshev: shift `Q1`, `Q2` into `Q0` and add their integrals on the
    /// diagonal. Legendre: use the `Q_ζ,2`-modified right-hand side. With
    /// `false` both schemes use the plain node-weighted `Q_y`.
    pub split: bool,
    /// Skip the complete-type check on the weights.
    pub waive_contract: bool,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self {
            split: true,
            waive_contract: false,
        }
    }
}

/// `V(φ) ≈ vᵀ P v` in the coordinates of the model.
#[derive(Debug)]
pub struct FunctionalApprox {
    pub model: DiscreteModel,
    pub weights: CostWeights,
    pub options: BuildOptions,
    /// `P_y` (Chebyshev) or `P_ζ` (Legendre).
    pub p: Matrix,
    /// Relative Lyapunov residual of the solve,
    /// `‖PA + AᵀP + Q‖_F / max(1, ‖Q‖_F + 2‖A‖_F‖P‖_F)`.
    pub residual: f64,
    pub hurwitz: bool,
    /// Largest real part of the model spectrum.
    pub max_re: f64,
    /// The Lyapunov solution itself is PSD (before any diagonal additions).
    pub psd: bool,
    /// Smallest eigenvalue of the Lyapunov solution.
    pub lambda_min: f64,
    k1: OnceLock<Result<f64>>,
}

impl Clone for FunctionalApprox {
    fn clone(&self) -> Self {
        let k1 = OnceLock::new();
        if let Some(v) = self.k1.get() {
            let _ = k1.set(v.clone());
        }
        Self {
            model: self.model.clone(),
            weights: self.weights.clone(),
            options: self.options,
            p: self.p.clone(),
            residual: self.residual,
            hurwitz: self.hurwitz,
            max_re: self.max_re,
            psd: self.psd,
            lambda_min: self.lambda_min,
            k1,
        }
    }
}

fn relative_residual(a: &Matrix, p: &Matrix, q: &Matrix) -> f64 {
    lyapunov_residual(a, p, q) / (q.norm() + 2.0 * a.norm() * p.norm()).max(1.0)
}

fn solve_in_scheme(model: &DiscreteModel, q: &Matrix) -> Result<(Matrix, f64)> {
    let p = solve_lyapunov(&model.a, q).map_err(|e| Error::InScheme {
        scheme: model.scheme.name(),
        source: Box::new(e),
    })?;
    let res = relative_residual(&model.a, &p, q);
    Ok((p, res))
}

fn psd_test(p: &Matrix) -> Result<(bool, f64)> {
    let eig = sym_eigen(p)?;
    Ok((eig.is_psd(PSD_TOL), eig.min()))
}

/// Builds the model and solves for `P`.
pub fn build_functional(
    sys: &RfdeSystem,
    weights: &CostWeights,
    scheme: Scheme,
    order: usize,
) -> Result<FunctionalApprox> {
    build_functional_with(sys, weights, scheme, order, BuildOptions::default())
}

pub fn build_functional_with(
    sys: &RfdeSystem,
    weights: &CostWeights,
    scheme: Scheme,
    order: usize,
    options: BuildOptions,
) -> Result<FunctionalApprox> {
    if weights.n() != sys.n() {
        return Err(Error::Dimension(format!(
            "weights are {0}x{0}, system dimension is {1}",
            weights.n(),
            sys.n()
        )));
    }
    if !options.waive_contract {
        weights.check_complete_type()?;
    }
    let model = build_model(sys, scheme, order)?;
    functional_from_model(model, weights, options)
}

/// Solves on an existing model.
pub fn functional_from_model(
    model: DiscreteModel,
    weights: &CostWeights,
    options: BuildOptions,
) -> Result<FunctionalApprox> {
    let (n, order, h) = (model.n(), model.order, model.h());
    let (p, raw, residual) = match (model.scheme, options.split) {
        (Scheme::ChebCollocation, true) => {
            let shifted = CostWeights {
                q0: weights.q_tilde(h),
                q1: Matrix::zeros(n, n),
                q2: Matrix::zeros(n, n),
            };
            let (p0, res) = solve_in_scheme(&model, &build_qy(&shifted, &model.nodes)?)?;
            let mut p = p0.clone();
            for (k, (&w, &theta)) in model.nodes.weights.iter().zip(&model.nodes.nodes).enumerate() {
                let d = &weights.q1 * w + &weights.q2 * (w * (h + theta));
                let blk = p.view((k * n, k * n), (n, n)) + d;
                set_block(&mut p, k, k, &blk);
            }
            (p, p0, res)
        }
        (Scheme::ChebCollocation, false) => {
            let (p, res) = solve_in_scheme(&model, &build_qy(weights, &model.nodes)?)?;
            (p.clone(), p, res)
        }
        (Scheme::LegendreTau, true) => {
            let (p, res) = solve_in_scheme(&model, &legendre_rhs_zeta(weights, order, h))?;
            (p.clone(), p, res)
        }
        (Scheme::LegendreTau, false) => {
            let t = model.transform.as_ref().expect("Legendre model carries its transform");
            let qy = build_qy(weights, &model.nodes)?;
            let q = symmetrize(&(t.leg_to_vals.transpose() * qy * &t.leg_to_vals));
            let (p, res) = solve_in_scheme(&model, &q)?;
            (p.clone(), p, res)
        }
    };
    let (hurwitz, max_re) = is_hurwitz(&model.a, 0.0)?;
    let (psd, lambda_min) = psd_test(&raw)?;
    Ok(FunctionalApprox {
        model,
        weights: weights.clone(),
        options,
        p,
        residual,
        hurwitz,
        max_re,
        psd,
        lambda_min,
        k1: OnceLock::new(),
    })
}

impl FunctionalApprox {
    pub fn scheme(&self) -> Scheme {
        self.model.scheme
    }

    pub fn order(&self) -> usize {
        self.model.order
    }

    /// `P_y` in Chebyshev-value coordinates.
    pub fn p_y(&self) -> Matrix {
        match &self.model.transform {
            Some(t) => symmetrize(&(t.vals_to_leg.transpose() * &self.p * &t.vals_to_leg)),
            None => self.p.clone(),
        }
    }

    /// The matrix whose trailing `n×n` block belongs to `x̂ = φ(0)`:
    /// `P_y` for Chebyshev, `P_χ` for Legendre.
    pub fn p_boundary_coords(&self) -> Matrix {
        match self.model.scheme {
            Scheme::ChebCollocation => self.p.clone(),
            Scheme::LegendreTau => {
                let t = t_zeta_chi(self.model.order, self.model.n());
                symmetrize(&(t.transpose() * &self.p * t))
            }
        }
    }

    /// `V(φ) ≈ vᵀ P v` with the scheme's own discretization of `φ`.
    pub fn evaluate(&self, phi: &FunctionSpec) -> Result<f64> {
        let v = discretize(phi, &self.model)?;
        Ok(v.dot(&(&self.p * &v)))
    }

    /// `k1 = λ_min(P/P_zz)`, cached. Requires a PSD `P`.
    pub fn k1(&self) -> Result<f64> {
        self.k1
            .get_or_init(|| {
                let p = self.p_boundary_coords();
                let split = self.model.n() * self.model.order;
                match schur_complement(&p, split) {
                    Ok(s) => Ok(sym_eigen(&s)?.min()),
                    Err(Error::Precondition(msg)) => Err(Error::Precondition(format!(
                        "{msg}; k1 is only defined for a positive semidefinite functional \
                         (max Re σ(A) = {:.3e})",
                        self.max_re
                    ))),
                    Err(e) => Err(e),
                }
            })
            .clone()
    }

    /// `λ_min` of the Schur complement without the PSD check; may be negative
    /// past the stability boundary.
    pub fn k1_unchecked(&self) -> Result<f64> {
        let p = self.p_boundary_coords();
        let split = self.model.n() * self.model.order;
        let s = schur_complement_unchecked(&p, split, SchurPath::Auto)?;
        Ok(sym_eigen(&s)?.min())
    }

    /// `λ_min` of the history block `P_zz`; turns negative once the model
    /// loses the Hurwitz property.
    pub fn lambda_min_zz(&self) -> Result<f64> {
        let p = self.p_boundary_coords();
        let split = self.model.n() * self.model.order;
        let zz = symmetrize(&p.view((0, 0), (split, split)).into_owned());
        Ok(sym_eigen(&zz)?.min())
    }

    /// PSD of the Lyapunov solution, which for `x̂`-positive-definite `Q`
    /// is equivalent to a Hurwitz model.
    pub fn stability_by_psd(&self) -> bool {
        self.psd
    }
}

/// Both closed-form lower-bound coefficients from the literature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Baselines {
    /// `min{λ_min(Q0)/(2‖A0‖+‖A1‖), λ_min(Q1)/‖A1‖}`; the second branch is
    /// `+∞` when `A1 = 0`.
    pub norm_ratio: f64,
    /// Largest `α` with `blkdiag(Q0,Q1) + α[[A0ᵀ+A0, A1],[A1ᵀ, 0]] ⪰ 0`.
    pub alpha: f64,
    pub delay_free: bool,
}

pub fn baseline_k1(sys: &RfdeSystem, weights: &CostWeights) -> Result<Baselines> {
    let n = sys.n();
    if weights.n() != n {
        return Err(Error::Dimension(format!(
            "weights are {0}x{0}, system dimension is {n}",
            weights.n()
        )));
    }
    let (a0, a1) = (sys.a0(), sys.a1());
    let l0 = sym_eigen(&weights.q0)?.min();
    let l1 = sym_eigen(&weights.q1)?.min();
    let n1 = norm2(a1);
    let delay_free = n1 == 0.0;
    let first = l0 / (2.0 * norm2(a0) + n1);
    let second = if delay_free { f64::INFINITY } else { l1 / n1 };

    let mut base = Matrix::zeros(2 * n, 2 * n);
    base.view_mut((0, 0), (n, n)).copy_from(&weights.q0);
    base.view_mut((n, n), (n, n)).copy_from(&weights.q1);
    let mut k = Matrix::zeros(2 * n, 2 * n);
    k.view_mut((0, 0), (n, n)).copy_from(&(a0 + a0.transpose()));
    k.view_mut((0, n), (n, n)).copy_from(a1);
    k.view_mut((n, 0), (n, n)).copy_from(&a1.transpose());
    let feasible = |alpha: f64| -> Result<bool> {
        Ok(sym_eigen(&(&base + &k * alpha))?.min() >= -1e-12 * base.norm().max(1.0))
    };

    let alpha = if !feasible(0.0)? {
        0.0
    } else {
        let mut hi = sym_eigen(&base)?.min().max(f64::MIN_POSITIVE) / norm2(&k).max(1e-300);
        let mut doublings = 0;
        while feasible(hi)? && doublings < 200 {
            hi *= 2.0;
            doublings += 1;
        }
        if doublings == 200 {
            f64::INFINITY
        } else {
            let mut lo = 0.0;
            for _ in 0..200 {
                if hi - lo <= 1e-8 * hi.clamp(1e-300, 1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                if feasible(mid)? {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            lo
        }
    };
    Ok(Baselines {
        norm_ratio: first.min(second),
        alpha,
        delay_free,
    })
}

/// Largest real part of the model spectrum at delay `h`.
pub fn spectral_margin(sys: &RfdeSystem, scheme: Scheme, order: usize, h: f64) -> Result<f64> {
    let model = build_model(&sys.with_delay(h)?, scheme, order)?;
    Ok(is_hurwitz(&model.a, 0.0)?.1)
}

/// Smallest delay in `[lo, hi]` where the model stops being Hurwitz,
/// bisected to width `tol`.
pub fn critical_delay(
    sys: &RfdeSystem,
    scheme: Scheme,
    order: usize,
    bracket: (f64, f64),
    tol: f64,
) -> Result<f64> {
    let (mut lo, mut hi) = bracket;
    if !(lo > 0.0 && hi > lo && tol > 0.0) {
        return Err(Error::Input(format!(
            "need 0 < h_lo < h_hi and tol > 0, got [{lo}, {hi}], tol {tol}"
        )));
    }
    let m_lo = spectral_margin(sys, scheme, order, lo)?;
    let m_hi = spectral_margin(sys, scheme, order, hi)?;
    if !(m_lo < 0.0 && m_hi >= 0.0) {
        return Err(Error::Input(format!(
            "bracket [{lo}, {hi}] does not straddle the stability boundary \
             (max Re σ = {m_lo:.3e} at h_lo, {m_hi:.3e} at h_hi)"
        )));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if spectral_margin(sys, scheme, order, mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Legendre tau approximations of the three splitting terms with shifts
/// `Q̃1 = Q1`, `Q̃2 = Q2`: weights `(Q0 + Q1 + hQ2, 0, 0)`, `(−Q1, Q1, 0)`
/// and `(−hQ2, 0, Q2)`.
pub fn split_components(
    sys: &RfdeSystem,
    weights: &CostWeights,
    order: usize,
) -> Result<[FunctionalApprox; 3]> {
    let (n, h) = (sys.n(), sys.h());
    let z = Matrix::zeros(n, n);
    let parts = [
        CostWeights { q0: weights.q_tilde(h), q1: z.clone(), q2: z.clone() },
        CostWeights { q0: -&weights.q1, q1: weights.q1.clone(), q2: z.clone() },
        CostWeights { q0: &weights.q2 * -h, q1: z.clone(), q2: weights.q2.clone() },
    ];
    let model = build_model(sys, Scheme::LegendreTau, order)?;
    let options = BuildOptions { split: true, waive_contract: true };
    let [p0, p1, p2] = parts;
    Ok([
        functional_from_model(model.clone(), &p0, options)?,
        functional_from_model(model.clone(), &p1, options)?,
        functional_from_model(model, &p2, options)?,
    ])
}

/// Closed-form Legendre-coordinate solution for the `(−Q̃1, Q̃1, 0)` term:
/// `diag((h/2)(2/(2k+1)) for k < N, then 0) ⊗ Q̃1`.
pub fn p_zeta_v1(q1: &Matrix, order: usize, h: f64) -> Matrix {
    let mut d = Matrix::zeros(order + 1, order + 1);
    for k in 0..order {
        d[(k, k)] = h / (2 * k + 1) as f64;
    }
    d.kronecker(q1)
}

/// Closed-form Legendre-coordinate solution for the `(−hQ̃2, 0, Q̃2)` term,
/// block tridiagonal in the first `N` degrees.
pub fn p_zeta_v2(q2: &Matrix, order: usize, h: f64) -> Matrix {
    let c = (h / 2.0) * (h / 2.0);
    let mut d = Matrix::zeros(order + 1, order + 1);
    for j in 0..order {
        let base = c * 2.0 / (2 * j + 1) as f64;
        d[(j, j)] = base;
        if j + 1 < order {
            let k = j + 1;
            d[(j, k)] = base * k as f64 / (2 * k + 1) as f64;
        }
        if j >= 1 {
            let k = j - 1;
            d[(j, k)] = base * (k + 1) as f64 / (2 * k + 1) as f64;
        }
    }
    d.kronecker(q2)
}
