//! Approximating ODE matrices for the two spectral schemes, Lyapunov
//! right-hand sides, and discretization of argument functions.
//!
//! Coordinate vectors are stacks of `N + 1` blocks of size `n`, indexed by
//! node (Chebyshev collocation) or Legendre degree (Legendre tau). Every
//! Kronecker product is `(node structure) ⊗ I_n`.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, block, is_hurwitz, kron_identity, set_block, sym_eigen, Matrix, Vector,
};
use crate::spectral::{
    cheb_diffmat, cheb_nodes, gauss_legendre, legendre_vals, to_reference, LegChebTransform,
    NodeKind, NodeSet,
};

/// `x'(t) = A0 x(t) + A1 x(t − h)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RfdeSystem {
    a0: Matrix,
    a1: Matrix,
    h: f64,
}

impl RfdeSystem {
    pub fn new(a0: Matrix, a1: Matrix, h: f64) -> Result<Self> {
        if a0.nrows() != a0.ncols() || a0.nrows() == 0 {
            return Err(Error::Dimension(format!(
                "A0 must be square and non-empty, got {}x{}",
                a0.nrows(),
                a0.ncols()
            )));
        }
        if a1.shape() != a0.shape() {
            return Err(Error::Dimension(format!(
                "A1 is {}x{}, expected {}x{}",
                a1.nrows(),
                a1.ncols(),
                a0.nrows(),
                a0.ncols()
            )));
        }
        if a0.iter().chain(a1.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Input("system matrices must be finite".into()));
        }
        if !(h > 0.0 && h.is_finite()) {
            return Err(Error::Input(format!("delay must be positive and finite, got {h}")));
        }
        Ok(Self { a0, a1, h })
    }

    /// Scalar system `x' = a0 x + a1 x(t − h)`.
    pub fn scalar(a0: f64, a1: f64, h: f64) -> Result<Self> {
        Self::new(
            Matrix::from_element(1, 1, a0),
            Matrix::from_element(1, 1, a1),
            h,
        )
    }

    pub fn n(&self) -> usize {
        self.a0.nrows()
    }

    pub fn a0(&self) -> &Matrix {
        &self.a0
    }

    pub fn a1(&self) -> &Matrix {
        &self.a1
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    /// Same coefficients, different delay.
    pub fn with_delay(&self, h: f64) -> Result<Self> {
        Self::new(self.a0.clone(), self.a1.clone(), h)
    }
}

/// Weights `Q0, Q1, Q2` of the prescribed functional derivative
/// `−xᵀ(t)Q0x(t) − xᵀ(t−h)Q1x(t−h) − ∫ xᵀ(t+θ)Q2x(t+θ)dθ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostWeights {
    pub q0: Matrix,
    pub q1: Matrix,
    pub q2: Matrix,
}

impl CostWeights {
    /// Checks shape and symmetry (to `1e-12` relative) only.
    pub fn new(q0: Matrix, q1: Matrix, q2: Matrix) -> Result<Self> {
        let n = q0.nrows();
        for (name, q) in [("Q0", &q0), ("Q1", &q1), ("Q2", &q2)] {
            if q.shape() != (n, n) || n == 0 {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {n}x{n}",
                    q.nrows(),
                    q.ncols()
                )));
            }
            if q.iter().any(|v| !v.is_finite()) {
                return Err(Error::Input(format!("{name} has non-finite entries")));
            }
            if asymmetry(q) > 1e-12 {
                return Err(Error::Input(format!("{name} must be symmetric")));
            }
        }
        Ok(Self { q0, q1, q2 })
    }

    /// `Q0 = Q1 = I_n`, `Q2 = 0`.
    pub fn identity(n: usize) -> Self {
        Self {
            q0: Matrix::identity(n, n),
            q1: Matrix::identity(n, n),
            q2: Matrix::zeros(n, n),
        }
    }

    /// Scalar weights.
    pub fn scalar(q0: f64, q1: f64, q2: f64) -> Self {
        Self {
            q0: Matrix::from_element(1, 1, q0),
            q1: Matrix::from_element(1, 1, q1),
            q2: Matrix::from_element(1, 1, q2),
        }
    }

    pub fn n(&self) -> usize {
        self.q0.nrows()
    }

    /// `Q0, Q1 ≻ 0` and `Q2 ⪰ 0`.
    pub fn check_complete_type(&self) -> Result<()> {
        for (name, q, strict) in [("Q0", &self.q0, true), ("Q1", &self.q1, true), ("Q2", &self.q2, false)] {
            let eig = sym_eigen(q)?;
            let scale = eig.max().abs().max(1.0);
            let ok = if strict {
                eig.min() > 1e-12 * scale
            } else {
                eig.min() >= -1e-12 * scale
            };
            if !ok {
                let kind = if strict { "positive definite" } else { "positive semidefinite" };
                return Err(Error::Precondition(format!(
                    "{name} must be {kind} (λ_min = {:.3e})",
                    eig.min()
                )));
            }
        }
        Ok(())
    }

    /// `Q̃ = Q0 + Q1 + h·Q2`.
    pub fn q_tilde(&self, h: f64) -> Matrix {
        &self.q0 + &self.q1 + &self.q2 * h
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            q0: &self.q0 * c,
            q1: &self.q1 * c,
            q2: &self.q2 * c,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    ChebCollocation,
    LegendreTau,
}

impl Scheme {
    pub fn name(self) -> &'static str {
        match self {
            Scheme::ChebCollocation => "cheb",
            Scheme::LegendreTau => "legendre",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cheb" | "chebyshev" | "collocation" => Ok(Scheme::ChebCollocation),
            "legendre" | "leg" | "tau" => Ok(Scheme::LegendreTau),
            other => Err(Error::Input(format!(
                "unknown scheme '{other}' (expected cheb or legendre)"
            ))),
        }
    }
}

/// An approximating ODE `d/dt v = A v` of order `N`.
///
/// `a` is `A_y` (values at Chebyshev nodes) for [`Scheme::ChebCollocation`]
/// and `A_ζ` (Legendre coefficients) for [`Scheme::LegendreTau`].
#[derive(Debug, Clone)]
pub struct DiscreteModel {
    pub scheme: Scheme,
    pub order: usize,
    pub system: RfdeSystem,
    /// Chebyshev nodes of `[−h, 0]` with Clenshaw–Curtis weights.
    pub nodes: NodeSet,
    pub a: Matrix,
    /// Legendre ↔ Chebyshev-value transform (Legendre tau only).
    pub transform: Option<LegChebTransform>,
}

impl DiscreteModel {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn dim(&self) -> usize {
        self.n() * (self.order + 1)
    }

    pub fn h(&self) -> f64 {
        self.system.h()
    }

    fn legendre_transform(&self) -> Result<&LegChebTransform> {
        match (&self.transform, self.scheme) {
            (Some(t), Scheme::LegendreTau) => Ok(t),
            _ => Err(Error::Input("operation requires a Legendre tau model".into())),
        }
    }

    /// `A_y` in Chebyshev-value coordinates. For Legendre tau this is the
    /// similarity transform `T_yζ A_ζ T_ζy`.
    pub fn a_values(&self) -> Result<Matrix> {
        match self.scheme {
            Scheme::ChebCollocation => Ok(self.a.clone()),
            Scheme::LegendreTau => {
                let t = self.legendre_transform()?;
                Ok(&t.leg_to_vals * &self.a * &t.vals_to_leg)
            }
        }
    }
}

/// Builds the model of the requested scheme.
pub fn build_model(sys: &RfdeSystem, scheme: Scheme, order: usize) -> Result<DiscreteModel> {
    match scheme {
        Scheme::ChebCollocation => build_cheb_model(sys, order),
        Scheme::LegendreTau => build_leg_model(sys, order),
    }
}

/// Chebyshev collocation: the first `N` rows of the differentiation matrix
/// (⊗ `I_n`) over the boundary row `[A1, 0, …, 0, A0]`.
pub fn build_cheb_model(sys: &RfdeSystem, order: usize) -> Result<DiscreteModel> {
    let (n, h) = (sys.n(), sys.h());
    let nodes = cheb_nodes(order, h)?;
    let mut a = kron_identity(&cheb_diffmat(order, h)?, n);
    a.rows_mut(n * order, n).fill(0.0);
    set_block(&mut a, order, 0, sys.a1());
    set_block(&mut a, order, order, sys.a0());
    Ok(DiscreteModel {
        scheme: Scheme::ChebCollocation,
        order,
        system: sys.clone(),
        nodes,
        a,
        transform: None,
    })
}

/// Legendre tau: `(2/h)(2j+1) I_n` above the diagonal where `j + k` is odd,
/// last block row `A0 + (−1)^k A1 − (2/h)·k(k+1)/2·I_n`.
pub fn build_leg_model(sys: &RfdeSystem, order: usize) -> Result<DiscreteModel> {
    let (n, h) = (sys.n(), sys.h());
    let nodes = cheb_nodes(order, h)?;
    let mut scalar = Matrix::zeros(order + 1, order + 1);
    for j in 0..order {
        for k in ((j + 1)..=order).step_by(2) {
            scalar[(j, k)] = (2.0 / h) * (2 * j + 1) as f64;
        }
    }
    for k in 0..=order {
        scalar[(order, k)] = -(2.0 / h) * (k * (k + 1)) as f64 / 2.0;
    }
    let mut a = kron_identity(&scalar, n);
    for k in 0..=order {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        let b = block(&a, order, k, n) + sys.a0() + sys.a1() * sign;
        set_block(&mut a, order, k, &b);
    }
    Ok(DiscreteModel {
        scheme: Scheme::LegendreTau,
        order,
        system: sys.clone(),
        nodes,
        a,
        transform: Some(LegChebTransform::new(order, n)?),
    })
}

/// `blkdiag(Q1, 0, …, 0, Q0) + blkdiag(w_k Q2)` on Chebyshev nodes carrying
/// Clenshaw–Curtis weights.
pub fn build_qy(weights: &CostWeights, nodes: &NodeSet) -> Result<Matrix> {
    if nodes.kind != NodeKind::GaussLobattoChebyshev {
        return Err(Error::Input("Q_y needs Chebyshev nodes with Clenshaw–Curtis weights".into()));
    }
    let n = weights.n();
    let order = nodes.order;
    let mut q = Matrix::zeros(n * (order + 1), n * (order + 1));
    for (k, &w) in nodes.weights.iter().enumerate() {
        set_block(&mut q, k, k, &(&weights.q2 * w));
    }
    let first = block(&q, 0, 0, n) + &weights.q1;
    set_block(&mut q, 0, 0, &first);
    let last = block(&q, order, order, n) + &weights.q0;
    set_block(&mut q, order, order, &last);
    Ok(q)
}

/// `Q_ζ,2 = diag((h/2)(2/(2k+1)) for k < N, then h) ⊗ Q2`.
pub fn q_zeta2(weights: &CostWeights, order: usize, h: f64) -> Matrix {
    let n = weights.n();
    let mut q = Matrix::zeros(n * (order + 1), n * (order + 1));
    for k in 0..=order {
        let w = if k < order { h / (2 * k + 1) as f64 } else { h };
        set_block(&mut q, k, k, &(&weights.q2 * w));
    }
    q
}

/// Right-hand side of the Legendre-coordinate Lyapunov equation,
/// `T_yζᵀ blkdiag(Q1, 0, …, 0, Q0) T_yζ + Q_ζ,2`. Only the endpoint rows of
/// `T_yζ` enter, so block `(j, k)` is `(−1)^(j+k) Q1 + Q0` plus the diagonal.
pub fn legendre_rhs_zeta(weights: &CostWeights, order: usize, h: f64) -> Matrix {
    let n = weights.n();
    let mut q = q_zeta2(weights, order, h);
    let alt = &weights.q0 - &weights.q1;
    let same = &weights.q0 + &weights.q1;
    for j in 0..=order {
        for k in 0..=order {
            let b = block(&q, j, k, n) + if (j + k) % 2 == 0 { &same } else { &alt };
            set_block(&mut q, j, k, &b);
        }
    }
    q
}

/// `Q_y = blkdiag(Q1, 0, …, 0, Q0) + T_ζyᵀ Q_ζ,2 T_ζy` in Chebyshev-value
/// coordinates, for Legendre tau models.
pub fn build_qy_legendre(weights: &CostWeights, model: &DiscreteModel) -> Result<Matrix> {
    let t = model.legendre_transform()?;
    let n = weights.n();
    if n != model.n() {
        return Err(Error::Dimension(format!(
            "weights are {n}x{n}, system dimension is {}",
            model.n()
        )));
    }
    let order = model.order;
    let mut q = t.vals_to_leg.transpose() * q_zeta2(weights, order, model.h()) * &t.vals_to_leg;
    let first = block(&q, 0, 0, n) + &weights.q1;
    set_block(&mut q, 0, 0, &first);
    let last = block(&q, order, order, n) + &weights.q0;
    set_block(&mut q, order, order, &last);
    Ok(crate::linalg::symmetrize(&q))
}

/// An argument function `φ: [−h, 0] → Rⁿ`.
#[derive(Clone)]
pub enum FunctionSpec {
    Constant(Vec<f64>),
    /// Monomial coefficients in `θ`: `φ(θ) = Σ_m c_m θ^m`.
    Polynomial(Vec<Vec<f64>>),
    /// Values at the Chebyshev nodes `θ_0 = −h, …, θ_N = 0`.
    Samples(Vec<Vec<f64>>),
    Callable {
        n: usize,
        f: Arc<dyn Fn(f64) -> Vec<f64> + Send + Sync>,
    },
}

impl fmt::Debug for FunctionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FunctionSpec::Constant(c) => f.debug_tuple("Constant").field(c).finish(),
            FunctionSpec::Polynomial(c) => f.debug_tuple("Polynomial").field(c).finish(),
            FunctionSpec::Samples(s) => f.debug_tuple("Samples").field(s).finish(),
            FunctionSpec::Callable { n, .. } => f.debug_struct("Callable").field("n", n).finish(),
        }
    }
}

impl FunctionSpec {
    pub fn callable(n: usize, f: impl Fn(f64) -> Vec<f64> + Send + Sync + 'static) -> Self {
        FunctionSpec::Callable { n, f: Arc::new(f) }
    }

    /// Dimension of the values, `None` for an empty polynomial or sample set.
    pub fn n(&self) -> Option<usize> {
        match self {
            FunctionSpec::Constant(c) => Some(c.len()),
            FunctionSpec::Polynomial(c) | FunctionSpec::Samples(c) => c.first().map(Vec::len),
            FunctionSpec::Callable { n, .. } => Some(*n),
        }
    }

    fn check_dim(&self, n: usize) -> Result<()> {
        let ok = match self {
            FunctionSpec::Constant(c) => c.len() == n,
            FunctionSpec::Polynomial(c) | FunctionSpec::Samples(c) => {
                !c.is_empty() && c.iter().all(|v| v.len() == n)
            }
            FunctionSpec::Callable { n: m, .. } => *m == n,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Dimension(format!(
                "function values must have dimension {n}"
            )))
        }
    }

    /// Point evaluation; not available for [`FunctionSpec::Samples`].
    pub fn eval(&self, theta: f64) -> Result<Vector> {
        match self {
            FunctionSpec::Constant(c) => Ok(Vector::from_column_slice(c)),
            FunctionSpec::Polynomial(coeffs) => {
                let n = coeffs.first().map_or(0, Vec::len);
                let mut acc = Vector::zeros(n);
                for c in coeffs.iter().rev() {
                    acc = acc * theta + Vector::from_column_slice(c);
                }
                Ok(acc)
            }
            FunctionSpec::Samples(_) => Err(Error::Input(
                "sampled functions can only be discretized on their own nodes".into(),
            )),
            FunctionSpec::Callable { n, f } => {
                let v = f(theta);
                if v.len() != *n {
                    return Err(Error::Dimension(format!(
                        "callable returned {} values, expected {n}",
                        v.len()
                    )));
                }
                Ok(Vector::from_vec(v))
            }
        }
    }
}

/// Stacks `φ(θ_k)` at the Chebyshev nodes.
pub fn discretize_cheb(phi: &FunctionSpec, model: &DiscreteModel) -> Result<Vector> {
    let n = model.n();
    phi.check_dim(n)?;
    let count = model.order + 1;
    let mut y = Vector::zeros(n * count);
    match phi {
        FunctionSpec::Samples(s) => {
            if s.len() != count {
                return Err(Error::Input(format!(
                    "expected {count} samples, got {}",
                    s.len()
                )));
            }
            for (k, v) in s.iter().enumerate() {
                y.rows_mut(k * n, n).copy_from_slice(v);
            }
        }
        _ => {
            for (k, &theta) in model.nodes.nodes.iter().enumerate() {
                y.rows_mut(k * n, n).copy_from(&phi.eval(theta)?);
            }
        }
    }
    Ok(y)
}

/// Legendre coordinates: the first `N` Legendre-series coefficients of `φ`
/// on `[−h, 0]`, and `ζ^N = φ(0) − Σ_{k<N} ζ^k` so that the approximating
/// polynomial matches `φ(0)`.
pub fn discretize_leg(phi: &FunctionSpec, model: &DiscreteModel) -> Result<Vector> {
    let t = model.legendre_transform()?;
    let (n, order, h) = (model.n(), model.order, model.h());
    phi.check_dim(n)?;
    if let FunctionSpec::Samples(_) = phi {
        // The degree-N interpolant is exactly represented; its endpoint
        // correction reproduces its own top coefficient.
        let y = discretize_cheb(phi, model)?;
        return Ok(&t.vals_to_leg * y);
    }

    let rule = gauss_legendre(2 * order + 8, h)?;
    let reference = rule.reference_nodes();
    let pk = legendre_vals(order, &reference)?;
    let mut zeta = Vector::zeros(n * (order + 1));
    for (i, (&theta, &w)) in rule.nodes.iter().zip(&rule.weights).enumerate() {
        // ∫_{−1}^{1} dϑ = (2/h) ∫_{−h}^{0} dθ
        let value = phi.eval(theta)? * (w * 2.0 / h);
        for k in 0..order {
            let c = 0.5 * (2 * k + 1) as f64 * pk[(i, k)];
            let mut blk = zeta.rows_mut(k * n, n);
            blk.axpy(c, &value, 1.0);
        }
    }
    let mut last = phi.eval(0.0)?;
    for k in 0..order {
        last -= zeta.rows(k * n, n);
    }
    zeta.rows_mut(order * n, n).copy_from(&last);
    Ok(zeta)
}

/// Scheme-native discretization of `φ`.
pub fn discretize(phi: &FunctionSpec, model: &DiscreteModel) -> Result<Vector> {
    match model.scheme {
        Scheme::ChebCollocation => discretize_cheb(phi, model),
        Scheme::LegendreTau => discretize_leg(phi, model),
    }
}

/// The piecewise approximation with a discontinuous end point: the
/// degree-`(N−1)` Legendre truncation for `θ < 0` and `x̂ = Σ_k ζ^k` at
/// `θ = 0`.
pub fn eval_discontinuous_endpoint(zeta: &Vector, model: &DiscreteModel, theta: f64) -> Result<Vector> {
    let (n, order, h) = (model.n(), model.order, model.h());
    if zeta.len() != n * (order + 1) {
        return Err(Error::Dimension(format!(
            "coordinate vector has length {}, expected {}",
            zeta.len(),
            n * (order + 1)
        )));
    }
    if !(-h..=0.0).contains(&theta) {
        return Err(Error::Range(format!("θ = {theta} outside [−{h}, 0]")));
    }
    let mut out = Vector::zeros(n);
    if theta == 0.0 {
        for k in 0..=order {
            out += zeta.rows(k * n, n);
        }
        return Ok(out);
    }
    let pk = legendre_vals(order, &[to_reference(theta, h)])?;
    for k in 0..order {
        out.axpy(pk[(0, k)], &zeta.rows(k * n, n), 1.0);
    }
    Ok(out)
}

/// `T_χζ`: keeps `ζ^0..ζ^{N−1}` and replaces the last block by
/// `x̂ = Σ_k ζ^k`.
pub fn t_chi_zeta(order: usize, n: usize) -> Matrix {
    let mut t = Matrix::identity(n * (order + 1), n * (order + 1));
    for k in 0..order {
        set_block(&mut t, order, k, &Matrix::identity(n, n));
    }
    t
}

/// `T_ζχ = T_χζ⁻¹`, whose last block row is `[−I, …, −I, I]`.
pub fn t_zeta_chi(order: usize, n: usize) -> Matrix {
    let mut t = Matrix::identity(n * (order + 1), n * (order + 1));
    for k in 0..order {
        set_block(&mut t, order, k, &(-Matrix::identity(n, n)));
    }
    t
}

/// Hurwitz test of the leading `nN×nN` block of the model matrix in
/// coordinates `(v, x̂)`: the Chebyshev values themselves for collocation,
/// `χ` for Legendre tau.
pub fn condition1_check(model: &DiscreteModel) -> Result<(bool, f64)> {
    let (n, order) = (model.n(), model.order);
    let p = n * order;
    let a = match model.scheme {
        Scheme::ChebCollocation => model.a.clone(),
        Scheme::LegendreTau => t_chi_zeta(order, n) * &model.a * t_zeta_chi(order, n),
    };
    let lead = a.view((0, 0), (p, p)).into_owned();
    is_hurwitz(&lead, 0.0)
}
