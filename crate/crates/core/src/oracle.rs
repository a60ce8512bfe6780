//! Quadrature route to `P_y`: the delay Lyapunov matrix `Ψ(τ; Q̃)`, the
//! kernel functions of the complete-type functional, and their assembly by
//! Clenshaw–Curtis or Gauss quadrature.

use std::fmt;

use crate::discretize::{CostWeights, RfdeSystem};
use crate::error::{Error, Result};
use crate::linalg::{
    asymmetry, expm, schur_complement, schur_complement_unchecked, set_block, sym_eigen,
    symmetrize, Matrix, SchurPath, Vector,
};
use crate::spectral::{cheb_nodes, gauss_legendre};

/// Boundary systems with a larger 2-norm condition number count as singular.
const MAX_BOUNDARY_COND: f64 = 1e12;

/// `Ψ(τ)` on `[−h, h]`, from `Y(τ) = Ψ(τ)`, `Z(τ) = Ψ(τ − h)` on `[0, h]`:
///
/// ```text
/// Y' = Y A0 + Z A1,   Z' = −A0ᵀ Z − A1ᵀ Y,
/// Z(h) = Y(0),        Y(0)A0 + Z(0)A1 + A0ᵀZ(h) + A1ᵀY(h) = −Q̃.
/// ```
#[derive(Clone)]
pub struct DelayLyapunovMatrix {
    sys: RfdeSystem,
    q_tilde: Matrix,
    /// Generator of the `2n²` linear ODE for `[vec Y; vec Z]`.
    generator: Matrix,
    initial: Vector,
    psi0: Matrix,
    cond: f64,
}

impl fmt::Debug for DelayLyapunovMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DelayLyapunovMatrix")
            .field("n", &self.sys.n())
            .field("h", &self.sys.h())
            .field("psi0", &self.psi0)
            .field("cond", &self.cond)
            .finish()
    }
}

fn vec_of(m: &Matrix) -> Vector {
    Vector::from_column_slice(m.as_slice())
}

fn unvec(v: &[f64], n: usize) -> Matrix {
    Matrix::from_column_slice(n, n, v)
}

impl DelayLyapunovMatrix {
    pub fn build(sys: &RfdeSystem, q_tilde: &Matrix) -> Result<Self> {
        let (n, h) = (sys.n(), sys.h());
        if q_tilde.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "Q̃ is {}x{}, expected {n}x{n}",
                q_tilde.nrows(),
                q_tilde.ncols()
            )));
        }
        if asymmetry(q_tilde) > 1e-12 {
            return Err(Error::Input("Q̃ must be symmetric".into()));
        }
        let m = n * n;
        let id = Matrix::identity(n, n);
        let (a0t, a1t) = (sys.a0().transpose(), sys.a1().transpose());

        // vec(X A) = (Aᵀ ⊗ I) vec X, vec(A X) = (I ⊗ A) vec X.
        let mut generator = Matrix::zeros(2 * m, 2 * m);
        generator.view_mut((0, 0), (m, m)).copy_from(&a0t.kronecker(&id));
        generator.view_mut((0, m), (m, m)).copy_from(&a1t.kronecker(&id));
        generator.view_mut((m, 0), (m, m)).copy_from(&(-id.kronecker(&a1t)));
        generator.view_mut((m, m), (m, m)).copy_from(&(-id.kronecker(&a0t)));

        let phi = expm(&(&generator * h))?;
        let (phi_y, phi_z) = (phi.rows(0, m), phi.rows(m, m));

        let mut system = Matrix::zeros(2 * m, 2 * m);
        let mut rhs = Vector::zeros(2 * m);
        // Z(h) − Y(0) = 0
        system.rows_mut(0, m).copy_from(&phi_z);
        for i in 0..m {
            system[(i, i)] -= 1.0;
        }
        // Y(0)A0 + Z(0)A1 + A0ᵀZ(h) + A1ᵀY(h) = −Q̃
        let mut alg = id.kronecker(&a0t) * phi_z + id.kronecker(&a1t) * phi_y;
        {
            let mut left = alg.columns_mut(0, m);
            left += sys.a0().transpose().kronecker(&id);
        }
        {
            let mut right = alg.columns_mut(m, m);
            right += sys.a1().transpose().kronecker(&id);
        }
        system.rows_mut(m, m).copy_from(&alg);
        rhs.rows_mut(m, m).copy_from(&(-vec_of(q_tilde)));

        let sv = system.clone().singular_values();
        let (smax, smin) = sv.iter().fold((0.0_f64, f64::INFINITY), |(a, b), &s| (a.max(s), b.min(s)));
        let cond = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(cond <= MAX_BOUNDARY_COND) {
            return Err(Error::LyapunovCondition { cond });
        }
        let mut initial = system
            .lu()
            .solve(&rhs)
            .ok_or(Error::LyapunovCondition { cond: f64::INFINITY })?;
        let psi0 = symmetrize(&unvec(&initial.as_slice()[..m], n));
        initial.rows_mut(0, m).copy_from(&vec_of(&psi0));
        Ok(Self {
            sys: sys.clone(),
            q_tilde: q_tilde.clone(),
            generator,
            initial,
            psi0,
            cond,
        })
    }

    /// `Ψ(·; Q0 + Q1 + hQ2)`.
    pub fn for_weights(sys: &RfdeSystem, weights: &CostWeights) -> Result<Self> {
        Self::build(sys, &weights.q_tilde(sys.h()))
    }

    pub fn system(&self) -> &RfdeSystem {
        &self.sys
    }

    pub fn q_tilde(&self) -> &Matrix {
        &self.q_tilde
    }

    /// Condition number of the boundary linear system.
    pub fn boundary_cond(&self) -> f64 {
        self.cond
    }

    pub fn psi0(&self) -> &Matrix {
        &self.psi0
    }

    /// `Ψ(τ)` for `τ ∈ [−h, h]`; negative arguments by `Ψ(−τ)ᵀ`.
    pub fn eval(&self, tau: f64) -> Result<Matrix> {
        let h = self.sys.h();
        let slack = 1e-12 * h;
        if !(tau.abs() <= h + slack) {
            return Err(Error::Range(format!("τ = {tau} outside [−{h}, {h}]")));
        }
        let t = tau.abs().min(h);
        let psi = if t == 0.0 {
            self.psi0.clone()
        } else {
            let m = self.sys.n() * self.sys.n();
            let state = expm(&(&self.generator * t))? * &self.initial;
            unvec(&state.as_slice()[..m], self.sys.n())
        };
        Ok(if tau < 0.0 { psi.transpose() } else { psi })
    }

    /// `max ‖Ψ(−τ) − Ψ(τ)ᵀ‖_F` over the grid, computed from the propagated
    /// `Z` component rather than by reflection.
    pub fn symmetry_residual(&self, grid: &[f64]) -> Result<f64> {
        let (n, h) = (self.sys.n(), self.sys.h());
        let m = n * n;
        let mut worst = 0.0_f64;
        for &tau in grid {
            let t = tau.abs();
            if t > h + 1e-12 * h {
                return Err(Error::Range(format!("τ = {tau} outside [−{h}, {h}]")));
            }
            // Z(h − t) = Ψ(−t) must equal Y(t)ᵀ = Ψ(t)ᵀ.
            let y = expm(&(&self.generator * t))? * &self.initial;
            let z = expm(&(&self.generator * (h - t).max(0.0)))? * &self.initial;
            let psi_t = unvec(&y.as_slice()[..m], n);
            let psi_neg = unvec(&z.as_slice()[m..], n);
            worst = worst.max((psi_neg - psi_t.transpose()).norm());
        }
        Ok(worst)
    }

    /// `max ‖Ψ'(τ) − Ψ(τ)A0 − Ψ(τ − h)A1‖_F` over the interior of the grid,
    /// with central differences of step `1e-5·h`.
    pub fn dynamic_residual(&self, grid: &[f64]) -> Result<f64> {
        let h = self.sys.h();
        let step = 1e-5 * h;
        let mut worst = 0.0_f64;
        for &tau in grid {
            if tau - step <= 0.0 || tau + step >= h {
                continue;
            }
            let d = (self.eval(tau + step)? - self.eval(tau - step)?) / (2.0 * step);
            let r = d - self.eval(tau)? * self.sys.a0() - self.eval(tau - h)? * self.sys.a1();
            worst = worst.max(r.norm());
        }
        Ok(worst)
    }

    /// `‖Ψ(0)A0 + A0ᵀΨ(0) + Ψ(−h)A1 + A1ᵀΨ(−h)ᵀ + Q̃‖_F`.
    pub fn algebraic_residual(&self) -> Result<f64> {
        let (a0, a1) = (self.sys.a0(), self.sys.a1());
        let p0 = &self.psi0;
        let pm = self.eval(-self.sys.h())?;
        let r = p0 * a0 + a0.transpose() * p0 + &pm * a1 + a1.transpose() * pm.transpose() + &self.q_tilde;
        Ok(r.norm())
    }

    /// Scale for the dynamic residual: `‖Ψ(0)‖_F·max(1, ‖A0‖_F + ‖A1‖_F)`.
    pub fn dynamic_scale(&self) -> f64 {
        self.psi0.norm() * (self.sys.a0().norm() + self.sys.a1().norm()).max(1.0)
    }

    /// `(Ψ(θ_j − θ_k))_{jk}`.
    pub fn block_matrix(&self, nodes: &[f64]) -> Result<Matrix> {
        let n = self.sys.n();
        let count = nodes.len();
        let mut k = Matrix::zeros(n * count, n * count);
        for (i, &a) in nodes.iter().enumerate() {
            set_block(&mut k, i, i, &self.psi0);
            for (j, &b) in nodes.iter().enumerate().skip(i + 1) {
                let psi = self.eval(a - b)?;
                set_block(&mut k, j, i, &psi.transpose());
                set_block(&mut k, i, j, &psi);
            }
        }
        Ok(k)
    }
}

/// Kernel functions of the complete-type functional.
#[derive(Debug, Clone)]
pub struct Kernels<'a> {
    pub dlm: &'a DelayLyapunovMatrix,
    pub weights: &'a CostWeights,
}

impl<'a> Kernels<'a> {
    pub fn new(dlm: &'a DelayLyapunovMatrix, weights: &'a CostWeights) -> Result<Self> {
        if weights.n() != dlm.sys.n() {
            return Err(Error::Dimension(format!(
                "weights are {0}x{0}, system dimension is {1}",
                weights.n(),
                dlm.sys.n()
            )));
        }
        Ok(Self { dlm, weights })
    }

    fn check(&self, theta: f64) -> Result<()> {
        let h = self.dlm.sys.h();
        if theta > 1e-12 * h || theta < -h * (1.0 + 1e-12) {
            return Err(Error::Range(format!("θ = {theta} outside [−{h}, 0]")));
        }
        Ok(())
    }

    /// `A1ᵀ Ψ(ξ − θ) A1`.
    pub fn p_zz(&self, xi: f64, theta: f64) -> Result<Matrix> {
        self.check(xi)?;
        self.check(theta)?;
        let a1 = self.dlm.sys.a1();
        Ok(a1.transpose() * self.dlm.eval(xi - theta)? * a1)
    }

    /// `Ψ(−h − θ) A1`.
    pub fn p_xz(&self, theta: f64) -> Result<Matrix> {
        self.check(theta)?;
        let h = self.dlm.sys.h();
        Ok(self.dlm.eval((-h - theta).clamp(-h, 0.0))? * self.dlm.sys.a1())
    }

    /// `Q1 + (h + θ) Q2`.
    pub fn p_zz_diag(&self, theta: f64) -> Result<Matrix> {
        self.check(theta)?;
        Ok(&self.weights.q1 + &self.weights.q2 * (self.dlm.sys.h() + theta))
    }

    /// `Ψ(0)`.
    pub fn p_xx(&self) -> Matrix {
        self.dlm.psi0.clone()
    }
}

/// Interpolatory rule used to discretize the functional.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadRule {
    /// `N + 1` Chebyshev nodes including both ends.
    ClenshawCurtis(usize),
    /// `N` Gauss–Legendre nodes plus `θ = 0` with zero weight.
    Gauss(usize),
}

impl QuadRule {
    pub fn order(self) -> usize {
        match self {
            QuadRule::ClenshawCurtis(n) | QuadRule::Gauss(n) => n,
        }
    }

    /// Ascending nodes ending at `0` and their weights, `N + 1` each.
    pub fn nodes(self, h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        match self {
            QuadRule::ClenshawCurtis(n) => {
                let set = cheb_nodes(n, h)?;
                Ok((set.nodes, set.weights))
            }
            QuadRule::Gauss(n) => {
                let set = gauss_legendre(n, h)?;
                let (mut nodes, mut weights) = (set.nodes, set.weights);
                nodes.push(0.0);
                weights.push(0.0);
                Ok((nodes, weights))
            }
        }
    }
}

/// `P_y^quad` such that `V(φ) ≈ yᵀ P_y^quad y` with `y^k = φ(θ_k)` on the
/// rule's nodes.
pub fn assemble_quad(dlm: &DelayLyapunovMatrix, weights: &CostWeights, rule: QuadRule) -> Result<Matrix> {
    if rule.order() < 2 {
        return Err(Error::Input("quadrature order must be at least 2".into()));
    }
    let kernels = Kernels::new(dlm, weights)?;
    let (n, h) = (dlm.sys.n(), dlm.sys.h());
    let (nodes, w) = rule.nodes(h)?;
    let last = nodes.len() - 1;
    let a1 = dlm.sys.a1();

    // Double sum: (w_j A1ᵀ Ψ(θ_j − θ_k) A1 w_k)_{jk}.
    let psi = dlm.block_matrix(&nodes)?;
    let mut s = Matrix::zeros(n * nodes.len(), n * nodes.len());
    for (k, &wk) in w.iter().enumerate() {
        set_block(&mut s, k, k, &(a1 * wk));
    }
    let mut p = s.transpose() * psi * &s;

    for (k, (&theta, &wk)) in nodes.iter().zip(&w).enumerate() {
        let diag = p.view((k * n, k * n), (n, n)) + kernels.p_zz_diag(theta)? * wk;
        set_block(&mut p, k, k, &diag);
        let border = kernels.p_xz(theta)? * wk;
        let row = p.view((last * n, k * n), (n, n)) + &border;
        set_block(&mut p, last, k, &row);
        let col = p.view((k * n, last * n), (n, n)) + border.transpose();
        set_block(&mut p, k, last, &col);
    }
    let corner = p.view((last * n, last * n), (n, n)) + kernels.p_xx();
    set_block(&mut p, last, last, &corner);
    Ok(symmetrize(&p))
}

/// The factorized form `Sᵀ (Ψ(θ_j − θ_k))_{jk} S + D` of the Clenshaw–Curtis
/// assembly, with `S = diag(w) ⊗ A1` plus `I_n` in block `(0, N)` and
/// `D = blkdiag(w_k (Q1 + (h + θ_k) Q2))`.
pub fn assemble_quad_factored(
    dlm: &DelayLyapunovMatrix,
    weights: &CostWeights,
    rule: QuadRule,
) -> Result<Matrix> {
    let (n, h) = (dlm.sys.n(), dlm.sys.h());
    let (nodes, w) = rule.nodes(h)?;
    let last = nodes.len() - 1;
    let mut s = Matrix::zeros(n * nodes.len(), n * nodes.len());
    let mut d = Matrix::zeros(n * nodes.len(), n * nodes.len());
    for (k, (&theta, &wk)) in nodes.iter().zip(&w).enumerate() {
        set_block(&mut s, k, k, &(dlm.sys.a1() * wk));
        set_block(&mut d, k, k, &((&weights.q1 + &weights.q2 * (h + theta)) * wk));
    }
    let top_right = s.view((0, last * n), (n, n)) + Matrix::identity(n, n);
    set_block(&mut s, 0, last, &top_right);
    let psi = dlm.block_matrix(&nodes)?;
    Ok(symmetrize(&(s.transpose() * psi * &s + d)))
}

/// `λ_min(P/P_zz)` of a quadrature matrix with `n×n` boundary block.
pub fn k1_quad(p: &Matrix, n: usize) -> Result<f64> {
    let split = p.nrows().checked_sub(n).ok_or_else(|| {
        Error::Dimension(format!("matrix of size {} has no {n}x{n} boundary block", p.nrows()))
    })?;
    Ok(sym_eigen(&schur_complement(p, split)?)?.min())
}

/// As [`k1_quad`] with a fixed inverse path and no PSD check.
pub fn k1_quad_with(p: &Matrix, n: usize, path: SchurPath) -> Result<f64> {
    let split = p.nrows().checked_sub(n).ok_or_else(|| {
        Error::Dimension(format!("matrix of size {} has no {n}x{n} boundary block", p.nrows()))
    })?;
    Ok(sym_eigen(&schur_complement_unchecked(p, split, path)?)?.min())
}
