//! Node sets, differentiation matrices, quadrature weights and the
//! Legendre-coefficient → Chebyshev-value transform on `[−h, 0]`.
//!
//! Reference coordinates `ϑ ∈ [−1, 1]` map to delay coordinates through
//! `θ = (h/2)(ϑ − 1)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{kron_identity, sym_eigen, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeKind {
    /// `θ_k = (h/2)(−cos(kπ/N) − 1)`, `k = 0..=N`, both endpoints included.
    GaussLobattoChebyshev,
    /// Roots of the Legendre polynomial of degree `count`, no endpoints.
    GaussLegendre,
}

/// Ascending nodes on `[−h, 0]` with their quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeSet {
    pub kind: NodeKind,
    /// `N` for Chebyshev sets (`N + 1` nodes), the node count for Gauss sets.
    pub order: usize,
    pub h: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl NodeSet {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Quadrature of `f` over `[−h, 0]`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&t, &w)| w * f(t)).sum()
    }

    /// Nodes mapped back to `[−1, 1]`.
    pub fn reference_nodes(&self) -> Vec<f64> {
        self.nodes.iter().map(|&t| to_reference(t, self.h)).collect()
    }
}

/// `θ ↦ 2θ/h + 1`.
pub fn to_reference(theta: f64, h: f64) -> f64 {
    2.0 * theta / h + 1.0
}

/// `ϑ ↦ (h/2)(ϑ − 1)`.
pub fn to_delay(vartheta: f64, h: f64) -> f64 {
    0.5 * h * (vartheta - 1.0)
}

fn validate(order: usize, h: f64, what: &str) -> Result<()> {
    if order == 0 {
        return Err(Error::Input(format!("{what} must be at least 1")));
    }
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Input(format!("delay h must be positive and finite, got {h}")));
    }
    Ok(())
}

/// Ascending Chebyshev points `ϑ_k = −cos(kπ/N)` on `[−1, 1]`, written as a
/// sine so that the set is exactly symmetric.
fn cheb_reference(n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|k| (PI * (2.0 * k as f64 - nf) / (2.0 * nf)).sin())
        .collect()
}

/// Gauss–Lobatto Chebyshev nodes on `[−h, 0]` with Clenshaw–Curtis weights.
pub fn cheb_nodes(n: usize, h: f64) -> Result<NodeSet> {
    validate(n, h, "N")?;
    let mut nodes: Vec<f64> = cheb_reference(n).into_iter().map(|v| to_delay(v, h)).collect();
    nodes[0] = -h;
    nodes[n] = 0.0;
    Ok(NodeSet {
        kind: NodeKind::GaussLobattoChebyshev,
        order: n,
        h,
        nodes,
        weights: clenshaw_curtis_weights(n, h)?,
    })
}

/// Differentiation matrix on the ascending Chebyshev nodes of `[−h, 0]`:
/// entry `(j, k)` is `(2/h)·ℓ_k'(ϑ_j)`.
pub fn cheb_diffmat(n: usize, h: f64) -> Result<Matrix> {
    validate(n, h, "N")?;
    let nf = n as f64;
    let c = |k: usize| if k == 0 || k == n { 2.0 } else { 1.0 };
    let mut d = Matrix::zeros(n + 1, n + 1);
    for j in 0..=n {
        let mut row_sum = 0.0;
        for k in 0..=n {
            if j == k {
                continue;
            }
            // ϑ_j − ϑ_k via the product formula, free of cancellation.
            let diff = 2.0
                * (PI * (j + k) as f64 / (2.0 * nf)).sin()
                * (PI * (j as f64 - k as f64) / (2.0 * nf)).sin();
            let sign = if (j + k) % 2 == 0 { 1.0 } else { -1.0 };
            let v = c(j) / c(k) * sign / diff;
            d[(j, k)] = v;
            row_sum += v;
        }
        d[(j, j)] = -row_sum;
    }
    Ok(d * (2.0 / h))
}

/// Clenshaw–Curtis weights for the `N + 1` Chebyshev nodes of `[−h, 0]`.
pub fn clenshaw_curtis_weights(n: usize, h: f64) -> Result<Vec<f64>> {
    validate(n, h, "N")?;
    let nf = n as f64;
    let mut w = vec![0.0; n + 1];
    let end = if n % 2 == 0 { 1.0 / (nf * nf - 1.0) } else { 1.0 / (nf * nf) };
    w[0] = end;
    w[n] = end;
    for (k, wk) in w.iter_mut().enumerate().take(n).skip(1) {
        let theta = PI * k as f64 / nf;
        let mut v = 1.0;
        for j in 1..=((n - 1) / 2) {
            let jf = j as f64;
            v -= 2.0 * (2.0 * jf * theta).cos() / (4.0 * jf * jf - 1.0);
        }
        if n % 2 == 0 {
            v -= (nf * theta).cos() / (nf * nf - 1.0);
        }
        *wk = 2.0 * v / nf;
    }
    Ok(w.into_iter().map(|x| 0.5 * h * x).collect())
}

/// Gauss–Legendre rule with `count` nodes on `[−h, 0]` via Golub–Welsch.
pub fn gauss_legendre(count: usize, h: f64) -> Result<NodeSet> {
    validate(count, h, "node count")?;
    let jacobi = Matrix::from_fn(count, count, |i, j| {
        if i.abs_diff(j) == 1 {
            let k = i.max(j) as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        } else {
            0.0
        }
    });
    let eig = sym_eigen(&jacobi)?;
    let mut nodes = Vec::with_capacity(count);
    let mut weights = Vec::with_capacity(count);
    for (i, &x) in eig.eigenvalues.iter().enumerate() {
        let v0 = eig.eigenvectors[(0, i)];
        nodes.push(to_delay(x, h));
        weights.push(h * v0 * v0);
    }
    // Symmetrize nodes and weights about the midpoint −h/2.
    for i in 0..count / 2 {
        let j = count - 1 - i;
        let half_gap = 0.5 * ((nodes[i] + 0.5 * h).abs() + (nodes[j] + 0.5 * h).abs());
        nodes[i] = -0.5 * h - half_gap;
        nodes[j] = -0.5 * h + half_gap;
        let w = 0.5 * (weights[i] + weights[j]);
        weights[i] = w;
        weights[j] = w;
    }
    if count % 2 == 1 {
        nodes[count / 2] = -0.5 * h;
    }
    Ok(NodeSet {
        kind: NodeKind::GaussLegendre,
        order: count,
        h,
        nodes,
        weights,
    })
}

/// Legendre polynomial values `p_k(x_j)` for `k = 0..=max_degree`, by the
/// three-term recurrence.
pub fn legendre_vals(max_degree: usize, points: &[f64]) -> Result<Matrix> {
    if let Some(&x) = points.iter().find(|x| !(x.abs() <= 1.0 + 1e-12)) {
        return Err(Error::Input(format!("Legendre argument {x} is outside [-1, 1]")));
    }
    let mut out = Matrix::zeros(points.len(), max_degree + 1);
    for (j, &x) in points.iter().enumerate() {
        let (mut prev, mut cur) = (0.0, 1.0);
        out[(j, 0)] = 1.0;
        for k in 0..max_degree {
            let kf = k as f64;
            let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
            prev = cur;
            cur = next;
            out[(j, k + 1)] = cur;
        }
    }
    Ok(out)
}

/// Change of basis between Legendre coefficients `ζ` and Chebyshev-node
/// values `y = T_yζ ζ` for `n`-dimensional states.
#[derive(Debug, Clone)]
pub struct LegChebTransform {
    /// `T_yζ`, block `(j, k) = p_k(ϑ_j)·I_n`.
    pub leg_to_vals: Matrix,
    /// `T_ζy = T_yζ⁻¹`.
    pub vals_to_leg: Matrix,
}

impl LegChebTransform {
    pub fn new(order: usize, n: usize) -> Result<Self> {
        if order == 0 || n == 0 {
            return Err(Error::Input("transform needs N ≥ 1 and n ≥ 1".into()));
        }
        let scalar = legendre_vals(order, &cheb_reference(order))?;
        let inverse = scalar
            .clone()
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Input("Legendre-to-values matrix is singular".into()))?;
        Ok(Self {
            leg_to_vals: kron_identity(&scalar, n),
            vals_to_leg: kron_identity(&inverse, n),
        })
    }
}

/// `T_yζ` for order `N` and state dimension `n`.
pub fn transform_leg_to_chebvals(order: usize, n: usize) -> Result<Matrix> {
    Ok(LegChebTransform::new(order, n)?.leg_to_vals)
}
