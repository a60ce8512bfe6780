//! Independent reference computations shared by the integration tests.
//! Nothing here goes through the solvers under test.
#![allow(dead_code)]

use lk_core::discretize::{build_leg_model, RfdeSystem};
use lk_core::linalg::{is_hurwitz, Matrix, Vector};
use nalgebra::{Complex, DMatrix};
use rand::{Rng, RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type C64 = Complex<f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize, scale: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| scale * (2.0 * rng.random::<f64>() - 1.0))
}

pub fn random_spd(rng: &mut impl Rng, n: usize) -> Matrix {
    let m = random_matrix(rng, n, n, 1.0);
    &m * m.transpose() + Matrix::identity(n, n) * 0.5
}

/// Random matrix shifted so that every eigenvalue has real part `≤ −margin`,
/// using the Gershgorin bound.
pub fn random_stable(rng: &mut impl Rng, n: usize, margin: f64) -> Matrix {
    let mut m = random_matrix(rng, n, n, 1.0 / (n as f64).sqrt());
    let radius = (0..n)
        .map(|i| m[(i, i)] + (0..n).filter(|&j| j != i).map(|j| m[(i, j)].abs()).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max);
    for i in 0..n {
        m[(i, i)] -= radius + margin;
    }
    m
}

/// Random `(A0, A1, h)` whose Legendre model at `N = 30` has all roots
/// left of `−0.05`.
pub fn random_stable_rfde(rng: &mut impl Rng, n: usize, h_range: (f64, f64)) -> RfdeSystem {
    loop {
        let a0 = random_stable(rng, n, 0.2);
        let a1 = random_matrix(rng, n, n, 0.6);
        let h = h_range.0 + (h_range.1 - h_range.0) * rng.random::<f64>();
        let sys = RfdeSystem::new(a0, a1, h).unwrap();
        let model = build_leg_model(&sys, 30).unwrap();
        if is_hurwitz(&model.a, 0.05).unwrap().0 {
            return sys;
        }
    }
}

/// `P A + Aᵀ P = −Q` by LU on the `d²`-dimensional vectorized system
/// `(I ⊗ Aᵀ + Aᵀ ⊗ I) vec P = −vec Q`.
pub fn kron_lyapunov(a: &Matrix, q: &Matrix) -> Matrix {
    let d = a.nrows();
    let id = Matrix::identity(d, d);
    let at = a.transpose();
    let op = id.kronecker(&at) + at.kronecker(&id);
    let rhs = -Vector::from_column_slice(q.as_slice());
    let x = op.lu().solve(&rhs).expect("nonsingular Kronecker operator");
    Matrix::from_column_slice(d, d, x.as_slice())
}

/// Same system solved matrix-free by restarted GMRES, for sizes where the
/// dense Kronecker matrix does not fit.
pub fn kron_lyapunov_gmres(a: &Matrix, q: &Matrix, rel_tol: f64) -> Matrix {
    let d = a.nrows();
    let apply = |x: &Vector| -> Vector {
        let p = Matrix::from_column_slice(d, d, x.as_slice());
        let y = &p * a + a.transpose() * &p;
        Vector::from_column_slice(y.as_slice())
    };
    let b = -Vector::from_column_slice(q.as_slice());
    let x = gmres(apply, &b, rel_tol, 80, 400);
    Matrix::from_column_slice(d, d, x.as_slice())
}

fn gmres(apply: impl Fn(&Vector) -> Vector, b: &Vector, rel_tol: f64, restart: usize, max_cycles: usize) -> Vector {
    let dim = b.len();
    let bnorm = b.norm().max(f64::MIN_POSITIVE);
    let mut x = Vector::zeros(dim);
    for _ in 0..max_cycles {
        let r = b - apply(&x);
        let beta = r.norm();
        if beta <= rel_tol * bnorm {
            return x;
        }
        let mut basis: Vec<Vector> = vec![r / beta];
        let mut hess = DMatrix::<f64>::zeros(restart + 1, restart);
        let mut g = Vector::zeros(restart + 1);
        g[0] = beta;
        let (mut cs, mut sn) = (vec![0.0; restart], vec![0.0; restart]);
        let mut used = 0;
        for j in 0..restart {
            let mut w = apply(&basis[j]);
            for (i, v) in basis.iter().enumerate() {
                let hij = w.dot(v);
                hess[(i, j)] = hij;
                w.axpy(-hij, v, 1.0);
            }
            let wn = w.norm();
            hess[(j + 1, j)] = wn;
            for i in 0..j {
                let t = cs[i] * hess[(i, j)] + sn[i] * hess[(i + 1, j)];
                hess[(i + 1, j)] = -sn[i] * hess[(i, j)] + cs[i] * hess[(i + 1, j)];
                hess[(i, j)] = t;
            }
            let rho = hess[(j, j)].hypot(hess[(j + 1, j)]);
            cs[j] = hess[(j, j)] / rho;
            sn[j] = hess[(j + 1, j)] / rho;
            hess[(j, j)] = rho;
            hess[(j + 1, j)] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] *= cs[j];
            used = j + 1;
            if g[j + 1].abs() <= rel_tol * bnorm || wn == 0.0 {
                break;
            }
            basis.push(w / wn);
        }
        let mut y = Vector::zeros(used);
        for i in (0..used).rev() {
            let s: f64 = ((i + 1)..used).map(|k| hess[(i, k)] * y[k]).sum();
            y[i] = (g[i] - s) / hess[(i, i)];
        }
        for (i, v) in basis.iter().take(used).enumerate() {
            x.axpy(y[i], v, 1.0);
        }
    }
    x
}

fn complex(m: &Matrix) -> DMatrix<C64> {
    m.map(|v| C64::new(v, 0.0))
}

/// Newton iteration on `det(sI − A0 − e^{−sh} A1) = 0`, using
/// `d/ds log det M = tr(M⁻¹ M')`.
pub fn characteristic_root(sys: &RfdeSystem, seed: C64) -> C64 {
    let n = sys.n();
    let (a0, a1, h) = (complex(sys.a0()), complex(sys.a1()), sys.h());
    let id = DMatrix::<C64>::identity(n, n);
    let mut s = seed;
    for _ in 0..100 {
        let e = (-s * h).exp();
        let m = &id * s - &a0 - &a1 * e;
        let dm = &id + &a1 * (e * h);
        let inv = m.clone().try_inverse().expect("seed is not a root of a singular pencil");
        let step = C64::new(1.0, 0.0) / (inv * dm).trace();
        s -= step;
        if step.norm() < 1e-15 * s.norm().max(1.0) {
            break;
        }
    }
    s
}

/// Barycentric interpolation on Chebyshev points `ϑ_k = −cos(kπ/N)` mapped
/// to `[−h, 0]`.
pub fn cheb_interpolate(values: &[f64], h: f64, theta: f64) -> f64 {
    let n = values.len() - 1;
    let x = 2.0 * theta / h + 1.0;
    let (mut num, mut den) = (0.0, 0.0);
    for (k, &v) in values.iter().enumerate() {
        let xk = -(std::f64::consts::PI * k as f64 / n as f64).cos();
        if (x - xk).abs() < 1e-15 {
            return v;
        }
        let mut w = if k % 2 == 0 { 1.0 } else { -1.0 };
        if k == 0 || k == n {
            w *= 0.5;
        }
        num += w * v / (x - xk);
        den += w / (x - xk);
    }
    num / den
}

/// Coefficients of `p·q` in the monomial basis.
pub fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// `∫_{−h}^{0} p(θ) dθ` for monomial coefficients.
pub fn poly_integral(p: &[f64], h: f64) -> f64 {
    p.iter()
        .enumerate()
        .map(|(m, c)| -c * (-h).powi(m as i32 + 1) / (m + 1) as f64)
        .sum()
}

/// `∫ φᵀ W(θ) φ dθ` over `[−h, 0]` for vector polynomial `φ` (coefficient
/// list of vectors) and `W(θ) = W0 + θ W1`.
pub fn quadratic_integral(phi: &[Vec<f64>], w0: &Matrix, w1: &Matrix, h: f64) -> f64 {
    let n = w0.nrows();
    let component = |i: usize| -> Vec<f64> { phi.iter().map(|c| c[i]).collect() };
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let prod = poly_mul(&component(i), &component(j));
            let shifted: Vec<f64> = std::iter::once(0.0).chain(prod.iter().copied()).collect();
            total += w0[(i, j)] * poly_integral(&prod, h) + w1[(i, j)] * poly_integral(&shifted, h);
        }
    }
    total
}

/// One Richardson step for a quantity converging like `N⁻²`.
pub fn richardson2(coarse: f64, fine: f64) -> f64 {
    (4.0 * fine - coarse) / 3.0
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}
