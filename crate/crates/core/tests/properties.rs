mod common;

use common::*;
use lk_core::discretize::{build_qy, CostWeights, RfdeSystem, Scheme};
use lk_core::functional::build_functional;
use lk_core::linalg::*;
use lk_core::oracle::{assemble_quad, DelayLyapunovMatrix, QuadRule};
use lk_core::presets;
use lk_core::spectral::{cheb_diffmat, cheb_nodes, gauss_legendre};
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn lyapunov_contract_and_kronecker_agreement(seed in any::<u64>(), dim in 1usize..=24, margin in 0.05f64..2.0) {
        let mut rng = rng(seed);
        let a = random_stable(&mut rng, dim, margin);
        let q = random_spd(&mut rng, dim);
        let p = solve_lyapunov(&a, &q).unwrap();
        prop_assert_eq!(&p, &p.transpose());
        let bound = 1e-9 * (q.norm() + 2.0 * a.norm() * p.norm()).max(1.0);
        prop_assert!(lyapunov_residual(&a, &p, &q) <= bound);
        let reference = kron_lyapunov(&a, &q);
        prop_assert!((&p - reference).amax() <= 1e-8 * p.amax());
    }

    #[test]
    fn expm_inverse_and_transpose_spectrum(seed in any::<u64>(), dim in 1usize..=10, scale in 0.01f64..10.0) {
        let mut rng = rng(seed);
        let mut a = random_matrix(&mut rng, dim, dim, 1.0);
        a *= scale / norm2(&a).max(f64::MIN_POSITIVE);
        let prod = expm(&a).unwrap() * expm(&(-&a)).unwrap();
        prop_assert!((prod - Matrix::identity(dim, dim)).amax() <= 1e-9);
        let key = |z: &nalgebra::Complex<f64>| (z.re, z.im);
        let mut e1: Vec<_> = eigenvalues(&a).unwrap().iter().map(key).collect();
        let mut e2: Vec<_> = eigenvalues(&a.transpose()).unwrap().iter().map(key).collect();
        e1.sort_by(|x, y| x.partial_cmp(y).unwrap());
        e2.sort_by(|x, y| x.partial_cmp(y).unwrap());
        for (x, y) in e1.iter().zip(&e2) {
            prop_assert!((x.0 - y.0).hypot(x.1 - y.1) <= 1e-9);
        }
    }

    #[test]
    fn schur_complement_invariant_under_leading_rotation(seed in any::<u64>(), p_dim in 1usize..=12, n in 1usize..=3) {
        let mut rng = rng(seed);
        let m = random_matrix(&mut rng, p_dim + n, p_dim + n, 1.0);
        let p = &m * m.transpose() + Matrix::identity(p_dim + n, p_dim + n) * 1e-3;
        let s = schur_complement(&p, p_dim).unwrap();
        let u = random_matrix(&mut rng, p_dim, p_dim, 1.0).qr().q();
        let mut t = Matrix::identity(p_dim + n, p_dim + n);
        t.view_mut((0, 0), (p_dim, p_dim)).copy_from(&u);
        let s2 = schur_complement(&symmetrize(&(t.transpose() * &p * &t)), p_dim).unwrap();
        prop_assert!((&s - s2).amax() <= 1e-12 * s.amax().max(1.0));
    }

    #[test]
    fn diffmat_differentiates_monomials(order in 1usize..=24, h in 0.1f64..5.0) {
        let d = cheb_diffmat(order, h).unwrap();
        let nodes = cheb_nodes(order, h).unwrap().nodes;
        for m in 1..=order as i32 {
            let f = Vector::from_iterator(nodes.len(), nodes.iter().map(|t| t.powi(m)));
            let df = Vector::from_iterator(nodes.len(), nodes.iter().map(|t| m as f64 * t.powi(m - 1)));
            prop_assert!((&d * f - &df).amax() <= 1e-10 * m as f64 * df.amax().max(1.0));
        }
    }

    #[test]
    fn quadrature_rules_agree(seed in any::<u64>(), order in 1usize..=60, count in 1usize..=40, h in 0.1f64..5.0) {
        let mut rng = rng(seed);
        let degree = order.min(2 * count - 1);
        let coeffs: Vec<f64> = (0..=degree).map(|_| 2.0 * rand::RngExt::random::<f64>(&mut rng) - 1.0).collect();
        let p = |t: f64| coeffs.iter().rev().fold(0.0, |acc, c| acc * t + c);
        let cc = cheb_nodes(order, h).unwrap();
        let gl = gauss_legendre(count, h).unwrap();
        let (a, b) = (cc.integrate(p), gl.integrate(p));
        let scale: f64 = coeffs.iter().enumerate().map(|(m, c)| c.abs() * h.powi(m as i32 + 1)).sum();
        prop_assert!((a - b).abs() <= 1e-11 * scale, "{} vs {}", a, b);
        prop_assert!(cc.weights.iter().chain(&gl.weights).all(|&w| w > 0.0));
    }

    #[test]
    fn qy_psd_for_psd_weights(seed in any::<u64>(), n in 1usize..=3, order in 1usize..=30, h in 0.1f64..5.0) {
        let mut rng = rng(seed);
        let w = CostWeights::new(random_spd(&mut rng, n), random_spd(&mut rng, n), random_spd(&mut rng, n)).unwrap();
        let q = build_qy(&w, &cheb_nodes(order, h).unwrap()).unwrap();
        prop_assert!(sym_eigen(&q).unwrap().min() >= -1e-10);
    }
}

proptest! {
    #![proptest_config(config(12))]

    #[test]
    fn functional_linear_in_weights(seed in any::<u64>(), n in 1usize..=3, order in 4usize..=24, c in 0.01f64..50.0) {
        let mut rng = rng(seed);
        let sys = random_stable_rfde(&mut rng, n, (0.1, 3.0));
        let w = CostWeights::new(random_spd(&mut rng, n), random_spd(&mut rng, n), random_spd(&mut rng, n)).unwrap();
        for scheme in [Scheme::ChebCollocation, Scheme::LegendreTau] {
            let full = build_functional(&sys, &w, scheme, order).unwrap();
            let scaled = build_functional(&sys, &w.scaled(c), scheme, order).unwrap();
            prop_assert!((&scaled.p - &full.p * c).amax() <= 1e-10 * max_abs(&scaled.p));
            prop_assert!(rel_diff(scaled.k1().unwrap(), c * full.k1().unwrap()) <= 1e-10);
        }
    }

    #[test]
    fn k1_orthogonal_invariance(angle in 0.0f64..std::f64::consts::TAU, h in 0.2f64..5.0) {
        let sys = presets::example2(h);
        let w = presets::example2_weights();
        let u = Matrix::from_row_slice(2, 2, &[angle.cos(), -angle.sin(), angle.sin(), angle.cos()]);
        let rotated = RfdeSystem::new(u.transpose() * sys.a0() * &u, u.transpose() * sys.a1() * &u, h).unwrap();
        for scheme in [Scheme::ChebCollocation, Scheme::LegendreTau] {
            let a = build_functional(&sys, &w, scheme, 20).unwrap().k1().unwrap();
            let b = build_functional(&rotated, &w, scheme, 20).unwrap().k1().unwrap();
            prop_assert!(rel_diff(a, b) <= 1e-8);
        }
    }

    #[test]
    fn psi_defining_properties(seed in any::<u64>(), n in 1usize..=3) {
        let mut rng = rng(seed);
        let sys = random_stable_rfde(&mut rng, n, (0.1, 5.0));
        let q = random_spd(&mut rng, n);
        let dlm = DelayLyapunovMatrix::build(&sys, &q).unwrap();
        let h = sys.h();
        let grid: Vec<f64> = (0..21).map(|i| -h + 2.0 * h * i as f64 / 20.0).collect();
        prop_assert!(dlm.symmetry_residual(&grid).unwrap() <= 1e-7 * dlm.psi0().norm());
        prop_assert!(dlm.dynamic_residual(&grid).unwrap() <= 1e-6 * dlm.dynamic_scale());
        prop_assert!(dlm.algebraic_residual().unwrap() <= 1e-7 * q.norm());
    }
}

#[test]
fn cc_and_gauss_assemblies_approach_each_other() {
    let sys = presets::example2(2.0);
    let w = presets::example2_weights();
    let dlm = DelayLyapunovMatrix::for_weights(&sys, &w).unwrap();
    let gaps: Vec<f64> = [10, 20, 40]
        .iter()
        .map(|&n| {
            let cc = assemble_quad(&dlm, &w, QuadRule::ClenshawCurtis(2 * n)).unwrap();
            let gl = assemble_quad(&dlm, &w, QuadRule::Gauss(2 * n)).unwrap();
            (cc - gl).amax()
        })
        .collect();
    assert!(gaps[1] < gaps[0] && gaps[2] < gaps[1], "{gaps:?}");
}
