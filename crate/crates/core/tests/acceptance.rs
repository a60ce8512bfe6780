//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use lk_core::discretize::{build_leg_model, build_model, discretize_leg, CostWeights, FunctionSpec, Scheme};
use lk_core::functional::*;
use lk_core::linalg::*;
use lk_core::oracle::*;
use lk_core::presets;
use lk_core::spectral::{cheb_nodes, gauss_legendre};
use rand::RngExt;

type Outcome = Result<(bool, String), Box<dyn std::error::Error>>;

const SCHEMES: [Scheme; 2] = [Scheme::ChebCollocation, Scheme::LegendreTau];

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn critical_delay_example2() -> Outcome {
    let exact = presets::example2_critical_delay();
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in SCHEMES {
        let h = critical_delay(&presets::example2(1.0), scheme, 20, (1.0, 10.0), 1e-4)?;
        ok &= (h - exact).abs() <= 1e-2;
        parts.push(format!("{scheme} h_c={h:.6}"));
    }
    let elapsed = start.elapsed();
    ok &= elapsed < Duration::from_secs(10);
    Ok((ok, format!("{} exact={exact:.6} runtime={}", parts.join(" "), secs(elapsed))))
}

fn critical_delay_example1() -> Outcome {
    let exact = (std::f64::consts::PI - 0.5_f64.acos()) / 0.75_f64.sqrt();
    let mut ok = true;
    let mut parts = Vec::new();
    for scheme in SCHEMES {
        let h = critical_delay(&presets::example1(), scheme, 20, (1.0, 4.0), 1e-4)?;
        ok &= (h - exact).abs() <= 1e-2;
        parts.push(format!("{scheme} h_c={h:.6}"));
    }
    Ok((ok, format!("{} exact={exact:.6}", parts.join(" "))))
}

fn cross_method_k1() -> Outcome {
    let start = Instant::now();
    let sys = presets::example2(2.0);
    let w = presets::example2_weights();
    let leg = build_functional(&sys, &w, Scheme::LegendreTau, 80)?.k1()?;
    let cheb = build_functional(&sys, &w, Scheme::ChebCollocation, 80)?.k1()?;
    let dlm = DelayLyapunovMatrix::for_weights(&sys, &w)?;
    let cc = k1_quad(&assemble_quad(&dlm, &w, QuadRule::ClenshawCurtis(80))?, 2)?;
    let gauss = k1_quad(&assemble_quad(&dlm, &w, QuadRule::Gauss(80))?, 2)?;
    let values = [leg, cheb, cc, gauss];
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let spread = (max - min) / max.abs();
    let elapsed = start.elapsed();
    let ok = spread <= 1e-3 && elapsed < Duration::from_secs(60);
    Ok((
        ok,
        format!(
            "legendre={leg:.6} cheb={cheb:.6} cc={cc:.6} gauss={gauss:.6} spread={spread:.2e} runtime={}",
            secs(elapsed)
        ),
    ))
}

fn baseline_dominance() -> Outcome {
    let w = presets::example2_weights();
    let sigma = ((3.0 + 5.0_f64.sqrt()) / 2.0).sqrt();
    let closed_form = (1.0 / (4.0 + sigma)).min(1.0 / sigma);
    let mut ok = true;
    let mut worst_margin = f64::INFINITY;
    let mut norm_ratio = f64::NAN;
    for h in [1.0, 2.0, 3.0, 4.0, 5.0, 6.0] {
        let sys = presets::example2(h);
        let k1 = build_functional(&sys, &w, Scheme::LegendreTau, 80)?.k1()?;
        let b = baseline_k1(&sys, &w)?;
        ok &= k1 > b.norm_ratio && k1 > b.alpha;
        worst_margin = worst_margin.min(k1 - b.norm_ratio.max(b.alpha));
        norm_ratio = b.norm_ratio;
    }
    ok &= (norm_ratio - closed_form).abs() <= 1e-12 && (norm_ratio - 0.1779).abs() < 1e-4;
    Ok((ok, format!("norm_ratio={norm_ratio:.6} min(k1 - baseline)={worst_margin:.4}")))
}

fn delay_free_anchor() -> Outcome {
    let sys = presets::delay_free(1.0);
    let w = presets::delay_free_weights();
    let options = BuildOptions { split: true, waive_contract: true };
    let c = 1.7;
    let phi = FunctionSpec::Constant(vec![c]);
    let mut worst = 0.0_f64;
    for scheme in SCHEMES {
        for order in [4, 16, 40] {
            let fa = build_functional_with(&sys, &w, scheme, order, options)?;
            worst = worst.max((fa.evaluate(&phi)? - 0.5 * c * c).abs());
            worst = worst.max((fa.k1()? - 0.5).abs());
        }
    }
    let dlm = DelayLyapunovMatrix::for_weights(&sys, &w)?;
    for rule in [QuadRule::ClenshawCurtis(4), QuadRule::ClenshawCurtis(40), QuadRule::Gauss(4), QuadRule::Gauss(40)] {
        let p = assemble_quad(&dlm, &w, rule)?;
        let last = p.nrows() - 1;
        let mut expected = Matrix::zeros(last + 1, last + 1);
        expected[(last, last)] = 0.5;
        worst = worst.max((&p - expected).amax());
        worst = worst.max((k1_quad(&p, 1)? - 0.5).abs());
        let (nodes, _) = rule.nodes(1.0)?;
        let y = Vector::from_element(nodes.len(), c);
        worst = worst.max((y.dot(&(&p * &y)) - 0.5 * c * c).abs());
    }
    Ok((worst <= 1e-8, format!("max deviation={worst:.2e}")))
}

fn lyapunov_residuals() -> Outcome {
    let mut rng = rng(600);
    let mut worst_residual = 0.0_f64;
    let mut worst_kron = 0.0_f64;
    let mut compared = 0;
    for seed in 0..100 {
        let n = 1 + seed % 3;
        let order = 2 + rng.random_range(0..39);
        let sys = random_stable_rfde(&mut rng, n, (0.1, 5.0));
        let model = build_model(&sys, SCHEMES[seed % 2], order)?;
        let q = random_spd(&mut rng, model.dim());
        let p = solve_lyapunov(&model.a, &q)?;
        if p != p.transpose() {
            return Ok((false, format!("instance {seed}: asymmetric solution")));
        }
        let scale = (q.norm() + 2.0 * model.a.norm() * p.norm()).max(1.0);
        worst_residual = worst_residual.max(lyapunov_residual(&model.a, &p, &q) / scale);
        if model.dim() <= 40 {
            worst_kron = worst_kron.max((&p - kron_lyapunov(&model.a, &q)).amax());
            compared += 1;
        }
    }
    for dim in [50, 100, 150, 200] {
        let a = random_stable(&mut rng, dim, 0.3);
        let q = random_spd(&mut rng, dim);
        let p = solve_lyapunov(&a, &q)?;
        worst_kron = worst_kron.max((&p - kron_lyapunov_gmres(&a, &q, 1e-14)).amax());
        compared += 1;
    }
    let ok = worst_residual <= 1e-9 && worst_kron <= 1e-8;
    Ok((
        ok,
        format!("max residual/scale={worst_residual:.2e} max |P - P_kron|={worst_kron:.2e} over {compared} Kronecker comparisons"),
    ))
}

fn quadrature_exactness() -> Outcome {
    let mut worst_cc = 0.0_f64;
    let mut worst_gauss = 0.0_f64;
    let mut worst_sum = 0.0_f64;
    for h in [0.3_f64, 1.0, 2.2, 7.0] {
        let monomial = |m: i32| -(-h).powi(m + 1) / (m + 1) as f64;
        for order in (1..=64).chain([100, 200]) {
            let cc = cheb_nodes(order, h)?;
            for m in 0..=order as i32 {
                worst_cc = worst_cc.max(rel_diff(cc.integrate(|t| t.powi(m)), monomial(m)));
            }
            let gl = gauss_legendre(order, h)?;
            for m in 0..=(2 * order as i32 - 1) {
                worst_gauss = worst_gauss.max(rel_diff(gl.integrate(|t| t.powi(m)), monomial(m)));
            }
            for set in [&cc, &gl] {
                worst_sum = worst_sum.max((set.weights.iter().sum::<f64>() - h).abs() / h);
            }
        }
    }
    let ok = worst_cc <= 1e-12 && worst_gauss <= 1e-12 && worst_sum <= 1e-12;
    Ok((ok, format!("cc rel err={worst_cc:.2e} gauss rel err={worst_gauss:.2e} weight sum rel err={worst_sum:.2e}")))
}

fn splitting_exactness() -> Outcome {
    let mut rng = rng(812);
    let order = 12;
    let n = 2;
    let sys = random_stable_rfde(&mut rng, n, (0.5, 3.0));
    let h = sys.h();
    let w = CostWeights::new(random_spd(&mut rng, n), random_spd(&mut rng, n), random_spd(&mut rng, n))?;
    let [_, v1, v2] = split_components(&sys, &w, order)?;
    let model = build_leg_model(&sys, order)?;
    let mut worst_value = 0.0_f64;
    for _ in 0..10 {
        let coeffs: Vec<Vec<f64>> = (0..order).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        let zeta = discretize_leg(&FunctionSpec::Polynomial(coeffs.clone()), &model)?;
        let exact1 = quadratic_integral(&coeffs, &w.q1, &Matrix::zeros(n, n), h);
        let exact2 = quadratic_integral(&coeffs, &(&w.q2 * h), &w.q2, h);
        worst_value = worst_value.max(rel_diff(zeta.dot(&(&v1.p * &zeta)), exact1));
        worst_value = worst_value.max(rel_diff(zeta.dot(&(&v2.p * &zeta)), exact2));
    }
    let p1 = p_zeta_v1(&w.q1, order, h);
    let p2 = p_zeta_v2(&w.q2, order, h);
    let a = &model.a;
    let q1 = lk_core::discretize::legendre_rhs_zeta(&v1.weights, order, h);
    let q2 = lk_core::discretize::legendre_rhs_zeta(&v2.weights, order, h);
    let r1 = lyapunov_residual(a, &p1, &q1) / (q1.norm() + 2.0 * a.norm() * p1.norm());
    let r2 = lyapunov_residual(a, &p2, &q2) / (q2.norm() + 2.0 * a.norm() * p2.norm());
    let ok = worst_value <= 1e-10 && r1 <= 1e-9 && r2 <= 1e-9;
    Ok((ok, format!("max rel err={worst_value:.2e} closed-form residuals={r1:.2e}, {r2:.2e}")))
}

fn psd_hurwitz_equivalence() -> Outcome {
    let w = presets::example2_weights();
    let mut disagreements = 0;
    let mut flips = Vec::new();
    for scheme in SCHEMES {
        let mut previous = None;
        for i in 0..30 {
            let h = 0.5 + 8.5 * i as f64 / 29.0;
            let model = build_model(&presets::example2(h), scheme, 40)?;
            let hurwitz = is_hurwitz(&model.a, 0.0)?.0;
            let psd = functional_from_model(model, &w, BuildOptions::default())?.stability_by_psd();
            if psd != hurwitz {
                disagreements += 1;
            }
            if previous == Some(true) && !psd {
                flips.push(format!("{scheme} flips at h={h:.3}"));
            }
            previous = Some(psd);
        }
    }
    Ok((disagreements == 0, format!("disagreements={disagreements} ({})", flips.join(", "))))
}

fn psi_properties() -> Outcome {
    let mut systems = vec![
        ("example 1".to_string(), presets::example1(), presets::example1_weights().q_tilde(presets::example1().h())),
        ("example 2".to_string(), presets::example2(2.0), presets::example2_weights().q_tilde(2.0)),
    ];
    let mut rng = rng(1010);
    for i in 0..20 {
        let sys = random_stable_rfde(&mut rng, 2, (0.1, 5.0));
        systems.push((format!("random {i}"), sys, random_spd(&mut rng, 2)));
    }
    let (mut sym, mut dynamic, mut alg) = (0.0_f64, 0.0_f64, 0.0_f64);
    let mut failed = Vec::new();
    for (label, sys, q) in &systems {
        let dlm = DelayLyapunovMatrix::build(sys, q)?;
        let h = sys.h();
        let grid: Vec<f64> = (0..21).map(|i| -h + 2.0 * h * i as f64 / 20.0).collect();
        let s = dlm.symmetry_residual(&grid)? / dlm.psi0().norm();
        let d = dlm.dynamic_residual(&grid)? / dlm.dynamic_scale();
        let a = dlm.algebraic_residual()? / q.norm();
        if s > 1e-7 || d > 1e-6 || a > 1e-7 || dlm.psi0() != &dlm.psi0().transpose() {
            failed.push(label.clone());
        }
        (sym, dynamic, alg) = (sym.max(s), dynamic.max(d), alg.max(a));
    }
    Ok((
        failed.is_empty(),
        format!(
            "{} systems, max relative residuals symmetry={sym:.2e} dynamic={dynamic:.2e} algebraic={alg:.2e}{}",
            systems.len(),
            if failed.is_empty() { String::new() } else { format!(" failed: {}", failed.join(", ")) }
        ),
    ))
}

fn structural_validation() -> Outcome {
    let sys = presets::example1();
    let w = presets::example1_weights();
    let py = build_functional(&sys, &w, Scheme::LegendreTau, 40)?.p_y();
    let dlm = DelayLyapunovMatrix::for_weights(&sys, &w)?;
    let quad = assemble_quad(&dlm, &w, QuadRule::ClenshawCurtis(40))?;
    let factored = assemble_quad_factored(&dlm, &w, QuadRule::ClenshawCurtis(40))?;
    let deviation = (&py - &quad).amax() / max_abs(&py);
    let factor_err = (&quad - factored).amax();
    let ok = deviation <= 5e-2 && factor_err <= 1e-10;
    Ok((ok, format!("relative deviation={deviation:.2e} factorization err={factor_err:.2e}")))
}

fn convergence_behavior() -> Outcome {
    let sys = presets::example2(2.0);
    let w = presets::example2_weights();
    let one = FunctionSpec::Constant(vec![1.0, 1.0]);
    let dlm = DelayLyapunovMatrix::for_weights(&sys, &w)?;
    let rule = QuadRule::Gauss(160);
    let p_ref = assemble_quad(&dlm, &w, rule)?;
    let k1_ref = k1_quad(&p_ref, 2)?;
    let (nodes, _) = rule.nodes(sys.h())?;
    let y = Vector::from_element(2 * nodes.len(), 1.0);
    let v_ref = y.dot(&(&p_ref * &y));

    let mut k1_err = Vec::new();
    let mut v_err = Vec::new();
    for order in [10, 40] {
        let fa = build_functional(&sys, &w, Scheme::LegendreTau, order)?;
        k1_err.push((fa.k1()? - k1_ref).abs());
        v_err.push((fa.evaluate(&one)? - v_ref).abs());
    }
    let k1_drop = k1_err[0] / k1_err[1];
    let v_drop = v_err[0] / v_err[1];
    let ok = k1_drop >= 10.0 && v_drop >= 10.0;
    Ok((
        ok,
        format!(
            "k1 err N=10 {:.2e} N=40 {:.2e} (drop {k1_drop:.2}x); V err N=10 {:.2e} N=40 {:.2e} (drop {v_drop:.2}x)",
            k1_err[0], k1_err[1], v_err[0], v_err[1]
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("critical delay, example 2", critical_delay_example2),
        ("critical delay, example 1", critical_delay_example1),
        ("cross-method k1 agreement", cross_method_k1),
        ("baseline dominance", baseline_dominance),
        ("delay-free anchor", delay_free_anchor),
        ("lyapunov residuals", lyapunov_residuals),
        ("quadrature exactness", quadrature_exactness),
        ("splitting exactness", splitting_exactness),
        ("psd/hurwitz equivalence", psd_hurwitz_equivalence),
        ("delay lyapunov matrix properties", psi_properties),
        ("structural validation", structural_validation),
        ("convergence behavior", convergence_behavior),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match std::panic::catch_unwind(check) {
            Ok(Ok(result)) => result,
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        if !ok {
            failures += 1;
        }
        println!(
            "criterion {:>2}: {} {name}: {detail} [{}]",
            i + 1,
            if ok { "PASS" } else { "FAIL" },
            secs(start.elapsed())
        );
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
