use std::path::Path;
use std::time::Instant;

use lk_core::discretize::{build_model, Scheme};
use lk_core::functional::{baseline_k1, build_functional_with, critical_delay, spectral_margin, FunctionalApprox};
use lk_core::linalg::{eigenvalues, max_abs, Matrix};
use lk_core::oracle::{assemble_quad, k1_quad, DelayLyapunovMatrix, QuadRule};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::Problem;
use crate::error::CliError;
use crate::output::{fmt17, sidecar_path, write_csv, write_json, write_matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Order,
    Delay,
}

fn build(problem: &Problem) -> Result<FunctionalApprox, CliError> {
    Ok(build_functional_with(&problem.system, &problem.weights, problem.scheme, problem.order, problem.options)?)
}

fn diagnostics(fa: &FunctionalApprox) -> Value {
    json!({
        "residual": fa.residual,
        "hurwitz": fa.hurwitz,
        "psd": fa.psd,
        "max_re": fa.max_re,
        "lambda_min": fa.lambda_min,
    })
}

fn sorted_spectrum(problem: &Problem, scheme: Scheme) -> Result<Vec<(f64, f64)>, CliError> {
    let model = build_model(&problem.system, scheme, problem.order)?;
    let mut eigs: Vec<(f64, f64)> = eigenvalues(&model.a)?.iter().map(|z| (z.re, z.im)).collect();
    eigs.sort_by(|a, b| b.0.total_cmp(&a.0).then(b.1.total_cmp(&a.1)));
    Ok(eigs)
}

pub fn spectrum(problem: &Problem, both: bool, out: Option<&Path>) -> Result<(), CliError> {
    if both {
        let cheb = sorted_spectrum(problem, Scheme::ChebCollocation)?;
        let leg = sorted_spectrum(problem, Scheme::LegendreTau)?;
        let header = ["cheb_re", "cheb_im", "legendre_re", "legendre_im"].map(String::from);
        let rows: Vec<Vec<String>> = cheb
            .iter()
            .zip(&leg)
            .map(|(c, l)| vec![fmt17(c.0), fmt17(c.1), fmt17(l.0), fmt17(l.1)])
            .collect();
        write_csv(out, &header, &rows)
    } else {
        let eigs = sorted_spectrum(problem, problem.scheme)?;
        let rows: Vec<Vec<String>> = eigs.iter().map(|(re, im)| vec![fmt17(*re), fmt17(*im)]).collect();
        write_csv(out, &["re".to_string(), "im".to_string()], &rows)
    }
}

#[derive(Serialize)]
struct BuildMeta {
    format: &'static str,
    coordinates: &'static str,
    rows: usize,
    cols: usize,
    scheme: &'static str,
    #[serde(rename = "N")]
    order: usize,
    n: usize,
    h: f64,
    residual: f64,
    hurwitz: bool,
    psd: bool,
    max_re: f64,
    lambda_min: f64,
    k1: Option<f64>,
}

pub fn build_artifact(problem: &Problem, out: &Path) -> Result<(), CliError> {
    let fa = build(problem)?;
    let p = fa.p_y();
    let meta = BuildMeta {
        format: "f64-le-row-major",
        coordinates: "chebyshev-node-values",
        rows: p.nrows(),
        cols: p.ncols(),
        scheme: problem.scheme.name(),
        order: problem.order,
        n: problem.n(),
        h: problem.system.h(),
        residual: fa.residual,
        hurwitz: fa.hurwitz,
        psd: fa.psd,
        max_re: fa.max_re,
        lambda_min: fa.lambda_min,
        k1: if fa.psd { fa.k1().ok() } else { None },
    };
    write_json(Some(&sidecar_path(out)), &meta)?;
    write_matrix(out, &p)
}

pub fn k1(problem: &Problem, out: Option<&Path>) -> Result<(), CliError> {
    let fa = build(problem)?;
    let value = fa.k1()?;
    let baselines = baseline_k1(&problem.system, &problem.weights)?;
    let mut diag = diagnostics(&fa);
    diag["baseline_norm_ratio"] = json!(baselines.norm_ratio);
    diag["baseline_alpha"] = json!(baselines.alpha);
    write_json(
        out,
        &json!({"value": value, "N": problem.order, "scheme": problem.scheme.name(), "diagnostics": diag}),
    )
}

pub fn eval(problem: &Problem, out: Option<&Path>) -> Result<(), CliError> {
    let phi = problem.phi_spec()?;
    let fa = build(problem)?;
    let value = fa.evaluate(&phi)?;
    write_json(
        out,
        &json!({"value": value, "N": problem.order, "scheme": problem.scheme.name(), "diagnostics": diagnostics(&fa)}),
    )
}

pub fn critical(problem: &Problem, bracket: (f64, f64), tol: f64, out: Option<&Path>) -> Result<(), CliError> {
    let value = critical_delay(&problem.system, problem.scheme, problem.order, bracket, tol)?;
    let margin = |h| spectral_margin(&problem.system, problem.scheme, problem.order, h);
    write_json(
        out,
        &json!({
            "value": value,
            "N": problem.order,
            "scheme": problem.scheme.name(),
            "diagnostics": {
                "bracket": [bracket.0, bracket.1],
                "tol": tol,
                "max_re_lo": margin(bracket.0)?,
                "max_re_hi": margin(bracket.1)?,
            },
        }),
    )
}

/// Sweep grid: `steps` evenly spaced values over `range`, rounded and
/// deduplicated on the N axis.
pub fn grid(axis: Axis, range: (f64, f64), steps: usize) -> Result<Vec<f64>, CliError> {
    if steps < 2 {
        return Err(CliError::Config("--steps must be at least 2".into()));
    }
    if !(range.0 < range.1) {
        return Err(CliError::Config(format!("empty range {}:{}", range.0, range.1)));
    }
    let raw = (0..steps).map(|i| range.0 + (range.1 - range.0) * i as f64 / (steps - 1) as f64);
    let mut values: Vec<f64> = match axis {
        Axis::Delay => {
            if range.0 <= 0.0 {
                return Err(CliError::Config("delay range must be positive".into()));
            }
            raw.collect()
        }
        Axis::Order => {
            if range.0 < 1.0 {
                return Err(CliError::Config("order range must start at 1 or above".into()));
            }
            raw.map(f64::round).collect()
        }
    };
    values.dedup();
    Ok(values)
}

struct SweepRow {
    value: f64,
    fields: Result<Vec<String>, String>,
    wall_ms: f64,
}

fn sweep_point(problem: &Problem, axis: Axis, value: f64) -> SweepRow {
    let start = Instant::now();
    let fields = (|| -> Result<Vec<String>, CliError> {
        let p = match axis {
            Axis::Order => Problem { order: value as usize, ..problem.clone() },
            Axis::Delay => problem.with_delay(value)?,
        };
        let fa = build(&p)?;
        let k1 = if fa.psd { fa.k1().map(fmt17).unwrap_or_default() } else { String::new() };
        Ok(vec![
            k1,
            fmt17(fa.max_re),
            fa.psd.to_string(),
            fa.hurwitz.to_string(),
            fmt17(fa.residual),
            fmt17(fa.lambda_min),
            fmt17(fa.lambda_min_zz()?),
            fmt17(fa.k1_unchecked()?),
        ])
    })()
    .map_err(|e| e.to_string());
    SweepRow { value, fields, wall_ms: start.elapsed().as_secs_f64() * 1e3 }
}

const SWEEP_FIELDS: [&str; 8] = ["k1", "max_re", "psd", "hurwitz", "residual", "lambda_min_p", "lambda_min_zz", "schur_min"];

pub fn thread_count() -> Result<usize, CliError> {
    match std::env::var("LK_THREADS") {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| CliError::Config(format!("LK_THREADS must be a non-negative integer, got '{v}'"))),
        Err(_) => Ok(0),
    }
}

pub fn sweep(problem: &Problem, axis: Axis, values: &[f64], out: Option<&Path>) -> Result<(), CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(thread_count()?)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut rows: Vec<SweepRow> = pool.install(|| values.par_iter().map(|&v| sweep_point(problem, axis, v)).collect());
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));

    let baselines = match axis {
        Axis::Delay => Some(baseline_k1(&problem.system, &problem.weights)?),
        Axis::Order => None,
    };
    let mut header = vec![match axis {
        Axis::Order => "N".to_string(),
        Axis::Delay => "h".to_string(),
    }];
    header.extend(SWEEP_FIELDS.iter().map(|s| s.to_string()));
    header.push("wall_ms".into());
    if baselines.is_some() {
        header.extend(["baseline_norm_ratio".to_string(), "baseline_alpha".to_string()]);
    }
    header.push("error".into());

    let table: Vec<Vec<String>> = rows
        .into_iter()
        .map(|row| {
            let mut line = vec![match axis {
                Axis::Order => format!("{}", row.value as usize),
                Axis::Delay => fmt17(row.value),
            }];
            let error = match row.fields {
                Ok(fields) => {
                    line.extend(fields);
                    String::new()
                }
                Err(e) => {
                    line.extend(std::iter::repeat_n(String::new(), SWEEP_FIELDS.len()));
                    e
                }
            };
            line.push(format!("{:.3}", row.wall_ms));
            if let Some(b) = &baselines {
                line.extend([fmt17(b.norm_ratio), fmt17(b.alpha)]);
            }
            line.push(error);
            line
        })
        .collect();
    write_csv(out, &header, &table)
}

fn leg<T: Serialize>(result: Result<T, CliError>) -> Value {
    match result {
        Ok(v) => json!({"ok": true, "result": v}),
        Err(e) => json!({"ok": false, "error": e.to_string()}),
    }
}

fn deviation(a: Option<&Matrix>, b: Option<&Matrix>) -> Value {
    match (a, b) {
        (Some(a), Some(b)) if a.shape() == b.shape() => json!((a - b).amax()),
        _ => Value::Null,
    }
}

pub fn validate(problem: &Problem, out: Option<&Path>) -> Result<(), CliError> {
    let order = problem.order;
    let schemes = [Scheme::LegendreTau, Scheme::ChebCollocation];
    let odes: Vec<Result<FunctionalApprox, CliError>> =
        schemes.iter().map(|&scheme| build(&Problem { scheme, ..problem.clone() })).collect();
    let dlm = DelayLyapunovMatrix::for_weights(&problem.system, &problem.weights).map_err(CliError::from);
    let quad = |rule: QuadRule| -> Result<Matrix, CliError> {
        let dlm = dlm.as_ref().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(assemble_quad(dlm, &problem.weights, rule)?)
    };
    let quads = [quad(QuadRule::ClenshawCurtis(order)), quad(QuadRule::Gauss(order))];

    let n = problem.n();
    let k1s: Vec<Result<f64, CliError>> = odes
        .iter()
        .map(|r| match r {
            Ok(fa) => fa.k1().map_err(CliError::from),
            Err(e) => Err(CliError::Config(e.to_string())),
        })
        .chain(quads.iter().map(|r| match r {
            Ok(p) => k1_quad(p, n).map_err(CliError::from),
            Err(e) => Err(CliError::Config(e.to_string())),
        }))
        .collect();
    let ok_k1: Vec<f64> = k1s.iter().filter_map(|r| r.as_ref().ok().copied()).collect();
    let spread = if ok_k1.is_empty() {
        Value::Null
    } else {
        let max = ok_k1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min = ok_k1.iter().copied().fold(f64::INFINITY, f64::min);
        json!({"abs": max - min, "rel": (max - min) / max.abs()})
    };

    let py: Vec<Option<Matrix>> = odes.iter().map(|r| r.as_ref().ok().map(|fa| fa.p_y())).collect();
    let cc = quads[0].as_ref().ok();
    let labels = ["legendre", "cheb", "cc_quad", "gauss_quad"];
    let mut legs = serde_json::Map::new();
    for (i, r) in odes.iter().enumerate() {
        legs.insert(
            labels[i].into(),
            leg(r.as_ref().map(diagnostics).map_err(|e| CliError::Config(e.to_string()))),
        );
    }
    for (i, r) in quads.iter().enumerate() {
        legs.insert(
            labels[2 + i].into(),
            leg(r.as_ref().map(|p| json!({"dim": p.nrows(), "max_abs": max_abs(p)})).map_err(|e| CliError::Config(e.to_string()))),
        );
    }
    let k1_map: serde_json::Map<String, Value> = labels
        .iter()
        .zip(&k1s)
        .map(|(l, r)| (l.to_string(), leg(r.as_ref().map(|v| *v).map_err(|e| CliError::Config(e.to_string())))))
        .collect();

    let psi = leg(dlm.as_ref().map_err(|e| CliError::Config(e.to_string())).and_then(|d| {
        let h = problem.system.h();
        let grid: Vec<f64> = (0..21).map(|i| -h + 2.0 * h * i as f64 / 20.0).collect();
        Ok(json!({
            "symmetry": d.symmetry_residual(&grid)?,
            "dynamic": d.dynamic_residual(&grid)?,
            "dynamic_scale": d.dynamic_scale(),
            "algebraic": d.algebraic_residual()?,
            "boundary_cond": d.boundary_cond(),
        }))
    }));

    let report = json!({
        "N": order,
        "n": n,
        "h": problem.system.h(),
        "legs": legs,
        "k1": k1_map,
        "k1_spread": spread,
        "deviations": {
            "scale": py[0].as_ref().map(max_abs),
            "legendre_vs_cheb": deviation(py[0].as_ref(), py[1].as_ref()),
            "legendre_vs_cc_quad": deviation(py[0].as_ref(), cc),
            "cheb_vs_cc_quad": deviation(py[1].as_ref(), cc),
        },
        "psi": psi,
    });
    write_json(out, &report)
}
