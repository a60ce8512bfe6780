use std::path::Path;

use lk_core::discretize::{CostWeights, FunctionSpec, RfdeSystem, Scheme};
use lk_core::functional::BuildOptions;
use lk_core::linalg::Matrix;
use serde::Deserialize;

use crate::error::CliError;

const EXAMPLE1: &str = include_str!("../configs/example1.json");
const EXAMPLE2: &str = include_str!("../configs/example2.json");
const DELAY_FREE: &str = include_str!("../configs/delay_free.json");

/// Names accepted as `--config builtin:<name>`.
pub const BUILTINS: [&str; 3] = ["example1", "example2", "delay-free"];

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    #[serde(default)]
    pub n: Option<usize>,
    pub a0: Vec<Vec<f64>>,
    pub a1: Vec<Vec<f64>>,
    pub h: f64,
    pub q0: Vec<Vec<f64>>,
    pub q1: Vec<Vec<f64>>,
    #[serde(default)]
    pub q2: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub scheme: Option<String>,
    #[serde(default, rename = "N")]
    pub order: Option<usize>,
    #[serde(default)]
    pub phi: Option<PhiConfig>,
    #[serde(default)]
    pub waive_contract: bool,
    #[serde(default = "default_split")]
    pub split: bool,
}

fn default_split() -> bool {
    true
}

#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub enum PhiConfig {
    Constant(Vec<f64>),
    /// Monomial coefficients in θ, lowest degree first; one vector per degree.
    Polynomial(Vec<Vec<f64>>),
    Named(NamedPhi),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedPhi {
    /// `φ ≡ 1` in every component.
    One,
    /// `sin θ` in every component.
    Sin,
    /// `e^θ` in every component.
    ExpDecay,
}

impl NamedPhi {
    pub fn parse(name: &str) -> Option<Self> {
        match name {
            "one" => Some(NamedPhi::One),
            "sin" => Some(NamedPhi::Sin),
            "exp-decay" => Some(NamedPhi::ExpDecay),
            _ => None,
        }
    }

    pub fn spec(self, n: usize) -> FunctionSpec {
        match self {
            NamedPhi::One => FunctionSpec::Constant(vec![1.0; n]),
            NamedPhi::Sin => FunctionSpec::callable(n, move |t| vec![t.sin(); n]),
            NamedPhi::ExpDecay => FunctionSpec::callable(n, move |t| vec![t.exp(); n]),
        }
    }
}

/// A validated problem ready for the numerical layer.
#[derive(Debug, Clone)]
pub struct Problem {
    pub system: RfdeSystem,
    pub weights: CostWeights,
    pub scheme: Scheme,
    pub order: usize,
    pub options: BuildOptions,
    pub phi: Option<PhiConfig>,
}

impl Problem {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn with_delay(&self, h: f64) -> Result<Self, CliError> {
        let mut p = self.clone();
        p.system = self.system.with_delay(h).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(p)
    }

    pub fn phi_spec(&self) -> Result<FunctionSpec, CliError> {
        let n = self.n();
        let spec = match &self.phi {
            None => NamedPhi::One.spec(n),
            Some(PhiConfig::Named(name)) => name.spec(n),
            Some(PhiConfig::Constant(c)) => {
                if c.len() != n {
                    return Err(CliError::Config(format!("phi.constant has {} entries, expected {n}", c.len())));
                }
                FunctionSpec::Constant(c.clone())
            }
            Some(PhiConfig::Polynomial(coeffs)) => {
                if coeffs.is_empty() {
                    return Err(CliError::Config("phi.polynomial is empty".into()));
                }
                if let Some((k, c)) = coeffs.iter().enumerate().find(|(_, c)| c.len() != n) {
                    return Err(CliError::Config(format!(
                        "phi.polynomial[{k}] has {} entries, expected {n}",
                        c.len()
                    )));
                }
                FunctionSpec::Polynomial(coeffs.clone())
            }
        };
        Ok(spec)
    }
}

fn matrix(name: &str, rows: &[Vec<f64>], n: usize) -> Result<Matrix, CliError> {
    if rows.len() != n {
        return Err(CliError::Config(format!("{name}: {} rows, expected {n}", rows.len())));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            return Err(CliError::Config(format!(
                "{name}: row {i} has {} entries, expected {n}",
                row.len()
            )));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("{name}[{i}][{j}] is not finite")));
        }
    }
    Ok(Matrix::from_fn(n, n, |i, j| rows[i][j]))
}

impl ProblemConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("line {}, column {}: {e}", e.line(), e.column())))
    }

    /// Reads a JSON file, or a built-in config given as `builtin:<name>`.
    pub fn load(source: &str) -> Result<Self, CliError> {
        if let Some(name) = source.strip_prefix("builtin:") {
            let text = match name {
                "example1" => EXAMPLE1,
                "example2" => EXAMPLE2,
                "delay-free" => DELAY_FREE,
                other => {
                    return Err(CliError::Config(format!(
                        "unknown built-in config '{other}' (available: {})",
                        BUILTINS.join(", ")
                    )))
                }
            };
            return Self::parse(text);
        }
        let text = std::fs::read_to_string(Path::new(source)).map_err(|e| CliError::io(source, e))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{source}: {msg}")),
            other => other,
        })
    }

    pub fn into_problem(self) -> Result<Problem, CliError> {
        let n = self.n.unwrap_or(self.a0.len());
        if n == 0 {
            return Err(CliError::Config("system dimension must be at least 1".into()));
        }
        let a0 = matrix("a0", &self.a0, n)?;
        let a1 = matrix("a1", &self.a1, n)?;
        let q0 = matrix("q0", &self.q0, n)?;
        let q1 = matrix("q1", &self.q1, n)?;
        let q2 = match &self.q2 {
            Some(rows) => matrix("q2", rows, n)?,
            None => Matrix::zeros(n, n),
        };
        let system = RfdeSystem::new(a0, a1, self.h).map_err(|e| CliError::Config(e.to_string()))?;
        let weights = CostWeights::new(q0, q1, q2).map_err(|e| CliError::Config(e.to_string()))?;
        let scheme = match &self.scheme {
            Some(s) => s.parse().map_err(|e: lk_core::Error| CliError::Config(e.to_string()))?,
            None => Scheme::LegendreTau,
        };
        Ok(Problem {
            system,
            weights,
            scheme,
            order: self.order.unwrap_or(40),
            options: BuildOptions { split: self.split, waive_contract: self.waive_contract },
            phi: self.phi,
        })
    }
}
