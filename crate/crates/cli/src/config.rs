//! Run configuration: one strictly-validated JSON document.

use crate::expr::{parse_expression, to_polynomial, Expr};
use picard_core::real::NormKind;
use serde::Deserialize;
use std::path::PathBuf;

/// Which solver pipeline to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    RealGrid,
    RealExact,
    Complex,
}

impl std::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "real-grid" => Ok(Mode::RealGrid),
            "real-exact" => Ok(Mode::RealExact),
            "complex" => Ok(Mode::Complex),
            other => Err(format!(
                "unknown mode '{other}' (real-grid | real-exact | complex)"
            )),
        }
    }
}

/// Monomial coefficient: plain real or `[re, im]`.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(untagged)]
pub enum CoeffConfig {
    Real(f64),
    Complex([f64; 2]),
}

impl CoeffConfig {
    pub fn to_complex(self) -> num_complex::Complex64 {
        match self {
            CoeffConfig::Real(re) => num_complex::Complex64::new(re, 0.0),
            CoeffConfig::Complex([re, im]) => num_complex::Complex64::new(re, im),
        }
    }
}

/// One explicit monomial `coeff · t^{t_pow} · Π y_i^{y_pows[i]}`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonomialConfig {
    pub coeff: CoeffConfig,
    #[serde(default)]
    pub t_pow: u32,
    pub y_pows: Vec<u32>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemConfig {
    pub t0: f64,
    /// Imaginary part of the expansion point (complex mode only).
    #[serde(default)]
    pub t0_im: f64,
    pub y0: Vec<f64>,
    /// Imaginary parts of the initial value (complex mode only).
    #[serde(default)]
    pub y0_im: Option<Vec<f64>>,
    pub a: f64,
    pub b: f64,
    /// Right-hand side expressions, one per component (real modes).
    #[serde(default)]
    pub rhs: Vec<String>,
    /// Explicit polynomial field (complex mode; optional in real modes,
    /// overriding the expressions).
    #[serde(default)]
    pub rhs_poly: Option<Vec<Vec<MonomialConfig>>>,
    #[serde(rename = "L")]
    pub lipschitz: Option<f64>,
    #[serde(rename = "M")]
    pub field_bound: Option<f64>,
    /// Declared interval/disc radius overriding `min(a, b/M)`.
    pub alpha: Option<f64>,
    #[serde(default = "default_norm")]
    pub norm: NormConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NormConfig {
    Euclidean,
    Max,
}

fn default_norm() -> NormConfig {
    NormConfig::Euclidean
}

impl NormConfig {
    pub fn to_kind(self) -> NormKind {
        match self {
            NormConfig::Euclidean => NormKind::Euclidean,
            NormConfig::Max => NormKind::MaxAbs,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub n_max: usize,
    /// Grid half-resolution `N` (grid backend).
    pub grid_n: usize,
    /// Series truncation order (exact backends).
    pub k_max: usize,
    /// Multiplicative slack used by the sampled constant checks.
    pub tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            n_max: 8,
            grid_n: 1024,
            k_max: 64,
            tol: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: ProblemConfig,
    pub mode: Mode,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// Configuration error with the offending field named.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| ConfigError(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Semantic checks beyond the schema.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        let dim = p.y0.len();
        if dim == 0 {
            return Err(ConfigError(
                "problem.y0 must have at least one component".into(),
            ));
        }
        if !p.a.is_finite() || p.a <= 0.0 {
            return Err(ConfigError(format!(
                "problem.a must be positive, got {}",
                p.a
            )));
        }
        if !p.b.is_finite() || p.b <= 0.0 {
            return Err(ConfigError(format!(
                "problem.b must be positive, got {}",
                p.b
            )));
        }
        if let Some(l) = p.lipschitz {
            if l < 0.0 {
                return Err(ConfigError(format!(
                    "problem.L must be nonnegative, got {l}"
                )));
            }
        }
        if let Some(m) = p.field_bound {
            if m < 0.0 {
                return Err(ConfigError(format!(
                    "problem.M must be nonnegative, got {m}"
                )));
            }
        }
        if let Some(alpha) = p.alpha {
            if !alpha.is_finite() || alpha <= 0.0 || alpha > p.a {
                return Err(ConfigError(format!(
                    "problem.alpha must lie in (0, a], got {alpha}"
                )));
            }
        }
        if let Some(im) = &p.y0_im {
            if im.len() != dim {
                return Err(ConfigError(
                    "problem.y0_im length must match problem.y0".into(),
                ));
            }
        }
        match self.mode {
            Mode::Complex => {
                let poly = p
                    .rhs_poly
                    .as_ref()
                    .ok_or_else(|| ConfigError("complex mode requires problem.rhs_poly".into()))?;
                validate_poly(poly, dim)?;
            }
            Mode::RealGrid | Mode::RealExact => {
                if let Some(poly) = &p.rhs_poly {
                    validate_poly(poly, dim)?;
                } else {
                    if p.rhs.len() != dim {
                        return Err(ConfigError(format!(
                            "problem.rhs must have {dim} component expressions, got {}",
                            p.rhs.len()
                        )));
                    }
                    let parsed = self.parse_rhs()?;
                    if self.mode == Mode::RealExact && to_polynomial(&parsed, dim).is_none() {
                        return Err(ConfigError(
                            "real-exact mode requires a polynomial problem.rhs \
                             (no sin/cos/exp/division/negative powers)"
                                .into(),
                        ));
                    }
                }
            }
        }
        if self.solver.grid_n < 16 {
            return Err(ConfigError("solver.grid_n must be at least 16".into()));
        }
        if self.solver.k_max < 4 || self.solver.k_max > 64 {
            return Err(ConfigError("solver.k_max must lie in 4..=64".into()));
        }
        Ok(())
    }

    pub fn parse_rhs(&self) -> Result<Vec<Expr>, ConfigError> {
        let dim = self.problem.y0.len();
        self.problem
            .rhs
            .iter()
            .enumerate()
            .map(|(i, src)| {
                parse_expression(src, dim)
                    .map_err(|e| ConfigError(format!("problem.rhs[{i}]: {e}")))
            })
            .collect()
    }
}

fn validate_poly(poly: &[Vec<MonomialConfig>], dim: usize) -> Result<(), ConfigError> {
    if poly.len() != dim {
        return Err(ConfigError(format!(
            "problem.rhs_poly must have {dim} components, got {}",
            poly.len()
        )));
    }
    for (i, comp) in poly.iter().enumerate() {
        for (k, mono) in comp.iter().enumerate() {
            if mono.y_pows.len() != dim {
                return Err(ConfigError(format!(
                    "problem.rhs_poly[{i}][{k}].y_pows must have {dim} entries"
                )));
            }
        }
    }
    Ok(())
}
