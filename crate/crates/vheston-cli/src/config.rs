//! Effective run configuration: defaults, optional key=value config file,
//! explicit flags — later layers win.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use vheston::{Kernel, ModelParams, QuadRule, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Table,
    Csv,
    Json,
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            OutputFormat::Table => "table",
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        };
        f.write_str(s)
    }
}

/// Everything a pricing run needs; serializable so json output can embed it
/// and round-trip.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CliConfig {
    pub kappa: f64,
    pub theta: f64,
    pub sigma: f64,
    pub rho: f64,
    pub r: f64,
    pub s0: f64,
    pub v0: f64,
    /// Roughness level; 1.0 selects the constant kernel.
    pub alpha: f64,
    pub quad_lower: f64,
    pub quad_upper: f64,
    pub quad_tol: f64,
    /// Riccati grid size; `None` selects the maturity-scaled default.
    pub riccati_steps: Option<usize>,
    pub format: OutputFormat,
}

impl Default for CliConfig {
    fn default() -> Self {
        let p = ModelParams::default();
        let q = QuadratureSpec::default();
        Self {
            kappa: p.kappa,
            theta: p.theta,
            sigma: p.sigma,
            rho: p.rho,
            r: p.r,
            s0: p.s0,
            v0: p.v0,
            alpha: 1.0,
            quad_lower: q.lower,
            quad_upper: q.upper,
            quad_tol: q.tol,
            riccati_steps: None,
            format: OutputFormat::Table,
        }
    }
}

impl CliConfig {
    pub fn params(&self) -> Result<ModelParams, String> {
        ModelParams::new(self.kappa, self.theta, self.sigma, self.rho, self.r, self.s0, self.v0)
            .map_err(|e| e.to_string())
    }

    pub fn kernel(&self) -> Result<Kernel, String> {
        Kernel::from_alpha(self.alpha).map_err(|e| e.to_string())
    }

    pub fn quad(&self) -> Result<QuadratureSpec, String> {
        QuadratureSpec::new(self.quad_lower, self.quad_upper, QuadRule::Adaptive, 4000, self.quad_tol)
            .map_err(|e| e.to_string())
    }

    pub fn steps_for(&self, kernel: &Kernel, maturity: f64) -> usize {
        self.riccati_steps
            .unwrap_or_else(|| vheston::default_steps(kernel, maturity))
    }

    /// Applies one `key=value` override.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), String> {
        let bad = |v: &str, k: &str| format!("invalid value '{v}' for key '{k}'");
        match key {
            "kappa" => self.kappa = value.parse().map_err(|_| bad(value, key))?,
            "theta" => self.theta = value.parse().map_err(|_| bad(value, key))?,
            "sigma" => self.sigma = value.parse().map_err(|_| bad(value, key))?,
            "rho" => self.rho = value.parse().map_err(|_| bad(value, key))?,
            "r" => self.r = value.parse().map_err(|_| bad(value, key))?,
            "s0" => self.s0 = value.parse().map_err(|_| bad(value, key))?,
            "v0" => self.v0 = value.parse().map_err(|_| bad(value, key))?,
            "alpha" => self.alpha = value.parse().map_err(|_| bad(value, key))?,
            "quad_lower" => self.quad_lower = value.parse().map_err(|_| bad(value, key))?,
            "quad_upper" => self.quad_upper = value.parse().map_err(|_| bad(value, key))?,
            "quad_tol" => self.quad_tol = value.parse().map_err(|_| bad(value, key))?,
            "riccati_steps" => {
                self.riccati_steps = Some(value.parse().map_err(|_| bad(value, key))?)
            }
            "format" => {
                self.format = match value {
                    "table" => OutputFormat::Table,
                    "csv" => OutputFormat::Csv,
                    "json" => OutputFormat::Json,
                    other => return Err(bad(other, key)),
                }
            }
            other => return Err(format!("unknown config key '{other}'")),
        }
        Ok(())
    }

    /// Loads `key=value` lines; '#' starts a comment, blank lines ignored.
    pub fn apply_file(&mut self, path: &Path) -> Result<(), String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config file {}: {e}", path.display()))?;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(format!(
                    "{}:{}: expected key=value, got '{raw}'",
                    path.display(),
                    lineno + 1
                ));
            };
            self.set(key.trim(), value.trim())?;
        }
        Ok(())
    }
}
