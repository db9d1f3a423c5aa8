//! Rendering of price results as a human table, csv, or self-describing json.

use serde::{Deserialize, Serialize};
use vheston::PriceResult;

use crate::config::{CliConfig, OutputFormat};

/// One priced contract, as emitted in csv/json.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceRow {
    #[serde(rename = "type")]
    pub kind: String,
    pub maturity: f64,
    pub strike: Option<f64>,
    pub alpha: f64,
    /// Price rounded to the 4 decimals the reference grids carry.
    pub price: f64,
    /// Full-precision price.
    pub price_full: f64,
    pub quad_nodes: usize,
    pub riccati_steps: usize,
    pub upper_truncation: f64,
    pub psi10_re: f64,
    pub psi10_im: f64,
}

impl PriceRow {
    pub fn new(kind: &str, maturity: f64, strike: Option<f64>, alpha: f64, result: &PriceResult) -> Self {
        Self {
            kind: kind.to_string(),
            maturity,
            strike,
            alpha,
            price: round4(result.price),
            price_full: result.price,
            quad_nodes: result.diagnostics.quad_nodes,
            riccati_steps: result.diagnostics.riccati_steps,
            upper_truncation: result.diagnostics.upper_truncation,
            psi10_re: result.diagnostics.psi10.re,
            psi10_im: result.diagnostics.psi10.im,
        }
    }
}

/// Top-level json document: the effective configuration plus all results.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JsonOutput {
    pub config: CliConfig,
    pub results: Vec<PriceRow>,
}

pub fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

fn csv_strike(strike: Option<f64>) -> String {
    strike.map(|k| format!("{k}")).unwrap_or_default()
}

/// Renders rows in the requested format to a string (stdout-ready).
pub fn render(config: &CliConfig, rows: &[PriceRow]) -> String {
    match config.format {
        OutputFormat::Csv => {
            let mut out = String::from("T,K,alpha,type,price\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{:.4}\n",
                    r.maturity,
                    csv_strike(r.strike),
                    r.alpha,
                    r.kind,
                    r.price_full
                ));
            }
            out
        }
        OutputFormat::Json => {
            let doc = JsonOutput { config: config.clone(), results: rows.to_vec() };
            let mut s = serde_json::to_string_pretty(&doc).expect("serializable output");
            s.push('\n');
            s
        }
        OutputFormat::Table => {
            let mut out = String::new();
            out.push_str(&format!(
                "{:<11} {:>8} {:>8} {:>6} {:>12}   {}\n",
                "type", "T", "K", "alpha", "price", "diagnostics"
            ));
            for r in rows {
                out.push_str(&format!(
                    "{:<11} {:>8} {:>8} {:>6} {:>12.4}   nodes={} steps={} psi10={:.6}\n",
                    r.kind,
                    r.maturity,
                    csv_strike(r.strike),
                    r.alpha,
                    r.price_full,
                    r.quad_nodes,
                    r.riccati_steps,
                    r.psi10_re,
                ));
            }
            out
        }
    }
}
