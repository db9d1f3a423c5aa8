//! Command-line pricer for European and geometric Asian options under
//! Volterra-Heston stochastic volatility (classical and rough kernels).
//!
//! Subcommands: `price` a single contract, `table` the full fixed- or
//! floating-strike value grid, `check` the built-in validation suites.
//! Exit codes: 0 success, 1 check failure, 2 usage error, 3 numeric failure.

// `!(x > 0.0)`-style guards are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod checks;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use vheston::{Error as VhError, Kernel, OptionKind, PricingSession, StatePath};

use config::{CliConfig, OutputFormat};
use output::{render, PriceRow};

const EXIT_CHECK_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_NUMERIC: u8 = 3;

#[derive(Parser)]
#[command(
    name = "vheston",
    version,
    about = "European and geometric Asian option pricing under Volterra-Heston volatility"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ContractKind {
    #[value(name = "euro-call")]
    EuroCall,
    #[value(name = "fixed-call")]
    FixedCall,
    #[value(name = "fixed-put")]
    FixedPut,
    #[value(name = "float-call")]
    FloatCall,
    #[value(name = "float-put")]
    FloatPut,
}

impl ContractKind {
    fn to_option_kind(self) -> OptionKind {
        match self {
            ContractKind::EuroCall => OptionKind::EuropeanCall,
            ContractKind::FixedCall => OptionKind::FixedAsianCall,
            ContractKind::FixedPut => OptionKind::FixedAsianPut,
            ContractKind::FloatCall => OptionKind::FloatAsianCall,
            ContractKind::FloatPut => OptionKind::FloatAsianPut,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum WhichTable {
    Fixed,
    Floating,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Suite {
    Parity,
    Consistency,
    Mc,
}

/// Options shared by every subcommand; flags override the config file which
/// overrides the built-in defaults.
#[derive(Args, Debug)]
struct CommonOpts {
    /// Flat key=value config file applied before the flags.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Mean-reversion speed.
    #[arg(long)]
    kappa: Option<f64>,
    /// Long-run variance.
    #[arg(long)]
    theta: Option<f64>,
    /// Volatility of volatility.
    #[arg(long)]
    sigma: Option<f64>,
    /// Spot/variance correlation.
    #[arg(long)]
    rho: Option<f64>,
    /// Risk-free rate.
    #[arg(long)]
    r: Option<f64>,
    /// Spot price.
    #[arg(long)]
    s0: Option<f64>,
    /// Initial variance.
    #[arg(long)]
    v0: Option<f64>,
    /// Roughness level in (0.5, 1]; 1.0 selects the constant kernel.
    #[arg(long)]
    alpha: Option<f64>,
    /// Lower cut of the inversion integral.
    #[arg(long)]
    quad_lower: Option<f64>,
    /// Upper truncation of the inversion integral.
    #[arg(long)]
    quad_upper: Option<f64>,
    /// Quadrature tolerance.
    #[arg(long)]
    quad_tol: Option<f64>,
    /// Riccati grid size (default: maturity-scaled).
    #[arg(long)]
    riccati_steps: Option<usize>,
    /// Output format.
    #[arg(long, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Price a single contract at time 0.
    Price {
        /// Contract type.
        #[arg(long = "type", value_enum)]
        kind: ContractKind,
        /// Maturity in years.
        #[arg(long = "T")]
        maturity: f64,
        /// Strike (strike-bearing contracts only).
        #[arg(long = "K")]
        strike: Option<f64>,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Compute a full value grid over maturities, strikes, and alphas.
    Table {
        /// Which grid: fixed-strike (with strikes) or floating-strike.
        #[arg(long, value_enum)]
        which: WhichTable,
        /// Roughness levels, comma-separated.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Fan maturity/alpha groups out over threads. Results may differ
        /// from the sequential run only at the floating-point level.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        opts: CommonOpts,
    },
    /// Run a validation suite; exits 1 if any check exceeds its threshold.
    Check {
        #[arg(long, value_enum)]
        suite: Suite,
        /// Restrict grid-based suites to one roughness level.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Monte Carlo paths.
        #[arg(long, default_value_t = 100_000)]
        mc_paths: usize,
        /// Monte Carlo time steps.
        #[arg(long, default_value_t = 512)]
        mc_steps: usize,
        /// Monte Carlo seed.
        #[arg(long, default_value_t = 20240611)]
        seed: u64,
        /// Fan grid cells out over threads.
        #[arg(long)]
        parallel: bool,
        #[command(flatten)]
        opts: CommonOpts,
    },
}

fn usage_error(msg: &str) -> ExitCode {
    eprintln!("error: {msg}");
    ExitCode::from(EXIT_USAGE)
}

fn numeric_error(e: &VhError) -> ExitCode {
    eprintln!("numeric failure: {e}");
    ExitCode::from(EXIT_NUMERIC)
}

fn classify(e: VhError) -> ExitCode {
    match e {
        VhError::Domain(msg) => usage_error(&msg),
        other => numeric_error(&other),
    }
}

fn build_config(opts: &CommonOpts) -> Result<CliConfig, String> {
    let mut config = CliConfig::default();
    if let Some(path) = &opts.config {
        config.apply_file(path)?;
    }
    macro_rules! apply {
        ($($field:ident),*) => {
            $(if let Some(v) = opts.$field { config.$field = v; })*
        };
    }
    apply!(kappa, theta, sigma, rho, r, s0, v0, alpha, quad_lower, quad_upper, quad_tol);
    if let Some(v) = opts.riccati_steps {
        config.riccati_steps = Some(v);
    }
    if let Some(v) = opts.format {
        config.format = v;
    }
    // fail fast on out-of-domain parameters
    config.params()?;
    config.kernel()?;
    config.quad()?;
    Ok(config)
}

fn cmd_price(kind: ContractKind, maturity: f64, strike: Option<f64>, opts: &CommonOpts) -> ExitCode {
    let config = match build_config(opts) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let option = kind.to_option_kind();
    if option.needs_strike() {
        match strike {
            Some(k) if k > 0.0 => {}
            Some(k) => return usage_error(&format!("strike must be positive, got {k}")),
            None => return usage_error(&format!("--type {} requires --K", option.label())),
        }
    } else if strike.is_some() {
        return usage_error(&format!("--type {} is floating-strike; remove --K", option.label()));
    }
    if !(maturity > 0.0) {
        return usage_error(&format!("maturity must be positive, got {maturity}"));
    }

    let params = config.params().expect("validated");
    let kernel = config.kernel().expect("validated");
    let quad = config.quad().expect("validated");
    let steps = config.steps_for(&kernel, maturity);
    let session = match PricingSession::new(
        &kernel,
        &params,
        maturity,
        StatePath::initial(&params),
        None,
        quad,
        steps,
    ) {
        Ok(s) => s,
        Err(e) => return classify(e),
    };
    match session.price(option, strike) {
        Ok(result) => {
            let row = PriceRow::new(option.label(), maturity, strike, config.alpha, &result);
            print!("{}", render(&config, &[row]));
            ExitCode::SUCCESS
        }
        Err(e) => classify(e),
    }
}

fn table_rows(
    config: &CliConfig,
    which: WhichTable,
    alphas: &[f64],
    parallel: bool,
) -> Result<Vec<PriceRow>, VhError> {
    let params = config.params().map_err(VhError::Domain)?;
    let quad = config.quad().map_err(VhError::Domain)?;

    let groups: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| checks::TABLE_MATURITIES.iter().map(move |&t| (a, t)))
        .collect();

    type GroupOut = Vec<(OptionKind, Option<f64>, vheston::PriceResult)>;
    let run_group = |&(alpha, maturity): &(f64, f64)| -> Result<GroupOut, VhError> {
        let kernel = Kernel::from_alpha(alpha)?;
        let session = PricingSession::new(
            &kernel,
            &params,
            maturity,
            StatePath::initial(&params),
            None,
            quad,
            config.steps_for(&kernel, maturity),
        )?;
        let mut out = Vec::new();
        match which {
            WhichTable::Fixed => {
                for &strike in &checks::TABLE_STRIKES {
                    let c = session.price(OptionKind::FixedAsianCall, Some(strike))?;
                    let p = session.price(OptionKind::FixedAsianPut, Some(strike))?;
                    out.push((OptionKind::FixedAsianCall, Some(strike), c));
                    out.push((OptionKind::FixedAsianPut, Some(strike), p));
                }
            }
            WhichTable::Floating => {
                let c = session.price(OptionKind::FloatAsianCall, None)?;
                let p = session.price(OptionKind::FloatAsianPut, None)?;
                out.push((OptionKind::FloatAsianCall, None, c));
                out.push((OptionKind::FloatAsianPut, None, p));
            }
        }
        Ok(out)
    };

    let computed: Vec<Result<GroupOut, VhError>> = if parallel {
        groups.par_iter().map(run_group).collect()
    } else {
        groups.iter().map(run_group).collect()
    };

    // assemble call rows then put rows, each ordered by (T, K, alpha)
    let mut calls = Vec::new();
    let mut puts = Vec::new();
    for ((alpha, maturity), group) in groups.iter().zip(computed) {
        for (kind, strike, result) in group? {
            let row = PriceRow::new(kind.label(), *maturity, strike, *alpha, &result);
            if matches!(kind, OptionKind::FixedAsianCall | OptionKind::FloatAsianCall) {
                calls.push(row);
            } else {
                puts.push(row);
            }
        }
    }
    let sort_key = |r: &PriceRow| {
        (
            (r.maturity * 1e6) as i64,
            (r.strike.unwrap_or(0.0) * 1e6) as i64,
            (-r.alpha * 1e6) as i64,
        )
    };
    calls.sort_by_key(sort_key);
    puts.sort_by_key(sort_key);
    calls.extend(puts);
    Ok(calls)
}

fn cmd_table(which: WhichTable, alphas: Option<Vec<f64>>, parallel: bool, opts: &CommonOpts) -> ExitCode {
    let config = match build_config(opts) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let alphas = alphas.unwrap_or_else(|| checks::TABLE_ALPHAS.to_vec());
    for &a in &alphas {
        if let Err(e) = Kernel::from_alpha(a) {
            return usage_error(&e.to_string());
        }
    }
    match table_rows(&config, which, &alphas, parallel) {
        Ok(rows) => {
            print!("{}", render(&config, &rows));
            ExitCode::SUCCESS
        }
        Err(e) => classify(e),
    }
}

fn cmd_check(
    suite: Suite,
    alphas: Option<Vec<f64>>,
    mc_paths: usize,
    mc_steps: usize,
    seed: u64,
    parallel: bool,
    opts: &CommonOpts,
) -> ExitCode {
    let config = match build_config(opts) {
        Ok(c) => c,
        Err(msg) => return usage_error(&msg),
    };
    let alphas = alphas.unwrap_or_else(|| checks::TABLE_ALPHAS.to_vec());
    for &a in &alphas {
        if let Err(e) = Kernel::from_alpha(a) {
            return usage_error(&e.to_string());
        }
    }
    let report = match suite {
        Suite::Parity => checks::run_parity(&config, &alphas, parallel),
        Suite::Consistency => checks::run_consistency(&config),
        Suite::Mc => checks::run_mc(&config, &alphas, mc_paths, mc_steps, seed),
    };
    match report {
        Ok(r) => {
            print!("{}", r.rendered);
            if r.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(EXIT_CHECK_FAILURE)
            }
        }
        Err(e) => classify(e),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        // clap exits 2 on usage errors and 0 for --help/--version
        Err(e) => e.exit(),
    };
    match cli.command {
        Command::Price { kind, maturity, strike, opts } => cmd_price(kind, maturity, strike, &opts),
        Command::Table { which, alphas, parallel, opts } => cmd_table(which, alphas, parallel, &opts),
        Command::Check { suite, alphas, mc_paths, mc_steps, seed, parallel, opts } => {
            cmd_check(suite, alphas, mc_paths, mc_steps, seed, parallel, &opts)
        }
    }
}
