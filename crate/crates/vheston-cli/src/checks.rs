//! The `check` suites: parity residuals, transform-route consistency, and
//! the Monte Carlo cross-check. Each returns whether every cell stayed
//! within its threshold.

use num_complex::Complex64;
use rayon::prelude::*;
use vheston::{classical, mc, psi0, Kernel, OptionKind, PricingSession, StatePath, TransformArg};

use crate::config::CliConfig;

pub const TABLE_MATURITIES: [f64; 9] = [0.2, 0.4, 0.5, 1.0, 1.5, 2.0, 3.0, 8.0, 12.0];
pub const TABLE_STRIKES: [f64; 5] = [90.0, 95.0, 100.0, 105.0, 110.0];
pub const TABLE_ALPHAS: [f64; 3] = [1.00, 0.75, 0.60];

pub const PARITY_THRESHOLD: f64 = 1e-8;
pub const CONSISTENCY_THRESHOLD: f64 = 1e-6;
pub const MC_ALLOWANCE: f64 = 0.10;

fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub struct CheckReport {
    pub ok: bool,
    pub rendered: String,
}

/// Put-call parity residuals over the full value grids.
pub fn run_parity(config: &CliConfig, alphas: &[f64], parallel: bool) -> Result<CheckReport, vheston::Error> {
    let params = config.params().map_err(vheston::Error::Domain)?;
    let quad = config.quad().map_err(vheston::Error::Domain)?;

    let cells: Vec<(f64, f64)> = alphas
        .iter()
        .flat_map(|&a| TABLE_MATURITIES.iter().map(move |&t| (a, t)))
        .collect();

    let run_cell = |&(alpha, maturity): &(f64, f64)| -> Result<(f64, f64, f64, f64), vheston::Error> {
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
        let psi10 = session.psi10()?.re;
        let discount = (-params.r * maturity).exp();
        let mut worst_fixed = 0.0f64;
        for &strike in &TABLE_STRIKES {
            let call = session.price(OptionKind::FixedAsianCall, Some(strike))?.price;
            let put = session.price(OptionKind::FixedAsianPut, Some(strike))?.price;
            worst_fixed = worst_fixed.max((call - put - discount * (psi10 - strike)).abs());
        }
        let fc = session.price(OptionKind::FloatAsianCall, None)?.price;
        let fp = session.price(OptionKind::FloatAsianPut, None)?.price;
        let float_res = (fc - fp - (params.s0 - discount * psi10)).abs();
        Ok((alpha, maturity, worst_fixed, float_res))
    };

    let results: Vec<Result<(f64, f64, f64, f64), vheston::Error>> = if parallel {
        cells.par_iter().map(run_cell).collect()
    } else {
        cells.iter().map(run_cell).collect()
    };

    let mut ok = true;
    let mut out = String::from("alpha      T   max fixed residual   floating residual\n");
    for r in results {
        let (alpha, maturity, fixed, float) = r?;
        let pass = fixed < PARITY_THRESHOLD && float < PARITY_THRESHOLD;
        ok &= pass;
        out.push_str(&format!(
            "{alpha:<6} {maturity:>5}        {fixed:>12.3e}        {float:>12.3e}{}\n",
            if pass { "" } else { "   <-- VIOLATION" }
        ));
    }
    out.push_str(&format!("threshold {PARITY_THRESHOLD:.0e}: {}\n", if ok { "all passed" } else { "violations found" }));
    Ok(CheckReport { ok, rendered: out })
}

/// Transform-route equality for the constant kernel: the Volterra form
/// against the independent ODE representation, over a real (s, w) grid.
pub fn run_consistency(config: &CliConfig) -> Result<CheckReport, vheston::Error> {
    let params = config.params().map_err(vheston::Error::Domain)?;
    let kernel = Kernel::Classical;
    let n_steps = 8192;
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut out = String::from("   T    max |psi0_VH - psi0_CH| over (s,w) grid\n");
    let mut ok = true;
    for maturity in [0.2, 1.0, 3.0] {
        let mut max_dev = 0.0f64;
        for &s in &grid {
            for &w in &grid {
                if s + w > 1.0 {
                    continue;
                }
                let arg = TransformArg::new(c64(s, 0.0), c64(w, 0.0), maturity)?;
                let vh = psi0(&arg, &kernel, &params, n_steps)?;
                let ch = classical::classical_psi0(&arg, &params, n_steps)?;
                max_dev = max_dev.max((vh - ch).norm());
            }
        }
        let pass = max_dev < CONSISTENCY_THRESHOLD;
        ok &= pass;
        out.push_str(&format!(
            "{maturity:>5}    {max_dev:.3e}{}\n",
            if pass { "" } else { "   <-- VIOLATION" }
        ));
    }
    out.push_str(&format!(
        "threshold {CONSISTENCY_THRESHOLD:.0e}: {}\n",
        if ok { "all passed" } else { "violations found" }
    ));
    Ok(CheckReport { ok, rendered: out })
}

/// Monte Carlo vs analytic prices on six cells spanning both tables.
pub fn run_mc(
    config: &CliConfig,
    alphas: &[f64],
    n_paths: usize,
    n_time: usize,
    seed: u64,
) -> Result<CheckReport, vheston::Error> {
    let params = config.params().map_err(vheston::Error::Domain)?;
    let quad = config.quad().map_err(vheston::Error::Domain)?;
    let spec = mc::SimSpec::new(n_paths, n_time, seed, true)?;

    let cells: [(OptionKind, Option<f64>, f64, f64); 6] = [
        (OptionKind::FixedAsianCall, Some(90.0), 0.2, 1.00),
        (OptionKind::FixedAsianPut, Some(100.0), 1.0, 0.75),
        (OptionKind::FixedAsianCall, Some(105.0), 2.0, 0.60),
        (OptionKind::FloatAsianPut, None, 0.5, 1.00),
        (OptionKind::FloatAsianCall, None, 3.0, 0.75),
        (OptionKind::FloatAsianPut, None, 1.0, 0.60),
    ];

    let mut out = String::from("cell                                analytic        mc        se      |dev|   tolerance\n");
    let mut ok = true;
    let mut ran_any = false;
    for (kind, strike, maturity, alpha) in cells {
        if !alphas.contains(&alpha) {
            continue;
        }
        ran_any = true;
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
        let analytic = session.price(kind, strike)?.price;
        let est = mc::mc_price(kind, strike, maturity, &kernel, &params, &spec)?;
        let tol = 3.0 * est.std_error + MC_ALLOWANCE;
        let dev = (est.estimate - analytic).abs();
        let pass = dev < tol;
        ok &= pass;
        out.push_str(&format!(
            "{:<11} alpha={alpha:<5} T={maturity:<5} {analytic:>10.4} {:>10.4} {:>8.4} {dev:>10.4} {tol:>10.4}{}\n",
            kind.label(),
            est.estimate,
            est.std_error,
            if pass { "" } else { "   <-- VIOLATION" }
        ));
    }
    if !ran_any {
        out.push_str("no cells selected for the requested alpha\n");
    }
    out.push_str(&format!(
        "tolerance = 3*SE + {MC_ALLOWANCE} (time-discretization allowance at {n_time} steps): {}\n",
        if ok { "all passed" } else { "violations found" }
    ));
    Ok(CheckReport { ok, rendered: out })
}
