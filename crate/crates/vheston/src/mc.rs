//! Monte Carlo simulation of the Volterra-Heston system, used as a
//! loose-tolerance cross-check of the analytic prices.
//!
//! The variance path uses an explicit Euler product-integration scheme whose
//! kernel weights `∫_{t_j}^{t_{j+1}} K(t_n − s) ds` are exact (classical:
//! `Δt`; fractional: differences of power functions), with full truncation
//! `ν⁺ = max(ν, 0)` inside every square root and drift. Log-spot follows
//! Euler with correlated increments. Everything is deterministic given the
//! seed: path blocks draw from counter-based substreams and the reduction is
//! ordered by block index, so thread scheduling cannot change the estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, ModelParams};
use crate::pricing::OptionKind;

/// Simulation size, seed, and variance-reduction switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimSpec {
    pub n_paths: usize,
    pub n_time: usize,
    pub seed: u64,
    pub antithetic: bool,
}

impl SimSpec {
    pub fn new(n_paths: usize, n_time: usize, seed: u64, antithetic: bool) -> Result<Self> {
        if n_paths < 2 {
            return Err(Error::domain(format!("n_paths must be >= 2, got {n_paths}")));
        }
        if n_time < 8 {
            return Err(Error::domain(format!("n_time must be >= 8, got {n_time}")));
        }
        Ok(Self { n_paths, n_time, seed, antithetic })
    }
}

/// Materialized ensemble of (log S, ν) paths on a uniform grid.
#[derive(Debug, Clone)]
pub struct PathEnsemble {
    times: Vec<f64>,
    log_spot: Vec<f64>,
    variance: Vec<f64>,
    n_paths: usize,
}

impl PathEnsemble {
    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn log_spot_path(&self, path: usize) -> &[f64] {
        let n = self.times.len();
        &self.log_spot[path * n..(path + 1) * n]
    }

    pub fn variance_path(&self, path: usize) -> &[f64] {
        let n = self.times.len();
        &self.variance[path * n..(path + 1) * n]
    }
}

/// Estimate with its standard error and the number of independent samples
/// (pairs count as one sample under antithetic sampling).
#[derive(Debug, Clone, Copy)]
pub struct McEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub n_samples: usize,
}

/// Exact panel weights `w_m = ∫_{t_{m−1}}^{t_m} K(u) du`, m = 1..n.
fn kernel_weights(kernel: &Kernel, dt: f64, n_time: usize) -> Vec<f64> {
    match kernel {
        Kernel::Classical => vec![dt; n_time],
        Kernel::Fractional { alpha } => {
            let ga1 = gamma(alpha + 1.0);
            (1..=n_time)
                .map(|m| {
                    let t1 = dt * m as f64;
                    let t0 = dt * (m - 1) as f64;
                    (t1.powf(*alpha) - t0.powf(*alpha)) / ga1
                })
                .collect()
        }
    }
}

/// Scratch space reused across the paths of one block.
struct PathScratch {
    /// impulse g_j = κ(θ−ν_j⁺) + σ√(ν_j⁺) ΔB_j/Δt
    impulses: Vec<f64>,
    normals: Vec<f64>,
}

struct PathOutput {
    /// (1/T)∫₀^T log S_u du by trapezoid
    log_mean: f64,
    terminal_log_spot: f64,
}

#[allow(clippy::too_many_arguments)]
fn run_path(
    params: &ModelParams,
    weights: &[f64],
    classical: bool,
    dt: f64,
    maturity: f64,
    scratch: &mut PathScratch,
    flip: bool,
    mut record: Option<(&mut Vec<f64>, &mut Vec<f64>)>,
) -> PathOutput {
    let n = weights.len();
    let sign = if flip { -1.0 } else { 1.0 };
    let rho = params.rho;
    let rho_perp = (1.0 - rho * rho).sqrt();
    let sqrt_dt = dt.sqrt();

    let mut log_s = params.s0.ln();
    let mut nu = params.v0;
    let mut impulse_sum = 0.0f64;
    // trapezoid accumulation of log S over the grid
    let mut log_integral = 0.5 * log_s;

    if let Some((ls, vs)) = record.as_mut() {
        ls.push(log_s);
        vs.push(nu);
    }

    for step in 0..n {
        let nu_plus = nu.max(0.0);
        let vol = nu_plus.sqrt();
        let z1 = sign * scratch.normals[2 * step];
        let z2 = sign * scratch.normals[2 * step + 1];
        let db_nu = z1 * sqrt_dt;
        let db_s = (rho * z1 + rho_perp * z2) * sqrt_dt;

        scratch.impulses[step] =
            params.kappa * (params.theta - nu_plus) + params.sigma * vol * db_nu / dt;

        log_s += (params.r - 0.5 * nu_plus) * dt + vol * db_s;

        // variance at t_{step+1} from the full convolution against the impulses
        nu = if classical {
            impulse_sum += scratch.impulses[step];
            params.v0 + dt * impulse_sum
        } else {
            let mut acc = 0.0;
            for j in 0..=step {
                acc += weights[step - j] * scratch.impulses[j];
            }
            params.v0 + acc
        };

        log_integral += if step + 1 == n { 0.5 * log_s } else { log_s };
        if let Some((ls, vs)) = record.as_mut() {
            ls.push(log_s);
            vs.push(nu);
        }
    }

    PathOutput {
        log_mean: log_integral * dt / maturity,
        terminal_log_spot: log_s,
    }
}

/// Runs the block-parallel engine, reducing a per-path statistic
/// `f(log-mean of log S, log S_T)` to (mean, SE).
fn run_monte_carlo<F>(
    kernel: &Kernel,
    params: &ModelParams,
    maturity: f64,
    spec: &SimSpec,
    f: F,
) -> Result<McEstimate>
where
    F: Fn(f64, f64) -> f64 + Sync,
{
    params.validate()?;
    if !(maturity > 0.0) {
        return Err(Error::domain(format!("maturity must be positive, got {maturity}")));
    }
    let n_time = spec.n_time;
    let dt = maturity / n_time as f64;
    let weights = kernel_weights(kernel, dt, n_time);
    let classical = kernel.is_classical();

    // one unit = one independent sample (a pair under antithetic sampling)
    let n_units = if spec.antithetic { spec.n_paths / 2 } else { spec.n_paths };
    if n_units == 0 {
        return Err(Error::domain("antithetic sampling needs at least 2 paths".to_string()));
    }
    const BLOCK: usize = 2048;
    let n_blocks = n_units.div_ceil(BLOCK);

    let block_stats: Vec<(f64, f64, usize)> = (0..n_blocks)
        .into_par_iter()
        .map(|block| {
            let lo = block * BLOCK;
            let hi = ((block + 1) * BLOCK).min(n_units);
            let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
            rng.set_stream(block as u64 + 1);
            let mut scratch = PathScratch {
                impulses: vec![0.0; n_time],
                normals: vec![0.0; 2 * n_time],
            };
            let mut sum = 0.0f64;
            let mut sum_sq = 0.0f64;
            for _ in lo..hi {
                for z in scratch.normals.iter_mut() {
                    *z = rng.sample(StandardNormal);
                }
                let out = run_path(params, &weights, classical, dt, maturity, &mut scratch, false, None);
                let mut sample = f(out.log_mean, out.terminal_log_spot);
                if spec.antithetic {
                    let fl =
                        run_path(params, &weights, classical, dt, maturity, &mut scratch, true, None);
                    sample = 0.5 * (sample + f(fl.log_mean, fl.terminal_log_spot));
                }
                sum += sample;
                sum_sq += sample * sample;
            }
            (sum, sum_sq, hi - lo)
        })
        .collect();

    let mut sum = 0.0f64;
    let mut sum_sq = 0.0f64;
    let mut count = 0usize;
    for (s, s2, c) in block_stats {
        sum += s;
        sum_sq += s2;
        count += c;
    }
    let n = count as f64;
    let mean = sum / n;
    let var = ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0);
    Ok(McEstimate {
        estimate: mean,
        std_error: (var / n).sqrt(),
        n_samples: count,
    })
}

/// Materializes a full ensemble (small runs only: memory is
/// `n_paths × (n_time + 1) × 2` doubles).
pub fn simulate_paths(
    kernel: &Kernel,
    params: &ModelParams,
    maturity: f64,
    spec: &SimSpec,
) -> Result<PathEnsemble> {
    params.validate()?;
    if !(maturity > 0.0) {
        return Err(Error::domain(format!("maturity must be positive, got {maturity}")));
    }
    let nodes = spec.n_time + 1;
    if spec.n_paths.saturating_mul(nodes) > 1 << 26 {
        return Err(Error::domain(
            "ensemble too large to materialize; use the streaming estimators".to_string(),
        ));
    }
    let dt = maturity / spec.n_time as f64;
    let weights = kernel_weights(kernel, dt, spec.n_time);
    let classical = kernel.is_classical();

    let mut log_spot = Vec::with_capacity(spec.n_paths * nodes);
    let mut variance = Vec::with_capacity(spec.n_paths * nodes);
    let mut scratch = PathScratch {
        impulses: vec![0.0; spec.n_time],
        normals: vec![0.0; 2 * spec.n_time],
    };

    const BLOCK: usize = 2048;
    let mut rng = ChaCha12Rng::seed_from_u64(spec.seed);
    let mut drawn_in_block = 0usize;
    let mut block = 0u64;
    rng.set_stream(1);
    for path in 0..spec.n_paths {
        // mirror the streaming engine's substream layout: antithetic pairs
        // share one draw, blocks of 2048 units advance the stream counter
        let flip = spec.antithetic && path % 2 == 1;
        if !flip {
            if drawn_in_block == BLOCK {
                block += 1;
                rng = ChaCha12Rng::seed_from_u64(spec.seed);
                rng.set_stream(block + 1);
                drawn_in_block = 0;
            }
            for z in scratch.normals.iter_mut() {
                *z = rng.sample(StandardNormal);
            }
            drawn_in_block += 1;
        }
        let mut ls = Vec::with_capacity(nodes);
        let mut vs = Vec::with_capacity(nodes);
        run_path(
            params,
            &weights,
            classical,
            dt,
            maturity,
            &mut scratch,
            flip,
            Some((&mut ls, &mut vs)),
        );
        log_spot.extend_from_slice(&ls);
        variance.extend_from_slice(&vs);
    }

    Ok(PathEnsemble {
        times: (0..nodes).map(|i| i as f64 * dt).collect(),
        log_spot,
        variance,
        n_paths: spec.n_paths,
    })
}

/// Discounted Monte Carlo price of a time-0 contract, with standard error.
pub fn mc_price(
    option: OptionKind,
    strike: Option<f64>,
    maturity: f64,
    kernel: &Kernel,
    params: &ModelParams,
    spec: &SimSpec,
) -> Result<McEstimate> {
    match (option.needs_strike(), strike) {
        (true, Some(k)) if k > 0.0 => {}
        (true, _) => {
            return Err(Error::domain(format!("{} requires a positive strike", option.label())))
        }
        (false, None) => {}
        (false, Some(_)) => {
            return Err(Error::domain(format!("{} takes no strike", option.label())))
        }
    }
    let discount = (-params.r * maturity).exp();
    let k = strike.unwrap_or(0.0);
    run_monte_carlo(kernel, params, maturity, spec, move |log_mean, terminal_log| {
        let g = log_mean.exp();
        let s_t = terminal_log.exp();
        let payoff = match option {
            OptionKind::EuropeanCall => (s_t - k).max(0.0),
            OptionKind::FixedAsianCall => (g - k).max(0.0),
            OptionKind::FixedAsianPut => (k - g).max(0.0),
            OptionKind::FloatAsianCall => (s_t - g).max(0.0),
            OptionKind::FloatAsianPut => (g - s_t).max(0.0),
        };
        discount * payoff
    })
}

/// Undiscounted mean of the terminal spot (martingale diagnostic:
/// should match `S₀ e^{rT}` up to sampling error).
pub fn mc_terminal_spot_mean(
    kernel: &Kernel,
    params: &ModelParams,
    maturity: f64,
    spec: &SimSpec,
) -> Result<McEstimate> {
    run_monte_carlo(kernel, params, maturity, spec, |_, terminal_log| terminal_log.exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::forward_variance_0;

    fn params() -> ModelParams {
        ModelParams::default()
    }

    #[test]
    fn spec_validation() {
        assert!(SimSpec::new(1, 64, 7, false).is_err());
        assert!(SimSpec::new(100, 4, 7, false).is_err());
        assert!(SimSpec::new(100, 64, 7, true).is_ok());
    }

    #[test]
    fn seed_determinism() {
        let spec = SimSpec::new(4000, 32, 42, false).unwrap();
        let k = Kernel::fractional(0.75).unwrap();
        let a = mc_price(OptionKind::FixedAsianCall, Some(100.0), 1.0, &k, &params(), &spec).unwrap();
        let b = mc_price(OptionKind::FixedAsianCall, Some(100.0), 1.0, &k, &params(), &spec).unwrap();
        assert_eq!(a.estimate.to_bits(), b.estimate.to_bits());
        assert_eq!(a.std_error.to_bits(), b.std_error.to_bits());
    }

    #[test]
    fn deterministic_variance_path_tracks_forward_variance() {
        // sigma ~ 0 kills the noise; the Euler variance path must then follow
        // xi0 with monotone improvement under time refinement
        let p = ModelParams { sigma: 1e-12, ..params() };
        for kernel in [Kernel::Classical, Kernel::fractional(0.75).unwrap()] {
            let mut prev_err = f64::INFINITY;
            for n_time in [16, 32, 64, 128] {
                let spec = SimSpec::new(2, n_time, 1, false).unwrap();
                let ens = simulate_paths(&kernel, &p, 1.0, &spec).unwrap();
                let path = ens.variance_path(0);
                let mut max_err = 0.0f64;
                for (i, &t) in ens.times().iter().enumerate() {
                    let xi = forward_variance_0(&kernel, &p, t).unwrap();
                    max_err = max_err.max((path[i] - xi).abs());
                }
                assert!(
                    max_err < prev_err + 1e-15,
                    "kernel alpha={}, refinement did not improve: {prev_err:e} -> {max_err:e}",
                    kernel.alpha()
                );
                prev_err = max_err;
            }
            assert!(prev_err < 5e-3, "kernel alpha={} final error {prev_err}", kernel.alpha());
        }
    }

    #[test]
    fn increment_correlation_matches_rho() {
        // reconstruct the Brownian increments from a classical ensemble and
        // check their sample correlation
        for (rho, tol_label) in [(0.0, "zero"), (-0.64, "negative")] {
            let p = ModelParams { rho, ..params() };
            let n_paths = 256;
            let n_time = 64;
            let spec = SimSpec::new(n_paths, n_time, 11, false).unwrap();
            let ens = simulate_paths(&Kernel::Classical, &p, 1.0, &spec).unwrap();
            let dt = 1.0 / n_time as f64;
            let (mut sxy, mut sxx, mut syy) = (0.0f64, 0.0f64, 0.0f64);
            let mut n_used = 0usize;
            for path in 0..n_paths {
                let ls = ens.log_spot_path(path);
                let vs = ens.variance_path(path);
                for i in 0..n_time {
                    let nu = vs[i].max(0.0);
                    if nu < 1e-8 {
                        continue;
                    }
                    let vol = nu.sqrt();
                    let db_s = (ls[i + 1] - ls[i] - (p.r - 0.5 * nu) * dt) / vol;
                    let db_nu = (vs[i + 1] - vs[i] - p.kappa * (p.theta - nu) * dt) / (p.sigma * vol);
                    sxy += db_s * db_nu;
                    sxx += db_s * db_s;
                    syy += db_nu * db_nu;
                    n_used += 1;
                }
            }
            let corr = sxy / (sxx.sqrt() * syy.sqrt());
            let tol = 3.0 / (n_used as f64).sqrt();
            assert!(
                (corr - rho).abs() < tol,
                "{tol_label} rho: sample correlation {corr:.4} vs {rho} (tol {tol:.4})"
            );
        }
    }

    #[test]
    fn terminal_spot_is_martingale() {
        let p = params();
        let spec = SimSpec::new(100_000, 64, 3, false).unwrap();
        let est = mc_terminal_spot_mean(&Kernel::Classical, &p, 1.0, &spec).unwrap();
        let target = p.s0 * (p.r * 1.0f64).exp();
        assert!(
            (est.estimate - target).abs() < 3.0 * est.std_error,
            "mean S_T {} +- {} vs {}",
            est.estimate,
            est.std_error,
            target
        );
    }

    #[test]
    fn zero_strike_fixed_call_matches_discounted_geometric_mean() {
        let p = params();
        let spec = SimSpec::new(60_000, 64, 5, true).unwrap();
        let k = Kernel::Classical;
        let est = mc_price(OptionKind::FixedAsianCall, Some(1e-12), 1.0, &k, &p, &spec).unwrap();
        // analytic target from the transform module: e^{-rT} psi0(1,0)
        let arg = crate::riccati::TransformArg::new(
            num_complex::Complex64::new(1.0, 0.0),
            num_complex::Complex64::new(0.0, 0.0),
            1.0,
        )
        .unwrap();
        let psi10 = crate::transform::psi0(&arg, &k, &p, 1024).unwrap().re;
        let target = (-p.r * 1.0f64).exp() * psi10;
        // 3 standard errors plus a small time-discretization allowance
        let tol = 3.0 * est.std_error + 0.05;
        assert!(
            (est.estimate - target).abs() < tol,
            "K->0 fixed call {} +- {} vs {}",
            est.estimate,
            est.std_error,
            target
        );
    }

    #[test]
    fn antithetic_does_not_hurt() {
        let p = params();
        let k = Kernel::Classical;
        let plain = SimSpec::new(40_000, 32, 9, false).unwrap();
        let anti = SimSpec::new(40_000, 32, 9, true).unwrap();
        for (kind, strike) in [
            (OptionKind::FixedAsianCall, Some(100.0)),
            (OptionKind::FloatAsianPut, None),
        ] {
            let a = mc_price(kind, strike, 0.5, &k, &p, &plain).unwrap();
            let b = mc_price(kind, strike, 0.5, &k, &p, &anti).unwrap();
            assert!(
                b.std_error <= a.std_error * 1.05,
                "{}: antithetic SE {} vs plain SE {}",
                kind.label(),
                b.std_error,
                a.std_error
            );
        }
    }

    #[test]
    fn ensemble_size_guard() {
        let spec = SimSpec::new(10_000_000, 1024, 1, false).unwrap();
        assert!(simulate_paths(&Kernel::Classical, &params(), 1.0, &spec).is_err());
    }
}
