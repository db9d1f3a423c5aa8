//! Characteristic functions and the joint conditional Fourier transform
//! `ψ_t(s, w) = E[exp(s log G_{t,T} + w log S_T) | F_t]`.
//!
//! Two equivalent routes are implemented:
//!
//! - `psi0`: the resolvent-free time-0 form
//!   `exp(s(log S₀ + rT/2) + w(log S₀ + rT) + ∫₀^T ν₀Q(τ) + κ(θ−ν₀)φ₂(τ) dτ)`.
//!   No resolvent (hence no Mittag-Leffler call) appears, which is what makes
//!   the fractional kernel cheap to price.
//! - `psi_t`: the general-t forward-variance form
//!   `exp(s((T−t)/T·log S_t + r(T−t)²/2T) + w(log S_t + r(T−t)) + ∫_t^T Q(T−u)ξ_t(u)du)`
//!   with a user-supplied forward variance curve `ξ_t`.
//!
//! Their agreement at `t = 0` is one of the executable consistency checks.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{forward_variance_0, Kernel, ModelParams};
use crate::riccati::{solve_phi2, solve_phi2_span, TransformArg};

/// Sampled forward variance curve `ξ_t(u)` on `[t, T]`, linearly interpolated.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardCurve {
    t: f64,
    times: Vec<f64>,
    values: Vec<f64>,
}

impl ForwardCurve {
    pub fn new(t: f64, times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() < 2 || times.len() != values.len() {
            return Err(Error::domain(
                "forward curve needs at least two (time, value) samples".to_string(),
            ));
        }
        if times[0] < t - 1e-12 {
            return Err(Error::domain(format!(
                "curve must start at or after the valuation time {t}, starts at {}",
                times[0]
            )));
        }
        for pair in times.windows(2) {
            if pair[1] <= pair[0] {
                return Err(Error::domain("curve times must be strictly increasing".to_string()));
            }
        }
        if values.iter().any(|v| !(*v >= 0.0)) {
            return Err(Error::domain("forward variance values must be nonnegative".to_string()));
        }
        Ok(Self { t, times, values })
    }

    /// Samples the time-0 curve `ξ₀` on `n_points` uniform nodes of `[0, T]`.
    pub fn sampled_initial(kernel: &Kernel, params: &ModelParams, maturity: f64, n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::domain("need at least two sample points".to_string()));
        }
        let h = maturity / (n_points - 1) as f64;
        let mut times = Vec::with_capacity(n_points);
        let mut values = Vec::with_capacity(n_points);
        for i in 0..n_points {
            let u = (i as f64 * h).min(maturity);
            times.push(u);
            values.push(forward_variance_0(kernel, params, u)?);
        }
        Self::new(0.0, times, values)
    }

    pub fn valuation_time(&self) -> f64 {
        self.t
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    fn covers(&self, a: f64, b: f64) -> bool {
        self.times[0] <= a + 1e-9 && *self.times.last().unwrap() >= b - 1e-9
    }

    /// Linear interpolation; clamps within half a grid-spacing of the ends.
    fn value_at(&self, u: f64) -> f64 {
        let times = &self.times;
        if u <= times[0] {
            return self.values[0];
        }
        if u >= *times.last().unwrap() {
            return *self.values.last().unwrap();
        }
        let idx = match times.binary_search_by(|probe| probe.total_cmp(&u)) {
            Ok(i) => return self.values[i],
            Err(i) => i,
        };
        let (t0, t1) = (times[idx - 1], times[idx]);
        let (v0, v1) = (self.values[idx - 1], self.values[idx]);
        v0 + (v1 - v0) * (u - t0) / (t1 - t0)
    }
}

/// Valuation-time state: `log S_t` and the running integral `∫₀^t log S_u du`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StatePath {
    pub t: f64,
    pub log_spot: f64,
    pub running_log_integral: f64,
}

impl StatePath {
    pub fn new(t: f64, log_spot: f64, running_log_integral: f64) -> Result<Self> {
        if !(t >= 0.0) {
            return Err(Error::domain(format!("valuation time must be >= 0, got {t}")));
        }
        if t == 0.0 && running_log_integral != 0.0 {
            return Err(Error::domain(
                "running log-integral must vanish at t = 0".to_string(),
            ));
        }
        Ok(Self { t, log_spot, running_log_integral })
    }

    /// Time-0 state at the model spot.
    pub fn initial(params: &ModelParams) -> Self {
        Self { t: 0.0, log_spot: params.s0.ln(), running_log_integral: 0.0 }
    }
}

/// Trapezoid rule over uniformly spaced samples.
fn trapezoid(values: &[Complex64], h: f64) -> Complex64 {
    let n = values.len();
    debug_assert!(n >= 2);
    let mut acc = 0.5 * (values[0] + values[n - 1]);
    for v in &values[1..n - 1] {
        acc += v;
    }
    acc * h
}

/// Resolvent-free time-0 transform (the route used by all t = 0 pricing).
pub fn psi0(
    arg: &TransformArg,
    kernel: &Kernel,
    params: &ModelParams,
    n_steps: usize,
) -> Result<Complex64> {
    let path = solve_phi2(arg, kernel, params, n_steps)?;
    let q = path.q_values();
    let k_drift = params.kappa * (params.theta - params.v0);
    let integrand: Vec<Complex64> = q
        .iter()
        .zip(path.phi2())
        .map(|(&qv, &p2)| params.v0 * qv + k_drift * p2)
        .collect();
    let time_integral = trapezoid(&integrand, path.step());

    let t = arg.maturity();
    let ln_s0 = params.s0.ln();
    let exponent = arg.s() * (ln_s0 + params.r * t / 2.0)
        + arg.w() * (ln_s0 + params.r * t)
        + time_integral;
    Ok(exponent.exp())
}

/// General-t transform against a supplied forward variance curve.
pub fn psi_t(
    arg: &TransformArg,
    state: &StatePath,
    curve: &ForwardCurve,
    kernel: &Kernel,
    params: &ModelParams,
    n_steps: usize,
) -> Result<Complex64> {
    let t = state.t;
    let maturity = arg.maturity();
    let span = maturity - t;
    if !(span > 0.0) {
        return Err(Error::domain(format!(
            "valuation time {t} must precede the maturity {maturity}"
        )));
    }
    if !curve.covers(t, maturity) {
        return Err(Error::domain(format!(
            "forward curve [{}, {}] does not cover [{t}, {maturity}]",
            curve.times[0],
            curve.times.last().unwrap()
        )));
    }

    // ∫_t^T Q(T−u) ξ_t(u) du = ∫_0^{T−t} Q(τ) ξ_t(T−τ) dτ on the solver grid
    let path = solve_phi2_span(arg, kernel, params, n_steps, span)?;
    let q = path.q_values();
    let integrand: Vec<Complex64> = path
        .grid()
        .iter()
        .zip(&q)
        .map(|(&tau, &qv)| qv * curve.value_at(maturity - tau))
        .collect();
    let time_integral = trapezoid(&integrand, path.step());

    let exponent = arg.s() * ((span / maturity) * state.log_spot + params.r * span * span / (2.0 * maturity))
        + arg.w() * (state.log_spot + params.r * span)
        + time_integral;
    Ok(exponent.exp())
}

/// Characteristic function of `log S_T`, evaluated as `ψ₀(0, iu)`; purely
/// imaginary `w` sits on the boundary `Re(w) = 0` of the admissible domain.
pub fn european_cf(
    u: f64,
    kernel: &Kernel,
    params: &ModelParams,
    maturity: f64,
    n_steps: usize,
) -> Result<Complex64> {
    let arg = TransformArg::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, u), maturity)?;
    psi0(&arg, kernel, params, n_steps)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn arg(s: Complex64, w: Complex64, maturity: f64) -> TransformArg {
        TransformArg::new(s, w, maturity).unwrap()
    }

    #[test]
    fn psi0_at_origin_is_one() {
        let p = ModelParams::default();
        for kernel in [Kernel::Classical, Kernel::fractional(0.75).unwrap()] {
            let v = psi0(&arg(c(0.0, 0.0), c(0.0, 0.0), 1.0), &kernel, &p, 64).unwrap();
            assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn psi0_martingale_normalization() {
        let p = ModelParams::default();
        for kernel in [Kernel::Classical, Kernel::fractional(0.75).unwrap(), Kernel::fractional(0.6).unwrap()] {
            for t in [0.2, 1.0, 3.0, 12.0] {
                let v = psi0(&arg(c(0.0, 0.0), c(1.0, 0.0), t), &kernel, &p, 128).unwrap();
                let expected = p.s0 * (p.r * t).exp();
                assert!(
                    (v - c(expected, 0.0)).norm() < 1e-10,
                    "kernel alpha={}, T={t}: {v} vs {expected}",
                    kernel.alpha()
                );
            }
        }
    }

    #[test]
    fn psi0_magnitude_bounded_for_imaginary_arguments() {
        // psi0(iz, 0) and psi0(0, iz) are characteristic functions of real
        // random variables (log G and log S_T), so their modulus is <= 1
        let p = ModelParams::default();
        let kernel = Kernel::fractional(0.75).unwrap();
        for z in [0.3, 1.0, 4.0, 15.0] {
            let g = psi0(&arg(c(0.0, z), c(0.0, 0.0), 1.0), &kernel, &p, 256).unwrap();
            let s = psi0(&arg(c(0.0, 0.0), c(0.0, z), 1.0), &kernel, &p, 256).unwrap();
            assert!(g.norm() <= 1.0 + 1e-12, "|psi0(iz,0)| = {} at z={z}", g.norm());
            assert!(s.norm() <= 1.0 + 1e-12, "|psi0(0,iz)| = {} at z={z}", s.norm());
        }
    }

    #[test]
    fn psi0_conjugate_symmetry() {
        let p = ModelParams::default();
        let kernel = Kernel::fractional(0.7).unwrap();
        let a = arg(c(0.5, 1.5), c(0.25, -0.5), 1.5);
        let ac = arg(c(0.5, -1.5), c(0.25, 0.5), 1.5);
        let v = psi0(&a, &kernel, &p, 256).unwrap();
        let vc = psi0(&ac, &kernel, &p, 256).unwrap();
        assert!((v.conj() - vc).norm() < 1e-10 * v.norm());
    }

    #[test]
    fn psi_t_at_zero_matches_psi0() {
        // the two routes are algebraically equal; grids fine enough that
        // their differing O(h^2) discretizations agree to the 2e-6 bound
        let p = ModelParams::default();
        for kernel in [Kernel::Classical, Kernel::fractional(0.75).unwrap()] {
            let t = 1.0;
            let curve = ForwardCurve::sampled_initial(&kernel, &p, t, 16385).unwrap();
            let state = StatePath::initial(&p);
            for (s, w) in [(c(1.0, 0.0), c(0.0, 0.0)), (c(0.5, 2.0), c(0.25, -2.0)), (c(0.0, 1.0), c(1.0, -1.0))] {
                let a = arg(s, w, t);
                let v0 = psi0(&a, &kernel, &p, 8192).unwrap();
                let vt = psi_t(&a, &state, &curve, &kernel, &p, 8192).unwrap();
                assert!(
                    (v0 - vt).norm() < 2e-6,
                    "kernel alpha={} (s,w)=({s},{w}): psi0={v0}, psi_t={vt}",
                    kernel.alpha()
                );
            }
        }
    }

    #[test]
    fn psi_t_trivial_cases() {
        let p = ModelParams::default();
        let kernel = Kernel::Classical;
        let t = 1.0;
        let curve = ForwardCurve::sampled_initial(&kernel, &p, t, 257).unwrap();
        let state = StatePath::initial(&p);
        let one = psi_t(&arg(c(0.0, 0.0), c(0.0, 0.0), t), &state, &curve, &kernel, &p, 64).unwrap();
        assert!((one - c(1.0, 0.0)).norm() < 1e-14);
        let mart = psi_t(&arg(c(0.0, 0.0), c(1.0, 0.0), t), &state, &curve, &kernel, &p, 64).unwrap();
        assert!((mart - c(p.s0 * (p.r * t).exp(), 0.0)).norm() < 1e-10);
    }

    #[test]
    fn psi_t_rejects_uncovering_curve() {
        let p = ModelParams::default();
        let kernel = Kernel::Classical;
        let curve = ForwardCurve::new(0.5, vec![0.5, 0.8], vec![0.09, 0.09]).unwrap();
        let state = StatePath::new(0.5, p.s0.ln(), 2.3).unwrap();
        let r = psi_t(&arg(c(1.0, 0.0), c(0.0, 0.0), 1.0), &state, &curve, &kernel, &p, 64);
        assert!(r.is_err());
    }

    #[test]
    fn european_cf_basics() {
        let p = ModelParams::default();
        let kernel = Kernel::Classical;
        let v = european_cf(0.0, &kernel, &p, 0.5, 64).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-14);
        // psi(-i) evaluated as psi0(0, 1): the martingale normalizer
        let mart = psi0(&arg(c(0.0, 0.0), c(1.0, 0.0), 0.5), &kernel, &p, 64).unwrap();
        assert!((mart.re - p.s0 * (p.r * 0.5f64).exp()).abs() < 1e-10);
        // conjugate symmetry of a characteristic function
        let plus = european_cf(1.3, &kernel, &p, 0.5, 256).unwrap();
        let minus = european_cf(-1.3, &kernel, &p, 0.5, 256).unwrap();
        assert!((plus.conj() - minus).norm() < 1e-12);
    }

    #[test]
    fn european_cf_matches_classical_route_at_unit_frequency() {
        let p = ModelParams::default();
        let ours = european_cf(1.0, &Kernel::Classical, &p, 0.5, 8192).unwrap();
        let a = TransformArg::new(c(0.0, 0.0), c(0.0, 1.0), 0.5).unwrap();
        let oracle = crate::classical::classical_psi0(&a, &p, 8192).unwrap();
        assert!((ours - oracle).norm() < 1e-6, "cf {ours} vs classical route {oracle}");
    }

    #[test]
    fn curve_validation_and_interp() {
        assert!(ForwardCurve::new(0.0, vec![0.0], vec![0.1]).is_err());
        assert!(ForwardCurve::new(0.0, vec![0.0, 0.0], vec![0.1, 0.1]).is_err());
        assert!(ForwardCurve::new(0.0, vec![0.0, 1.0], vec![-0.1, 0.1]).is_err());
        assert!(ForwardCurve::new(0.5, vec![0.0, 1.0], vec![0.1, 0.1]).is_err());
        let c = ForwardCurve::new(0.0, vec![0.0, 1.0], vec![0.1, 0.2]).unwrap();
        assert!((c.value_at(0.25) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn state_path_validation() {
        assert!(StatePath::new(-1.0, 4.6, 0.0).is_err());
        assert!(StatePath::new(0.0, 4.6, 1.0).is_err());
        assert!(StatePath::new(0.5, 4.6, 2.3).is_ok());
    }
}
