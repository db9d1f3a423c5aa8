//! Complex Riccati-Volterra solver.
//!
//! For a transform argument `(s, w)` the forcing is the affine function
//! `φ₁(τ) = s τ/T + w` and `φ₂` solves
//!
//! ```text
//! φ₂(t) = ∫₀^t K(t−u) [ ½(φ₁²−φ₁) − κφ₂ + ½σ²φ₂² + ρσφ₁φ₂ ](u) du
//! ```
//!
//! discretized by the fractional Adams predictor-corrector: product-rectangle
//! predictor, one product-trapezoid corrector sweep. For the classical kernel
//! the weights collapse to the standard Adams-Bashforth-Moulton (Euler +
//! trapezoid) pair, and constant weights admit an O(N) running-sum form.
//!
//! On the admissible domain `D = {Re s ≥ 0, Re w ≥ 0, Re s + Re w ≤ 1}` the
//! exact solution satisfies `Re φ₂ ≤ 0`; the solver enforces that sign at
//! every node and reports divergence if an iterate leaves f64 range.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use num_complex::Complex64;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, ModelParams};

/// Tolerated positive excursion of `Re φ₂` before the sign invariant is
/// declared violated.
pub const SIGN_TOLERANCE: f64 = 1e-10;

/// One Fourier-transform evaluation point: complex pair `(s, w)` in the
/// admissible domain `D`, plus the maturity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformArg {
    s: Complex64,
    w: Complex64,
    maturity: f64,
}

impl TransformArg {
    pub fn new(s: Complex64, w: Complex64, maturity: f64) -> Result<Self> {
        if !(maturity > 0.0 && maturity.is_finite()) {
            return Err(Error::domain(format!("maturity must be positive, got {maturity}")));
        }
        if !(s.re >= 0.0 && w.re >= 0.0 && s.re + w.re <= 1.0 + 1e-12) {
            return Err(Error::domain(format!(
                "(s, w) outside admissible domain D: Re(s)={}, Re(w)={}",
                s.re, w.re
            )));
        }
        Ok(Self { s, w, maturity })
    }

    pub fn s(&self) -> Complex64 {
        self.s
    }

    pub fn w(&self) -> Complex64 {
        self.w
    }

    pub fn maturity(&self) -> f64 {
        self.maturity
    }
}

/// `φ₁(τ) = s τ/T + w`.
pub fn phi1(arg: &TransformArg, tau: f64) -> Complex64 {
    arg.s * (tau / arg.maturity) + arg.w
}

/// The quadratic form `Q(f₁, f₂) = ½(f₁² − f₁) + ρσ f₁ f₂ + ½σ² f₂²`.
pub fn q_form(params: &ModelParams, f1: Complex64, f2: Complex64) -> Complex64 {
    0.5 * (f1 * f1 - f1)
        + params.rho * params.sigma * f1 * f2
        + 0.5 * params.sigma * params.sigma * f2 * f2
}

/// Product-integration weights of the Adams scheme. They depend only on
/// `(α, N)`, so they are built once and shared across the many solves of a
/// pricing run (one per quadrature node).
struct AdamsWeights {
    /// predictor lag weights `(m+1)^α − m^α`, m = 0..N−1
    predictor: Vec<f64>,
    /// corrector interior lag weights `(m+2)^{α+1} + m^{α+1} − 2(m+1)^{α+1}`
    corrector: Vec<f64>,
}

impl AdamsWeights {
    fn build(alpha: f64, n: usize) -> Self {
        let a1 = alpha + 1.0;
        let mut predictor = Vec::with_capacity(n);
        let mut corrector = Vec::with_capacity(n);
        for m in 0..n {
            let mf = m as f64;
            predictor.push((mf + 1.0).powf(alpha) - mf.powf(alpha));
            corrector.push((mf + 2.0).powf(a1) + mf.powf(a1) - 2.0 * (mf + 1.0).powf(a1));
        }
        Self { predictor, corrector }
    }

    fn shared(alpha: f64, n: usize) -> Arc<Self> {
        type Cache = Mutex<HashMap<(u64, usize), Arc<AdamsWeights>>>;
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut map = cache.lock().expect("weights cache poisoned");
        map.entry((alpha.to_bits(), n))
            .or_insert_with(|| Arc::new(AdamsWeights::build(alpha, n)))
            .clone()
    }
}

/// Discretized solution of the Riccati-Volterra equation on a uniform grid.
#[derive(Debug, Clone)]
pub struct RiccatiPath {
    grid: Vec<f64>,
    phi2: Vec<Complex64>,
    arg: TransformArg,
    kernel: Kernel,
    params: ModelParams,
}

impl RiccatiPath {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn phi2(&self) -> &[Complex64] {
        &self.phi2
    }

    pub fn arg(&self) -> &TransformArg {
        &self.arg
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    pub fn step(&self) -> f64 {
        self.grid[1] - self.grid[0]
    }

    /// Terminal value `φ₂(span)`.
    pub fn terminal(&self) -> Complex64 {
        *self.phi2.last().expect("path has at least 2 nodes")
    }

    /// `Q(φ₁(t_i), φ₂(t_i))` at every node.
    pub fn q_values(&self) -> Vec<Complex64> {
        self.grid
            .iter()
            .zip(&self.phi2)
            .map(|(&t, &p2)| q_form(&self.params, phi1(&self.arg, t), p2))
            .collect()
    }
}

/// Solves for `φ₂` on `[0, arg.maturity()]` with `n_steps` uniform steps.
pub fn solve_phi2(
    arg: &TransformArg,
    kernel: &Kernel,
    params: &ModelParams,
    n_steps: usize,
) -> Result<RiccatiPath> {
    solve_phi2_span(arg, kernel, params, n_steps, arg.maturity)
}

/// Solves on the sub-interval `[0, span]`, `span ≤ maturity`. `φ₁` keeps the
/// full maturity in its slope, which is what the conditional transform at a
/// later valuation time needs.
pub(crate) fn solve_phi2_span(
    arg: &TransformArg,
    kernel: &Kernel,
    params: &ModelParams,
    n_steps: usize,
    span: f64,
) -> Result<RiccatiPath> {
    if n_steps < 2 {
        return Err(Error::domain(format!("n_steps must be >= 2, got {n_steps}")));
    }
    if !(span > 0.0 && span <= arg.maturity * (1.0 + 1e-12)) {
        return Err(Error::domain(format!(
            "span must lie in (0, maturity], got {span} with maturity {}",
            arg.maturity
        )));
    }

    let n = n_steps;
    let h = span / n as f64;
    let alpha = kernel.alpha();
    let grid: Vec<f64> = (0..=n).map(|i| i as f64 * h).collect();

    // forcing g(τ) = ½(φ₁² − φ₁) and linear coefficient ρσφ₁ − κ per node
    let rho_sigma = params.rho * params.sigma;
    let half_sig2 = 0.5 * params.sigma * params.sigma;
    let mut g = Vec::with_capacity(n + 1);
    let mut lin = Vec::with_capacity(n + 1);
    for &t in &grid {
        let f1 = phi1(arg, t);
        g.push(0.5 * (f1 * f1 - f1));
        lin.push(rho_sigma * f1 - params.kappa);
    }
    let rhs = |i: usize, p2: Complex64| -> Complex64 { g[i] + lin[i] * p2 + half_sig2 * p2 * p2 };

    let mut phi2 = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut f_re = vec![0.0f64; n + 1];
    let mut f_im = vec![0.0f64; n + 1];
    let f0 = rhs(0, phi2[0]);
    f_re[0] = f0.re;
    f_im[0] = f0.im;

    let classical = (alpha - 1.0).abs() < 1e-14;
    let weights = if classical { None } else { Some(AdamsWeights::shared(alpha, n)) };
    let cb = h.powf(alpha) / gamma(alpha + 1.0);
    let ca = h.powf(alpha) / gamma(alpha + 2.0);

    // running sum of F values, used by the constant-weight fast path
    let mut sum_re = f_re[0];
    let mut sum_im = f_im[0];

    for step in 0..n {
        let (pred, corr_interior) = if classical {
            // predictor weights are all 1, interior corrector weights all 2
            (
                Complex64::new(cb * sum_re, cb * sum_im),
                Complex64::new(2.0 * (sum_re - f_re[0]), 2.0 * (sum_im - f_im[0])),
            )
        } else {
            let w = weights.as_ref().expect("weights built for fractional kernel");
            let mut pr = 0.0;
            let mut pi = 0.0;
            let mut cr = 0.0;
            let mut ci = 0.0;
            // lag m pairs with node j = step − m; j ≥ 1 for the interior sum
            for m in 0..step {
                let j = step - m;
                let bw = w.predictor[m];
                let dw = w.corrector[m];
                pr += bw * f_re[j];
                pi += bw * f_im[j];
                cr += dw * f_re[j];
                ci += dw * f_im[j];
            }
            pr += w.predictor[step] * f_re[0];
            pi += w.predictor[step] * f_im[0];
            (Complex64::new(cb * pr, cb * pi), Complex64::new(cr, ci))
        };

        let nf = step as f64;
        let c0 = if classical {
            1.0
        } else {
            nf.powf(alpha + 1.0) - (nf - alpha) * (nf + 1.0).powf(alpha)
        };

        let f_pred = rhs(step + 1, pred);
        let value = ca
            * (Complex64::new(c0 * f_re[0], c0 * f_im[0]) + corr_interior + f_pred);

        if !value.re.is_finite() || !value.im.is_finite() {
            return Err(Error::Divergence { node: step + 1, t: grid[step + 1] });
        }
        if value.re > SIGN_TOLERANCE {
            return Err(Error::InvariantViolation {
                node: step + 1,
                re: value.re,
                tol: SIGN_TOLERANCE,
            });
        }

        phi2[step + 1] = value;
        let f_next = rhs(step + 1, value);
        f_re[step + 1] = f_next.re;
        f_im[step + 1] = f_next.im;
        sum_re += f_next.re;
        sum_im += f_next.im;
    }

    Ok(RiccatiPath {
        grid,
        phi2,
        arg: *arg,
        kernel: *kernel,
        params: *params,
    })
}

/// Residual of the equivalent resolvent representation
/// `φ₂ = (1/κ) R_κ ∗ Q(φ₁, φ₂)`, evaluated on the path's grid by trapezoidal
/// convolution. Classical kernel only, where the resolvent is the plain
/// exponential.
pub fn check_resolvent_form(path: &RiccatiPath) -> Result<f64> {
    if !path.kernel.is_classical() {
        return Err(Error::domain(
            "resolvent-form check is defined for the classical kernel".to_string(),
        ));
    }
    let kappa = path.params.kappa;
    let h = path.step();
    let q: Vec<Complex64> = path.q_values();
    let resolvent: Vec<f64> = path.grid.iter().map(|&t| kappa * (-kappa * t).exp()).collect();

    let mut max_residual = 0.0f64;
    for i in 0..path.grid.len() {
        let mut conv = Complex64::new(0.0, 0.0);
        if i > 0 {
            // trapezoid over y in [0, t_i] of R(t_i − y) Q(y)
            conv += 0.5 * (resolvent[i] * q[0] + resolvent[0] * q[i]);
            for j in 1..i {
                conv += resolvent[i - j] * q[j];
            }
            conv *= h;
        }
        let residual = (path.phi2[i] - conv / kappa).norm();
        max_residual = max_residual.max(residual);
    }
    Ok(max_residual)
}
