//! Independent classical-Heston (`K ≡ 1`) representation of the joint
//! transform, via a Riccati ODE in time-inverted form.
//!
//! This is the reference route used to validate the Volterra representation:
//! the two must agree for the constant kernel. With coefficients
//! `z₀..z₄` depending on `(s, w, T)` the transform is
//!
//! ```text
//! ψ₀(s, w) = exp(z₀) · exp(ν₀ C(T) + κθ ∫₀^T C(τ) dτ),
//! C(0) = ρw/σ,  C'(τ) = z₁τ² + z₂τ + z₃ − κC + ½σ²C²
//! ```
//!
//! and the substitution `φ₂(τ) = C(τ) − (ρ/σ)φ₁(τ)` maps `C` onto the
//! Volterra solution, which `substitution_check` verifies on the grid.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::kernel::{Kernel, ModelParams};
use crate::riccati::{phi1, solve_phi2, TransformArg};

/// Coefficient set of the classical representation.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalCoefficients {
    pub z0: Complex64,
    pub z1: Complex64,
    pub z2: Complex64,
    pub z3: Complex64,
    pub z4: Complex64,
}

/// Coefficients as functions of `(s, w, T)` and the model parameters.
pub fn classical_coefficients(arg: &TransformArg, params: &ModelParams) -> ClassicalCoefficients {
    let s = arg.s();
    let w = arg.w();
    let t = arg.maturity();
    let (kappa, theta, sigma, rho) = (params.kappa, params.theta, params.sigma, params.rho);
    let ln_s0 = params.s0.ln();
    let r = params.r;
    let one_minus_rho2 = 1.0 - rho * rho;

    let z0 = s * (ln_s0 + r * t / 2.0 - kappa * theta * rho * t / (2.0 * sigma) - rho / sigma * params.v0)
        + w * (ln_s0 + r * t - kappa * theta * rho * t / sigma - rho / sigma * params.v0);
    let z1 = s * s * one_minus_rho2 / (2.0 * t * t);
    let z2 = s * ((2.0 * rho * kappa - sigma) / (2.0 * sigma * t)) + s * w * (one_minus_rho2 / t);
    let z3 = s * (rho / (sigma * t))
        + w * ((2.0 * rho * kappa - sigma) / (2.0 * sigma))
        + w * w * (one_minus_rho2 / 2.0);
    let z4 = w * (rho / sigma);

    ClassicalCoefficients { z0, z1, z2, z3, z4 }
}

/// Right-hand side of the C-equation.
#[inline]
fn c_rhs(co: &ClassicalCoefficients, params: &ModelParams, tau: f64, c: Complex64) -> Complex64 {
    co.z1 * (tau * tau) + co.z2 * tau + co.z3 - params.kappa * c
        + 0.5 * params.sigma * params.sigma * c * c
}

/// Integrates (C, D) forward with the classical fourth-order scheme and
/// returns C at every grid node plus D(T) = κθ ∫₀^T C.
fn integrate_c(
    co: &ClassicalCoefficients,
    params: &ModelParams,
    maturity: f64,
    steps: usize,
) -> Result<(Vec<Complex64>, Complex64)> {
    if steps < 2 {
        return Err(Error::domain(format!("ode steps must be >= 2, got {steps}")));
    }
    let h = maturity / steps as f64;
    let kt = params.kappa * params.theta;
    let mut c = co.z4;
    let mut d = Complex64::new(0.0, 0.0);
    let mut nodes = Vec::with_capacity(steps + 1);
    nodes.push(c);
    for i in 0..steps {
        let tau = i as f64 * h;
        let k1c = c_rhs(co, params, tau, c);
        let k1d = kt * c;
        let k2c = c_rhs(co, params, tau + 0.5 * h, c + 0.5 * h * k1c);
        let k2d = kt * (c + 0.5 * h * k1c);
        let k3c = c_rhs(co, params, tau + 0.5 * h, c + 0.5 * h * k2c);
        let k3d = kt * (c + 0.5 * h * k2c);
        let k4c = c_rhs(co, params, tau + h, c + h * k3c);
        let k4d = kt * (c + h * k3c);
        c += (h / 6.0) * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        d += (h / 6.0) * (k1d + 2.0 * k2d + 2.0 * k3d + k4d);
        if !c.re.is_finite() || !c.im.is_finite() {
            return Err(Error::Divergence { node: i + 1, t: tau + h });
        }
        nodes.push(c);
    }
    Ok((nodes, d))
}

/// Classical-route transform value `ψ₀^CH(s, w) = exp(z₀ + ν₀C(T) + D(T))`.
pub fn classical_psi0(arg: &TransformArg, params: &ModelParams, ode_steps: usize) -> Result<Complex64> {
    let co = classical_coefficients(arg, params);
    let (nodes, d) = integrate_c(&co, params, arg.maturity(), ode_steps)?;
    let c_terminal = *nodes.last().expect("at least one node");
    Ok((co.z0 + params.v0 * c_terminal + d).exp())
}

/// Max-node deviation of the substitution identity
/// `φ₂(τ) = C(τ) − (ρ/σ) φ₁(τ)` between the Volterra solver (classical
/// kernel) and the ODE route, both on the same `n_steps` grid.
pub fn substitution_check(arg: &TransformArg, params: &ModelParams, n_steps: usize) -> Result<f64> {
    let path = solve_phi2(arg, &Kernel::Classical, params, n_steps)?;
    let co = classical_coefficients(arg, params);
    let (c_nodes, _) = integrate_c(&co, params, arg.maturity(), n_steps)?;
    debug_assert_eq!(c_nodes.len(), path.phi2().len());

    let ratio = params.rho / params.sigma;
    let mut max_dev = 0.0f64;
    for (i, &t) in path.grid().iter().enumerate() {
        let lhs = path.phi2()[i];
        let rhs = c_nodes[i] - ratio * phi1(arg, t);
        max_dev = max_dev.max((lhs - rhs).norm());
    }
    Ok(max_dev)
}
