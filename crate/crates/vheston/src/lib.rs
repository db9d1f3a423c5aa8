//! Pricing library for European and geometric Asian options under
//! Volterra-Heston stochastic volatility.
//!
//! The variance process solves a convolution Volterra equation
//! `ν = ν₀ + K ∗ (κ(θ−ν)) + K ∗ (σ√ν dB)`; the constant kernel `K ≡ 1`
//! recovers the classical Heston model and the fractional kernel
//! `K(t) = t^{α−1}/Γ(α)`, `α ∈ (1/2, 1)`, the rough Heston model. Prices of
//! European calls and of fixed- and floating-strike geometric Asian calls
//! and puts come out of semi-closed Fourier-inversion formulas driven by the
//! joint conditional transform `ψ_t(s, w) = E[e^{s log G_{t,T} + w log S_T} | F_t]`,
//! which in turn is an exponential functional of a complex Riccati-Volterra
//! solution computed by the fractional Adams predictor-corrector.
//!
//! Module map:
//! - [`numerics`]: Mittag-Leffler evaluation and Gauss-Kronrod quadrature.
//! - [`kernel`]: kernels, the resolvent of `κK`, forward variance `ξ₀`.
//! - [`riccati`]: the `φ₂` solver, the quadratic form `Q`, invariant checks.
//! - [`transform`]: `ψ₀`, general-t `ψ_t`, the log-spot characteristic function.
//! - [`pricing`]: the five pricing formulas, parity residuals, session cache.
//! - [`classical`]: independent classical-Heston ODE route (validation oracle).
//! - [`mc`]: Euler full-truncation Monte Carlo (validation oracle).

// `!(x > 0.0)`-style guards are deliberate: NaN must fail validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// frozen reference constants and quadrature nodes are written in full
#![allow(clippy::excessive_precision)]

pub mod classical;
pub mod error;
pub mod kernel;
pub mod mc;
pub mod numerics;
pub mod pricing;
pub mod riccati;
pub mod transform;

pub use error::{Error, Result};
pub use kernel::{forward_variance_0, kernel_eval, resolvent_kappa, Kernel, ModelParams};
pub use numerics::{integrate_semi_infinite, mittag_leffler, MlParams, QuadRule, QuadratureSpec};
pub use pricing::{
    default_steps, parity_residuals, price, price_european_call, price_fixed_asian,
    price_float_asian, OptionKind, PriceResult, PricingRequest, PricingSession,
};
pub use riccati::{check_resolvent_form, phi1, q_form, solve_phi2, RiccatiPath, TransformArg};
pub use transform::{european_cf, psi0, psi_t, ForwardCurve, StatePath};
