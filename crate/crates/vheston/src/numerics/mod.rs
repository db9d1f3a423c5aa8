//! Special functions and quadrature shared by all pricing modules.

pub mod mittag_leffler;
pub mod quadrature;

pub use mittag_leffler::{mittag_leffler, MlParams};
pub use quadrature::{integrate_semi_infinite, QuadRule, QuadResult, QuadratureSpec};
