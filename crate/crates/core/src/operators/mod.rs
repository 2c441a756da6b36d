//! Toeplitz and little Hankel operators with symbols in `L¹(𝔻)`.
//!
//! Every operator is evaluated through a finite proxy: truncation of the
//! symbol to `|ζ| ≤ ρ`, a partial sum over the dyadic boxes up to some
//! generation, or a ladder of truncations with a convergence log.
//!
//! Radial symbols go through a separable route: the angular integral
//! `Φ_z(r) = (r/π)∫ f(re^{iφ}) K(z, re^{iφ}) dφ` is computed by periodic
//! trapezoidal sums and the radial integral `∫ a(r) Φ_z(r) dr` by the
//! oscillation-aware radial quadrature. Other symbols, and all per-box
//! pieces, use adaptive Gauss–Legendre panels in `(ρ, φ)`.

pub mod apply;
pub mod diagnostics;
pub mod field;
pub mod kernel;
pub mod test_function;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

pub use apply::{
    box_partial_apply, duality_check, hankel_truncated, limit_apply, series_apply, toeplitz_truncated,
    transpose_apply, truncated_apply, DualityReport, LimitResult, LimitSchedule, LimitStep, DEFAULT_CAUCHY_EPS,
    DEFAULT_LIMIT_GENERATIONS,
};
pub use diagnostics::{majorant_gd, majorant_ratio, subharmonic_bound_check, MajorantSample, SubharmonicCheck};
pub use field::{default_grid, tensor_grid, FieldMeta, FieldSample};
pub use kernel::{hankel_kernel, kernel_eval, toeplitz_kernel, KernelKind};
pub use test_function::TestFunction;

/// Toeplitz (`T_a`, `F_n`) or little Hankel (`h_a`, `H_n`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum OperatorKind {
    Toeplitz,
    Hankel,
}

impl OperatorKind {
    /// The integral kernel `(1 - zζ̄)^{-2}` or `(1 - z̄ζ)^{-2}`.
    #[inline]
    pub fn kernel(self, z: Complex64, zeta: Complex64) -> Complex64 {
        match self {
            OperatorKind::Toeplitz => toeplitz_kernel(z, zeta),
            OperatorKind::Hankel => hankel_kernel(z, zeta),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            OperatorKind::Toeplitz => "toeplitz",
            OperatorKind::Hankel => "hankel",
        }
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "toeplitz" | "t" | "f" => Ok(OperatorKind::Toeplitz),
            "hankel" | "h" => Ok(OperatorKind::Hankel),
            other => Err(Error::parse(1, 1, format!("unknown operator '{other}'"))),
        }
    }
}
