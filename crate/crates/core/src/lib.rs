//! Numerical toolkit for generalized Toeplitz and little Hankel operators on
//! the Bergman space of the unit disc.
//!
//! The crate is organised bottom-up:
//!
//! * [`geometry`]: the box family `D(r, θ)`, the dyadic decomposition
//!   `{D_n}`, neighbour sets `U_n` and tail annuli `V_m`.
//! * [`quadrature`]: Gauss–Legendre panels on polar rectangles, whole-disc
//!   integration and a period-summation scheme for radial integrands that
//!   oscillate like `sin(1/(1-r))`.
//! * [`symbol`]: symbols as expression trees (constants, the oscillating
//!   family `a_b`, powers of the boundary distance, modulus, conjugate,
//!   radial truncation, tabulated data) plus the CLI mini-language.
//! * [`averaging`]: the box averages `â_D(ζ)`, their supremum, Carleson
//!   means and log–log scaling fits.
//! * [`operators`]: kernels, truncated Toeplitz/little Hankel operators,
//!   per-box pieces `F_n`/`H_n`, series and radial-limit evaluation,
//!   transposes and the majorant diagnostic.
//! * [`spectral`]: diagonal eigenvalues of radial Toeplitz operators,
//!   monomial matrix elements and finite-section norms.
//! * [`config`] and [`cli`]: the `bergman` command-line front end.
//!
//! Generalized operators are only ever exposed through finite proxies
//! (truncation radius, generation cut-off) together with convergence logs.

pub mod averaging;
pub mod cli;
pub mod config;
pub mod error;
pub mod geometry;
pub mod operators;
pub mod quadrature;
pub mod report;
pub mod spectral;
pub mod symbol;

pub use error::{Error, Result};
pub use num_complex::Complex64;

/// A point of the open unit disc in polar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PolarPoint {
    pub rho: f64,
    pub phi: f64,
}

impl PolarPoint {
    pub fn new(rho: f64, phi: f64) -> Self {
        PolarPoint { rho, phi }
    }

    pub fn from_complex(z: Complex64) -> Self {
        let phi = z.im.atan2(z.re).rem_euclid(std::f64::consts::TAU);
        PolarPoint { rho: z.norm(), phi }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::from_polar(self.rho, self.phi)
    }
}
