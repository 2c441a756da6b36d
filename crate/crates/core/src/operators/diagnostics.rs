//! Pointwise envelopes used in the boundedness argument: the majorant
//! `G_D` of a per-box piece and the subharmonic mean-value bound on `U_n`.

use num_complex::Complex64;
use serde::Serialize;

use super::apply::box_integral;
use super::test_function::TestFunction;
use super::OperatorKind;
use crate::error::Result;
use crate::geometry::{touching_boxes, BoxIndex, Decomposition, DyadicBox, MAX_NEIGHBORS};
use crate::quadrature::{integrate_box, PolarRect, QuadratureResult};
use crate::symbol::Symbol;
use crate::PolarPoint;

/// `G_D(z) = ∫_D (|f| + |f'|W + |f''|W²)(ζ) |1 - zζ̄|^{-2} dA(ζ)`.
///
/// Derivatives come from the test function itself (Horner for polynomials,
/// the supplied triple for closures); nothing is differentiated numerically.
pub fn majorant_gd(f: &TestFunction, b: &DyadicBox, z: Complex64, tol: f64) -> Result<QuadratureResult> {
    let g = |rho: f64, phi: f64| {
        let zeta = Complex64::from_polar(rho, phi);
        let w = 1.0 - rho * rho;
        let [d0, d1, d2] = f.derivatives(zeta);
        let envelope = d0.norm() + d1.norm() * w + d2.norm() * w * w;
        Complex64::new(envelope / (Complex64::new(1.0, 0.0) - z * zeta.conj()).norm_sqr(), 0.0)
    };
    integrate_box(&g, PolarRect::from(b), tol)
}

/// `|F_n f(z)|` against `Σ_{D ∈ 𝒟_n} G_D(z)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MajorantSample {
    pub index: BoxIndex,
    pub z: Complex64,
    pub piece: f64,
    pub envelope: f64,
    /// `piece / envelope`.
    pub ratio: f64,
    pub error_estimate: f64,
}

pub fn majorant_ratio(a: &Symbol, f: &TestFunction, n: BoxIndex, z: Complex64, tol: f64) -> Result<MajorantSample> {
    let rect = PolarRect::from(&DyadicBox::from_index(n));
    let piece = box_integral(OperatorKind::Toeplitz, a, f, rect, z, tol)?;
    let mut envelope = QuadratureResult::zero();
    for m in touching_boxes(n) {
        envelope = envelope.combine(majorant_gd(f, &DyadicBox::from_index(m), z, tol / MAX_NEIGHBORS as f64)?);
    }
    let env = envelope.value.re;
    Ok(MajorantSample {
        index: n,
        z,
        piece: piece.value.norm(),
        envelope: env,
        ratio: piece.value.norm() / env,
        error_estimate: piece.error_estimate + envelope.error_estimate,
    })
}

/// Both sides of `|f(w)| ≤ (1/|D(w,R)|) ∫_{U_n} |f| dA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubharmonicCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub pass: bool,
    /// Radius `R` of the inscribed disc.
    pub radius: f64,
    /// `c = |D_n| / |D(w,R)|`.
    pub constant: f64,
    pub error_estimate: f64,
}

/// Mean-value bound for `|f|` at `w ∈ D_n` over the neighbour union `U_n`.
///
/// The right side is `(c/|D_n|) ∫_{U_n} |f| dA` with `c = |D_n|/|D(w,R)|`.
/// The check passes when `lhs ≤ rhs` up to the quadrature error.
pub fn subharmonic_bound_check(
    decomposition: &Decomposition,
    f: &TestFunction,
    n: BoxIndex,
    w: PolarPoint,
    tol: f64,
) -> Result<SubharmonicCheck> {
    let disc = decomposition.inscribed_disc(n, w)?;
    let members = decomposition.neighbors(n)?.members;
    let g = |rho: f64, phi: f64| Complex64::new(f.eval(Complex64::from_polar(rho, phi)).norm(), 0.0);
    let mut total = QuadratureResult::zero();
    for m in &members {
        total = total.combine(integrate_box(
            &g,
            PolarRect::from(&DyadicBox::from_index(*m)),
            tol / members.len() as f64,
        )?);
    }
    let disc_area = disc.radius * disc.radius;
    let lhs = f.eval(w.to_complex()).norm();
    let rhs = total.value.re / disc_area;
    let error_estimate = total.error_estimate / disc_area;
    Ok(SubharmonicCheck {
        lhs,
        rhs,
        pass: lhs <= rhs + error_estimate,
        radius: disc.radius,
        constant: DyadicBox::from_index(n).area() / disc_area,
        error_estimate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn majorant_at_origin_is_box_area() {
        let b = DyadicBox::from_index(BoxIndex::new(2, 3).unwrap());
        let g = majorant_gd(&TestFunction::from_real(&[1.0]), &b, Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!((g.value.re - b.area()).abs() < 1e-12);
    }

    #[test]
    fn majorant_of_identity_is_closed_form() {
        // f = z at z = 0: ∫_D (ρ + 1 - ρ²) dA
        let b = DyadicBox::from_index(BoxIndex::new(3, 2).unwrap());
        let (r0, r1) = (b.r_in, b.r_out);
        let radial = |r: f64| r.powi(3) / 3.0 + r * r / 2.0 - r.powi(4) / 4.0;
        let exact = b.angular_width() / std::f64::consts::PI * (radial(r1) - radial(r0));
        let g = majorant_gd(&TestFunction::from_real(&[0.0, 1.0]), &b, Complex64::new(0.0, 0.0), 1e-12).unwrap();
        assert!((g.value.re - exact).abs() < 1e-12);
    }

    #[test]
    fn subharmonic_constant_function() {
        let d = Decomposition::new(6).unwrap();
        let n = BoxIndex::new(4, 7).unwrap();
        let w = DyadicBox::from_index(n).center();
        let c = subharmonic_bound_check(&d, &TestFunction::from_real(&[1.0]), n, w, 1e-10).unwrap();
        assert_eq!(c.lhs, 1.0);
        assert!(c.pass && c.rhs >= 1.0);
    }

    #[test]
    fn subharmonic_zero_at_w() {
        let d = Decomposition::new(6).unwrap();
        let n = BoxIndex::new(3, 1).unwrap();
        let w = DyadicBox::from_index(n).center();
        let f = TestFunction::polynomial(vec![-w.to_complex(), Complex64::new(1.0, 0.0)]);
        let c = subharmonic_bound_check(&d, &f, n, w, 1e-10).unwrap();
        assert!(c.lhs < 1e-15 && c.pass);
    }
}
