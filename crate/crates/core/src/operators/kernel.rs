//! Reproducing kernels, the standard weight and disc automorphisms.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which kernel-like function [`kernel_eval`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum KernelKind {
    /// `K_λ(z) = (1 - z λ̄)^{-2}`.
    Bergman,
    /// `k_λ(z) = (1 - |λ|²) K_λ(z)`, unit norm in `A²`.
    Normalized,
    /// `W(z) = 1 - |z|²` (ignores `λ`).
    Weight,
    /// `φ_λ(z) = (λ - z) / (1 - z λ̄)`.
    Mobius,
}

/// `(1 - z ζ̄)^{-2}`, the Toeplitz kernel.
#[inline]
pub fn toeplitz_kernel(z: Complex64, zeta: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - z * zeta.conj();
    (d * d).inv()
}

/// `(1 - z̄ ζ)^{-2}`, the little Hankel kernel.
#[inline]
pub fn hankel_kernel(z: Complex64, zeta: Complex64) -> Complex64 {
    let d = Complex64::new(1.0, 0.0) - z.conj() * zeta;
    (d * d).inv()
}

fn check_interior(name: &str, w: Complex64) -> Result<()> {
    if w.norm() < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("{name} = {w} is not in the open unit disc")))
    }
}

pub fn kernel_eval(kind: KernelKind, lambda: Complex64, z: Complex64) -> Result<Complex64> {
    check_interior("λ", lambda)?;
    check_interior("z", z)?;
    let one = Complex64::new(1.0, 0.0);
    Ok(match kind {
        KernelKind::Bergman => toeplitz_kernel(z, lambda),
        KernelKind::Normalized => toeplitz_kernel(z, lambda) * (1.0 - lambda.norm_sqr()),
        KernelKind::Weight => Complex64::new(1.0 - z.norm_sqr(), 0.0),
        KernelKind::Mobius => (lambda - z) / (one - z * lambda.conj()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::integrate_disc;

    #[test]
    fn kernel_identities() {
        let l = Complex64::new(0.3, -0.5);
        let zero = Complex64::new(0.0, 0.0);
        assert_eq!(kernel_eval(KernelKind::Bergman, l, zero).unwrap(), Complex64::new(1.0, 0.0));
        assert!((kernel_eval(KernelKind::Mobius, l, zero).unwrap() - l).norm() < 1e-15);
        assert!(kernel_eval(KernelKind::Mobius, l, l).unwrap().norm() < 1e-15);
        assert!(kernel_eval(KernelKind::Bergman, Complex64::new(1.0, 0.0), zero).is_err());
    }

    #[test]
    fn normalized_kernel_has_unit_norm() {
        let l = Complex64::new(0.7, 0.0);
        let r = integrate_disc(
            &|rho, phi| {
                let z = Complex64::from_polar(rho, phi);
                Complex64::new(kernel_eval(KernelKind::Normalized, l, z).unwrap().norm_sqr(), 0.0)
            },
            1e-10,
        )
        .unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-8, "{}", r.value);
    }
}
