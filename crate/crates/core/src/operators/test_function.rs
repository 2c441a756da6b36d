//! Analytic test functions with their first two derivatives.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbol::parse_complex;

type Triple = dyn Fn(Complex64) -> [Complex64; 3] + Send + Sync;

/// An analytic function on the disc: a polynomial, or a closure returning
/// `(f, f', f'')`.
#[derive(Clone)]
pub enum TestFunction {
    Polynomial(Vec<Complex64>),
    Callable { name: String, f: Arc<Triple> },
}

impl TestFunction {
    /// `Σ c_k z^k`.
    pub fn polynomial(coefficients: Vec<Complex64>) -> Self {
        let mut c = coefficients;
        while c.len() > 1 && c.last() == Some(&Complex64::new(0.0, 0.0)) {
            c.pop();
        }
        if c.is_empty() {
            c.push(Complex64::new(0.0, 0.0));
        }
        TestFunction::Polynomial(c)
    }

    pub fn from_real(coefficients: &[f64]) -> Self {
        Self::polynomial(coefficients.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn monomial(n: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); n + 1];
        c[n] = Complex64::new(1.0, 0.0);
        TestFunction::Polynomial(c)
    }

    pub fn callable(
        name: impl Into<String>,
        f: impl Fn(Complex64) -> [Complex64; 3] + Send + Sync + 'static,
    ) -> Self {
        TestFunction::Callable {
            name: name.into(),
            f: Arc::new(f),
        }
    }

    /// `None` for closures.
    pub fn degree(&self) -> Option<usize> {
        match self {
            TestFunction::Polynomial(c) => Some(c.len() - 1),
            TestFunction::Callable { .. } => None,
        }
    }

    pub fn is_polynomial(&self) -> bool {
        matches!(self, TestFunction::Polynomial(_))
    }

    pub fn coefficients(&self) -> Option<&[Complex64]> {
        match self {
            TestFunction::Polynomial(c) => Some(c),
            TestFunction::Callable { .. } => None,
        }
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        match self {
            TestFunction::Polynomial(c) => c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &ck| acc * z + ck),
            TestFunction::Callable { f, .. } => f(z)[0],
        }
    }

    /// `[f(z), f'(z), f''(z)]`; exact Horner recurrences for polynomials.
    pub fn derivatives(&self, z: Complex64) -> [Complex64; 3] {
        match self {
            TestFunction::Polynomial(c) => {
                let zero = Complex64::new(0.0, 0.0);
                let (mut p, mut d1, mut d2) = (zero, zero, zero);
                for &ck in c.iter().rev() {
                    d2 = d2 * z + d1 * 2.0;
                    d1 = d1 * z + p;
                    p = p * z + ck;
                }
                [p, d1, d2]
            }
            TestFunction::Callable { f, .. } => f(z),
        }
    }

    /// Linear combination `α f + β g` of two polynomials.
    pub fn combine(&self, alpha: Complex64, other: &TestFunction, beta: Complex64) -> Result<TestFunction> {
        match (self, other) {
            (TestFunction::Polynomial(a), TestFunction::Polynomial(b)) => {
                let n = a.len().max(b.len());
                let zero = Complex64::new(0.0, 0.0);
                Ok(TestFunction::polynomial(
                    (0..n)
                        .map(|k| alpha * *a.get(k).unwrap_or(&zero) + beta * *b.get(k).unwrap_or(&zero))
                        .collect(),
                ))
            }
            _ => Err(Error::domain("linear combinations need polynomial test functions")),
        }
    }

    /// Canonical text: `poly:c0,c1,…` for polynomials.
    pub fn describe(&self) -> String {
        match self {
            TestFunction::Polynomial(c) => {
                let parts: Vec<String> = c
                    .iter()
                    .map(|v| {
                        if v.im == 0.0 {
                            format!("{}", v.re)
                        } else if v.im < 0.0 {
                            format!("{}-{}i", v.re, -v.im)
                        } else {
                            format!("{}+{}i", v.re, v.im)
                        }
                    })
                    .collect();
                format!("poly:{}", parts.join(","))
            }
            TestFunction::Callable { name, .. } => format!("fn:{name}"),
        }
    }

    /// Parses `poly:c0,c1,…` (real coefficients or `x+yi`) or `mono:<n>`.
    pub fn parse(text: &str) -> Result<Self> {
        let text = text.trim();
        if let Some(n) = text.strip_prefix("mono:") {
            let n: usize = n
                .trim()
                .parse()
                .map_err(|_| Error::parse(1, 6, format!("invalid monomial degree '{n}'")))?;
            return Ok(Self::monomial(n));
        }
        let Some(body) = text.strip_prefix("poly:") else {
            return Err(Error::parse(1, 1, "expected 'poly:<c0>,<c1>,…' or 'mono:<n>'"));
        };
        let mut coeffs = Vec::new();
        let mut column = 6;
        for part in body.split(',') {
            let c = parse_complex(part)
                .ok_or_else(|| Error::parse(1, column, format!("invalid coefficient '{}'", part.trim())))?;
            coeffs.push(c);
            column += part.chars().count() + 1;
        }
        Ok(Self::polynomial(coeffs))
    }
}

impl fmt::Debug for TestFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TestFunction({})", self.describe())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn horner_derivatives() {
        // 1 + 2z + 3z² + 4z³
        let p = TestFunction::from_real(&[1.0, 2.0, 3.0, 4.0]);
        let z = Complex64::new(0.3, -0.2);
        let [f, d1, d2] = p.derivatives(z);
        let expect_f = 1.0 + z * 2.0 + z * z * 3.0 + z * z * z * 4.0;
        let expect_d1 = 2.0 + z * 6.0 + z * z * 12.0;
        let expect_d2 = 6.0 + z * 24.0;
        assert!((f - expect_f).norm() < 1e-15);
        assert!((d1 - expect_d1).norm() < 1e-15);
        assert!((d2 - expect_d2).norm() < 1e-14);
        assert_eq!(p.eval(z), f);
    }

    #[test]
    fn parse_round_trip() {
        let p = TestFunction::parse("poly:1, 0, -2+0.5i").unwrap();
        assert_eq!(p.degree(), Some(2));
        let q = TestFunction::parse(&p.describe()).unwrap();
        assert_eq!(p.coefficients(), q.coefficients());
        assert_eq!(TestFunction::parse("mono:3").unwrap().degree(), Some(3));
        assert!(matches!(
            TestFunction::parse("poly:1,x").unwrap_err(),
            Error::Parse { column: 8, .. }
        ));
    }

    #[test]
    fn trailing_zeros_are_trimmed() {
        assert_eq!(TestFunction::from_real(&[1.0, 0.0, 0.0]).degree(), Some(0));
        assert_eq!(TestFunction::from_real(&[]).degree(), Some(0));
    }
}
