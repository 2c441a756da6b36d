//! The `A²` picture in the monomial basis.
//!
//! A radial symbol acts diagonally, `T_a z^n = γ_n z^n` with
//! `γ_n = 2(n+1) ∫_0^1 a(r) r^{2n+1} dr`. This module computes that sequence
//! independently of the operator integrals, the matrix elements
//! `⟨T_a e_m, e_n⟩` for `e_k = √(k+1) z^k`, lower bounds for the norm of
//! finite sections, and log–log growth fits of `|γ_n|`.

use std::ops::RangeInclusive;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::averaging::{log_fit, ScalingFit};
use crate::error::{Error, Result};
use crate::quadrature::{integrate_disc, integrate_radial_profile, QuadratureResult};
use crate::symbol::Symbol;

/// Default length of a radial eigenvalue sequence.
pub const DEFAULT_N_MAX: usize = 10_000;
/// Default size of a finite matrix section.
pub const DEFAULT_SECTION: usize = 256;
/// Default power-iteration cap.
pub const DEFAULT_POWER_ITERATIONS: usize = 2_000;
/// Relative change of the Rayleigh quotient at which power iteration stops.
pub const STAGNATION: f64 = 1e-10;
/// `|γ_n|` must exceed this multiple of its error bound to enter a fit.
pub const RESOLUTION_FACTOR: f64 = 10.0;

/// `γ_n(a)` for a radial symbol.
pub fn radial_eigenvalue(a: &Symbol, n: usize, tol: f64) -> Result<QuadratureResult> {
    let profile = a
        .radial_profile()
        .ok_or_else(|| Error::domain(format!("symbol {a} is not radial")))?;
    let scale = 2.0 * (n as f64 + 1.0);
    let power = 2 * n as i32 + 1;
    let weight = move |r: f64| Complex64::new(scale * r.powi(power), 0.0);
    integrate_radial_profile(&profile, &weight, 0.0, 1.0, tol)
}

/// `⟨T_a e_m, e_n⟩ = √((m+1)(n+1)) ∫ a ζ^m ζ̄^n dA`.
///
/// Radial symbols give exact zeros off the diagonal and `γ_n` on it.
pub fn matrix_element(a: &Symbol, m: usize, n: usize, tol: f64) -> Result<QuadratureResult> {
    if a.is_radial() {
        return if m == n {
            radial_eigenvalue(a, n, tol)
        } else {
            Ok(QuadratureResult::zero())
        };
    }
    let scale = (((m + 1) * (n + 1)) as f64).sqrt();
    let g = |rho: f64, phi: f64| {
        let angle = Complex64::from_polar(1.0, (m as f64 - n as f64) * phi);
        a.eval(rho, phi) * angle * rho.powi((m + n) as i32)
    };
    Ok(integrate_disc(&g, tol / scale)?.scale(scale))
}

/// A growth fit with the indices it had to leave out.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub window: (usize, usize),
    pub used: usize,
    /// Indices inside the window that were zero or below resolution.
    pub excluded: Vec<usize>,
}

/// `γ_0, …, γ_{n_max}` with per-entry error estimates.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralSequence {
    pub symbol: String,
    pub n_max: usize,
    pub gamma: Vec<Complex64>,
    pub errors: Vec<f64>,
    pub converged: Vec<bool>,
    pub tol: f64,
    pub fit: Option<GrowthFit>,
}

impl SpectralSequence {
    pub fn compute(a: &Symbol, n_max: usize, tol: f64) -> Result<Self> {
        let ns: Vec<usize> = (0..=n_max).collect();
        Self::compute_at(a, &ns, tol).map(|mut s| {
            s.n_max = n_max;
            s
        })
    }

    /// Only the listed indices are computed; the rest stay zero and are
    /// marked unconverged.
    pub fn compute_at(a: &Symbol, ns: &[usize], tol: f64) -> Result<Self> {
        let n_max = ns.iter().copied().max().unwrap_or(0);
        let results = ns
            .par_iter()
            .map(|&n| radial_eigenvalue(a, n, tol))
            .collect::<Result<Vec<_>>>()?;
        let mut gamma = vec![Complex64::new(0.0, 0.0); n_max + 1];
        let mut errors = vec![f64::INFINITY; n_max + 1];
        let mut converged = vec![false; n_max + 1];
        for (&n, r) in ns.iter().zip(results) {
            gamma[n] = r.value;
            errors[n] = r.error_estimate;
            converged[n] = r.converged;
        }
        Ok(SpectralSequence {
            symbol: a.describe(),
            n_max,
            gamma,
            errors,
            converged,
            tol,
            fit: None,
        })
    }

    /// `|γ_n|` clearly above its error bound.
    pub fn is_resolved(&self, n: usize) -> bool {
        let bound = self.errors[n].max(self.tol);
        self.gamma[n].norm() > RESOLUTION_FACTOR * bound
    }

    pub fn max_abs(&self, window: RangeInclusive<usize>) -> f64 {
        window
            .filter(|&n| n <= self.n_max && self.errors[n].is_finite())
            .map(|n| self.gamma[n].norm())
            .fold(0.0, f64::max)
    }

    pub fn median_abs(&self, window: RangeInclusive<usize>) -> f64 {
        let mut v: Vec<f64> = window
            .filter(|&n| n <= self.n_max && self.errors[n].is_finite())
            .map(|n| self.gamma[n].norm())
            .collect();
        if v.is_empty() {
            return 0.0;
        }
        v.sort_by(f64::total_cmp);
        let k = v.len() / 2;
        if v.len() % 2 == 1 {
            v[k]
        } else {
            0.5 * (v[k - 1] + v[k])
        }
    }
}

/// Log–log least squares of `|γ_n|` against `n` over a window. Entries that
/// are zero, not computed or below resolution are excluded and reported.
pub fn growth_fit(seq: &SpectralSequence, window: RangeInclusive<usize>) -> Result<GrowthFit> {
    let (lo, hi) = (*window.start(), *window.end());
    if lo > hi || hi > seq.n_max {
        return Err(Error::domain(format!(
            "window [{lo}, {hi}] is not inside [0, {}]",
            seq.n_max
        )));
    }
    let mut points = Vec::new();
    let mut excluded = Vec::new();
    for n in window {
        if n >= 1 && seq.errors[n].is_finite() && seq.is_resolved(n) {
            points.push(((n as f64).ln(), seq.gamma[n].norm().ln()));
        } else if seq.errors[n].is_finite() {
            excluded.push(n);
        }
    }
    if points.len() < 2 {
        return Err(Error::domain(format!(
            "window [{lo}, {hi}] has {} usable entries",
            points.len()
        )));
    }
    let ScalingFit {
        slope,
        intercept,
        residual,
        points: used,
    } = log_fit(&points);
    Ok(GrowthFit {
        slope,
        intercept,
        residual,
        window: (lo, hi),
        used,
        excluded,
    })
}

/// Lower bound for `‖T_a‖` on `A²` from the `N × N` section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SectionNorm {
    pub value: f64,
    /// `‖M*M v - λ v‖ / λ` at the last iterate.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Largest singular value of the section `[⟨T_a e_m, e_n⟩]_{m,n<N}`.
///
/// Power iteration on `M*M` from the normalised all-ones vector, stopped when
/// the Rayleigh quotient changes by less than [`STAGNATION`] (relative).
/// The reported value is the larger of the iterate's estimate and the
/// largest column norm; both bound `σ_max` from below, and the column bound
/// makes the estimate nondecreasing in `N`.
pub fn finite_section_norm(a: &Symbol, n: usize, tol: f64, iters: usize) -> Result<SectionNorm> {
    if n == 0 {
        return Err(Error::domain("section size must be at least 1"));
    }
    let entries: Vec<(usize, usize)> = if a.is_radial() {
        (0..n).map(|k| (k, k)).collect()
    } else {
        (0..n).flat_map(|r| (0..n).map(move |c| (r, c))).collect()
    };
    let values = entries
        .par_iter()
        .map(|&(row, col)| matrix_element(a, col, row, tol).map(|q| q.value))
        .collect::<Result<Vec<_>>>()?;
    let mut matrix = vec![Complex64::new(0.0, 0.0); n * n];
    for (&(row, col), v) in entries.iter().zip(values) {
        matrix[row * n + col] = v;
    }
    Ok(power_iteration(&matrix, n, iters))
}

fn power_iteration(m: &[Complex64], n: usize, iters: usize) -> SectionNorm {
    let zero = Complex64::new(0.0, 0.0);
    let apply = |v: &[Complex64]| -> Vec<Complex64> {
        let mv: Vec<Complex64> = (0..n)
            .map(|r| m[r * n..(r + 1) * n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect();
        let mut out = vec![zero; n];
        for (r, x) in mv.iter().enumerate() {
            for (c, o) in out.iter_mut().enumerate() {
                *o += m[r * n + c].conj() * x;
            }
        }
        out
    };
    let norm = |v: &[Complex64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    let column_bound = (0..n)
        .map(|c| (0..n).map(|r| m[r * n + c].norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);

    let mut v = vec![Complex64::new(1.0 / (n as f64).sqrt(), 0.0); n];
    let mut lambda = 0.0;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    for k in 1..=iters.max(1) {
        iterations = k;
        let w = apply(&v);
        let next: f64 = v.iter().zip(&w).map(|(a, b)| (a.conj() * b).re).sum();
        residual = if next > 0.0 {
            norm(&w.iter().zip(&v).map(|(a, b)| a - b * next).collect::<Vec<_>>()) / next
        } else {
            0.0
        };
        let wn = norm(&w);
        let change = (next - lambda).abs();
        lambda = next;
        if wn == 0.0 {
            converged = true;
            break;
        }
        v = w.into_iter().map(|x| x / wn).collect();
        if change <= STAGNATION * lambda.abs() {
            converged = true;
            break;
        }
    }
    SectionNorm {
        value: lambda.max(0.0).sqrt().max(column_bound),
        residual,
        iterations,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_symbol_eigenvalues() {
        let a = Symbol::constant(Complex64::new(2.5, 0.0));
        for n in [0, 1, 7, 100] {
            let g = radial_eigenvalue(&a, n, 1e-12).unwrap();
            assert!((g.value.re - 2.5).abs() < 1e-11, "n = {n}: {}", g.value);
        }
        assert!(radial_eigenvalue(&Symbol::custom("x", false, |_, _| Complex64::new(1.0, 0.0)), 0, 1e-8).is_err());
    }

    #[test]
    fn power_symbol_matches_beta_function() {
        // 2(n+1) B(2n+2, 3/4) for b = 1/4, from an independent evaluation
        let expect = [
            (0, 1.5238095238095238),
            (1, 1.7731601731601732),
            (10, 2.6652197635813085),
        ];
        let a = Symbol::pow(0.25).unwrap();
        for (n, g) in expect {
            let r = radial_eigenvalue(&a, n, 1e-11).unwrap();
            assert!((r.value.re - g).abs() < 1e-9, "n = {n}: {} vs {g}", r.value.re);
        }
    }

    #[test]
    fn conjugate_variable_sits_off_diagonal() {
        let a = Symbol::custom("conj-z", false, |rho, phi| Complex64::from_polar(rho, -phi));
        let on = matrix_element(&a, 3, 2, 1e-10).unwrap().value;
        assert!((on.re - (3.0f64 / 4.0).sqrt()).abs() < 1e-9, "{on}");
        assert!(matrix_element(&a, 2, 3, 1e-10).unwrap().value.norm() < 1e-9);
        assert!(matrix_element(&a, 2, 2, 1e-10).unwrap().value.norm() < 1e-9);
    }

    #[test]
    fn identity_section_has_unit_norm() {
        for n in [1, 5, 32] {
            let s = finite_section_norm(&Symbol::one(), n, 1e-12, 100).unwrap();
            assert!((s.value - 1.0).abs() < 1e-10);
            assert!(s.converged);
        }
    }

    #[test]
    fn synthetic_growth_fit() {
        let n_max = 200;
        let seq = SpectralSequence {
            symbol: "synthetic".into(),
            n_max,
            gamma: (0..=n_max).map(|n| Complex64::new((n as f64).sqrt(), 0.0)).collect(),
            errors: vec![0.0; n_max + 1],
            converged: vec![true; n_max + 1],
            tol: 1e-12,
            fit: None,
        };
        let fit = growth_fit(&seq, 0..=n_max).unwrap();
        assert!((fit.slope - 0.5).abs() < 1e-12);
        assert_eq!(fit.excluded, vec![0]);
        assert!(growth_fit(&seq, 0..=n_max + 1).is_err());
    }
}
