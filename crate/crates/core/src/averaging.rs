//! Box averages of a symbol.
//!
//! For a box `D = D(r, θ)` and `ζ = ρ e^{iφ} ∈ D`,
//!
//! ```text
//! â_D(ζ) = (1/|D|) (1/π) ∫_r^ρ ∫_θ^φ a(ϱ e^{iφ'}) ϱ dφ' dϱ ,
//! ```
//!
//! the Carleson mean is `M_a(D) = (1/|D|) ∫_D |a| dA`, and both are measured
//! along box ladders `D(1 - 2δ, θ)`, `δ = 2^{-m}`, with log–log fits.
//! Radial symbols use one-dimensional radial integrals (the angular factor
//! is exact); other symbols use tensor quadrature on the box.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::DyadicBox;
use crate::quadrature::{integrate_box, integrate_radial_profile, PolarRect, QuadratureResult};
use crate::symbol::Symbol;
use crate::PolarPoint;

/// Default `ζ` grid (radial × angular) for [`sup_avg`].
pub const DEFAULT_ZETA_GRID: (usize, usize) = (16, 16);

/// Default absolute tolerance on averaged quantities.
pub const DEFAULT_TOLERANCE: f64 = 1e-10;

/// Outcome of [`sup_avg`] on one box.
#[derive(Debug, Clone, Serialize)]
pub struct AveragingReport {
    pub r_in: f64,
    pub theta_in: f64,
    pub area: f64,
    /// `max |â_D(ζ)|` over the sampled `ζ`; a lower bound for the supremum.
    pub sup_over_zeta: f64,
    pub argmax_zeta: PolarPoint,
    pub carleson_mean: f64,
    pub zeta_grid: (usize, usize),
    pub error_estimate: f64,
    pub tol: f64,
    pub converged: bool,
}

impl AveragingReport {
    pub fn zeta_grid_size(&self) -> usize {
        self.zeta_grid.0 * self.zeta_grid.1
    }
}

/// Least-squares line through `(log δ, log y)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
    pub points: usize,
}

fn wrap(phi: f64) -> f64 {
    phi.rem_euclid(TAU)
}

/// `∫_{r0}^{r1} a(ϱ) ϱ dϱ` for a radial symbol.
fn radial_moment(a: &Symbol, r0: f64, r1: f64, tol: f64) -> Result<QuadratureResult> {
    let profile = a
        .radial_profile()
        .ok_or_else(|| Error::domain("radial moment of a non-radial symbol"))?;
    integrate_radial_profile(&profile, &|r| Complex64::new(r, 0.0), r0, r1, tol)
}

/// `(1/π) ∬ a ϱ dϱ dφ` over a polar rectangle inside the open disc.
fn rect_integral(a: &Symbol, rect: PolarRect, tol: f64) -> Result<QuadratureResult> {
    if a.is_radial() {
        let width = rect.phi1 - rect.phi0;
        if width == 0.0 || rect.r0 == rect.r1 {
            return Ok(QuadratureResult::zero());
        }
        let scale = width / PI;
        Ok(radial_moment(a, rect.r0, rect.r1, tol / scale)?.scale(scale))
    } else {
        integrate_box(&|rho, phi| a.eval(rho, wrap(phi)), rect, tol)
    }
}

/// `â_D(ζ)` with absolute tolerance `tol` on the average. `ζ` must lie in
/// the closed box.
pub fn avg_hat(a: &Symbol, b: &DyadicBox, zeta: PolarPoint, tol: f64) -> Result<QuadratureResult> {
    let phi = match b.unwrap_angle(zeta.phi) {
        Some(phi) if zeta.rho >= b.r_in && zeta.rho <= b.r_out => phi,
        _ => {
            return Err(Error::domain(format!(
                "ζ = (ρ={}, φ={}) is not in the box [{}, {}] × [{}, {}]",
                zeta.rho, zeta.phi, b.r_in, b.r_out, b.theta_in, b.theta_out
            )))
        }
    };
    let area = b.area();
    let rect = PolarRect::new(b.r_in, zeta.rho, b.theta_in, phi);
    Ok(rect_integral(a, rect, tol * area)?.scale(1.0 / area))
}

/// `M_a(D) = (1/|D|) ∫_D |a| dA`; the value is real.
pub fn carleson_mean(a: &Symbol, b: &DyadicBox, tol: f64) -> Result<QuadratureResult> {
    let area = b.area();
    let rect = PolarRect::new(b.r_in, b.r_out, b.theta_in, b.theta_out);
    Ok(rect_integral(&a.modulus(), rect, tol * area)?.scale(1.0 / area))
}

fn tensor_nodes(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| if i + 1 == n { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 })
        .collect()
}

/// Maximizes `|â_D|` over a tensor grid of `ζ` that includes the four
/// corners, and adds the Carleson mean of the same box.
///
/// The grid values are assembled from cell integrals by prefix sums, so
/// every `â_D(ζ)` uses the same quadrature cells.
pub fn sup_avg(a: &Symbol, b: &DyadicBox, grid: (usize, usize), tol: f64) -> Result<AveragingReport> {
    let (nr, np) = grid;
    if nr < 2 || np < 2 {
        return Err(Error::domain(format!("ζ grid {nr}×{np} must be at least 2×2")));
    }
    let rhos = tensor_nodes(b.r_in, b.r_out, nr);
    let phis = tensor_nodes(b.theta_in, b.theta_out, np);
    let area = b.area();
    let cells = ((nr - 1) * (np - 1)) as f64;
    // cumulative[i][j] = ∫ over [r_in, ρ_i] × [θ_in, φ_j]
    let mut cumulative = vec![vec![Complex64::new(0.0, 0.0); np]; nr];
    let mut err = 0.0;
    let mut converged = true;
    if a.is_radial() {
        // â = (φ - θ_in)/(π|D|) · ∫ a ϱ dϱ, largest at φ = θ_out
        let to_avg = b.angular_width() / PI;
        let piece_tol = tol * area / to_avg / (nr - 1) as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 1..nr {
            let piece = radial_moment(a, rhos[i - 1], rhos[i], piece_tol)?;
            acc += piece.value;
            err += piece.error_estimate * to_avg;
            converged &= piece.converged;
            for j in 0..np {
                cumulative[i][j] = acc * ((phis[j] - b.theta_in) / PI);
            }
        }
    } else {
        let cell_tol = tol * area / cells;
        let rows: Vec<Result<Vec<QuadratureResult>>> = (1..nr)
            .into_par_iter()
            .map(|i| {
                (1..np)
                    .map(|j| {
                        rect_integral(a, PolarRect::new(rhos[i - 1], rhos[i], phis[j - 1], phis[j]), cell_tol)
                    })
                    .collect()
            })
            .collect();
        for (i, row) in rows.into_iter().enumerate() {
            let row = row?;
            let i = i + 1;
            let mut line = Complex64::new(0.0, 0.0);
            for (j, cell) in row.iter().enumerate() {
                let j = j + 1;
                line += cell.value;
                err += cell.error_estimate;
                converged &= cell.converged;
                cumulative[i][j] = cumulative[i - 1][j] + line;
            }
        }
    }
    let mut best = (0.0, PolarPoint::new(b.r_in, wrap(b.theta_in)));
    for (i, row) in cumulative.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            let m = v.norm() / area;
            if m > best.0 {
                best = (m, PolarPoint::new(rhos[i], wrap(phis[j])));
            }
        }
    }
    let mean = carleson_mean(a, b, tol)?;
    let error_estimate = err / area;
    Ok(AveragingReport {
        r_in: b.r_in,
        theta_in: b.theta_in,
        area,
        sup_over_zeta: best.0,
        argmax_zeta: best.1,
        carleson_mean: mean.value.re,
        zeta_grid: grid,
        error_estimate: error_estimate.max(mean.error_estimate),
        tol,
        converged: converged && error_estimate <= tol && mean.converged,
    })
}

/// Boxes `D(1 - 2δ, θ)` for `δ = 2^{-m}`, `m ∈ generations`.
pub fn box_ladder(generations: std::ops::RangeInclusive<u32>, theta: f64) -> Result<Vec<(f64, DyadicBox)>> {
    generations
        .map(|m| {
            let delta = 2f64.powi(-(m as i32));
            Ok((delta, DyadicBox::family(1.0 - 2.0 * delta, theta)?))
        })
        .collect()
}

/// One rung of a ladder: `δ`, the box, its report.
#[derive(Debug, Clone, Serialize)]
pub struct LadderRung {
    pub m: u32,
    pub delta: f64,
    pub report: AveragingReport,
}

/// [`sup_avg`] along the ladder `D(1 - 2δ, θ)`, `δ = 2^{-m}`.
pub fn avg_ladder(
    a: &Symbol,
    generations: std::ops::RangeInclusive<u32>,
    theta: f64,
    grid: (usize, usize),
    tol: f64,
) -> Result<Vec<LadderRung>> {
    let start = *generations.start();
    let boxes = box_ladder(generations, theta)?;
    boxes
        .into_par_iter()
        .enumerate()
        .map(|(k, (delta, b))| {
            Ok(LadderRung {
                m: start + k as u32,
                delta,
                report: sup_avg(a, &b, grid, tol)?,
            })
        })
        .collect()
}

/// `max_θ M_a(D(r, θ))` over the given angles.
pub fn carleson_sup_theta(a: &Symbol, r: f64, thetas: &[f64], tol: f64) -> Result<QuadratureResult> {
    let mut best: Option<QuadratureResult> = None;
    for &theta in thetas {
        let m = carleson_mean(a, &DyadicBox::family(r, theta)?, tol)?;
        if best.is_none_or(|b| m.value.re > b.value.re) {
            best = Some(m);
        }
    }
    best.ok_or_else(|| Error::domain("no angles given"))
}

/// Log–log least squares of `y` against `δ`.
pub fn scaling_fit(values: &[(f64, f64)]) -> Result<ScalingFit> {
    if values.len() < 3 {
        return Err(Error::domain(format!("scaling fit needs at least 3 points, got {}", values.len())));
    }
    if let Some((d, y)) = values.iter().find(|(d, y)| !(*d > 0.0 && *y > 0.0)) {
        return Err(Error::domain(format!("scaling fit needs positive data, got ({d}, {y})")));
    }
    let logs: Vec<(f64, f64)> = values.iter().map(|(d, y)| (d.ln(), y.ln())).collect();
    Ok(log_fit(&logs))
}

/// Ordinary least squares on points already in log space.
pub(crate) fn log_fit(points: &[(f64, f64)]) -> ScalingFit {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = points.iter().map(|p| (p.1 - intercept - slope * p.0).powi(2)).sum();
    ScalingFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
        points: points.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn one() -> Symbol {
        Symbol::one()
    }

    #[test]
    fn constant_symbol_corners() {
        let b = DyadicBox::family(0.5, 1.0).unwrap();
        let outer = PolarPoint::new(b.r_out, b.theta_out);
        let inner = PolarPoint::new(b.r_in, b.theta_in);
        assert_abs_diff_eq!(avg_hat(&one(), &b, outer, 1e-12).unwrap().value.re, 1.0, epsilon = 1e-12);
        assert_eq!(avg_hat(&one(), &b, inner, 1e-12).unwrap().value.re, 0.0);
        assert!(avg_hat(&one(), &b, PolarPoint::new(0.1, 1.0), 1e-12).is_err());
    }

    #[test]
    fn constant_symbol_sup_and_mean() {
        let b = DyadicBox::family(0.75, 2.0).unwrap();
        let r = sup_avg(&one(), &b, (4, 4), 1e-12).unwrap();
        assert_abs_diff_eq!(r.sup_over_zeta, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(r.argmax_zeta.rho, b.r_out);
        assert_abs_diff_eq!(r.carleson_mean, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn radial_and_tensor_routes_agree() {
        let a = Symbol::ab(0.25).unwrap();
        let opaque = Symbol::custom("ab-nonradial", false, move |r, _| {
            Complex64::new(crate::symbol::ab_value(0.25, r), 0.0)
        });
        let b = DyadicBox::family(1.0 - 2f64.powi(-5), 0.3).unwrap();
        let z = PolarPoint::new(0.5 * (b.r_in + b.r_out), b.theta_in + 0.3 * b.angular_width());
        let x = avg_hat(&a, &b, z, 1e-10).unwrap();
        let y = avg_hat(&opaque, &b, z, 1e-10).unwrap();
        assert!(x.converged && y.converged);
        assert!((x.value - y.value).norm() < 2e-10, "{} vs {}", x.value, y.value);
    }

    #[test]
    fn truncated_symbol_vanishes_on_outer_boxes() {
        let a = Symbol::parse("trunc:0.5(const:1)").unwrap();
        let b = DyadicBox::family(0.5, 0.0).unwrap();
        assert_eq!(carleson_mean(&a, &b, 1e-12).unwrap().value.re, 0.0);
    }

    #[test]
    fn fits() {
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (2f64.powi(-k), 2f64.powi(-2 * k))).collect();
        let f = scaling_fit(&pts).unwrap();
        assert_abs_diff_eq!(f.slope, 2.0, epsilon = 1e-12);
        assert!(f.residual < 1e-12);
        let pts: Vec<(f64, f64)> = (1..6).map(|k| (k as f64, 3.0 * (k as f64).sqrt())).collect();
        let f = scaling_fit(&pts).unwrap();
        assert_abs_diff_eq!(f.slope, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.intercept, 3f64.ln(), epsilon = 1e-12);
        assert!(scaling_fit(&pts[..2]).is_err());
        assert!(scaling_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
    }
}
