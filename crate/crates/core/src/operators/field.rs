//! Operator outputs sampled on finite grids.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::PolarPoint;

/// Radii of the default evaluation grid (besides the origin).
pub const DEFAULT_GRID_RADII: [f64; 4] = [0.3, 0.6, 0.8, 0.9];
/// Angles per radius of the default evaluation grid.
pub const DEFAULT_GRID_ANGLES: usize = 8;

/// Tensor grid `radii × n_angles` (angles `2πj/n`). A zero radius
/// contributes the origin once.
pub fn tensor_grid(radii: &[f64], n_angles: usize) -> Result<Vec<PolarPoint>> {
    if n_angles == 0 {
        return Err(Error::domain("grid needs at least one angle"));
    }
    let mut out = Vec::new();
    for &r in radii {
        if !(0.0..1.0).contains(&r) {
            return Err(Error::domain(format!("grid radius {r} is not in [0, 1)")));
        }
        if r == 0.0 {
            out.push(PolarPoint::new(0.0, 0.0));
            continue;
        }
        for j in 0..n_angles {
            out.push(PolarPoint::new(r, TAU * j as f64 / n_angles as f64));
        }
    }
    Ok(out)
}

/// The origin plus radii {0.3, 0.6, 0.8, 0.9} × 8 angles (33 points).
pub fn default_grid() -> Vec<PolarPoint> {
    let mut radii = vec![0.0];
    radii.extend(DEFAULT_GRID_RADII);
    tensor_grid(&radii, DEFAULT_GRID_ANGLES).expect("valid default grid")
}

/// Describes the operator that produced a [`FieldSample`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldMeta {
    pub operator: String,
    pub symbol: String,
    pub test_function: String,
    pub truncation: Option<f64>,
    pub generation: Option<u32>,
    pub tol: f64,
}

/// Values of an operator output on a grid, with per-point error estimates.
#[derive(Debug, Clone, Serialize)]
pub struct FieldSample {
    pub grid: Vec<PolarPoint>,
    pub values: Vec<Complex64>,
    pub per_point_error: Vec<f64>,
    pub converged: Vec<bool>,
    pub meta: FieldMeta,
}

impl FieldSample {
    pub fn zeros(grid: &[PolarPoint], meta: FieldMeta) -> Self {
        FieldSample {
            grid: grid.to_vec(),
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            per_point_error: vec![0.0; grid.len()],
            converged: vec![true; grid.len()],
            meta,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn all_converged(&self) -> bool {
        self.converged.iter().all(|&c| c)
    }

    pub fn max_error(&self) -> f64 {
        self.per_point_error.iter().copied().fold(0.0, f64::max)
    }

    /// Adds `other` point by point (same grid).
    pub fn accumulate(&mut self, other: &FieldSample) {
        debug_assert_eq!(self.grid.len(), other.grid.len());
        for i in 0..self.values.len() {
            self.values[i] += other.values[i];
            self.per_point_error[i] += other.per_point_error[i];
            self.converged[i] &= other.converged[i];
        }
    }

    /// Root mean square of `|self - other|` over the grid.
    pub fn grid_l2_diff(&self, other: &FieldSample) -> f64 {
        grid_l2(self.values.iter().zip(&other.values).map(|(a, b)| *a - *b))
    }

    /// Root mean square of `|self - g|` for a reference function `g`.
    pub fn grid_l2_error(&self, reference: impl Fn(Complex64) -> Complex64) -> f64 {
        grid_l2(
            self.grid
                .iter()
                .zip(&self.values)
                .map(|(p, v)| *v - reference(p.to_complex())),
        )
    }

    pub fn max_abs_error(&self, reference: impl Fn(Complex64) -> Complex64) -> f64 {
        self.grid
            .iter()
            .zip(&self.values)
            .map(|(p, v)| (*v - reference(p.to_complex())).norm())
            .fold(0.0, f64::max)
    }
}

/// Root mean square of a sequence of complex values.
pub fn grid_l2(values: impl Iterator<Item = Complex64>) -> f64 {
    let (mut sum, mut n) = (0.0, 0usize);
    for v in values {
        sum += v.norm_sqr();
        n += 1;
    }
    if n == 0 {
        0.0
    } else {
        (sum / n as f64).sqrt()
    }
}
