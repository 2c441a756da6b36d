//! Truncated, per-box, series and limit evaluation of `T_a` and `h_a`.

use std::f64::consts::PI;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Mutex;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use super::field::{grid_l2, FieldMeta, FieldSample};
use super::test_function::TestFunction;
use super::OperatorKind;
use crate::error::{Error, Result};
use crate::geometry::{BoxIndex, DyadicBox};
use crate::quadrature::{
    disc_panels, integrate_box, integrate_disc_tensor, integrate_panels, integrate_periodic, integrate_radial_profile,
    ring_panels, PiecewiseChebyshev, PolarRect, QuadratureResult, DEFAULT_NODE_BUDGET,
};
use crate::symbol::{RadialProfile, Symbol};
use crate::PolarPoint;

/// Default number of rungs `ρ_m = 1 - 2^{-m}` in a limit ladder.
pub const DEFAULT_LIMIT_GENERATIONS: u32 = 40;
/// Default grid-L² threshold on successive ladder differences.
pub const DEFAULT_CAUCHY_EPS: f64 = 2e-5;
/// Largest generation accepted by [`series_apply`].
pub const MAX_SERIES_GENERATION: u32 = 16;

const CHEBYSHEV_DEGREE: usize = 32;
const CHEBYSHEV_DEPTH: u32 = 16;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Evaluates `∫_{r0 ≤ |ζ| ≤ r1} a(ζ) f(ζ) K(z, ζ) dA(ζ)` one point at a time.
pub(crate) struct Evaluator<'a> {
    kind: OperatorKind,
    symbol: &'a Symbol,
    f: &'a TestFunction,
    radial: Option<(RadialProfile, f64)>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(kind: OperatorKind, symbol: &'a Symbol, f: &'a TestFunction) -> Result<Self> {
        let radial = match symbol.radial_profile() {
            Some(profile) => Some((profile, radial_l1(symbol)?)),
            None => None,
        };
        Ok(Evaluator {
            kind,
            symbol,
            f,
            radial,
        })
    }

    pub(crate) fn annulus(&self, z: Complex64, r0: f64, r1: f64, tol: f64) -> Result<QuadratureResult> {
        if r1 <= r0 {
            return Ok(QuadratureResult::zero());
        }
        match &self.radial {
            Some((profile, l1)) => self.radial_annulus(profile, *l1, z, r0, r1, tol),
            None => {
                if r1 >= 1.0 {
                    return Err(Error::domain("non-radial symbols need a truncation radius below 1"));
                }
                let (kind, f, a) = (self.kind, self.f, self.symbol);
                let g = |rho: f64, phi: f64| {
                    let zeta = Complex64::from_polar(rho, phi);
                    a.eval(rho, phi) * f.eval(zeta) * kind.kernel(z, zeta)
                };
                Ok(integrate_panels(&g, &ring_panels(r0, r1), tol, DEFAULT_NODE_BUDGET))
            }
        }
    }

    fn radial_annulus(
        &self,
        profile: &RadialProfile,
        l1: f64,
        z: Complex64,
        r0: f64,
        r1: f64,
        tol: f64,
    ) -> Result<QuadratureResult> {
        let angular_tol = tol / (4.0 * l1.max(1.0));
        let angular_ok = AtomicBool::new(true);
        let angular = |r: f64| self.angular(z, r, angular_tol, &angular_ok);
        let mut result = integrate_radial_profile(profile, &angular, r0, r1, 0.5 * tol)?;
        result.error_estimate += angular_tol * l1 / PI;
        result.converged = result.converged && angular_ok.load(Ordering::Relaxed) && result.error_estimate <= tol;
        Ok(result)
    }

    /// `Φ_z(r) = (r/π) ∫_0^{2π} f(re^{iφ}) K(z, re^{iφ}) dφ`.
    fn angular(&self, z: Complex64, r: f64, tol: f64, ok: &AtomicBool) -> Complex64 {
        if r == 0.0 {
            return ZERO;
        }
        let (kind, f) = (self.kind, self.f);
        let q = integrate_periodic(
            &|t: f64| {
                let zeta = Complex64::from_polar(r, t);
                f.eval(zeta) * kind.kernel(z, zeta)
            },
            tol,
        );
        if !q.converged {
            ok.store(false, Ordering::Relaxed);
        }
        q.value * (r / PI)
    }

    /// Per-point state for repeated annuli inside `[0, r_max]`: radial
    /// symbols get `Φ_z` interpolated once.
    fn prepare(&self, grid: &[PolarPoint], r_max: f64, tol: f64) -> Vec<Prepared> {
        grid.par_iter()
            .map(|p| {
                let z = p.to_complex();
                let interp = self.radial.as_ref().map(|(_, l1)| {
                    let angular_tol = tol / (8.0 * l1.max(1.0));
                    let ok = AtomicBool::new(true);
                    let cheb = PiecewiseChebyshev::build(
                        &|r: f64| self.angular(z, r, 0.1 * angular_tol, &ok),
                        0.0,
                        r_max,
                        CHEBYSHEV_DEGREE,
                        angular_tol,
                        CHEBYSHEV_DEPTH,
                    );
                    let ok = ok.into_inner() && cheb.max_check_error <= angular_tol;
                    (cheb, ok)
                });
                Prepared { z, interp }
            })
            .collect()
    }

    fn prepared_annulus(&self, p: &Prepared, r0: f64, r1: f64, tol: f64) -> Result<QuadratureResult> {
        match (&self.radial, &p.interp) {
            (Some((profile, l1)), Some((cheb, ok))) => {
                if r1 <= r0 {
                    return Ok(QuadratureResult::zero());
                }
                let weight = |r: f64| cheb.eval(r);
                let mut result = integrate_radial_profile(profile, &weight, r0, r1, 0.5 * tol)?;
                result.error_estimate += 2.0 * cheb.max_check_error * l1;
                result.converged = result.converged && *ok && result.error_estimate <= tol;
                Ok(result)
            }
            _ => self.annulus(p.z, r0, r1, tol),
        }
    }

    fn field(&self, prepared: &[Prepared], r0: f64, r1: f64, tol: f64) -> Result<Vec<QuadratureResult>> {
        prepared
            .par_iter()
            .map(|p| self.prepared_annulus(p, r0, r1, tol))
            .collect()
    }
}

pub(crate) struct Prepared {
    z: Complex64,
    interp: Option<(PiecewiseChebyshev, bool)>,
}

/// `∫_0^1 |a(r)| dr` for a radial symbol, used to scale angular tolerances.
fn radial_l1(a: &Symbol) -> Result<f64> {
    let profile = a.modulus().radial_profile().ok_or_else(|| Error::domain("symbol is not radial"))?;
    let one = |_: f64| Complex64::new(1.0, 0.0);
    let r = integrate_radial_profile(&profile, &one, 0.0, 1.0, 1e-8)?;
    Ok(r.value.re.abs())
}

pub(crate) fn check_grid(grid: &[PolarPoint]) -> Result<()> {
    match grid.iter().position(|p| !(p.rho >= 0.0 && p.rho < 1.0)) {
        None => Ok(()),
        Some(i) => Err(Error::domain(format!(
            "grid point #{i} (ρ = {}) is not in the open unit disc",
            grid[i].rho
        ))),
    }
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be positive, got {tol}")))
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho < 1.0 {
        Ok(())
    } else {
        Err(Error::domain(format!("truncation radius ρ = {rho} is not in (0, 1)")))
    }
}

fn sample(grid: &[PolarPoint], results: Vec<QuadratureResult>, meta: FieldMeta) -> FieldSample {
    let tol = meta.tol;
    FieldSample {
        grid: grid.to_vec(),
        values: results.iter().map(|r| r.value).collect(),
        per_point_error: results.iter().map(|r| r.error_estimate).collect(),
        converged: results.iter().map(|r| r.converged && r.error_estimate <= tol).collect(),
        meta,
    }
}

fn meta(operator: String, a: &Symbol, f: &TestFunction, truncation: Option<f64>, generation: Option<u32>, tol: f64) -> FieldMeta {
    FieldMeta {
        operator,
        symbol: a.describe(),
        test_function: f.describe(),
        truncation,
        generation,
        tol,
    }
}

/// `T_{a_ρ} f` or `h_{a_ρ} f` on a grid.
pub fn truncated_apply(
    kind: OperatorKind,
    a: &Symbol,
    rho: f64,
    f: &TestFunction,
    grid: &[PolarPoint],
    tol: f64,
) -> Result<FieldSample> {
    check_rho(rho)?;
    check_tol(tol)?;
    check_grid(grid)?;
    let ev = Evaluator::new(kind, a, f)?;
    let prepared = ev.prepare(grid, rho, tol);
    let results = ev.field(&prepared, 0.0, rho, tol)?;
    Ok(sample(grid, results, meta(kind.name().into(), a, f, Some(rho), None, tol)))
}

/// `T_{a_ρ} f(z) = ∫_{|ζ| ≤ ρ} a(ζ) f(ζ) (1 - zζ̄)^{-2} dA(ζ)` on a grid.
pub fn toeplitz_truncated(a: &Symbol, rho: f64, f: &TestFunction, grid: &[PolarPoint], tol: f64) -> Result<FieldSample> {
    truncated_apply(OperatorKind::Toeplitz, a, rho, f, grid, tol)
}

/// `h_{a_ρ} f(z) = ∫_{|ζ| ≤ ρ} a(ζ) f(ζ) (1 - z̄ζ)^{-2} dA(ζ)` on a grid.
pub fn hankel_truncated(a: &Symbol, rho: f64, f: &TestFunction, grid: &[PolarPoint], tol: f64) -> Result<FieldSample> {
    truncated_apply(OperatorKind::Hankel, a, rho, f, grid, tol)
}

/// `F_n f` or `H_n f`: the operator integral restricted to the box `D_n`.
pub fn box_partial_apply(
    kind: OperatorKind,
    n: BoxIndex,
    a: &Symbol,
    f: &TestFunction,
    grid: &[PolarPoint],
    tol: f64,
) -> Result<FieldSample> {
    check_tol(tol)?;
    check_grid(grid)?;
    let rect = PolarRect::from(&DyadicBox::from_index(n));
    let results = grid
        .par_iter()
        .map(|p| box_integral(kind, a, f, rect, p.to_complex(), tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(sample(
        grid,
        results,
        meta(format!("{kind}-box"), a, f, None, Some(n.m), tol),
    ))
}

pub(crate) fn box_integral(
    kind: OperatorKind,
    a: &Symbol,
    f: &TestFunction,
    rect: PolarRect,
    z: Complex64,
    tol: f64,
) -> Result<QuadratureResult> {
    let g = |rho: f64, phi: f64| {
        let zeta = Complex64::from_polar(rho, phi);
        a.eval(rho, phi) * f.eval(zeta) * kind.kernel(z, zeta)
    };
    integrate_box(&g, rect, tol)
}

/// Partial sum of `F_n f` (or `H_n f`) over all boxes of generation `≤ m`.
///
/// Each box is integrated separately on its own panels, so this route shares
/// no quadrature with [`truncated_apply`] at `ρ = 1 - 2^{-m}`.
pub fn series_apply(
    kind: OperatorKind,
    a: &Symbol,
    f: &TestFunction,
    up_to_generation: u32,
    grid: &[PolarPoint],
    tol: f64,
) -> Result<FieldSample> {
    check_tol(tol)?;
    check_grid(grid)?;
    if up_to_generation > MAX_SERIES_GENERATION {
        return Err(Error::Resource(format!(
            "series up to generation {up_to_generation} exceeds the cap {MAX_SERIES_GENERATION}"
        )));
    }
    let rects: Vec<PolarRect> = (1..=up_to_generation)
        .flat_map(|m| (1..=BoxIndex::slots(m)).map(move |mu| BoxIndex { m, mu }))
        .map(|n| PolarRect::from(&DyadicBox::from_index(n)))
        .collect();
    let box_tol = tol / rects.len().max(1) as f64;
    let results = grid
        .par_iter()
        .map(|p| {
            let z = p.to_complex();
            let mut total = QuadratureResult::zero();
            for rect in &rects {
                total = total.combine(box_integral(kind, a, f, *rect, z, box_tol)?);
            }
            total.converged = total.converged && total.error_estimate <= tol;
            Ok(total)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(sample(
        grid,
        results,
        meta(format!("{kind}-series"), a, f, None, Some(up_to_generation), tol),
    ))
}

/// Increasing truncation radii and the Cauchy threshold of a limit ladder.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LimitSchedule {
    pub radii: Vec<f64>,
    pub cauchy_eps: f64,
}

impl LimitSchedule {
    /// `ρ_m = 1 - 2^{-m}` for `m = 1..=m_max`.
    pub fn dyadic(m_max: u32, cauchy_eps: f64) -> Result<Self> {
        if m_max == 0 || m_max > 52 {
            return Err(Error::domain(format!("ladder length {m_max} is not in 1..=52")));
        }
        Self::new((1..=m_max).map(|m| 1.0 - 2f64.powi(-(m as i32))).collect(), cauchy_eps)
    }

    pub fn new(radii: Vec<f64>, cauchy_eps: f64) -> Result<Self> {
        if !(cauchy_eps > 0.0) {
            return Err(Error::domain(format!("cauchy_eps must be positive, got {cauchy_eps}")));
        }
        if radii.is_empty() {
            return Err(Error::domain("empty truncation schedule"));
        }
        for (i, &r) in radii.iter().enumerate() {
            check_rho(r)?;
            if i > 0 && r <= radii[i - 1] {
                return Err(Error::domain(format!("schedule is not increasing at step {}", i + 1)));
            }
        }
        Ok(LimitSchedule { radii, cauchy_eps })
    }
}

impl Default for LimitSchedule {
    fn default() -> Self {
        Self::dyadic(DEFAULT_LIMIT_GENERATIONS, DEFAULT_CAUCHY_EPS).expect("valid default schedule")
    }
}

/// One rung of a limit ladder.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LimitStep {
    /// One-based rung number (`m` for the dyadic schedule).
    pub step: usize,
    pub rho: f64,
    /// Grid-L² norm of the change from the previous rung.
    pub grid_l2_diff: f64,
    pub max_error: f64,
}

/// Last iterate of a limit ladder with its log.
#[derive(Debug, Clone, Serialize)]
pub struct LimitResult {
    pub field: FieldSample,
    pub log: Vec<LimitStep>,
    /// Two consecutive differences fell below `cauchy_eps`, the second no
    /// larger than the first.
    pub converged: bool,
}

/// `lim_{ρ→1} T_{a_ρ} f` (or `h_{a_ρ} f`) along a schedule.
///
/// Each rung adds the integral over the annulus between consecutive radii.
/// Failing to settle by the last rung yields `converged = false` and the full
/// log, not an error.
pub fn limit_apply(
    kind: OperatorKind,
    a: &Symbol,
    f: &TestFunction,
    grid: &[PolarPoint],
    schedule: &LimitSchedule,
    tol: f64,
) -> Result<LimitResult> {
    check_tol(tol)?;
    check_grid(grid)?;
    let ev = Evaluator::new(kind, a, f)?;
    let r_last = *schedule.radii.last().expect("non-empty schedule");
    let prepared = ev.prepare(grid, r_last, tol);
    let mut field = FieldSample::zeros(grid, meta(format!("{kind}-limit"), a, f, None, None, tol));
    let mut log = Vec::new();
    let mut converged = false;
    let mut r_prev = 0.0;
    let mut below_prev: Option<f64> = None;
    for (i, &rho) in schedule.radii.iter().enumerate() {
        let inc = ev.field(&prepared, r_prev, rho, tol)?;
        let diff = grid_l2(inc.iter().map(|r| r.value));
        for (k, r) in inc.iter().enumerate() {
            field.values[k] += r.value;
            field.per_point_error[k] += r.error_estimate;
            field.converged[k] &= r.converged;
        }
        field.meta.truncation = Some(rho);
        log.push(LimitStep {
            step: i + 1,
            rho,
            grid_l2_diff: diff,
            max_error: field.max_error(),
        });
        r_prev = rho;
        if diff < schedule.cauchy_eps {
            if below_prev.is_some_and(|p| diff <= p) {
                converged = true;
                break;
            }
            below_prev = Some(diff);
        } else {
            below_prev = None;
        }
    }
    Ok(LimitResult { field, log, converged })
}

/// `T_{ā_ρ} g` (or `h_{ā_ρ} g`).
pub fn transpose_apply(
    kind: OperatorKind,
    a: &Symbol,
    rho: f64,
    g: &TestFunction,
    grid: &[PolarPoint],
    tol: f64,
) -> Result<FieldSample> {
    let mut out = truncated_apply(kind, &a.conjugate(), rho, g, grid, tol)?;
    out.meta.operator = format!("{kind}-transpose");
    Ok(out)
}

/// Three evaluations of the pairing between `f`, `g` and a truncated operator.
///
/// Toeplitz, with `⟨u, v⟩ = ∫ u v̄ dA`:
/// `forward = ⟨T_{a_ρ} f, g⟩`, `transposed = ⟨f, T_{ā_ρ} g⟩`,
/// `direct = ∫_{|ζ|≤ρ} a f ḡ dA`.
///
/// Little Hankel, with the bilinear pairing `(u, v) = ∫ u v dA`:
/// `forward = (h_{a_ρ} f, g)`, `transposed = (f, h_{a_ρ} g)`,
/// `direct = ∫_{|ζ|≤ρ} a f g dA`.
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub kind: OperatorKind,
    pub forward: Complex64,
    pub transposed: Complex64,
    pub direct: Complex64,
    /// `|forward - transposed|`.
    pub defect: f64,
    pub error_estimate: f64,
    pub converged: bool,
}

pub fn duality_check(
    kind: OperatorKind,
    a: &Symbol,
    rho: f64,
    f: &TestFunction,
    g: &TestFunction,
    tol: f64,
) -> Result<DualityReport> {
    check_rho(rho)?;
    check_tol(tol)?;
    let a_other = match kind {
        OperatorKind::Toeplitz => a.conjugate(),
        OperatorKind::Hankel => a.clone(),
    };
    let pair = |u: Complex64, v: Complex64| match kind {
        OperatorKind::Toeplitz => u * v.conj(),
        OperatorKind::Hankel => u * v,
    };
    let inner_tol = 0.1 * tol;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let inner_ok = AtomicBool::new(true);
    let apply_at = |ev: &Evaluator<'_>, z: Complex64| match ev.annulus(z, 0.0, rho, inner_tol) {
        Ok(r) => {
            if !r.converged {
                inner_ok.store(false, Ordering::Relaxed);
            }
            r.value
        }
        Err(e) => {
            failure.lock().expect("unpoisoned").get_or_insert(e);
            ZERO
        }
    };

    let ev_f = Evaluator::new(kind, a, f)?;
    let forward = integrate_disc_tensor(
        &|r: f64, t: f64| {
            let z = Complex64::from_polar(r, t);
            pair(apply_at(&ev_f, z), g.eval(z))
        },
        tol,
    )?;
    let ev_g = Evaluator::new(kind, &a_other, g)?;
    let transposed = integrate_disc_tensor(
        &|r: f64, t: f64| {
            let z = Complex64::from_polar(r, t);
            let tg = apply_at(&ev_g, z);
            match kind {
                OperatorKind::Toeplitz => f.eval(z) * tg.conj(),
                OperatorKind::Hankel => f.eval(z) * tg,
            }
        },
        tol,
    )?;
    if let Some(e) = failure.into_inner().expect("unpoisoned") {
        return Err(e);
    }
    let direct = integrate_panels(
        &|r: f64, t: f64| {
            let z = Complex64::from_polar(r, t);
            a.eval(r, t) * pair(f.eval(z), g.eval(z))
        },
        &disc_panels(rho),
        tol,
        DEFAULT_NODE_BUDGET,
    );
    let error_estimate = forward.error_estimate + transposed.error_estimate;
    Ok(DualityReport {
        kind,
        forward: forward.value,
        transposed: transposed.value,
        direct: direct.value,
        defect: (forward.value - transposed.value).norm(),
        error_estimate,
        converged: forward.converged && transposed.converged && direct.converged && inner_ok.into_inner(),
    })
}
