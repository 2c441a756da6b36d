//! Operator examples checked against closed forms and mpmath values.

use bergman_core::geometry::{BoxIndex, Decomposition, DyadicBox};
use bergman_core::operators::{
    box_partial_apply, default_grid, hankel_truncated, limit_apply, series_apply, tensor_grid, toeplitz_truncated,
    transpose_apply, LimitSchedule, OperatorKind, TestFunction,
};
use bergman_core::spectral::radial_eigenvalue;
use bergman_core::symbol::Symbol;
use bergman_core::Complex64;

/// `2∫_0^{7/8} a_{1/4}(r) r dr` (mpmath, 30 digits).
const AB_QUARTER_MASS_7_8: f64 = 0.300_579_660_161_585_737;
/// `8∫_0^{7/8} a_{1/4}(r) r^7 dr`.
const AB_QUARTER_GAMMA3_7_8: f64 = -0.089_530_464_130_135_411;
/// `2∫_0^1 a_{1/4}(r) r dr`.
const AB_QUARTER_GAMMA0: f64 = 0.303_414_368_833_219_853;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn truncated_symbol_below_the_radius() {
    let a = Symbol::parse("trunc:0.5(const:1)").unwrap();
    let f = TestFunction::from_real(&[1.0]);
    for rho in [0.5, 0.75, 0.99] {
        let field = toeplitz_truncated(&a, rho, &f, &default_grid(), 1e-12).unwrap();
        assert!(field.max_abs_error(|_| c(0.25)) < 1e-12);
    }
}

#[test]
fn hankel_with_constant_symbol() {
    let one = Symbol::one();
    let grid = default_grid();
    let rho: f64 = 0.999;
    let h = hankel_truncated(&one, rho, &TestFunction::from_real(&[1.0]), &grid, 1e-12).unwrap();
    assert!(h.max_abs_error(|_| c(rho * rho)) < 1e-12);
    for n in 1..=4 {
        let h = hankel_truncated(&one, rho, &TestFunction::monomial(n), &grid, 1e-12).unwrap();
        assert!(h.max_abs_error(|_| c(0.0)) < 1e-12, "n = {n}");
    }
}

#[test]
fn hankel_of_oscillating_symbol_on_constant() {
    let a = Symbol::ab(0.25).unwrap();
    let h = hankel_truncated(&a, 0.875, &TestFunction::from_real(&[1.0]), &default_grid(), 1e-11).unwrap();
    assert!(h.max_abs_error(|_| c(AB_QUARTER_MASS_7_8)) < 1e-10);
}

#[test]
fn radial_diagonality_matches_truncated_eigenvalue() {
    // T_{a_ρ} z^3 = γ_3(a_ρ) z^3
    let a = Symbol::ab(0.25).unwrap();
    let rho = 0.875;
    let field = toeplitz_truncated(&a, rho, &TestFunction::monomial(3), &default_grid(), 1e-11).unwrap();
    assert!(field.max_abs_error(|z| AB_QUARTER_GAMMA3_7_8 * z.powu(3)) < 1e-10);
    let gamma = radial_eigenvalue(&a.truncate(rho).unwrap(), 3, 1e-12).unwrap().value;
    assert!((gamma.re - AB_QUARTER_GAMMA3_7_8).abs() < 1e-10);
}

#[test]
fn series_examples() {
    let one = Symbol::one();
    let f = TestFunction::from_real(&[1.0]);
    let grid = default_grid();
    let s = series_apply(OperatorKind::Toeplitz, &one, &f, 3, &grid, 1e-12).unwrap();
    assert!(s.max_abs_error(|_| c(0.765625)) < 1e-12);
    let empty = series_apply(OperatorKind::Toeplitz, &one, &f, 0, &grid, 1e-12).unwrap();
    assert!(empty.values.iter().all(|v| *v == c(0.0)));
    assert!(series_apply(OperatorKind::Toeplitz, &one, &f, 17, &grid, 1e-12).is_err());
}

#[test]
fn box_pieces_at_the_origin_sum_to_the_covered_area() {
    let one = Symbol::one();
    let f = TestFunction::from_real(&[1.0]);
    let origin = tensor_grid(&[0.0], 1).unwrap();
    let d = Decomposition::new(5).unwrap();
    let mut total = 0.0;
    for i in d.iter_indices() {
        let piece = box_partial_apply(OperatorKind::Toeplitz, i, &one, &f, &origin, 1e-13).unwrap();
        assert!((piece.values[0].re - DyadicBox::from_index(i).area()).abs() < 1e-13);
        total += piece.values[0].re;
    }
    assert!((total - (1.0 - 2f64.powi(-5)).powi(2)).abs() < 1e-12);
}

#[test]
fn box_piece_vanishes_outside_the_symbol_support() {
    let i = BoxIndex::new(4, 5).unwrap();
    let rho = DyadicBox::from_index(i).r_in;
    let a = Symbol::ab(0.25).unwrap().truncate(rho).unwrap();
    let piece = box_partial_apply(OperatorKind::Toeplitz, i, &a, &TestFunction::monomial(2), &default_grid(), 1e-12)
        .unwrap();
    assert!(piece.values.iter().all(|v| v.norm() < 1e-14));
}

#[test]
fn transpose_of_real_symbol_is_the_operator() {
    let a = Symbol::ab(0.25).unwrap();
    let f = TestFunction::from_real(&[1.0, 1.0]);
    let grid = default_grid();
    let t = toeplitz_truncated(&a, 0.875, &f, &grid, 1e-11).unwrap();
    let tt = transpose_apply(OperatorKind::Toeplitz, &a, 0.875, &f, &grid, 1e-11).unwrap();
    for (x, y) in t.values.iter().zip(&tt.values) {
        assert!((x - y).norm() < 1e-12);
    }
}

#[test]
fn limit_of_oscillating_symbol_on_constant() {
    let a = Symbol::ab(0.25).unwrap();
    let r = limit_apply(
        OperatorKind::Toeplitz,
        &a,
        &TestFunction::from_real(&[1.0]),
        &default_grid(),
        &LimitSchedule::default(),
        1e-10,
    )
    .unwrap();
    assert!(r.converged);
    assert!(r.field.max_abs_error(|_| c(AB_QUARTER_GAMMA0)) < 1e-4);
    let diffs: Vec<f64> = r.log.iter().map(|s| s.grid_l2_diff).collect();
    assert!(diffs.last().unwrap() < &LimitSchedule::default().cauchy_eps);
}

#[test]
fn limit_without_cancellation_keeps_moving() {
    // γ_n(pow:1/4) grows like n^{1/4}: for a high monomial the ladder's
    // differences shrink far more slowly than for the oscillating symbol.
    let f = TestFunction::monomial(24);
    let grid = tensor_grid(&[0.9], 4).unwrap();
    let schedule = LimitSchedule::dyadic(8, 2e-5).unwrap();
    let pow = limit_apply(OperatorKind::Toeplitz, &Symbol::pow(0.25).unwrap(), &f, &grid, &schedule, 1e-10).unwrap();
    assert!(!pow.converged);
    let last = pow.log.last().unwrap().grid_l2_diff;
    assert!(last > 1e-3, "{last}");
}
