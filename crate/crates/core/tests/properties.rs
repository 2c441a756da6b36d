//! Property tests for the invariants of each module.

use std::f64::consts::{PI, TAU};

use bergman_core::averaging::{avg_hat, carleson_mean, scaling_fit, sup_avg};
use bergman_core::geometry::{BoxIndex, Decomposition, DyadicBox};
use bergman_core::operators::{
    tensor_grid, toeplitz_truncated, truncated_apply, OperatorKind, TestFunction,
};
use bergman_core::quadrature::{integrate_box, PolarRect};
use bergman_core::spectral::{finite_section_norm, matrix_element};
use bergman_core::symbol::Symbol;
use bergman_core::{Complex64, PolarPoint};
use proptest::prelude::*;

fn index(max_m: u32) -> impl Strategy<Value = BoxIndex> {
    (1..=max_m).prop_flat_map(|m| (Just(m), 1..=BoxIndex::slots(m))).prop_map(|(m, mu)| BoxIndex::new(m, mu).unwrap())
}

fn complex() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn polynomial() -> impl Strategy<Value = TestFunction> {
    prop::collection::vec(complex(), 1..5).prop_map(TestFunction::polynomial)
}

/// Smooth non-radial symbols together with a radial oscillating one.
fn symbol() -> impl Strategy<Value = Symbol> {
    prop_oneof![
        Just(Symbol::ab(0.25).unwrap()),
        Just(Symbol::pow(0.25).unwrap()),
        Just(Symbol::custom("re(z)", false, |r, p| Complex64::new(r * p.cos(), 0.0))),
        Just(Symbol::custom("z̄²", false, |r, p| Complex64::from_polar(r * r, -2.0 * p))),
    ]
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_area(m_max in 1u32..=20) {
        let d = Decomposition::new(m_max).unwrap();
        prop_assert!((d.total_area() - (1.0 - 2f64.powi(-(m_max as i32))).powi(2)).abs() <= 1e-12);
    }

    #[test]
    fn indexed_boxes_have_the_family_shape(i in index(30)) {
        let b = DyadicBox::from_index(i);
        prop_assert_eq!(b.r_out, 1.0 - (1.0 - b.r_in) / 2.0);
        let scale = 2f64.powi(1 - i.m as i32);
        prop_assert_eq!(b.r_in, 1.0 - scale);
        prop_assert_eq!(b.theta_in, PI * (i.mu - 1) as f64 * scale);
        prop_assert_eq!(b.theta_out, PI * i.mu as f64 * scale);
        // the width is exact in units of π; in radians it carries rounding
        prop_assert!((b.theta_out - b.theta_in - PI * (1.0 - b.r_in)).abs() <= 4.0 * f64::EPSILON * TAU);
        let r = b.r_in;
        prop_assert!((b.area() - (1.0 - r).powi(2) * (1.0 + 3.0 * r) / 8.0).abs() <= 1e-12);
    }

    #[test]
    fn neighbor_relation_is_symmetric(i in index(9)) {
        let d = Decomposition::new(10).unwrap();
        let set = d.neighbors(i).unwrap();
        prop_assert!(set.members.contains(&i));
        for m in &set.members {
            prop_assert!(d.neighbors(*m).unwrap().members.contains(&i));
        }
    }

    #[test]
    fn symbol_transforms_compose(rho in 0.0..0.999f64, phi in 0.0..TAU, r1 in 0.05..0.95f64, r2 in 0.05..0.95f64) {
        let a = Symbol::custom("w", false, |r, p| Complex64::new(r.cos() - p, r * p.sin()));
        prop_assert_eq!(a.conjugate().modulus().eval(rho, phi), a.modulus().eval(rho, phi));
        let nested = a.truncate(r1).unwrap().truncate(r2).unwrap();
        prop_assert_eq!(nested.eval(rho, phi), a.truncate(r1.min(r2)).unwrap().eval(rho, phi));
    }

    #[test]
    fn ab_is_real_and_bounded(b in prop::sample::select(vec![0.25, 0.5]), rho in 0.0..0.9999f64, phi in 0.0..TAU) {
        let v = Symbol::ab(b).unwrap().eval(rho, phi);
        prop_assert_eq!(v.im, 0.0);
        if rho < 0.5 {
            prop_assert_eq!(v.re, 1.0);
        } else {
            prop_assert!(v.re.abs() <= 2.0 * (1.0 - rho).powf(-b));
        }
    }

    #[test]
    fn radial_symbols_ignore_the_angle(rho in 0.0..0.9999f64, p1 in 0.0..TAU, p2 in 0.0..TAU) {
        for a in [Symbol::ab(0.25).unwrap(), Symbol::pow(0.5).unwrap(), Symbol::parse("trunc:0.7(abs(ab:0.5))").unwrap()] {
            prop_assert!(a.is_radial());
            prop_assert_eq!(a.eval(rho, p1), a.eval(rho, p2));
        }
    }

    #[test]
    fn box_quadrature_is_deterministic_and_refines(i in index(8)) {
        let f = |r: f64, p: f64| Complex64::new((3.0 * r).sin() * p.cos(), r * r);
        let rect = PolarRect::from(&DyadicBox::from_index(i));
        let coarse = integrate_box(&f, rect, 1e-6).unwrap();
        let again = integrate_box(&f, rect, 1e-6).unwrap();
        prop_assert_eq!(coarse.value, again.value);
        let fine = integrate_box(&f, rect, 5e-7).unwrap();
        prop_assert!(fine.error_estimate <= coarse.error_estimate);
    }

    #[test]
    fn fits_recover_power_laws(c in 0.1..10.0f64, p in -1.0..3.0f64) {
        let pts: Vec<_> = (4..=14).map(|m| { let d = 2f64.powi(-m); (d, c * d.powf(p)) }).collect();
        let fit = scaling_fit(&pts).unwrap();
        prop_assert!((fit.slope - p).abs() < 1e-10);
        prop_assert!((fit.intercept - c.ln()).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn averages_are_linear_and_respect_conjugation(
        i in index(8),
        s in 0.0..=1.0f64,
        t in 0.0..=1.0f64,
        alpha in complex(),
    ) {
        let b = DyadicBox::from_index(i);
        let zeta = PolarPoint::new(b.r_in + s * (b.r_out - b.r_in), b.theta_in + t * (b.theta_out - b.theta_in));
        let a1 = Symbol::ab(0.25).unwrap();
        let a2 = Symbol::custom("z", false, |r, p| Complex64::from_polar(r, p));
        let tol = 1e-11;
        let h1 = avg_hat(&a1, &b, zeta, tol).unwrap().value;
        let h2 = avg_hat(&a2, &b, zeta, tol).unwrap().value;
        let both = avg_hat(&a1.sum(&a2.scale(alpha)), &b, zeta, tol).unwrap().value;
        prop_assert!(close(both, h1 + alpha * h2, 1e-9));
        let conj = avg_hat(&a2.conjugate(), &b, zeta, tol).unwrap().value;
        prop_assert!(close(conj, h2.conj(), 1e-10));
    }

    #[test]
    fn sup_average_is_below_carleson_mean_for_nonnegative_symbols(i in index(10)) {
        let b = DyadicBox::from_index(i);
        for a in [Symbol::pow(0.25).unwrap(), Symbol::ab(0.5).unwrap().modulus()] {
            let report = sup_avg(&a, &b, (8, 8), 1e-10).unwrap();
            let mean = carleson_mean(&a, &b, 1e-10).unwrap();
            prop_assert!(report.sup_over_zeta <= mean.value.re + 1e-9);
            prop_assert!(report.sup_over_zeta >= 0.0);
        }
    }

    #[test]
    fn operators_are_linear(
        kind in prop::sample::select(vec![OperatorKind::Toeplitz, OperatorKind::Hankel]),
        a in symbol(),
        f in polynomial(),
        g in polynomial(),
        alpha in complex(),
        rho in 0.3..0.95f64,
    ) {
        let grid = tensor_grid(&[0.0, 0.5, 0.85], 4).unwrap();
        let tol = 1e-10;
        let tf = truncated_apply(kind, &a, rho, &f, &grid, tol).unwrap();
        let tg = truncated_apply(kind, &a, rho, &g, &grid, tol).unwrap();
        let combo = f.combine(Complex64::new(1.0, 0.0), &g, alpha).unwrap();
        let tc = truncated_apply(kind, &a, rho, &combo, &grid, tol).unwrap();
        let other = Symbol::pow(0.5).unwrap();
        let to = truncated_apply(kind, &other, rho, &f, &grid, tol).unwrap();
        let ts = truncated_apply(kind, &a.sum(&other.scale(alpha)), rho, &f, &grid, tol).unwrap();
        for i in 0..grid.len() {
            prop_assert!(close(tc.values[i], tf.values[i] + alpha * tg.values[i], 1e-8));
            prop_assert!(close(ts.values[i], tf.values[i] + alpha * to.values[i], 1e-8));
        }
    }

    #[test]
    fn truncation_nests_over_annuli(a in symbol(), f in polynomial(), r1 in 0.2..0.6f64, gap in 0.05..0.35f64) {
        // T_{a_{ρ2}} - T_{a_{ρ1}} = T with the symbol restricted to ρ1 < |ζ| ≤ ρ2
        let r2 = r1 + gap;
        let grid = tensor_grid(&[0.0, 0.6], 4).unwrap();
        let tol = 1e-10;
        let outer = toeplitz_truncated(&a, r2, &f, &grid, tol).unwrap();
        let inner = toeplitz_truncated(&a, r1, &f, &grid, tol).unwrap();
        let ring_symbol = a.truncate(r2).unwrap().sum(&a.truncate(r1).unwrap().scale(Complex64::new(-1.0, 0.0)));
        let ring = toeplitz_truncated(&ring_symbol, r2, &f, &grid, tol).unwrap();
        for i in 0..grid.len() {
            prop_assert!(close(outer.values[i] - inner.values[i], ring.values[i], 1e-8));
        }
    }

    #[test]
    fn real_symbols_give_hermitian_sections(m in 0usize..5, n in 0usize..5) {
        let a = Symbol::custom("re(z)+|z|", false, |r, p| Complex64::new(r * p.cos() + r, 0.0));
        let mn = matrix_element(&a, m, n, 1e-11).unwrap().value;
        let nm = matrix_element(&a, n, m, 1e-11).unwrap().value;
        prop_assert!(close(mn, nm.conj(), 1e-9));
    }
}

#[test]
fn analyticity_of_outputs() {
    // Toeplitz outputs carry no negative Fourier modes on circles; Hankel
    // outputs no positive ones.
    let a = Symbol::custom("re(z)", false, |r, p| Complex64::new(r * p.cos(), 0.0));
    let f = TestFunction::from_real(&[1.0, -0.5, 0.25]);
    let n = 16;
    for r in [0.3, 0.7] {
        let grid = tensor_grid(&[r], n).unwrap();
        for kind in [OperatorKind::Toeplitz, OperatorKind::Hankel] {
            let field = truncated_apply(kind, &a, 0.9, &f, &grid, 1e-11).unwrap();
            for k in 1..n / 2 {
                let mode = |sign: f64| {
                    (0..n)
                        .map(|j| field.values[j] * Complex64::from_polar(1.0, -sign * (k as f64) * TAU * j as f64 / n as f64))
                        .sum::<Complex64>()
                        / n as f64
                };
                let forbidden = match kind {
                    OperatorKind::Toeplitz => mode(-1.0),
                    OperatorKind::Hankel => mode(1.0),
                };
                assert!(forbidden.norm() < 1e-10, "{kind} r={r} k={k}: {forbidden}");
            }
        }
    }
}

#[test]
fn section_norms_grow_with_the_section() {
    let a = Symbol::pow(0.25).unwrap();
    let mut last = 0.0;
    for n in [4, 16, 64, 256] {
        let s = finite_section_norm(&a, n, 1e-10, 200).unwrap();
        assert!(s.value >= last, "N = {n}: {} < {last}", s.value);
        last = s.value;
    }
}
