use std::sync::Arc;

use proptest::prelude::*;
use ymblowup::grid::Grid;
use ymblowup::operators::*;
use ymblowup::profiles::*;

/// Composite Simpson rule with `m` (even) subintervals.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
    let h = (b - a) / m as f64;
    let inner: f64 = (1..m).map(|k| if k % 2 == 1 { 4.0 } else { 2.0 } * f(a + k as f64 * h)).sum();
    (f(a) + f(b) + inner) * h / 3.0
}

#[test]
fn symmetry_integral_by_simpson() {
    let integrand = |s: f64| s * s * h0(s) * gtilde(s);
    let a = simpson(integrand, 0.0, 1.0, 2000);
    let b = simpson(integrand, 0.0, 1.0, 4000);
    assert!((a - b).abs() < 1e-15);
    assert!((b - 1.0 / 12288.0).abs() < 1e-14, "{b}");
}

#[test]
fn identity_suite_is_clean() {
    for row in identity_suite(400) {
        let tol = if row.identity_name.contains("fd_h") { 1e-3 } else if row.identity_name.contains("order") { 0.05 } else { 1e-10 };
        assert!(row.max_abs_error < tol, "{}: {}", row.identity_name, row.max_abs_error);
    }
}

#[test]
fn energy_norm_of_selfsimilar_solution_scales() {
    // s^{3/2} ‖(ψ^T, ψ^T_t)‖_{ℰ(s)} is independent of s.
    let scaled = |s: f64| {
        let grid = Arc::new(Grid::parity(48, s));
        let f = GridFunction::from_fn(&grid, 2, |r| psi_t(1.0 - s, r, 1.0).0);
        let g = GridFunction::from_fn(&grid, 2, |r| psi_t(1.0 - s, r, 1.0).1);
        energy_norm(&f, &g, s).unwrap() * s.powf(1.5)
    };
    let q1 = scaled(1.0);
    for s in [0.5, 0.1, 0.01] {
        assert!((scaled(s) - q1).abs() < 1e-8 * q1, "{s}");
    }
}

#[test]
fn k_of_monomials() {
    // K ρ^k = ρ^{k+2}/(k+2), K² ρ^k = ρ^{k+4}/((k+2)(k+4)).
    let grid = Arc::new(Grid::parity(32, 1.0));
    for k in 0..6u32 {
        let f = GridFunction::from_fn(&grid, k, |r| r.powi(k as i32));
        let kk = apply_k2(&f);
        let c = ((k + 2) * (k + 4)) as f64;
        for (&r, &v) in f.nodes().iter().zip(&kk.values) {
            assert!((v - r.powi(k as i32 + 4) / c).abs() < 1e-13, "k = {k}, r = {r}");
        }
    }
}

#[test]
fn hat_transform_of_monomial() {
    // r⁻¹∂(r⁻¹∂ r^{k+3}) = (k+3)(k+1) r^{k-1}.
    let grid = Arc::new(Grid::parity(32, 1.0));
    let phi = GridFunction::from_fn(&grid, 2, |r| r * r);
    let h = hat_transform(&phi).unwrap();
    for (&r, &v) in phi.nodes().iter().zip(&h.values) {
        assert!((v - 15.0 * r).abs() < 1e-8, "{r}: {v}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn potential_from_nonlinearity(r in 0.01f64..1.5) {
        let w = 5.0 * (1.0 - r * r) / (5.0 + 3.0 * r * r);
        let psi = w - 1.0;
        let fp = 3.0 * psi * psi + 6.0 * psi + 2.0;
        let expect = (3.0 * fp - 6.0) / (r * r);
        prop_assert!((potential(r) - expect).abs() < 1e-10 * expect.abs().max(1.0));
    }

    #[test]
    fn ground_state_derivative_is_h0(r in 0.0f64..1.5) {
        let h = 1e-5;
        let fd = (w0(r + h) - w0(r - h)) / (2.0 * h);
        prop_assert!((fd - w0_prime(r)).abs() < 1e-8);
        prop_assert!((r * w0_prime(r) + 80.0 * h0(r)).abs() < 1e-14);
    }

    #[test]
    fn potential_derivatives_match_differences(r in 0.05f64..1.5) {
        let h = 1e-4;
        let d1 = (potential(r + h) - potential(r - h)) / (2.0 * h) / r;
        prop_assert!((d1 - potential_d1(r)).abs() < 1e-6 * potential_d1(r).abs().max(1.0));
        let d2 = (potential_d1(r + h) - potential_d1(r - h)) / (2.0 * h) / r;
        prop_assert!((d2 - potential_d2(r)).abs() < 1e-6 * potential_d2(r).abs().max(1.0));
    }

    #[test]
    fn selfsimilar_solution_solves_the_wave_equation(t in 0.0f64..0.9, r in 0.01f64..1.5) {
        prop_assert!(psi_t_residual_exact(t, r, 1.0).abs() < 1e-8 / (1.0 - t).powi(2));
        let (p, pt) = psi_t(t, r, 1.0);
        let h = 1e-6;
        let fd = (psi_t(t + h, r, 1.0).0 - psi_t(t - h, r, 1.0).0) / (2.0 * h);
        prop_assert!((fd - pt).abs() < 1e-6 / (1.0 - t));
        prop_assert!((p - (w0(r / (1.0 - t)) - 1.0)).abs() < 1e-14);
    }

    #[test]
    fn selfsim_energy_blocks_match_differences(big_t in 0.5f64..1.5, r in 0.05f64..1.5) {
        let h = 1e-4;
        let s = |x: f64| selfsim_blocks(big_t, x);
        let (w1, w2) = selfsim_blocks_energy(big_t, r);
        let d = |f: &dyn Fn(f64) -> f64, x: f64| (f(x + h) - f(x - h)) / (2.0 * h);
        let ds1 = |x: f64| d(&|y| s(y).0, x) / x;
        let fd1 = d(&ds1, r) / r;
        let fd2 = d(&|y| s(y).1, r);
        prop_assert!((fd1 - w1).abs() < 1e-5 * w1.abs().max(1.0), "{fd1} {w1}");
        prop_assert!((fd2 - w2).abs() < 1e-5 * w2.abs().max(1.0), "{fd2} {w2}");
    }

    #[test]
    fn hardy_inequality_holds(c1 in -1.0f64..1.0, c2 in -1.0f64..1.0, alpha in 2.0f64..4.0) {
        let grid = Arc::new(Grid::panels(8, 12, 10, 1.0));
        let u = GridFunction::from_fn(&grid, 3, |r| r.powi(3) * (1.0 + c1 * r + c2 * r * r));
        let (lhs, rhs) = hardy_check(&u, alpha);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }
}
