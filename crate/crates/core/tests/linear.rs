use std::sync::Arc;

use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ymblowup::grid::Grid;
use ymblowup::linear::*;
use ymblowup::operators::GridFunction;

fn random_state(gen: &GeneratorMatrix, seed: u64) -> DVector<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Smooth random data: low-order polynomials of the right parity.
    let n = gen.n();
    let (c1, c2): (Vec<f64>, Vec<f64>) = (0..5).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).unzip();
    let mut v = DVector::zeros(2 * n);
    for (i, &r) in gen.ops.rho.iter().enumerate() {
        v[i] = r * c1.iter().rev().fold(0.0, |a, c| a * r * r + c);
        v[n + i] = c2.iter().rev().fold(0.0, |a, c| a * r * r + c);
    }
    v
}

#[test]
fn discrete_spectrum_matches_shooting_values() {
    let gen = GeneratorMatrix::assemble(48).unwrap();
    let ev = gen.eigenvalues(true);
    assert!((ev[0].re - 1.0).abs() < 1e-10 && ev[0].im.abs() < 1e-10);
    assert!((ev[1].re + 0.588904823837016).abs() < 1e-9 && ev[1].im.abs() < 1e-10, "{}", ev[1]);
}

#[test]
fn projection_is_idempotent_and_commutes() {
    let gen = GeneratorMatrix::assemble(40).unwrap();
    let p = build_projection(&gen).unwrap();
    assert!(p.gap > 1.5 && p.mode_error < 1e-8);
    let g = gen.symmetry_mode();
    assert!(gen.norm(&(p.apply(&g) - &g)) < 1e-9 * gen.norm(&g));
    for seed in 0..5 {
        let v = random_state(&gen, seed);
        let pv = p.apply(&v);
        assert!(gen.norm(&(p.apply(&pv) - &pv)) < 1e-10 * gen.norm(&v));
        let l = gen.matrix(true);
        let lp = l * &pv;
        let pl = p.apply(&(l * &v));
        assert!(gen.norm(&(lp - pl)) < 1e-8 * gen.norm(&(l * &v)));
    }
}

#[test]
fn contour_projection_agrees_with_rank_one_projection() {
    let gen = GeneratorMatrix::assemble(32).unwrap();
    let p = build_projection(&gen).unwrap();
    let v = random_state(&gen, 7);
    let c = contour_projection(&gen, &v, 0.8, 64).unwrap();
    assert!(gen.norm(&(c - p.apply(&v))) < 1e-10 * gen.norm(&v));
}

#[test]
fn free_resolvent_formula_inverts_two_minus_l0() {
    let grid = Arc::new(Grid::parity(128, 1.0));
    let bump = |r: f64| if r > 0.3 && r < 0.7 { (-1.0 / ((r - 0.3) * (0.7 - r))).exp() * 1e3 } else { 0.0 };
    let f1 = GridFunction::from_fn(&grid, 5, |r| r.powi(3) * bump(r));
    let f2 = GridFunction::from_fn(&grid, 1, |r| r * bump(r));
    let (u1, u2) = free_resolvent_at_2(&f1, &f2).unwrap();
    let (l1, l2) = free_generator_action(&u1, &u2).unwrap();
    let r1: Vec<f64> = (0..grid.len()).map(|i| 2.0 * u1.values[i] - l1.values[i] - f1.values[i]).collect();
    let r2: Vec<f64> = (0..grid.len()).map(|i| 2.0 * u2.values[i] - l2.values[i] - f2.values[i]).collect();
    let sup = |v: &[f64]| v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let res = (sup(&r1) / f1.max_abs()).max(sup(&r2) / f2.max_abs());
    assert!(res < 1e-6, "{res}");
}

#[test]
fn symmetry_mode_grows_like_exp_tau() {
    let gen = GeneratorMatrix::assemble(32).unwrap();
    let tr = linear_evolve(&gen, None, &gen.symmetry_mode(), 4.0, 0.25, true).unwrap();
    let fit = fit_rate(&tr.totals(), (0.0, 4.0)).unwrap();
    assert!((fit.slope - 1.0).abs() < 1e-6);
}

#[test]
fn rate_fit_rejects_empty_windows() {
    assert!(fit_rate(&[(0.0, 1.0), (1.0, 0.5)], (5.0, 6.0)).is_err());
    assert!(fit_rate(&[(0.0, 1.0), (1.0, 0.0)], (0.0, 1.0)).is_err());
}

#[test]
fn small_grids_are_rejected() {
    assert!(GeneratorMatrix::assemble(MIN_N - 1).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn free_flow_is_contractive(seed in 0u64..10_000, tau in 0.1f64..5.0) {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        let u0 = random_state(&gen, seed);
        let tr = linear_evolve(&gen, None, &u0, tau, tau, false).unwrap();
        let (n0, n1) = (tr.samples[0].norm.total, tr.samples[1].norm.total);
        prop_assert!(n1 <= (-1.5 * tau).exp() * n0 * (1.0 + 1e-9));
    }

    #[test]
    fn numerical_range_of_free_part(seed in 0u64..10_000) {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        let u = random_state(&gen, seed);
        let lu = gen.matrix(false) * &u;
        prop_assert!(gen.inner(&u, &lu) <= -1.5 * gen.inner(&u, &u) * (1.0 - 1e-9));
    }

    #[test]
    fn exponential_fit_recovers_rate(rate in -3.0f64..3.0, c in 0.1f64..10.0) {
        let pts: Vec<(f64, f64)> = (0..20).map(|k| { let t = k as f64 * 0.3; (t, c * (rate * t).exp()) }).collect();
        let fit = fit_rate(&pts, (0.0, 10.0)).unwrap();
        prop_assert!((fit.slope - rate).abs() < 1e-10);
    }
}
