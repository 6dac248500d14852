use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use ymblowup::modestab::*;

const MU0: f64 = -0.588904823837016;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Potential of the mode equation, written out independently.
fn pot(rho: f64) -> f64 {
    let q = 5.0 + 3.0 * rho * rho;
    (144.0 * rho * rho - 720.0) / (q * q)
}

/// Eigenvalues of the mode equation by Chebyshev collocation on `[-1, 1]`.
///
/// With `u = ρ²y` the equation becomes
/// `λ²y + λ(5y + 2ρy') − (1−ρ²)(y'' + 6y'/ρ) + (6 + V)y = 0` for a smooth
/// even `y`, with no boundary conditions; `n` is odd so that no node sits at
/// the origin.
fn collocation_eigenvalues(n: usize) -> Vec<Complex64> {
    assert!(n % 2 == 1);
    let x: Vec<f64> = (0..=n).map(|j| (std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    let cw = |j: usize| if j == 0 || j == n { 2.0 } else { 1.0 };
    let mut d = DMatrix::<f64>::zeros(n + 1, n + 1);
    for i in 0..=n {
        for j in 0..=n {
            if i != j {
                let s = if (i + j) % 2 == 0 { 1.0 } else { -1.0 };
                d[(i, j)] = cw(i) / cw(j) * s / (x[i] - x[j]);
            }
        }
        let row: f64 = (0..=n).filter(|&j| j != i).map(|j| d[(i, j)]).sum();
        d[(i, i)] = -row;
    }
    let d2 = &d * &d;
    let m = n + 1;
    let mut mat = DMatrix::<f64>::zeros(2 * m, 2 * m);
    for i in 0..m {
        mat[(i, m + i)] = 1.0;
        let r = x[i];
        for j in 0..m {
            let diag = if i == j { 1.0 } else { 0.0 };
            let l0 = -(1.0 - r * r) * (d2[(i, j)] + 6.0 * d[(i, j)] / r) + diag * (6.0 + pot(r));
            let cm = 5.0 * diag + 2.0 * r * d[(i, j)];
            mat[(m + i, j)] = -l0;
            mat[(m + i, m + j)] = -cm;
        }
    }
    mat.complex_eigenvalues().iter().copied().collect()
}

fn nearest(ev: &[Complex64], z: Complex64) -> Complex64 {
    *ev.iter().min_by(|a, b| (*a - z).norm().partial_cmp(&(*b - z).norm()).unwrap()).unwrap()
}

#[test]
fn collocation_oracle_agrees_with_shooting() {
    // The collocation eigenvalue converges spectrally up to n ≈ 31 and then
    // loses digits to the conditioning of the companion matrix.
    let (a, b) = (collocation_eigenvalues(29), collocation_eigenvalues(31));
    let mu_a = nearest(&a, c(-0.6, 0.0));
    let mu_b = nearest(&b, c(-0.6, 0.0));
    assert!((mu_a - mu_b).norm() < 1e-8, "oracle not converged: {mu_a} {mu_b}");
    assert!((mu_b - MU0).norm() < 1e-8, "{mu_b}");
    assert!((nearest(&b, c(1.0, 0.0)) - 1.0).norm() < 1e-8);
    let rec = refine_eigenvalue(c(-0.6, 0.0), &RefineConfig::default()).unwrap();
    assert!((rec.lambda - mu_b).norm() < 1e-8);
}

#[test]
fn frozen_least_stable_eigenvalue() {
    let rec = refine_eigenvalue(c(-0.5, 0.05), &RefineConfig::default()).unwrap();
    assert!((rec.lambda - MU0).norm() < 1e-10, "{}", rec.lambda);
    assert_eq!(rec.lambda.im, 0.0);
    assert_eq!(rec.multiplicity_count, 1);
    assert!(rec.residual < 1e-8);
}

#[test]
fn symmetry_eigenfunction_matches_closed_form() {
    let rec = refine_eigenvalue(c(0.9, 0.0), &RefineConfig::default()).unwrap();
    assert!((rec.lambda - 1.0).norm() < 1e-8);
    // Max-abs normalization: -80ρ²/q² peaks in modulus at ρ = 1 with value -5/4.
    let err = rec
        .eigenfunction
        .nodes()
        .iter()
        .zip(&rec.eigenfunction.values)
        .map(|(&r, &v)| {
            let q = 5.0 + 3.0 * r * r;
            (v - (-80.0 * r * r / (q * q)) / -1.25).abs()
        })
        .fold(0.0, f64::max);
    assert!(err < 1e-7, "{err}");
}

#[test]
fn counts_are_local() {
    let cfg = ShootingConfig::default();
    assert_eq!(count_eigenvalues(&Rect::around(c(MU0, 0.0), 0.1), 24, &cfg).unwrap(), 1);
    assert_eq!(count_eigenvalues(&Rect::around(c(1.0, 0.0), 0.1), 24, &cfg).unwrap(), 1);
    assert_eq!(count_eigenvalues(&Rect::new((0.1, 0.9), (-1.0, 1.0)), 24, &cfg).unwrap(), 0);
}

#[test]
fn degenerate_parameters_are_detoured() {
    let cfg = ShootingConfig::default();
    for l in [0.0, -1.0] {
        let v = connection(c(l, 0.0), &cfg).unwrap();
        assert_ne!(v.evaluated_at, v.lambda);
        assert!(v.value.norm() > 0.1 && v.value.is_finite());
    }
}

#[test]
fn bad_matching_point_is_rejected() {
    let cfg = ShootingConfig { rho_m: 0.99, ..Default::default() };
    assert!(connection(c(0.3, 0.0), &cfg).is_err());
}

#[test]
fn symmetry_checks_pass() {
    let s = symmetry_mode_checks().unwrap();
    assert!((s.integral_collocation - 1.0 / 12288.0).abs() < 1e-12);
    assert!((s.integral_collocation - s.integral_panels).abs() < 1e-10);
    assert!(s.wronskian_error < 1e-8);
    assert!(s.h1_agreement < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn connection_respects_conjugation(re in -1.3f64..1.9, im in 0.1f64..15.0) {
        let cfg = ShootingConfig::default();
        let a = connection(c(re, im), &cfg).unwrap().value;
        let b = connection(c(re, -im), &cfg).unwrap().value;
        prop_assert!((a - b.conj()).norm() < 1e-9);
    }

    #[test]
    fn connection_is_independent_of_matching_point(re in 0.05f64..1.9, im in -10.0f64..10.0) {
        // Zeros do not move with ρ_m: |value| stays away from zero at both.
        let a = connection(c(re, im), &ShootingConfig { rho_m: 0.4, ..Default::default() }).unwrap();
        let b = connection(c(re, im), &ShootingConfig { rho_m: 0.6, ..Default::default() }).unwrap();
        let near_one = (c(re, im) - 1.0).norm() < 0.05;
        prop_assume!(!near_one);
        prop_assert!(a.value.norm() > 1e-6 && b.value.norm() > 1e-6);
    }
}

