use proptest::prelude::*;
use ymblowup::evolution::*;
use ymblowup::linear::GeneratorMatrix;
use ymblowup::Error;

fn engine(n: usize) -> Engine {
    Engine::new(EvolutionConfig { n, dtau: EvolutionConfig::max_dtau(n), ..Default::default() }).unwrap()
}

#[test]
fn follows_closed_form_difference_of_selfsimilar_solutions() {
    // ψ¹ − ψ^T is an exact solution of the similarity system.
    let eng = engine(48);
    let big_t: f64 = 1.1;
    let tau0 = -big_t.ln();
    let u0 = closed_form_difference(&eng.gen, big_t, tau0).unwrap();
    for tau1 in [tau0 + 0.5, tau0 + 2.0] {
        let got = eng.evolve_to(&u0, tau1).unwrap().final_state;
        let exact = closed_form_difference(&eng.gen, big_t, tau1).unwrap();
        let err = eng.gen.norm(&(&got.energy - &exact.energy)) / eng.gen.norm(&exact.energy);
        assert!(err < 1e-7, "τ = {tau1}: {err}");
    }
}

#[test]
fn initial_data_match_closed_form_at_start() {
    let gen = GeneratorMatrix::assemble(32).unwrap();
    for big_t in [0.8f64, 1.2] {
        let u = initial_data_u(&gen, &Perturbation::Zero, big_t).unwrap();
        let c = closed_form_difference(&gen, big_t, -big_t.ln()).unwrap();
        assert!((&u.energy - &c.energy).amax() < 1e-12 * c.energy.amax());
    }
}

#[test]
fn pair_variable_rhs_matches_energy_engine() {
    let eng = engine(32);
    let u = initial_data_u(&eng.gen, &Perturbation::Bump { amplitude: 0.1, width: 0.4 }, 1.05).unwrap();
    let (p1, p2) = u.phi(&eng.gen);
    let (r1, r2) = rhs(&p1, &p2, true).unwrap();
    let lit = FieldState::from_phi(&eng.gen, u.tau, &r1, &r2).unwrap();
    let fast = eng.rhs_energy(&u.energy);
    assert!((&lit.energy - &fast).amax() < 1e-8 * fast.amax());
}

#[test]
fn nonlinear_deviation_is_quadratic() {
    let base = Perturbation::Random { amplitude: 1.0, seed: 4, modes: 3 };
    let lin = Engine::new(EvolutionConfig { n: 32, dtau: 0.01, tau_max: 2.0, nonlinear: false, ..Default::default() }).unwrap();
    let non = Engine::new(EvolutionConfig { nonlinear: true, ..*lin.config() }).unwrap();
    let dev: Vec<f64> = [1e-2, 1e-3]
        .iter()
        .map(|&d| {
            let u0 = initial_data_u(&lin.gen, &base.scaled(d), 1.0).unwrap();
            let a = lin.evolve(&u0).unwrap().final_state;
            let b = non.evolve(&u0).unwrap().final_state;
            lin.gen.norm(&(&a.energy - &b.energy))
        })
        .collect();
    let order = (dev[0] / dev[1]).log10();
    assert!((order - 2.0).abs() < 0.1, "{order}");
}

#[test]
fn zero_perturbation_at_t_one_stays_zero() {
    let eng = engine(24);
    let u0 = initial_data_u(&eng.gen, &Perturbation::Zero, 1.0).unwrap();
    let tr = eng.evolve_to(&u0, 3.0).unwrap();
    assert!(tr.samples.iter().all(|s| s.norm.total == 0.0));
}

#[test]
fn step_size_above_safeguard_is_rejected() {
    let cfg = EvolutionConfig { n: 48, dtau: 2.0 * EvolutionConfig::max_dtau(48), ..Default::default() };
    assert!(cfg.validate().is_err());
}

#[test]
fn blowup_time_out_of_regime_is_rejected() {
    let gen = GeneratorMatrix::assemble(24).unwrap();
    assert!(matches!(initial_data_u(&gen, &Perturbation::Zero, 1.6), Err(Error::Input(_))));
}

#[test]
fn tabulated_data_reproduce_analytic_family() {
    let v = Perturbation::Bump { amplitude: 0.3, width: 0.5 };
    let grid = data_grid(64);
    let (v1, v2): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&r| v.blocks(r)).unzip();
    let tab = Perturbation::Tabulated(std::sync::Arc::new(TabulatedData::new(grid.nodes(), &v1, &v2).unwrap()));
    for r in [0.1, 0.5, 0.9, 1.3] {
        let (a, b) = (v.energy_blocks(r), tab.energy_blocks(r));
        assert!((a.0 - b.0).abs() < 1e-8 && (a.1 - b.1).abs() < 1e-8, "{r}: {a:?} {b:?}");
    }
}

#[test]
fn tabulated_rows_off_grid_are_rejected() {
    let rho: Vec<f64> = (1..=16).map(|k| k as f64 / 10.0).collect();
    let z = vec![0.0; 16];
    assert!(TabulatedData::new(&rho, &z, &z).is_err());
}

#[test]
fn tuning_recovers_exact_blowup_times() {
    let cfg = TuningConfig::default();
    let r = tune_blowup_time(&Perturbation::Zero, &cfg).unwrap();
    assert!((r.t_star - 1.0).abs() <= cfg.tol);
    let r = tune_blowup_time(&Perturbation::SelfSimilar { t0: 1.1 }, &cfg).unwrap();
    assert!((r.t_star - 1.1).abs() < 1e-4, "{}", r.t_star);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn blocks_are_linear_in_amplitude(a in -1.0f64..1.0, w in 0.2f64..1.0, r in 0.01f64..1.5) {
        let one = Perturbation::Bump { amplitude: 1.0, width: w };
        let (x1, x2) = one.scaled(a).energy_blocks(r);
        let (y1, y2) = one.energy_blocks(r);
        prop_assert!((x1 - a * y1).abs() <= 1e-12 * y1.abs().max(1.0));
        prop_assert!((x2 - a * y2).abs() <= 1e-12 * y2.abs().max(1.0));
    }

    #[test]
    fn random_family_is_reproducible(seed in 0u64..1000, r in 0.0f64..1.5) {
        let v = Perturbation::Random { amplitude: 1e-2, seed, modes: 4 };
        prop_assert_eq!(v.ab(r), v.clone().ab(r));
    }
}
