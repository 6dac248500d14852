use ymblowup::evolution::{initial_data_u, Engine, EvolutionConfig, Perturbation};
use ymblowup::lightcone::*;
use ymblowup::linear::GeneratorMatrix;
use ymblowup::profiles;
use ymblowup::Error;

fn cfg(n: usize, t_max: f64) -> PhysConfig {
    PhysConfig { n, t_max, ..Default::default() }
}

/// Largest deviation from `ψ^T` inside the backward light cone.
fn cone_error(run: &PhysRun, big_t: f64) -> f64 {
    let st = run.last();
    st.r()
        .iter()
        .zip(&st.psi)
        .filter(|(&r, _)| r <= big_t - st.t)
        .map(|(&r, &p)| (p - profiles::psi_t(st.t, r, big_t).0).abs())
        .fold(0.0, f64::max)
}

#[test]
fn tracks_selfsimilar_solution_at_fourth_order() {
    let data = PhysData::selfsimilar(0.8, Perturbation::Zero);
    let coarse = cone_error(&evolve_physical(&data, &cfg(600, 0.6)).unwrap(), 0.8);
    let fine = cone_error(&evolve_physical(&data, &cfg(1200, 0.6)).unwrap(), 0.8);
    assert!(fine < 1e-8, "{fine}");
    let order = (coarse / fine).log2();
    assert!(order > 3.5, "observed order {order}");
}

#[test]
fn zero_data_stay_zero() {
    let run = evolve_physical(&PhysData::vacuum(Perturbation::Zero), &cfg(200, 1.0)).unwrap();
    assert!(run.states.iter().all(|s| s.psi.iter().chain(&s.psi_t).all(|&x| x == 0.0)));
    assert!(detect_blowup(&run.history, 10.0).is_err());
}

#[test]
fn small_data_do_not_blow_up() {
    let data = PhysData::vacuum(Perturbation::Bump { amplitude: 1e-3, width: 0.3 });
    let run = evolve_physical(&data, &cfg(600, 1.5)).unwrap();
    assert!(!run.resolution_limit && run.breakdown.is_none());
    let sup = run.states.iter().map(|s| s.sup_psi()).fold(0.0, f64::max);
    assert!(sup <= 1e-2, "{sup}");
    assert!(matches!(detect_blowup(&run.history, 10.0), Err(Error::Detection(_))));
}

#[test]
fn energy_is_conserved_before_the_wall_is_reached() {
    let data = PhysData::vacuum(Perturbation::Bump { amplitude: 0.5, width: 0.15 });
    let run = evolve_physical(&data, &cfg(1200, 0.5)).unwrap();
    let e0 = run.states[0].energy();
    for st in &run.states {
        assert!(((st.energy() - e0) / e0).abs() < 1e-4, "t = {}", st.t);
    }
}

#[test]
fn higher_energy_of_free_flow_is_conserved() {
    let data = PhysData::vacuum(Perturbation::Bump { amplitude: 0.5, width: 0.15 });
    let run = evolve_physical(&data, &PhysConfig { nonlinear: false, ..cfg(2400, 0.5) }).unwrap();
    let e0 = run.states[0].higher_energy();
    for st in &run.states {
        assert!(((st.higher_energy() - e0) / e0).abs() < 1e-6, "t = {}", st.t);
    }
}

#[test]
fn cfl_violation_is_a_config_error() {
    let data = PhysData::vacuum(Perturbation::Zero);
    assert!(matches!(evolve_physical(&data, &PhysConfig { cfl: 1.5, ..cfg(100, 0.1) }), Err(Error::Input(_))));
}

#[test]
fn detects_blowup_time_of_exact_series() {
    let t0 = 0.9;
    let history: Vec<GrowthSample> = (0..400)
        .map(|k| {
            let t = 0.8 * t0 * k as f64 / 399.0 + 0.15 * t0 * (k as f64 / 399.0).powi(4);
            GrowthSample { t, sup_psi_t: 4.0 / (3.0 * (t0 - t)), w_origin: -1.6 / (t0 - t).powi(2) }
        })
        .collect();
    let fit = detect_blowup(&history, 10.0).unwrap();
    assert!((fit.t_fit - t0).abs() < 1e-3);
    assert!((fit.t_origin.unwrap() - t0).abs() < 1e-12);
}

#[test]
fn exact_solution_has_negligible_difference_norm() {
    let run = evolve_physical(&PhysData::selfsimilar(0.9, Perturbation::Zero), &cfg(1200, 1.5)).unwrap();
    assert!(run.resolution_limit);
    let fit = detect_blowup(&run.history, 10.0).unwrap();
    assert!((fit.t_fit - 0.9).abs() < 1e-3 && (fit.best() - 0.9).abs() < 1e-6);
    let rep = convergence_report(&run, 0.9, &ReportConfig::default()).unwrap();
    for sl in &rep.slices {
        assert!(sl.q < 1e-4 * sl.q_reference, "t = {}: {}", sl.t, sl.q);
    }
    assert!(rep.profile_error < 1e-6);
}

#[test]
fn reference_norm_is_scale_invariant() {
    // `s^{3/2}‖ψ^T‖_{ℰ(s)}` does not depend on `s`.
    let run = evolve_physical(&PhysData::selfsimilar(0.9, Perturbation::Zero), &cfg(1200, 1.5)).unwrap();
    let rep = convergence_report(&run, 0.9, &ReportConfig::default()).unwrap();
    let q0 = rep.slices[0].q_reference;
    for sl in &rep.slices {
        assert!((sl.q_reference - q0).abs() < 1e-8 * q0);
    }
}

#[test]
fn perturbed_data_converge_to_a_nearby_selfsimilar_solution() {
    let data = PhysData::selfsimilar(0.9, Perturbation::Random { amplitude: 1e-2, seed: 11, modes: 4 });
    let run = evolve_physical(&data, &cfg(1200, 1.5)).unwrap();
    let fit = detect_blowup(&run.history, 10.0).unwrap();
    assert!(fit.best() > 0.5 && fit.best() < 1.5);
    let rep = convergence_report(&run, fit.best(), &ReportConfig::default()).unwrap();
    assert!(!rep.low_confidence, "{:?}", rep.notes);
    assert!(rep.exponent >= 0.4 && rep.profile_error <= 1e-2, "{} {}", rep.exponent, rep.profile_error);
    assert!(rep.route_gap < 1e-3);
}

#[test]
fn physical_and_similarity_evolutions_agree() {
    let v = Perturbation::Bump { amplitude: 0.05, width: 0.5 };
    let run = evolve_physical(&PhysData::selfsimilar(1.0, v.clone()), &PhysConfig { record_dt: 0.2, ..cfg(1200, 0.6) })
        .unwrap();
    let gen = GeneratorMatrix::assemble(48).unwrap();
    let u0 = initial_data_u(&gen, &v, 1.0).unwrap();
    let m0 = similarity_state(&run.states[0], 1.0, &gen).unwrap();
    assert!((&m0.energy - &u0.energy).amax() < 1e-5 * u0.energy.amax());
    let engine = Engine::new(EvolutionConfig { n: 48, dtau: 0.004, ..Default::default() }).unwrap();
    for st in &run.states[1..] {
        let mapped = similarity_state(st, 1.0, &gen).unwrap();
        let evolved = engine.evolve_to(&u0, mapped.tau).unwrap().final_state;
        let err = (&mapped.energy - &evolved.energy).amax();
        assert!(err < 1e-5 * u0.energy.amax(), "t = {}: {err}", st.t);
    }
}
