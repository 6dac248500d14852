//! Command implementations. Each writes its artifacts into the output
//! directory and returns the list of written files.

use std::path::Path;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use ymblowup::evolution::{initial_data_u, phi_table, tune_blowup_time, Engine, TuningStep};
use ymblowup::lightcone::{
    convergence_report, detect_blowup, evolve_physical, Background, BlowupFit, BlowupReport, PhysData,
};
use ymblowup::linear::{build_projection, fit_rate, linear_evolve, GeneratorMatrix, RateFit};
use ymblowup::modestab::{connection, spectrum_scan, CellCount, EigenvalueRecord, ShootingConfig};
use ymblowup::profiles::{identity_suite, IdentityCheck};
use ymblowup::Error;

use crate::config::{BackgroundSpec, RunConfig};
use crate::error::CliError;
use crate::output::{fmt_num, Output};

type Res<T> = Result<T, CliError>;

fn core<T>(context: &str, r: ymblowup::Result<T>) -> Res<T> {
    r.map_err(|e| CliError::from_core(context, e))
}

/// Largest tolerated deviation of the observed finite-difference order from 2.
const FD_ORDER_TOL: f64 = 0.1;

#[derive(Serialize)]
struct ValidateResult<'a> {
    identities: &'a [IdentityCheck],
    tolerance: f64,
    worst_exact: f64,
    fd_order_error: f64,
    pass: bool,
}

pub fn validate(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.validate;
    let rows = identity_suite(s.n);
    let mut stdout = csv::Writer::from_writer(std::io::stdout());
    let mut file = csv::Writer::from_path(out.dir.join("validate_identities.csv"))?;
    out.written.push(out.dir.join("validate_identities.csv"));
    let header = ["identity_name", "grid_size", "max_abs_error"];
    stdout.write_record(header)?;
    file.write_record(header)?;
    for r in &rows {
        let rec = [r.identity_name.clone(), r.grid_size.to_string(), fmt_num(r.max_abs_error)];
        stdout.write_record(&rec)?;
        file.write_record(&rec)?;
    }
    stdout.flush()?;
    file.flush()?;
    let is_fd = |r: &&IdentityCheck| r.identity_name.contains("_fd_");
    let worst_exact = rows.iter().filter(|r| !is_fd(r)).map(|r| r.max_abs_error).fold(0.0, f64::max);
    let fd_order_error = rows
        .iter()
        .find(|r| r.identity_name.ends_with("fd_order"))
        .map(|r| r.max_abs_error)
        .unwrap_or(f64::INFINITY);
    let pass = worst_exact <= s.tolerance && fd_order_error <= FD_ORDER_TOL;
    out.json(
        "validate.json",
        "validate",
        cfg,
        ValidateResult { identities: &rows, tolerance: s.tolerance, worst_exact, fd_order_error, pass },
    )?;
    if pass {
        Ok(())
    } else {
        Err(CliError::Numerical(format!(
            "identity suite failed: worst exact error {worst_exact:e} (tolerance {:e}), FD order error {fd_order_error}",
            s.tolerance
        )))
    }
}

#[derive(Serialize)]
struct SpectrumResult<'a> {
    eigenvalues: &'a [EigenvalueRecord],
    spectral_bound: Option<f64>,
    total_count: i64,
    cells: &'a [CellCount],
    inconclusive: &'a [CellCount],
}

fn lattice(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step).round().max(1.0) as usize;
    (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect()
}

pub fn spectrum(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.spectrum;
    let scan = s.scan_config();
    let rep = core("spectrum scan", spectrum_scan(&scan))?;
    if s.heatmap_step.0 > 0.0 && s.heatmap_step.1 > 0.0 {
        let xs = lattice(s.re.0, s.re.1, s.heatmap_step.0);
        let ys = lattice(s.im.0, s.im.1, s.heatmap_step.1);
        let pts: Vec<Complex64> = ys.iter().flat_map(|&y| xs.iter().map(move |&x| Complex64::new(x, y))).collect();
        let sh: ShootingConfig = scan.refine.shooting;
        let vals: Vec<Vec<f64>> = pts
            .par_iter()
            .map(|&z| connection(z, &sh).map(|c| vec![z.re, z.im, c.value.norm(), c.value.arg()]))
            .collect::<ymblowup::Result<_>>()
            .map_err(|e| CliError::from_core("connection heat map", e))?;
        out.csv("spectrum_heatmap.csv", &["re", "im", "abs_connection", "arg_connection"], vals)?;
    }
    out.json(
        "spectrum.json",
        "spectrum",
        cfg,
        SpectrumResult {
            eigenvalues: &rep.eigenvalues,
            spectral_bound: rep.spectral_bound,
            total_count: rep.total_count,
            cells: &rep.cells,
            inconclusive: &rep.inconclusive,
        },
    )?;
    if rep.inconclusive.is_empty() {
        Ok(())
    } else {
        Err(CliError::Inconclusive(format!("{} cells inconclusive; see spectrum.json", rep.inconclusive.len())))
    }
}

#[derive(Serialize)]
struct LinearResult {
    samples: usize,
    initial_norm: f64,
    final_norm: f64,
    total_fit: Option<RateFit>,
    stable_fit: Option<RateFit>,
    fit_error: Option<String>,
}

fn fit_pair(
    total: &[(f64, f64)],
    stable: &[(f64, f64)],
    window: (f64, f64),
) -> (Option<RateFit>, Option<RateFit>, Option<String>) {
    let a = fit_rate(total, window);
    let b = fit_rate(stable, window);
    let err = a.as_ref().err().or(b.as_ref().err()).map(|e: &Error| e.to_string());
    (a.ok(), b.ok(), err)
}

pub fn linear_decay(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.linear_decay;
    let gen = core("assemble generator", GeneratorMatrix::assemble(s.n))?;
    let p = core("projection", build_projection(&gen))?;
    let v = s.data.to_perturbation()?;
    let mut u0 = core("initial data", initial_data_u(&gen, &v, s.big_t))?.energy;
    if s.projection {
        u0 = p.complement(&u0);
    }
    let tr = core("linear evolution", linear_evolve(&gen, Some(&p), &u0, s.tau_max, s.dtau, s.potential))?;
    out.csv(
        "linear_decay_trace.csv",
        &["tau", "norm_total", "norm_stable"],
        tr.samples.iter().map(|x| vec![x.tau, x.norm.total, x.stable.unwrap_or(f64::NAN)]),
    )?;
    let window = s.fit_window.unwrap_or((0.5 * s.tau_max, s.tau_max));
    let (total_fit, stable_fit, fit_error) = fit_pair(&tr.totals(), &tr.stable(), window);
    out.json(
        "linear_decay.json",
        "linear-decay",
        cfg,
        LinearResult {
            samples: tr.samples.len(),
            initial_norm: tr.samples[0].norm.total,
            final_norm: tr.samples.last().unwrap().norm.total,
            total_fit,
            stable_fit,
            fit_error,
        },
    )
}

#[derive(Serialize)]
struct SimResult {
    tau_start: f64,
    tau_end: f64,
    samples: usize,
    blowup: bool,
    filter: f64,
    total_fit: Option<RateFit>,
    stable_fit: Option<RateFit>,
    fit_error: Option<String>,
}

pub fn evolve_sim(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.evolve_sim;
    let engine = core("engine", Engine::new(s.evolution_config()))?;
    let v = s.data.to_perturbation()?;
    let u0 = core("initial data", initial_data_u(&engine.gen, &v, s.big_t))?;
    let tr = core("similarity evolution", engine.evolve(&u0))?;
    out.csv(
        "evolve_sim_trace.csv",
        &["tau", "norm_total", "norm1", "norm2", "unstable_amplitude", "stable_norm"],
        tr.samples
            .iter()
            .map(|x| vec![x.tau, x.norm.total, x.norm.norm1, x.norm.norm2, x.unstable_amplitude, x.stable_norm]),
    )?;
    out.csv(
        "evolve_sim_final_state.csv",
        &["rho", "phi1", "phi2"],
        phi_table(&engine.gen, &tr.final_state).into_iter().map(|(r, a, b)| vec![r, a, b]),
    )?;
    let tau_end = tr.final_state.tau;
    let window = s.fit_window.unwrap_or((u0.tau + 0.5 * (tau_end - u0.tau), tau_end));
    let (total_fit, stable_fit, fit_error) = fit_pair(&tr.totals(), &tr.stable(), window);
    out.json(
        "evolve_sim.json",
        "evolve-sim",
        cfg,
        SimResult {
            tau_start: u0.tau,
            tau_end,
            samples: tr.samples.len(),
            blowup: tr.blowup,
            filter: tr.filter,
            total_fit,
            stable_fit,
            fit_error,
        },
    )
}

pub fn tune_t(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.tune_t;
    let v = s.data.to_perturbation()?;
    let res = core("T tuning", tune_blowup_time(&v, &s.tuning_config()))?;
    out.csv(
        "tune_t_steps.csv",
        &["big_t", "amplitude", "bracket_lo", "bracket_hi", "escaped"],
        res.unstable_amplitude_trace.iter().map(|st: &TuningStep| {
            vec![st.big_t, st.amplitude, st.bracket.0, st.bracket.1, f64::from(u8::from(st.escaped))]
        }),
    )?;
    if let Some(tr) = &res.trace {
        out.csv(
            "tune_t_trace.csv",
            &["tau", "norm_total", "unstable_amplitude", "stable_norm"],
            tr.samples.iter().map(|x| vec![x.tau, x.norm.total, x.unstable_amplitude, x.stable_norm]),
        )?;
    }
    eprintln!("T* = {}", res.t_star);
    out.json("tune_t.json", "tune-T", cfg, &res)
}

#[derive(Serialize)]
struct PhysResult<'a> {
    data: &'a PhysData,
    steps_recorded: usize,
    slices_stored: usize,
    final_t: f64,
    breakdown: Option<f64>,
    resolution_limit: bool,
    blowup_fit: Option<BlowupFit>,
    report: Option<BlowupReport>,
    notes: Vec<String>,
}

pub fn evolve_phys(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.evolve_phys;
    let perturbation = s.data.to_perturbation()?;
    let data = match s.background {
        BackgroundSpec::Vacuum => PhysData { background: Background::Vacuum, perturbation },
        BackgroundSpec::SelfSimilar => PhysData::selfsimilar(s.big_t, perturbation),
    };
    let run = core("physical evolution", evolve_physical(&data, &s.solver))?;
    out.csv(
        "evolve_phys_slices.csv",
        &["t", "r", "psi", "psi_t"],
        run.states.iter().flat_map(|st| {
            let t = st.t;
            st.r().iter().zip(&st.psi).zip(&st.psi_t).map(move |((&r, &p), &pt)| vec![t, r, p, pt]).collect::<Vec<_>>()
        }),
    )?;
    out.csv(
        "evolve_phys_history.csv",
        &["t", "sup_psi_t", "w_origin"],
        run.history.iter().map(|h| vec![h.t, h.sup_psi_t, h.w_origin]),
    )?;
    let mut notes = Vec::new();
    let (blowup_fit, report) = match detect_blowup(&run.history, s.threshold) {
        Ok(fit) => match convergence_report(&run, fit.best(), &s.report.report_config()) {
            Ok(rep) => (Some(fit), Some(rep)),
            Err(e) => {
                notes.push(format!("convergence report unavailable: {e}"));
                (Some(fit), None)
            }
        },
        Err(Error::Detection(m)) => {
            notes.push(format!("no blowup detected: {m}"));
            (None, None)
        }
        Err(e) => return Err(CliError::from_core("blowup detection", e)),
    };
    let result = PhysResult {
        data: &data,
        steps_recorded: run.history.len(),
        slices_stored: run.states.len(),
        final_t: run.last().t,
        breakdown: run.breakdown,
        resolution_limit: run.resolution_limit,
        blowup_fit,
        report,
        notes,
    };
    out.json("evolve_phys.json", "evolve-phys", cfg, &result)?;
    match run.breakdown {
        Some(t) => Err(CliError::Numerical(format!("non-finite values at t = {t}"))),
        None => Ok(()),
    }
}

#[derive(Serialize)]
struct FitResult {
    input: String,
    x: String,
    y: String,
    log_x: bool,
    fit: RateFit,
}

fn read_columns(path: &Path, x: &str, y: &str) -> Res<Vec<(f64, f64)>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("fit_rate.input: {e}")))?;
    let headers = rdr.headers().map_err(|e| CliError::Config(format!("fit_rate.input: {e}")))?.clone();
    let col = |name: &str, field: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("fit_rate.{field}: column `{name}` not in {}", path.display())))
    };
    let (ix, iy) = (col(x, "x")?, col(y, "y")?);
    let mut pts = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("fit_rate.input: row {}: {e}", k + 1)))?;
        let num = |i: usize| rec.get(i).and_then(|s| s.trim().parse::<f64>().ok());
        match (num(ix), num(iy)) {
            (Some(a), Some(b)) => pts.push((a, b)),
            _ => return Err(CliError::Config(format!("fit_rate.input: row {} is not numeric", k + 1))),
        }
    }
    Ok(pts)
}

pub fn fit_rate_cmd(cfg: &RunConfig, out: &mut Output) -> Res<()> {
    let s = &cfg.fit_rate;
    let path = s.input.as_ref().expect("validated");
    let mut pts = read_columns(path, &s.x, &s.y)?;
    if let Some((a, b)) = s.window {
        pts.retain(|p| p.0 >= a && p.0 <= b);
    }
    if s.log_x {
        if pts.iter().any(|p| !(p.0 > 0.0)) {
            return Err(CliError::Config("fit_rate.log_x: x values must be positive".into()));
        }
        pts = pts.into_iter().map(|(a, b)| (-a.ln(), b)).collect();
    }
    if pts.len() < 2 {
        return Err(CliError::Config(format!("fit_rate.window: {} samples selected, need at least 2", pts.len())));
    }
    let window = pts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |w, p| (w.0.min(p.0), w.1.max(p.0)));
    let fit = core("rate fit", fit_rate(&pts, window))?;
    out.json(
        "fit_rate.json",
        "fit-rate",
        cfg,
        FitResult { input: path.display().to_string(), x: s.x.clone(), y: s.y.clone(), log_x: s.log_x, fit },
    )
}
