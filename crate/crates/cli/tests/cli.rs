use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use ymblowup::evolution::{data_grid, Perturbation};
use ymblowup_cli::config::{DataSpec, RunConfig};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ymblowup"));
    c.env_remove("YMBLOWUP_OUTPUT_DIR");
    c
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().arg("--output-dir").arg(dir).args(args).output().unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas")
}

fn load_report(dir: &Path, name: &str) -> Value {
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.join(format!("{name}.json"))).unwrap()).unwrap();
    let schema: Value =
        serde_json::from_str(&std::fs::read_to_string(schema_dir().join(format!("{name}.schema.json"))).unwrap()).unwrap();
    let compiled = jsonschema::JSONSchema::compile(&schema).unwrap();
    if let Err(errs) = compiled.validate(&report) {
        let msgs: Vec<String> = errs.map(|e| format!("{} at {}", e, e.instance_path)).collect();
        panic!("{name}.json violates its schema: {msgs:?}");
    }
    report
}

fn csv_header(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().next().unwrap().to_string()
}

#[test]
fn default_config_round_trips() {
    let cfg = RunConfig::default();
    let text = cfg.to_toml();
    assert_eq!(RunConfig::from_toml(&text).unwrap(), cfg);
}

#[test]
fn edited_config_round_trips() {
    let mut cfg = RunConfig { output_dir: Some("runs/a".into()), ..Default::default() };
    cfg.spectrum.re = (-0.9, 1.7);
    cfg.linear_decay.fit_window = Some((3.0, 7.5));
    cfg.evolve_sim.data = DataSpec::Csv { path: "v.csv".into() };
    cfg.tune_t.data = DataSpec::SelfSimilar { t0: 1.0 + 1e-9 };
    cfg.evolve_phys.data = DataSpec::Bump { amplitude: -0.3, width: 0.25 };
    cfg.evolve_phys.solver.n = 2400;
    let text = cfg.to_toml();
    let back = RunConfig::from_toml(&text).unwrap();
    assert_eq!(back, cfg);
    assert_eq!(back.to_toml(), text);
}

#[test]
fn unknown_config_fields_are_rejected() {
    let err = RunConfig::from_toml("[spectrum]\nn_bondary = 3\n").unwrap_err();
    assert!(err.to_string().contains("n_bondary"), "{err}");
}

#[test]
fn validate_prints_identity_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["validate", "--n", "400"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(stdout.lines().next().unwrap(), "identity_name,grid_size,max_abs_error");
    let rep = load_report(dir.path(), "validate");
    assert_eq!(rep["result"]["pass"], Value::Bool(true));
    assert!(rep["result"]["worst_exact"].as_f64().unwrap() <= 1e-11);
    assert_eq!(rep["config"]["validate"]["n"], 400);
}

#[test]
fn spectrum_finds_symmetry_and_least_stable_eigenvalues() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["spectrum", "--re", "-1,1.5", "--im", "-2,2", "--heatmap-step", "0.5,1"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(dir.path(), "spectrum");
    let ev: Vec<(f64, f64)> = rep["result"]["eigenvalues"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| (e["lambda"][0].as_f64().unwrap(), e["lambda"][1].as_f64().unwrap()))
        .collect();
    assert!(ev.iter().any(|&(re, im)| (re - 1.0).abs() < 1e-8 && im.abs() < 1e-8), "{ev:?}");
    assert!(ev.iter().any(|&(re, im)| (re + 0.5889).abs() < 1e-4 && im.abs() < 1e-8), "{ev:?}");
    assert_eq!(csv_header(&dir.path().join("spectrum_heatmap.csv")), "re,im,abs_connection,arg_connection");
}

#[test]
fn tune_t_of_zero_data_is_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["tune-T", "--family", "zero"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(dir.path(), "tune_t");
    assert_eq!(rep["result"]["t_star"].as_f64().unwrap(), 1.0);
    assert!(dir.path().join("tune_t_steps.csv").exists());
}

#[test]
fn linear_decay_and_fit_rate_agree() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["linear-decay", "--n", "32", "--tau-max", "16", "--fit-window", "8,16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(dir.path(), "linear_decay");
    let slope = rep["result"]["stable_fit"]["slope"].as_f64().unwrap();
    assert!((slope + 0.5889).abs() < 0.05, "{slope}");
    let trace = dir.path().join("linear_decay_trace.csv");
    assert_eq!(csv_header(&trace), "tau,norm_total,norm_stable");
    let t = trace.to_str().unwrap();
    let out = run(dir.path(), &["fit-rate", "--input", t, "--y", "norm_stable", "--window", "8,16"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let fit = load_report(dir.path(), "fit_rate");
    assert!((fit["result"]["fit"]["slope"].as_f64().unwrap() - slope).abs() < 1e-12);
}

#[test]
fn evolve_sim_and_phys_write_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve-sim", "--n", "24", "--tau-max", "1", "--family", "bump", "--amplitude", "1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    load_report(dir.path(), "evolve_sim");
    assert_eq!(csv_header(&dir.path().join("evolve_sim_final_state.csv")), "rho,phi1,phi2");

    let out = run(dir.path(), &["evolve-phys", "--n", "400", "--stop-cells", "20"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(dir.path(), "evolve_phys");
    let t = rep["result"]["blowup_fit"]["t_origin"].as_f64().unwrap();
    assert!(t > 0.5 && t < 1.5, "{t}");
    assert_eq!(csv_header(&dir.path().join("evolve_phys_slices.csv")), "t,r,psi,psi_t");
}

#[test]
fn evolve_phys_small_vacuum_data_reports_no_blowup() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["evolve-phys", "--vacuum", "--n", "200", "--family", "bump", "--amplitude", "1e-3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(dir.path(), "evolve_phys");
    assert!(rep["result"]["blowup_fit"].is_null());
}

#[test]
fn tabulated_data_match_builtin_family() {
    let dir = tempfile::tempdir().unwrap();
    let v = Perturbation::Bump { amplitude: 1e-3, width: 0.5 };
    let mut text = String::from("rho,v1,v2\n");
    for &r in data_grid(64).nodes() {
        let (a, b) = v.blocks(r);
        text += &format!("{r:e},{a:e},{b:e}\n");
    }
    let csv = dir.path().join("v.csv");
    std::fs::write(&csv, text).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let common = ["evolve-sim", "--n", "24", "--tau-max", "1"];
    let out = run(&a, &[&common[..], &["--data-csv", csv.to_str().unwrap()]].concat());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let out = run(&b, &[&common[..], &["--family", "bump", "--amplitude", "1e-3", "--width", "0.5"]].concat());
    assert_eq!(out.status.code(), Some(0));
    let x = load_report(&a, "evolve_sim")["result"]["total_fit"]["intercept"].as_f64().unwrap();
    let y = load_report(&b, "evolve_sim")["result"]["total_fit"]["intercept"].as_f64().unwrap();
    assert!((x - y).abs() < 1e-6, "{x} {y}");
}

#[test]
fn reports_are_deterministic_up_to_timestamp() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["evolve-sim", "--n", "24", "--tau-max", "0.5", "--family", "random", "--seed", "9", "--amplitude", "1e-2"];
    let read = |p: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(p.join("evolve_sim.json")).unwrap()).unwrap();
        v.as_object_mut().unwrap().remove("timestamp");
        (serde_json::to_string(&v).unwrap(), std::fs::read(p.join("evolve_sim_trace.csv")).unwrap())
    };
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    let first = read(dir.path());
    assert_eq!(run(dir.path(), &args).status.code(), Some(0));
    assert_eq!(read(dir.path()), first);
}

#[test]
fn config_file_and_environment_are_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[validate]\nn = 300\n").unwrap();
    let out_dir = dir.path().join("from-env");
    let out = bin()
        .env("YMBLOWUP_OUTPUT_DIR", &out_dir)
        .args(["--config", cfg.to_str().unwrap(), "validate"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rep = load_report(&out_dir, "validate");
    assert_eq!(rep["config"]["validate"]["n"], 300);
}

#[test]
fn print_config_shows_overrides() {
    let out = bin().args(["--print-config", "linear-decay", "--n", "40", "--free"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let cfg = RunConfig::from_toml(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(cfg.linear_decay.n, 40);
    assert!(!cfg.linear_decay.potential);
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &["linear-decay", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("linear_decay.n"));
    let out = run(dir.path(), &["evolve-phys", "--cfl", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["tune-T", "--family", "zero", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(dir.path(), &["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "format_version = 7\n").unwrap();
    let out = run(dir.path(), &["--config", bad.to_str().unwrap(), "validate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numerical_breakdown_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("zeros.csv");
    std::fs::write(&csv, "tau,norm_total\n0,1\n1,0\n2,0\n").unwrap();
    let out = run(dir.path(), &["fit-rate", "--input", csv.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn exhausted_search_exits_with_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "[tune_t]\nmax_iterations = 1\n").unwrap();
    let out = run(dir.path(), &["--config", cfg.to_str().unwrap(), "tune-T", "--family", "random", "--amplitude", "1e-2"]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}
