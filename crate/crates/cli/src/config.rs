//! Run configuration: one TOML file with a section per command.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use ymblowup::evolution::{data_grid, EvolutionConfig, Perturbation, TabulatedData, TuningConfig};
use ymblowup::lightcone::{PhysConfig, ReportConfig};
use ymblowup::modestab::{Rect, RefineConfig, ScanConfig, ShootingConfig};

use crate::error::CliError;

pub const FORMAT_VERSION: u32 = 1;
pub const OUTPUT_ENV: &str = "YMBLOWUP_OUTPUT_DIR";
pub const DEFAULT_OUTPUT_DIR: &str = "ymblowup-out";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub output_dir: Option<PathBuf>,
    pub validate: ValidateSection,
    pub spectrum: SpectrumSection,
    pub linear_decay: LinearDecaySection,
    pub evolve_sim: EvolveSimSection,
    pub tune_t: TuneSection,
    pub evolve_phys: EvolvePhysSection,
    pub fit_rate: FitRateSection,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            format_version: FORMAT_VERSION,
            output_dir: None,
            validate: Default::default(),
            spectrum: Default::default(),
            linear_decay: Default::default(),
            evolve_sim: Default::default(),
            tune_t: Default::default(),
            evolve_phys: Default::default(),
            fit_rate: Default::default(),
        }
    }
}

/// Perturbation `v` of the data of `ψ¹`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSpec {
    Zero,
    SelfSimilar { t0: f64 },
    Bump { amplitude: f64, width: f64 },
    Random { amplitude: f64, seed: u64, modes: usize },
    /// CSV with columns `rho, v1, v2` on the nodes of the data grid.
    Csv { path: PathBuf },
}

impl Default for DataSpec {
    fn default() -> Self {
        DataSpec::Random { amplitude: 1e-2, seed: 1, modes: 4 }
    }
}

impl DataSpec {
    pub fn family_default(family: &str) -> Result<DataSpec, CliError> {
        Ok(match family {
            "zero" => DataSpec::Zero,
            "self_similar" => DataSpec::SelfSimilar { t0: 1.05 },
            "bump" => DataSpec::Bump { amplitude: 1e-2, width: 0.5 },
            "random" => DataSpec::default(),
            "csv" => DataSpec::Csv { path: PathBuf::new() },
            other => {
                return Err(CliError::Config(format!(
                    "data.family: unknown family `{other}` (zero, self_similar, bump, random, csv)"
                )))
            }
        })
    }

    pub fn to_perturbation(&self) -> Result<Perturbation, CliError> {
        Ok(match self {
            DataSpec::Zero => Perturbation::Zero,
            DataSpec::SelfSimilar { t0 } => Perturbation::SelfSimilar { t0: *t0 },
            DataSpec::Bump { amplitude, width } => Perturbation::Bump { amplitude: *amplitude, width: *width },
            DataSpec::Random { amplitude, seed, modes } => {
                Perturbation::Random { amplitude: *amplitude, seed: *seed, modes: *modes }
            }
            DataSpec::Csv { path } => Perturbation::Tabulated(Arc::new(read_tabulated(path)?)),
        })
    }

    fn validate(&self, section: &str) -> Result<(), CliError> {
        let field = |f: &str, msg: String| Err(CliError::Config(format!("{section}.data.{f}: {msg}")));
        match self {
            DataSpec::SelfSimilar { t0 } if !(*t0 > 0.5 && *t0 < 1.5) => field("t0", format!("{t0} outside (0.5, 1.5)")),
            DataSpec::Bump { width, .. } if !(*width > 0.0) => field("width", format!("{width} must be positive")),
            DataSpec::Bump { amplitude, .. } | DataSpec::Random { amplitude, .. } if !amplitude.is_finite() => {
                field("amplitude", "must be finite".into())
            }
            DataSpec::Random { modes, .. } if *modes == 0 || *modes > 12 => field("modes", format!("{modes} outside 1..=12")),
            DataSpec::Csv { path } if path.as_os_str().is_empty() => field("path", "missing CSV path".into()),
            _ => Ok(()),
        }
    }
}

fn read_tabulated(path: &Path) -> Result<TabulatedData, CliError> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| CliError::Config(format!("data.path: {}: {e}", path.display())))?;
    let headers = rdr.headers().map_err(|e| CliError::Config(format!("data.path: {e}")))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CliError::Config(format!("data.path: column `{name}` missing (need rho, v1, v2)")))
    };
    let (ir, i1, i2) = (col("rho")?, col("v1")?, col("v2")?);
    let (mut rho, mut v1, mut v2) = (Vec::new(), Vec::new(), Vec::new());
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Config(format!("data.path: row {}: {e}", k + 1)))?;
        let num = |i: usize| {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| CliError::Config(format!("data.path: row {}: column {i} is not a number", k + 1)))
        };
        rho.push(num(ir)?);
        v1.push(num(i1)?);
        v2.push(num(i2)?);
    }
    TabulatedData::new(&rho, &v1, &v2).map_err(|e| CliError::Config(format!("data.path: {e}")))
}

/// Nodes of the folded data grid on which tabulated data must be sampled.
pub fn data_grid_nodes(n: usize) -> Vec<f64> {
    data_grid(n).nodes().to_vec()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateSection {
    pub n: usize,
    pub tolerance: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        ValidateSection { n: 2000, tolerance: 1e-11 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSection {
    pub re: (f64, f64),
    pub im: (f64, f64),
    pub cell: (f64, f64),
    pub n_boundary: usize,
    pub max_depth: u32,
    pub order: usize,
    pub delta: f64,
    pub rho_m: f64,
    pub rtol: f64,
    pub refine_tolerance: f64,
    pub max_iterations: usize,
    /// Lattice spacing of the `|connection|` heat map; `(0, 0)` disables it.
    pub heatmap_step: (f64, f64),
}

impl Default for SpectrumSection {
    fn default() -> Self {
        let s = ScanConfig::default();
        let r = RefineConfig::default();
        SpectrumSection {
            re: s.rect.re,
            im: s.rect.im,
            cell: s.cell,
            n_boundary: s.n_boundary,
            max_depth: s.max_depth,
            order: r.shooting.order,
            delta: r.shooting.delta,
            rho_m: r.shooting.rho_m,
            rtol: r.shooting.rtol,
            refine_tolerance: r.tolerance,
            max_iterations: r.max_iterations,
            heatmap_step: (0.1, 0.5),
        }
    }
}

impl SpectrumSection {
    pub fn scan_config(&self) -> ScanConfig {
        let shooting = ShootingConfig { order: self.order, delta: self.delta, rho_m: self.rho_m, rtol: self.rtol };
        ScanConfig {
            rect: Rect::new(self.re, self.im),
            cell: self.cell,
            n_boundary: self.n_boundary,
            refine: RefineConfig {
                shooting,
                tolerance: self.refine_tolerance,
                max_iterations: self.max_iterations,
                ..RefineConfig::default()
            },
            max_depth: self.max_depth,
        }
    }

    fn validate(&self) -> Result<(), CliError> {
        let err = |f: &str, m: String| Err(CliError::Config(format!("spectrum.{f}: {m}")));
        if !(self.re.0 < self.re.1) {
            return err("re", format!("empty interval {:?}", self.re));
        }
        if !(self.im.0 < self.im.1) {
            return err("im", format!("empty interval {:?}", self.im));
        }
        if !(self.cell.0 > 0.0 && self.cell.1 > 0.0) {
            return err("cell", "cell sizes must be positive".into());
        }
        if self.n_boundary < 8 {
            return err("n_boundary", format!("{} below 8", self.n_boundary));
        }
        if !(5..=80).contains(&self.order) {
            return err("order", format!("{} outside 5..=80", self.order));
        }
        if !(self.delta > 0.0 && self.delta < 0.25) {
            return err("delta", format!("{} outside (0, 0.25)", self.delta));
        }
        if !(self.heatmap_step.0 >= 0.0 && self.heatmap_step.1 >= 0.0) {
            return err("heatmap_step", "steps must be nonnegative".into());
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LinearDecaySection {
    pub n: usize,
    pub tau_max: f64,
    pub dtau: f64,
    /// Remove the unstable direction from the data and report `‖(1-P)u‖`.
    pub projection: bool,
    /// Evolve with `L` (true) or the free part `L₀` (false).
    pub potential: bool,
    pub big_t: f64,
    pub fit_window: Option<(f64, f64)>,
    pub data: DataSpec,
}

impl Default for LinearDecaySection {
    fn default() -> Self {
        LinearDecaySection {
            n: 64,
            tau_max: 20.0,
            dtau: 0.25,
            projection: true,
            potential: true,
            big_t: 1.0,
            fit_window: None,
            data: DataSpec::Random { amplitude: 1.0, seed: 3, modes: 6 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveSimSection {
    pub n: usize,
    /// Time step; defaults to the stability limit at `n`.
    pub dtau: Option<f64>,
    pub tau_max: f64,
    pub nonlinear: bool,
    pub filter: f64,
    pub filter_order: u32,
    pub record_every: f64,
    pub blowup_norm: f64,
    pub big_t: f64,
    pub fit_window: Option<(f64, f64)>,
    pub data: DataSpec,
}

impl Default for EvolveSimSection {
    fn default() -> Self {
        let e = EvolutionConfig::default();
        EvolveSimSection {
            n: e.n,
            dtau: None,
            tau_max: e.tau_max,
            nonlinear: e.nonlinear,
            filter: e.filter,
            filter_order: e.filter_order,
            record_every: e.record_every,
            blowup_norm: e.blowup_norm,
            big_t: 1.0,
            fit_window: None,
            data: DataSpec::default(),
        }
    }
}

impl EvolveSimSection {
    pub fn evolution_config(&self) -> EvolutionConfig {
        EvolutionConfig {
            n: self.n,
            dtau: self.dtau.unwrap_or_else(|| EvolutionConfig::max_dtau(self.n)),
            tau_max: self.tau_max,
            filter: self.filter,
            filter_order: self.filter_order,
            record_every: self.record_every,
            nonlinear: self.nonlinear,
            blowup_norm: self.blowup_norm,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TuneSection {
    pub n: usize,
    pub dtau: Option<f64>,
    pub nonlinear: bool,
    pub filter: f64,
    pub tau_probe: f64,
    pub tol: f64,
    pub max_iterations: usize,
    pub initial_step: f64,
    pub decay_horizon: f64,
    pub escape_norm: f64,
    pub polish_steps: usize,
    pub data: DataSpec,
}

impl Default for TuneSection {
    fn default() -> Self {
        let t = TuningConfig::default();
        TuneSection {
            n: t.evolution.n,
            dtau: None,
            nonlinear: t.evolution.nonlinear,
            filter: t.evolution.filter,
            tau_probe: t.tau_probe,
            tol: t.tol,
            max_iterations: t.max_iterations,
            initial_step: t.initial_step,
            decay_horizon: t.decay_horizon,
            escape_norm: t.escape_norm,
            polish_steps: t.polish_steps,
            data: DataSpec::default(),
        }
    }
}

impl TuneSection {
    pub fn tuning_config(&self) -> TuningConfig {
        let d = TuningConfig::default();
        TuningConfig {
            evolution: EvolutionConfig {
                n: self.n,
                dtau: self.dtau.unwrap_or_else(|| EvolutionConfig::max_dtau(self.n)),
                nonlinear: self.nonlinear,
                filter: self.filter,
                ..d.evolution
            },
            tau_probe: self.tau_probe,
            tol: self.tol,
            max_iterations: self.max_iterations,
            initial_step: self.initial_step,
            decay_horizon: self.decay_horizon,
            escape_norm: self.escape_norm,
            polish_steps: self.polish_steps,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundSpec {
    Vacuum,
    SelfSimilar,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolvePhysSection {
    pub background: BackgroundSpec,
    /// Blowup time of the background `ψ^T`.
    pub big_t: f64,
    pub solver: PhysConfig,
    pub report: ReportSection,
    /// Growth factor of `sup|ψ_t|` that defines the blowup fitting window.
    pub threshold: f64,
    pub data: DataSpec,
}

/// Mirror of [`ReportConfig`] with equality for round-trip checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReportSection {
    pub n_rho: usize,
    pub profile_rho: f64,
    pub min_slices: usize,
    pub decade: f64,
}

impl Default for ReportSection {
    fn default() -> Self {
        let r = ReportConfig::default();
        ReportSection { n_rho: r.n_rho, profile_rho: r.profile_rho, min_slices: r.min_slices, decade: r.decade }
    }
}

impl ReportSection {
    pub fn report_config(&self) -> ReportConfig {
        ReportConfig { n_rho: self.n_rho, profile_rho: self.profile_rho, min_slices: self.min_slices, decade: self.decade }
    }
}

impl Default for EvolvePhysSection {
    fn default() -> Self {
        EvolvePhysSection {
            background: BackgroundSpec::SelfSimilar,
            big_t: 1.0,
            solver: PhysConfig::default(),
            report: ReportSection::default(),
            threshold: 10.0,
            data: DataSpec::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitRateSection {
    pub input: Option<PathBuf>,
    pub x: String,
    pub y: String,
    pub window: Option<(f64, f64)>,
    /// Fit against `-ln x` instead of `x` (power laws in `T − t`).
    pub log_x: bool,
}

impl Default for FitRateSection {
    fn default() -> Self {
        FitRateSection { input: None, x: "tau".into(), y: "norm_total".into(), window: None, log_x: false }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<RunConfig, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("config {}: {e}", path.display())))?;
        RunConfig::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run configuration serializes to TOML")
    }

    /// Output directory: config value, else the environment variable, else the default.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT_DIR))
    }

    /// Field-level checks of the section used by `command`.
    pub fn validate(&self, command: &str) -> Result<(), CliError> {
        let err = |f: &str, m: String| Err(CliError::Config(format!("{f}: {m}")));
        if self.format_version != FORMAT_VERSION {
            return err("format_version", format!("{} is not supported (expected {FORMAT_VERSION})", self.format_version));
        }
        let t_range = |f: &str, t: f64| if t > 0.5 && t < 1.5 { Ok(()) } else { err(f, format!("{t} outside (0.5, 1.5)")) };
        match command {
            "validate" => {
                if self.validate.n < 8 {
                    return err("validate.n", format!("{} below 8", self.validate.n));
                }
                if !(self.validate.tolerance > 0.0) {
                    return err("validate.tolerance", "must be positive".into());
                }
            }
            "spectrum" => self.spectrum.validate()?,
            "linear-decay" => {
                let s = &self.linear_decay;
                if s.n < ymblowup::linear::MIN_N {
                    return err("linear_decay.n", format!("{} below {}", s.n, ymblowup::linear::MIN_N));
                }
                if !(s.dtau > 0.0 && s.tau_max >= s.dtau) {
                    return err("linear_decay.dtau", format!("need 0 < dtau <= tau_max, got {} and {}", s.dtau, s.tau_max));
                }
                t_range("linear_decay.big_t", s.big_t)?;
                check_window("linear_decay.fit_window", s.fit_window)?;
                s.data.validate("linear_decay")?;
            }
            "evolve-sim" => {
                let s = &self.evolve_sim;
                t_range("evolve_sim.big_t", s.big_t)?;
                s.evolution_config().validate().map_err(|e| CliError::Config(format!("evolve_sim: {e}")))?;
                check_window("evolve_sim.fit_window", s.fit_window)?;
                s.data.validate("evolve_sim")?;
            }
            "tune-T" => {
                let s = &self.tune_t;
                s.tuning_config().evolution.validate().map_err(|e| CliError::Config(format!("tune_t: {e}")))?;
                if !(s.tol > 0.0) {
                    return err("tune_t.tol", "must be positive".into());
                }
                if !(s.tau_probe > 0.0 && s.decay_horizon > 0.0) {
                    return err("tune_t.tau_probe", "tau_probe and decay_horizon must be positive".into());
                }
                s.data.validate("tune_t")?;
            }
            "evolve-phys" => {
                let s = &self.evolve_phys;
                s.solver.validate().map_err(|e| CliError::Config(format!("evolve_phys.solver: {e}")))?;
                if s.background == BackgroundSpec::SelfSimilar && !(s.big_t > 0.0 && s.big_t < 1.5) {
                    return err("evolve_phys.big_t", format!("{} outside (0, 1.5)", s.big_t));
                }
                if !(s.threshold > 1.0) {
                    return err("evolve_phys.threshold", format!("{} must exceed 1", s.threshold));
                }
                if s.report.n_rho < 8 || !(s.report.profile_rho > 0.0 && s.report.profile_rho <= 1.0) {
                    return err("evolve_phys.report", "need n_rho >= 8 and profile_rho in (0, 1]".into());
                }
                s.data.validate("evolve_phys")?;
            }
            "fit-rate" => {
                if self.fit_rate.input.is_none() {
                    return err("fit_rate.input", "missing input CSV".into());
                }
                check_window("fit_rate.window", self.fit_rate.window)?;
            }
            other => return err("command", format!("unknown command `{other}`")),
        }
        Ok(())
    }
}

fn check_window(field: &str, w: Option<(f64, f64)>) -> Result<(), CliError> {
    match w {
        Some((a, b)) if !(a < b) => Err(CliError::Config(format!("{field}: empty window ({a}, {b})"))),
        _ => Ok(()),
    }
}
