//! Command-line flags. Every flag overrides the matching config field.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::{BackgroundSpec, DataSpec, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "ymblowup", version, about = "Self-similar blowup laboratory for the 5d equivariant Yang-Mills wave equation")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides the config file and YMBLOWUP_OUTPUT_DIR).
    #[arg(short, long, global = true)]
    pub output_dir: Option<PathBuf>,
    /// Cap on worker threads.
    #[arg(short, long, global = true)]
    pub jobs: Option<usize>,
    /// Print the resolved configuration as TOML and exit.
    #[arg(long, global = true)]
    pub print_config: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form identity suite (CSV on stdout).
    Validate(ValidateArgs),
    /// Eigenvalue scan of the mode equation.
    Spectrum(SpectrumArgs),
    /// Linearized evolution with the exact discrete propagator.
    LinearDecay(LinearArgs),
    /// Nonlinear evolution in similarity variables.
    EvolveSim(SimArgs),
    /// Blowup-time tuning that removes the symmetry-mode instability.
    #[command(name = "tune-T")]
    TuneT(TuneArgs),
    /// Evolution in physical variables up to the blowup.
    EvolvePhys(PhysArgs),
    /// Exponential rate fit of one CSV column against another.
    FitRate(FitArgs),
}

#[derive(Debug, Args, Default)]
pub struct DataArgs {
    /// Perturbation family: zero, self_similar, bump, random, csv.
    #[arg(long)]
    pub family: Option<String>,
    /// Perturbation amplitude (bump, random).
    #[arg(long, allow_negative_numbers = true)]
    pub amplitude: Option<f64>,
    /// Seed of the random family.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Number of random modes.
    #[arg(long)]
    pub modes: Option<usize>,
    /// Width of the bump.
    #[arg(long)]
    pub width: Option<f64>,
    /// Blowup time of the self-similar family.
    #[arg(long)]
    pub t0: Option<f64>,
    /// CSV with columns rho, v1, v2 (implies --family csv).
    #[arg(long)]
    pub data_csv: Option<PathBuf>,
}

impl DataArgs {
    fn apply(&self, spec: &mut DataSpec) -> Result<(), CliError> {
        if let Some(p) = &self.data_csv {
            *spec = DataSpec::Csv { path: p.clone() };
        } else if let Some(f) = &self.family {
            *spec = DataSpec::family_default(f)?;
        }
        let unused = |flag: &str| Err(CliError::Config(format!("--{flag} does not apply to the selected data family")));
        match spec {
            DataSpec::Zero | DataSpec::Csv { .. } => {
                if self.amplitude.is_some() {
                    return unused("amplitude");
                }
            }
            DataSpec::SelfSimilar { t0 } => {
                if let Some(v) = self.t0 {
                    *t0 = v;
                }
            }
            DataSpec::Bump { amplitude, width } => {
                set(amplitude, self.amplitude);
                set(width, self.width);
            }
            DataSpec::Random { amplitude, seed, modes } => {
                set(amplitude, self.amplitude);
                set(seed, self.seed);
                set(modes, self.modes);
            }
        }
        if self.seed.is_some() && !matches!(spec, DataSpec::Random { .. }) {
            return unused("seed");
        }
        if self.width.is_some() && !matches!(spec, DataSpec::Bump { .. }) {
            return unused("width");
        }
        if self.t0.is_some() && !matches!(spec, DataSpec::SelfSimilar { .. }) {
            return unused("t0");
        }
        Ok(())
    }
}

fn set<T: Copy>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

fn parse_pair(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(',').ok_or_else(|| format!("expected `a,b`, got `{s}`"))?;
    let p = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("`{x}`: {e}"));
    Ok((p(a)?, p(b)?))
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// Points of the dense check grid.
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest accepted error of the exact identities.
    #[arg(long)]
    pub tolerance: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    /// Real range `a,b` of the scan rectangle.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub re: Option<(f64, f64)>,
    /// Imaginary range `a,b` of the scan rectangle.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub im: Option<(f64, f64)>,
    /// Cell size `dre,dim`.
    #[arg(long, value_parser = parse_pair)]
    pub cell: Option<(f64, f64)>,
    /// Boundary samples per cell.
    #[arg(long)]
    pub n_boundary: Option<usize>,
    /// Frobenius series order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Step-off distance from the singular points.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Matching point.
    #[arg(long)]
    pub rho_m: Option<f64>,
    /// Relative tolerance of the ODE integrator.
    #[arg(long)]
    pub rtol: Option<f64>,
    /// Heat-map lattice spacing `dre,dim`.
    #[arg(long, value_parser = parse_pair)]
    pub heatmap_step: Option<(f64, f64)>,
    /// Skip the heat map.
    #[arg(long)]
    pub no_heatmap: bool,
}

#[derive(Debug, Args)]
pub struct LinearArgs {
    /// Collocation points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Final similarity time.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Sampling interval in τ.
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Keep the unstable component of the data.
    #[arg(long)]
    pub no_projection: bool,
    /// Evolve with the free part only.
    #[arg(long)]
    pub free: bool,
    /// Blowup time used to build the data.
    #[arg(long)]
    pub big_t: Option<f64>,
    /// Fit window `a,b` in τ.
    #[arg(long, value_parser = parse_pair)]
    pub fit_window: Option<(f64, f64)>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    /// Collocation points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Time step (defaults to the stability limit).
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Similarity time to integrate for.
    #[arg(long)]
    pub tau_max: Option<f64>,
    /// Drop the nonlinearity.
    #[arg(long)]
    pub linear: bool,
    /// Exponential filter strength (0 is off).
    #[arg(long)]
    pub filter: Option<f64>,
    /// Blowup time used to build the data.
    #[arg(long)]
    pub big_t: Option<f64>,
    /// Fit window `a,b` in τ.
    #[arg(long, value_parser = parse_pair)]
    pub fit_window: Option<(f64, f64)>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Collocation points.
    #[arg(long)]
    pub n: Option<usize>,
    /// Time step (defaults to the stability limit).
    #[arg(long)]
    pub dtau: Option<f64>,
    /// Similarity time at which the unstable amplitude is read.
    #[arg(long)]
    pub tau_probe: Option<f64>,
    /// Bracket width at which the root search stops.
    #[arg(long)]
    pub tol: Option<f64>,
    /// Drop the nonlinearity.
    #[arg(long)]
    pub linear: bool,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct PhysArgs {
    /// Cells on [0, 3/2].
    #[arg(long)]
    pub n: Option<usize>,
    /// Ratio dt/h.
    #[arg(long)]
    pub cfl: Option<f64>,
    /// Final time.
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Drop the nonlinearity.
    #[arg(long)]
    pub linear: bool,
    /// Stop once T − t is resolved by fewer cells.
    #[arg(long)]
    pub stop_cells: Option<f64>,
    /// Slice storage interval in t.
    #[arg(long)]
    pub record_dt: Option<f64>,
    /// Blowup time of the background solution.
    #[arg(long)]
    pub big_t: Option<f64>,
    /// Perturb the zero solution instead of a self-similar one.
    #[arg(long)]
    pub vacuum: bool,
    /// Growth factor of sup|ψ_t| used by the blowup fit.
    #[arg(long)]
    pub threshold: Option<f64>,
    #[command(flatten)]
    pub data: DataArgs,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Input CSV with a header row.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Column used as abscissa.
    #[arg(long)]
    pub x: Option<String>,
    /// Column whose logarithm is fitted.
    #[arg(long)]
    pub y: Option<String>,
    /// Keep rows with x in `a,b`.
    #[arg(long, value_parser = parse_pair, allow_hyphen_values = true)]
    pub window: Option<(f64, f64)>,
    /// Fit against −ln x.
    #[arg(long)]
    pub log_x: bool,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Validate(_) => "validate",
            Command::Spectrum(_) => "spectrum",
            Command::LinearDecay(_) => "linear-decay",
            Command::EvolveSim(_) => "evolve-sim",
            Command::TuneT(_) => "tune-T",
            Command::EvolvePhys(_) => "evolve-phys",
            Command::FitRate(_) => "fit-rate",
        }
    }

    /// Writes the flag values into `cfg`.
    pub fn apply(&self, cfg: &mut RunConfig) -> Result<(), CliError> {
        match self {
            Command::Validate(a) => {
                set(&mut cfg.validate.n, a.n);
                set(&mut cfg.validate.tolerance, a.tolerance);
            }
            Command::Spectrum(a) => {
                let s = &mut cfg.spectrum;
                set(&mut s.re, a.re);
                set(&mut s.im, a.im);
                set(&mut s.cell, a.cell);
                set(&mut s.n_boundary, a.n_boundary);
                set(&mut s.order, a.order);
                set(&mut s.delta, a.delta);
                set(&mut s.rho_m, a.rho_m);
                set(&mut s.rtol, a.rtol);
                set(&mut s.heatmap_step, a.heatmap_step);
                if a.no_heatmap {
                    s.heatmap_step = (0.0, 0.0);
                }
            }
            Command::LinearDecay(a) => {
                let s = &mut cfg.linear_decay;
                set(&mut s.n, a.n);
                set(&mut s.tau_max, a.tau_max);
                set(&mut s.dtau, a.dtau);
                set(&mut s.big_t, a.big_t);
                if a.no_projection {
                    s.projection = false;
                }
                if a.free {
                    s.potential = false;
                }
                if a.fit_window.is_some() {
                    s.fit_window = a.fit_window;
                }
                a.data.apply(&mut s.data)?;
            }
            Command::EvolveSim(a) => {
                let s = &mut cfg.evolve_sim;
                set(&mut s.n, a.n);
                if a.dtau.is_some() {
                    s.dtau = a.dtau;
                }
                set(&mut s.tau_max, a.tau_max);
                set(&mut s.filter, a.filter);
                set(&mut s.big_t, a.big_t);
                if a.linear {
                    s.nonlinear = false;
                }
                if a.fit_window.is_some() {
                    s.fit_window = a.fit_window;
                }
                a.data.apply(&mut s.data)?;
            }
            Command::TuneT(a) => {
                let s = &mut cfg.tune_t;
                set(&mut s.n, a.n);
                if a.dtau.is_some() {
                    s.dtau = a.dtau;
                }
                set(&mut s.tau_probe, a.tau_probe);
                set(&mut s.tol, a.tol);
                if a.linear {
                    s.nonlinear = false;
                }
                a.data.apply(&mut s.data)?;
            }
            Command::EvolvePhys(a) => {
                let s = &mut cfg.evolve_phys;
                set(&mut s.solver.n, a.n);
                set(&mut s.solver.cfl, a.cfl);
                set(&mut s.solver.t_max, a.t_max);
                set(&mut s.solver.stop_cells, a.stop_cells);
                set(&mut s.solver.record_dt, a.record_dt);
                set(&mut s.big_t, a.big_t);
                set(&mut s.threshold, a.threshold);
                if a.linear {
                    s.solver.nonlinear = false;
                }
                if a.vacuum {
                    s.background = BackgroundSpec::Vacuum;
                }
                a.data.apply(&mut s.data)?;
            }
            Command::FitRate(a) => {
                let s = &mut cfg.fit_rate;
                if a.input.is_some() {
                    s.input = a.input.clone();
                }
                if let Some(x) = &a.x {
                    s.x = x.clone();
                }
                if let Some(y) = &a.y {
                    s.y = y.clone();
                }
                if a.window.is_some() {
                    s.window = a.window;
                }
                if a.log_x {
                    s.log_x = true;
                }
            }
        }
        Ok(())
    }
}
