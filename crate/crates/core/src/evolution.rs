//! Nonlinear evolution in similarity variables, the initial-data map
//! `U(v, T)`, and tuning of the blowup time.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::grid::{legendre_all, lgl_nodes, Grid, Parity};
use crate::linear::{build_projection, fit_rate, GeneratorMatrix, ProjectionData, RateFit};
use crate::operators::{apply_a, apply_d, apply_k2, GridFunction, NormReport};
use crate::profiles::{self, Jet};

/// Outer radius of the data domain.
pub const DATA_RADIUS: f64 = 1.5;

/// A perturbation `(δψ, δψ_t) = (r²A(r), r²B(r))` of the data of `ψ¹`.
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Perturbation {
    Zero,
    /// Data of `ψ^{T0}` relative to `ψ¹`.
    SelfSimilar { t0: f64 },
    /// `A = amplitude·exp(-(r/width)²)`, `B = 0`.
    Bump { amplitude: f64, width: f64 },
    /// `A, B = amplitude·Σ_k c_k r^{2k} e^{-2r²}` with seeded coefficients in `[-1, 1]`.
    Random { amplitude: f64, seed: u64, modes: usize },
    /// Blocks `(v1, v2) = (r³δψ_t, 𝒟²δψ)` sampled at the nodes of [`data_grid`].
    #[serde(skip)]
    Tabulated(Arc<TabulatedData>),
}

/// Folded grid on `(0, 3/2]` for tabulated data.
pub fn data_grid(n: usize) -> Grid {
    Grid::parity(n, DATA_RADIUS)
}

#[derive(Debug)]
pub struct TabulatedData {
    v1: GridFunction,
    v2: GridFunction,
    d2v1: GridFunction,
    dv2: GridFunction,
    a: GridFunction,
    b: GridFunction,
}

impl TabulatedData {
    /// `rho` must be the nodes of [`data_grid`] with `rho.len()` nodes.
    pub fn new(rho: &[f64], v1: &[f64], v2: &[f64]) -> Result<Self> {
        if rho.len() < 8 || v1.len() != rho.len() || v2.len() != rho.len() {
            return input("tabulated data needs at least 8 rows with matching columns");
        }
        let grid = Arc::new(data_grid(rho.len()));
        if let Some((i, (x, y))) = grid.nodes().iter().zip(rho).enumerate().find(|(_, (x, y))| (*x - *y).abs() > 1e-10) {
            return input(format!(
                "row {i}: radius {y} does not match data-grid node {x}; sample data on the folded grid of size {}",
                rho.len()
            ));
        }
        let v1 = GridFunction::new(grid.clone(), v1.to_vec(), 5);
        let v2 = GridFunction::new(grid.clone(), v2.to_vec(), 1);
        v1.check_hint(5, "v1")?;
        v2.check_hint(1, "v2")?;
        let d2v1 = apply_d(&apply_d(&v1)?)?;
        let dv2 = v2.derivative();
        let b = v1.map(0, |r, v| v / r.powi(5));
        let a = apply_k2(&v2).map(0, |r, v| v / r.powi(5));
        Ok(TabulatedData { v1, v2, d2v1, dv2, a, b })
    }
}

fn jet_blocks(a: Jet, b: Jet, r: f64) -> [f64; 4] {
    let (a0, a1, a2, a3) = (a.value(), a.nth_derivative(1), a.nth_derivative(2), a.nth_derivative(3));
    let (b0, b1, b2) = (b.value(), b.nth_derivative(1), b.nth_derivative(2));
    let r2 = r * r;
    let r3 = r2 * r;
    let v1 = r3 * r2 * b0;
    let v2 = 15.0 * r * a0 + 9.0 * r2 * a1 + r3 * a2;
    let d2v1 = 15.0 * r * b0 + 9.0 * r2 * b1 + r3 * b2;
    let dv2 = 15.0 * a0 + 33.0 * r * a1 + 12.0 * r2 * a2 + r3 * a3;
    [v1, v2, d2v1, dv2]
}

impl Perturbation {
    /// Same family with the amplitude multiplied by `s`. Self-similar data
    /// are not a linear family and are returned unchanged.
    pub fn scaled(&self, s: f64) -> Perturbation {
        match self {
            Perturbation::Bump { amplitude, width } => Perturbation::Bump { amplitude: amplitude * s, width: *width },
            Perturbation::Random { amplitude, seed, modes } => {
                Perturbation::Random { amplitude: amplitude * s, seed: *seed, modes: *modes }
            }
            other => other.clone(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Perturbation::SelfSimilar { t0 } if !(*t0 > 0.5 && *t0 < 1.5) => input(format!("t0 = {t0} outside (1/2, 3/2)")),
            Perturbation::Bump { width, .. } if !(*width > 0.0) => input("bump width must be positive"),
            Perturbation::Random { modes, .. } if *modes == 0 || *modes > 12 => input("random modes must be in 1..=12"),
            Perturbation::Bump { amplitude, .. } | Perturbation::Random { amplitude, .. } if !amplitude.is_finite() => {
                input("amplitude must be finite")
            }
            _ => Ok(()),
        }
    }

    fn random_coeffs(seed: u64, modes: usize) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let d: Vec<f64> = (0..modes).map(|_| rng.gen_range(-1.0..1.0)).collect();
        (c, d)
    }

    fn jets(&self, r: f64) -> Option<(Jet, Jet)> {
        let x = Jet::variable(r);
        let one = Jet::constant(1.0);
        let zero = Jet::constant(0.0);
        match self {
            Perturbation::Zero => Some((zero, zero)),
            Perturbation::SelfSimilar { t0 } => {
                let d = |t: f64| Jet::constant(5.0 * t * t) + x * x * 3.0;
                let a = one * 8.0 / d(1.0) - one * 8.0 / d(*t0);
                let b = one * 80.0 / (d(1.0) * d(1.0)) - one * (80.0 * t0) / (d(*t0) * d(*t0));
                Some((a, b))
            }
            Perturbation::Bump { amplitude, width } => {
                Some(((x * x * (-1.0 / (width * width))).exp() * *amplitude, zero))
            }
            Perturbation::Random { amplitude, seed, modes } => {
                let (c, d) = Self::random_coeffs(*seed, *modes);
                let e = (x * x * -2.0).exp();
                let poly = |cs: &[f64]| cs.iter().rev().fold(zero, |acc, &ck| acc * x * x + Jet::constant(ck));
                Some((poly(&c) * e * *amplitude, poly(&d) * e * *amplitude))
            }
            Perturbation::Tabulated(_) => None,
        }
    }

    /// `(A(r), B(r))` with `δψ = r²A`, `δψ_t = r²B`.
    pub fn ab(&self, r: f64) -> (f64, f64) {
        match self {
            Perturbation::Tabulated(t) => (t.a.interpolate(r), t.b.interpolate(r)),
            _ => {
                let (a, b) = self.jets(r).unwrap();
                (a.value(), b.value())
            }
        }
    }

    /// Physical data `(δψ, δψ_t)` at `r`.
    pub fn data(&self, r: f64) -> (f64, f64) {
        let (a, b) = self.ab(r);
        (r * r * a, r * r * b)
    }

    /// Blocks `(v1, v2) = (r³δψ_t, 𝒟²δψ)`.
    pub fn blocks(&self, r: f64) -> (f64, f64) {
        match self {
            Perturbation::Tabulated(t) => (t.v1.interpolate(r), t.v2.interpolate(r)),
            _ => {
                let (a, b) = self.jets(r).unwrap();
                let v = jet_blocks(a, b, r);
                (v[0], v[1])
            }
        }
    }

    /// Energy form of the blocks, `(D²v1, v2')`.
    pub fn energy_blocks(&self, r: f64) -> (f64, f64) {
        match self {
            Perturbation::Tabulated(t) => (t.d2v1.interpolate(r), t.dv2.interpolate(r)),
            _ => {
                let (a, b) = self.jets(r).unwrap();
                let v = jet_blocks(a, b, r);
                (v[2], v[3])
            }
        }
    }
}

/// State `(φ1, φ2)` at similarity time `τ`, stored in energy variables.
#[derive(Debug, Clone)]
pub struct FieldState {
    pub tau: f64,
    pub energy: DVector<f64>,
}

impl FieldState {
    pub fn zeros(gen: &GeneratorMatrix, tau: f64) -> Self {
        FieldState { tau, energy: DVector::zeros(gen.dimension()) }
    }

    /// `(φ1, φ2)` on the similarity grid.
    pub fn phi(&self, gen: &GeneratorMatrix) -> (GridFunction, GridFunction) {
        gen.from_energy(&self.energy)
    }

    pub fn from_phi(gen: &GeneratorMatrix, tau: f64, phi1: &GridFunction, phi2: &GridFunction) -> Result<Self> {
        Ok(FieldState { tau, energy: gen.to_energy(phi1, phi2)? })
    }
}

/// Right-hand side of the similarity system in the original variables,
///
/// `∂τφ1 = -ρφ1' + 2φ1 + ρ²φ2 - 3Kφ2 - V K²φ2 - ρÑ(ρ⁻³K²φ2, ρ)`,
/// `∂τφ2 = D²φ1 - ρφ2' - φ2`,
///
/// with `ρ²φ2 - 3Kφ2` evaluated as `K(ρφ2' - φ2)`.
pub fn rhs(phi1: &GridFunction, phi2: &GridFunction, nonlinear: bool) -> Result<(GridFunction, GridFunction)> {
    phi1.check_hint(3, "rhs (phi1)")?;
    phi2.check_hint(1, "rhs (phi2)")?;
    let (mut a, b) = crate::linear::free_generator_action(phi1, phi2)?;
    let k2 = apply_k2(phi2);
    for i in 0..a.values.len() {
        a.values[i] -= profiles::potential(phi1.nodes()[i]) * k2.values[i];
    }
    if nonlinear {
        let x = apply_a(phi2)?;
        for i in 0..a.values.len() {
            let r = phi1.nodes()[i];
            a.values[i] -= r * profiles::ntilde(x.values[i], r);
        }
    }
    Ok((a, b))
}

fn check_t(big_t: f64) -> Result<()> {
    if !(big_t > 0.5 && big_t < 1.5) {
        return input(format!("blowup time T = {big_t} outside (1/2, 3/2)"));
    }
    Ok(())
}

/// Energy form of the closed-form difference between `ψ^a` and `ψ^s` in the
/// similarity coordinates of scale `s`:
/// `s²[E(a; sρ) - E(s; sρ)]` with `E` the energy blocks.
fn selfsim_difference(a: f64, s: f64, rho: f64) -> (f64, f64) {
    let (p1, p2) = profiles::selfsim_blocks_energy(a, s * rho);
    let (q1, q2) = profiles::selfsim_blocks_energy(s, s * rho);
    (s * s * (p1 - q1), s * s * (p2 - q2))
}

/// Initial data `U(v, T)` at `τ = -log T`.
pub fn initial_data_u(gen: &GeneratorMatrix, v: &Perturbation, big_t: f64) -> Result<FieldState> {
    check_t(big_t)?;
    v.validate()?;
    let n = gen.n();
    let mut w = DVector::zeros(2 * n);
    for i in 0..n {
        let rho = gen.ops.rho[i];
        let (s1, s2) = selfsim_difference(1.0, big_t, rho);
        let (e1, e2) = v.energy_blocks(big_t * rho);
        w[i] = s1 + big_t * big_t * e1;
        w[n + i] = s2 + big_t * big_t * e2;
    }
    Ok(FieldState { tau: 0.0 - big_t.ln(), energy: w })
}

/// Exact state of the difference between `ψ¹` and `ψ^T` at similarity time
/// `τ` (requires `1 - T + e^{-τ} > 0`, i.e. before `ψ¹` blows up).
pub fn closed_form_difference(gen: &GeneratorMatrix, big_t: f64, tau: f64) -> Result<FieldState> {
    let s = (-tau).exp();
    let a = 1.0 - big_t + s;
    if !(a > 0.0) {
        return input(format!("ψ¹ has blown up before τ = {tau}"));
    }
    let n = gen.n();
    let mut w = DVector::zeros(2 * n);
    for i in 0..n {
        let (x, y) = selfsim_difference(a, s, gen.ops.rho[i]);
        w[i] = x;
        w[n + i] = y;
    }
    Ok(FieldState { tau, energy: w })
}

/// Time stepping parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolutionConfig {
    pub n: usize,
    pub dtau: f64,
    /// Final similarity time.
    pub tau_max: f64,
    /// Strength `α` of the exponential filter `exp(-α (k/K)^p)`; `0` is off.
    pub filter: f64,
    pub filter_order: u32,
    pub record_every: f64,
    pub nonlinear: bool,
    /// Norm above which the run stops with a blowup flag.
    pub blowup_norm: f64,
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            n: 48,
            dtau: 0.004,
            tau_max: 8.0,
            filter: 0.0,
            filter_order: 16,
            record_every: 0.1,
            nonlinear: true,
            blowup_norm: 1e6,
        }
    }
}

/// Largest admissible `dτ·N²` for the explicit stepper.
pub const DTAU_SAFEGUARD: f64 = 12.0;

impl EvolutionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < crate::linear::MIN_N {
            return input(format!("n = {} below {}", self.n, crate::linear::MIN_N));
        }
        if !(self.dtau > 0.0) || !(self.record_every > 0.0) || !self.tau_max.is_finite() {
            return input("dtau, record_every must be positive and tau_max finite");
        }
        let limit = DTAU_SAFEGUARD / (self.n * self.n) as f64;
        if self.dtau > limit {
            return input(format!("dtau = {} exceeds the stability limit {limit:.3e} at n = {}", self.dtau, self.n));
        }
        if !(self.filter >= 0.0) {
            return input("filter strength must be nonnegative");
        }
        Ok(())
    }

    /// Largest stable step at this resolution.
    pub fn max_dtau(n: usize) -> f64 {
        DTAU_SAFEGUARD / (n * n) as f64
    }
}

fn filter_matrix(n: usize, alpha: f64, order: u32, parity: Parity) -> DMatrix<f64> {
    let m = 2 * n;
    let (x, w) = lgl_nodes(m);
    let p: Vec<Vec<f64>> = x.iter().map(|&xi| legendre_all(m - 1, xi)).collect();
    let sigma: Vec<f64> = (0..m).map(|k| (-alpha * (k as f64 / (m - 1) as f64).powi(order as i32)).exp()).collect();
    let gamma: Vec<f64> =
        (0..m).map(|k| if k == m - 1 { 2.0 / (m - 1) as f64 } else { 2.0 / (2 * k + 1) as f64 }).collect();
    // Full matrix F[i][j] = Σ_k σ_k P_k(x_i) P_k(x_j) w_j / γ_k, folded.
    let full = DMatrix::from_fn(m, m, |i, j| (0..m).map(|k| sigma[k] * p[i][k] * p[j][k] / gamma[k]).sum::<f64>() * w[j]);
    let s = parity.sign();
    DMatrix::from_fn(n, n, |i, j| full[(n + i, n + j)] + s * full[(n + i, n - 1 - j)])
}

/// Method-of-lines integrator for the similarity system.
#[derive(Debug, Clone)]
pub struct Engine {
    pub gen: GeneratorMatrix,
    pub projection: ProjectionData,
    filter: Option<(DMatrix<f64>, DMatrix<f64>)>,
    cfg: EvolutionConfig,
}

/// One recorded point of a nonlinear trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct EvolutionSample {
    pub tau: f64,
    pub norm: NormReport,
    /// Coordinate along the symmetry mode.
    pub unstable_amplitude: f64,
    /// `‖(1-P)Φ‖`.
    pub stable_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolutionTrace {
    pub samples: Vec<EvolutionSample>,
    pub blowup: bool,
    pub filter: f64,
    #[serde(skip)]
    pub final_state: FieldState,
}

impl EvolutionTrace {
    pub fn totals(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.tau, s.norm.total)).collect()
    }

    pub fn stable(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.tau, s.stable_norm)).collect()
    }
}

impl Engine {
    pub fn new(cfg: EvolutionConfig) -> Result<Self> {
        cfg.validate()?;
        let gen = GeneratorMatrix::assemble(cfg.n)?;
        let projection = build_projection(&gen)?;
        let filter = (cfg.filter > 0.0).then(|| {
            (filter_matrix(cfg.n, cfg.filter, cfg.filter_order, Parity::Odd), filter_matrix(cfg.n, cfg.filter, cfg.filter_order, Parity::Even))
        });
        Ok(Engine { gen, projection, filter, cfg })
    }

    pub fn config(&self) -> &EvolutionConfig {
        &self.cfg
    }

    /// `LΦ + N(Φ)` in energy variables.
    pub fn rhs_energy(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = &self.gen.full * w;
        if self.cfg.nonlinear {
            let n = self.gen.n();
            let nl = self.gen.ops.nonlinearity(&w.rows(n, n).into_owned());
            out.rows_mut(0, n).axpy(1.0, &nl, 1.0);
        }
        out
    }

    fn step(&self, w: &DVector<f64>, h: f64) -> DVector<f64> {
        let k1 = self.rhs_energy(w);
        let k2 = self.rhs_energy(&(w + &k1 * (0.5 * h)));
        let k3 = self.rhs_energy(&(w + &k2 * (0.5 * h)));
        let k4 = self.rhs_energy(&(w + &k3 * h));
        let mut out = w + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        if let Some((fo, fe)) = &self.filter {
            let n = self.gen.n();
            let a = fo * out.rows(0, n);
            let b = fe * out.rows(n, n);
            out.rows_mut(0, n).copy_from(&a);
            out.rows_mut(n, n).copy_from(&b);
        }
        out
    }

    fn sample(&self, tau: f64, w: &DVector<f64>) -> EvolutionSample {
        EvolutionSample {
            tau,
            norm: self.gen.norm_report(w),
            unstable_amplitude: self.projection.amplitude(w),
            stable_norm: self.gen.norm(&self.projection.complement(w)),
        }
    }

    /// Integrates from `u0.tau` to `tau_end`, stopping early once the norm
    /// exceeds the configured blowup threshold.
    pub fn evolve_to(&self, u0: &FieldState, tau_end: f64) -> Result<EvolutionTrace> {
        self.evolve_limited(u0, tau_end, self.cfg.blowup_norm)
    }

    fn evolve_limited(&self, u0: &FieldState, tau_end: f64, limit: f64) -> Result<EvolutionTrace> {
        if u0.energy.len() != self.gen.dimension() {
            return input("initial state has the wrong dimension");
        }
        let span = tau_end - u0.tau;
        if !(span >= 0.0) {
            return input(format!("end time {tau_end} precedes start {}", u0.tau));
        }
        let per_record = (self.cfg.record_every / self.cfg.dtau).ceil().max(1.0) as usize;
        let steps = ((span / self.cfg.dtau).ceil() as usize).max(if span > 0.0 { 1 } else { 0 });
        let h = if steps > 0 { span / steps as f64 } else { 0.0 };
        let mut w = u0.energy.clone();
        let mut samples = vec![self.sample(u0.tau, &w)];
        let mut last_good = u0.tau;
        let mut blowup = false;
        for k in 1..=steps {
            w = self.step(&w, h);
            let tau = u0.tau + k as f64 * h;
            if w.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence { last_good, reason: format!("non-finite state at τ = {tau}") });
            }
            last_good = tau;
            if self.gen.norm(&w) > limit {
                samples.push(self.sample(tau, &w));
                blowup = true;
                break;
            }
            if k % per_record == 0 || k == steps {
                samples.push(self.sample(tau, &w));
            }
        }
        Ok(EvolutionTrace { samples, blowup, filter: self.cfg.filter, final_state: FieldState { tau: last_good, energy: w } })
    }

    /// Integrates for `tau_max` from `u0`.
    pub fn evolve(&self, u0: &FieldState) -> Result<EvolutionTrace> {
        self.evolve_to(u0, u0.tau + self.cfg.tau_max)
    }
}

/// Convenience wrapper around [`Engine`].
pub fn evolve(u0: &FieldState, cfg: &EvolutionConfig) -> Result<EvolutionTrace> {
    Engine::new(*cfg)?.evolve(u0)
}

/// Tuning parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuningConfig {
    pub evolution: EvolutionConfig,
    /// Similarity time at which the unstable amplitude is read.
    pub tau_probe: f64,
    /// Bracket width at which the root search stops.
    pub tol: f64,
    pub max_iterations: usize,
    /// Initial bracket half-width around `T = 1`.
    pub initial_step: f64,
    /// Additional similarity time after `τ_probe` for the decay fit.
    pub decay_horizon: f64,
    /// Norm at which a trial run counts as escaped along the unstable direction.
    pub escape_norm: f64,
    /// Secant steps taken inside the final bracket.
    pub polish_steps: usize,
}

impl Default for TuningConfig {
    fn default() -> Self {
        TuningConfig {
            evolution: EvolutionConfig::default(),
            tau_probe: 6.0,
            tol: 1e-8,
            max_iterations: 200,
            initial_step: 0.01,
            decay_horizon: 4.0,
            escape_norm: 1.0,
            polish_steps: 4,
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TuningStep {
    pub big_t: f64,
    pub amplitude: f64,
    pub bracket: (f64, f64),
    /// The run exceeded the escape norm before `τ_probe`.
    pub escaped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TuningResult {
    pub t_star: f64,
    pub bracket: (f64, f64),
    pub unstable_amplitude_trace: Vec<TuningStep>,
    /// Fit of `log ‖Φ(τ)‖` for the tuned data over the decay window.
    pub decay_fit: Option<RateFit>,
    /// Fit of `log ‖(1-P)Φ(τ)‖` over the same window.
    pub stable_fit: Option<RateFit>,
    /// Whether `a(T)` was monotone over all evaluated `T` in the final bracket.
    pub monotone: bool,
    #[serde(skip)]
    pub trace: Option<EvolutionTrace>,
}

/// Finds `T` such that the unstable amplitude of the evolution of `U(v, T)`
/// vanishes at `τ_probe`, by bracketing around `T = 1` followed by an
/// Illinois-type regula falsi.
pub fn tune_blowup_time(v: &Perturbation, cfg: &TuningConfig) -> Result<TuningResult> {
    v.validate()?;
    if !(cfg.tol > 0.0 && cfg.initial_step > 0.0) {
        return input("tol and initial_step must be positive");
    }
    let engine = Engine::new(cfg.evolution)?;
    let mut trace = Vec::new();
    // Runs that leave the perturbative regime before τ_probe still fix the
    // sign of a(T); their amplitude is read where they stopped.
    let amp = |t: f64, trace: &mut Vec<TuningStep>, br: (f64, f64)| -> Result<f64> {
        let u0 = initial_data_u(&engine.gen, v, t)?;
        let tr = engine.evolve_limited(&u0, cfg.tau_probe, cfg.escape_norm)?;
        let a = tr.samples.last().unwrap().unstable_amplitude;
        trace.push(TuningStep { big_t: t, amplitude: a, bracket: br, escaped: tr.blowup });
        Ok(a)
    };
    let a1 = amp(1.0, &mut trace, (1.0, 1.0))?;
    let (mut lo, mut hi, mut flo, mut fhi);
    if a1 == 0.0 {
        lo = 1.0;
        hi = 1.0;
        flo = 0.0;
        fhi = 0.0;
    } else {
        // a(T) decreases through the root (dU/dT = -240 g), so the root lies
        // above 1 when a(1) > 0.
        let dir = if a1 > 0.0 { 1.0 } else { -1.0 };
        let mut step = cfg.initial_step;
        let mut prev: (f64, f64) = (1.0, a1);
        loop {
            let t = 1.0 + dir * step;
            if !(t > 0.5 && t < 1.5) {
                return Err(Error::OutOfRegime("no sign change of the unstable amplitude in (1/2, 3/2)".into()));
            }
            let a = amp(t, &mut trace, (prev.0.min(t), prev.0.max(t)))?;
            if a == 0.0 || a.signum() != prev.1.signum() {
                if dir > 0.0 {
                    (lo, flo, hi, fhi) = (prev.0, prev.1, t, a);
                } else {
                    (lo, flo, hi, fhi) = (t, a, prev.0, prev.1);
                }
                break;
            }
            prev = (t, a);
            step = (step * 2.0).min(0.499 - 1e-9);
        }
    }
    let mut side = 0i32;
    let mut iterations = 0;
    while hi - lo > cfg.tol && flo != 0.0 && fhi != 0.0 {
        iterations += 1;
        if iterations > cfg.max_iterations {
            return Err(Error::Refinement {
                iterations,
                last_residual: flo.abs().min(fhi.abs()),
                trace: trace.iter().map(|s| (s.big_t, s.amplitude)).collect(),
            });
        }
        let mut t = (lo * fhi - hi * flo) / (fhi - flo);
        // Fall back to bisection if the secant point hugs an endpoint or an
        // endpoint value only carries a sign.
        let w = hi - lo;
        let escaped = trace.iter().any(|s| s.escaped && (s.big_t == lo || s.big_t == hi));
        if escaped || !(t > lo + 0.01 * w && t < hi - 0.01 * w) || iterations % 4 == 0 {
            t = 0.5 * (lo + hi);
        }
        let a = amp(t, &mut trace, (lo, hi))?;
        if a == 0.0 {
            lo = t;
            hi = t;
            flo = 0.0;
            fhi = 0.0;
            break;
        }
        if a.signum() == flo.signum() {
            lo = t;
            flo = a;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = t;
            fhi = a;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    // Secant polish inside the final bracket: the root is needed far below
    // the bracket tolerance, because any residual unstable component grows
    // like e^τ in the decay run that follows.
    let mut t_star = if flo == 0.0 { lo } else if fhi == 0.0 { hi } else { f64::NAN };
    if t_star.is_nan() {
        let (mut x0, mut f0, mut x1, mut f1) = (lo, flo, hi, fhi);
        for _ in 0..cfg.polish_steps {
            if f1 == f0 {
                break;
            }
            let x2 = x1 - f1 * (x1 - x0) / (f1 - f0);
            if !(x2 >= lo && x2 <= hi) || x2 == x1 {
                break;
            }
            let f2 = amp(x2, &mut trace, (lo, hi))?;
            (x0, f0, x1, f1) = (x1, f1, x2, f2);
            if f2 == 0.0 {
                break;
            }
        }
        t_star = trace
            .iter()
            .filter(|s| s.big_t >= lo && s.big_t <= hi && !s.escaped)
            .min_by(|a, b| a.amplitude.abs().total_cmp(&b.amplitude.abs()))
            .map(|s| s.big_t)
            .unwrap_or(0.5 * (lo + hi));
    }
    let mut sorted: Vec<(f64, f64)> = trace.iter().filter(|s| !s.escaped).map(|s| (s.big_t, s.amplitude)).collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    sorted.dedup_by(|a, b| a.0 == b.0);
    let monotone = sorted.windows(2).all(|p| p[1].1 <= p[0].1);
    if trace.iter().any(|s| s.escaped && s.big_t == t_star) {
        return Err(Error::OutOfRegime(format!("tuned data at T = {t_star} still leave the perturbative regime")));
    }

    let u0 = initial_data_u(&engine.gen, v, t_star)?;
    let end = cfg.tau_probe + cfg.decay_horizon;
    let tr = engine.evolve_to(&u0, end)?;
    let window = (u0.tau + 0.5 * (end - u0.tau), end);
    let fit = |data: Vec<(f64, f64)>| {
        if data.iter().filter(|p| p.0 >= window.0).all(|p| p.1 > 0.0) {
            fit_rate(&data, window).ok()
        } else {
            None
        }
    };
    let decay_fit = fit(tr.totals());
    let stable_fit = fit(tr.stable());
    Ok(TuningResult {
        t_star,
        bracket: (lo.min(t_star), hi.max(t_star)),
        unstable_amplitude_trace: trace,
        decay_fit,
        stable_fit,
        monotone,
        trace: Some(tr),
    })
}

/// Rows `(ρ, φ1, φ2)` of a state.
pub fn phi_table(gen: &GeneratorMatrix, state: &FieldState) -> Vec<(f64, f64, f64)> {
    let (p1, p2) = state.phi(gen);
    gen.ops.rho.iter().enumerate().map(|(i, &r)| (r, p1.values[i], p2.values[i])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn u_vanishes_at_zero_data_and_t_one() {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        let u = initial_data_u(&gen, &Perturbation::Zero, 1.0).unwrap();
        assert_eq!(u.energy.amax(), 0.0);
    }

    #[test]
    fn u_derivative_in_t() {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        let h = 1e-4;
        let up = initial_data_u(&gen, &Perturbation::Zero, 1.0 + h).unwrap();
        let um = initial_data_u(&gen, &Perturbation::Zero, 1.0 - h).unwrap();
        let d = (up.energy - um.energy) / (2.0 * h);
        let g = gen.symmetry_mode();
        let err = (d + g * 240.0).amax();
        assert!(err < 1e-5, "{err}");
    }

    #[test]
    fn selfsimilar_data_cancels() {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        let u = initial_data_u(&gen, &Perturbation::SelfSimilar { t0: 1.1 }, 1.1).unwrap();
        assert!(u.energy.amax() < 1e-12, "{}", u.energy.amax());
    }
}
