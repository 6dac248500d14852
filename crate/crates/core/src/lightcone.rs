//! Physical-space solver on `0 ≤ r ≤ 3/2`, blowup detection, and the
//! convergence diagnostics in the backward light cone.
//!
//! The field is evolved as `w = ψ/r²`, which is smooth and even in `r` in
//! the sector `ψ = O(r²)`. In this variable the equation reads
//! `w_tt = w_rr + (6/r) w_r − 9w² − 3r²w³`, the radial wave equation in seven
//! dimensions plus a regular nonlinearity. Space is discretized on a
//! cell-centred grid with fourth-order central differences, even ghost cells at
//! `r = 0` and a reflecting (Neumann) wall at `r = 3/2`; time stepping is
//! classical RK4.
//!
//! The wall reflection starts at `r = 3/2` and moves inwards at unit speed,
//! so it stays outside the backward light cone `r ≤ T − t` of any `T < 3/2`.

use std::sync::Arc;

use nalgebra::DVector;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::evolution::{FieldState, Perturbation};
use crate::grid::{Grid, Parity};
use crate::linear::{least_squares, GeneratorMatrix, RateFit};
use crate::operators::{energy_norm_reduced, GridFunction};
use crate::profiles;

/// Outer radius of the computational domain.
pub const R_MAX: f64 = 1.5;
/// Distance kept from the inward-moving front of the wall reflection.
pub const WALL_MARGIN: f64 = 0.1;
/// Largest admissible `dt/h`.
pub const CFL_MAX: f64 = 1.0;

/// Data of `ψ^T` to which a perturbation is added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Background {
    Vacuum,
    SelfSimilar { big_t: f64 },
}

/// Initial data `ψ = ψ_bg + r²A`, `ψ_t = ψ_bg,t + r²B` on `[0, 3/2]`.
#[derive(Debug, Clone, Serialize)]
pub struct PhysData {
    pub background: Background,
    pub perturbation: Perturbation,
}

impl PhysData {
    pub fn selfsimilar(big_t: f64, perturbation: Perturbation) -> Self {
        PhysData { background: Background::SelfSimilar { big_t }, perturbation }
    }

    pub fn vacuum(perturbation: Perturbation) -> Self {
        PhysData { background: Background::Vacuum, perturbation }
    }

    /// `(w, w_t)` at `r`.
    pub fn w(&self, r: f64) -> (f64, f64) {
        let (a, b) = self.perturbation.ab(r);
        match self.background {
            Background::Vacuum => (a, b),
            Background::SelfSimilar { big_t } => {
                let (w, wt) = selfsim_w(0.0, r, big_t);
                (w + a, wt + b)
            }
        }
    }

    fn validate(&self) -> Result<()> {
        self.perturbation.validate()?;
        if let Background::SelfSimilar { big_t } = self.background {
            if !(big_t > 0.0 && big_t < R_MAX) {
                return input(format!("background blowup time {big_t} outside (0, {R_MAX})"));
            }
        }
        Ok(())
    }
}

/// `(ψ^T/r², ψ^T_t/r²)`.
#[inline]
pub fn selfsim_w(t: f64, r: f64, big_t: f64) -> (f64, f64) {
    let s = big_t - t;
    let d = 5.0 * s * s + 3.0 * r * r;
    (-8.0 / d, -80.0 * s / (d * d))
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct PhysConfig {
    /// Number of cells on `[0, 3/2]`.
    pub n: usize,
    /// `dt/h`.
    pub cfl: f64,
    pub t_max: f64,
    pub nonlinear: bool,
    /// Stop once the estimated scale `(T−t)` falls below this many cells.
    pub stop_cells: f64,
    /// Store a slice at least this often in `t`.
    pub record_dt: f64,
    /// Also store a slice whenever the scale estimate shrinks by this factor.
    pub record_ratio: f64,
}

impl Default for PhysConfig {
    fn default() -> Self {
        PhysConfig {
            n: 1200,
            cfl: 0.5,
            t_max: 1.5,
            nonlinear: true,
            stop_cells: 40.0,
            record_dt: 0.05,
            record_ratio: 0.9,
        }
    }
}

impl PhysConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n < 32 {
            return input(format!("n = {} below 32", self.n));
        }
        if !(self.cfl > 0.0 && self.cfl <= CFL_MAX) {
            return input(format!("CFL number {} outside (0, {CFL_MAX}]", self.cfl));
        }
        if !(self.t_max > 0.0) || !(self.record_dt > 0.0) {
            return input("t_max and record_dt must be positive");
        }
        if !(self.stop_cells >= 4.0) {
            return input("stop_cells must be at least 4");
        }
        if !(self.record_ratio > 0.0 && self.record_ratio < 1.0) {
            return input("record_ratio must lie in (0, 1)");
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        R_MAX / self.n as f64
    }
}

/// A stored time slice.
#[derive(Debug, Clone)]
pub struct PhysState {
    pub t: f64,
    pub grid: Arc<Grid>,
    pub psi: Vec<f64>,
    pub psi_t: Vec<f64>,
}

impl PhysState {
    fn from_w(t: f64, grid: &Arc<Grid>, w: &[f64], wt: &[f64]) -> Self {
        let r = grid.nodes();
        PhysState {
            t,
            grid: grid.clone(),
            psi: w.iter().zip(r).map(|(v, r)| v * r * r).collect(),
            psi_t: wt.iter().zip(r).map(|(v, r)| v * r * r).collect(),
        }
    }

    pub fn r(&self) -> &[f64] {
        self.grid.nodes()
    }

    /// `(ψ/r², ψ_t/r²)`.
    pub fn w(&self) -> (Vec<f64>, Vec<f64>) {
        let r = self.r();
        let w = self.psi.iter().zip(r).map(|(v, r)| v / (r * r)).collect();
        let wt = self.psi_t.iter().zip(r).map(|(v, r)| v / (r * r)).collect();
        (w, wt)
    }

    /// `w(t, 0)` by even interpolation.
    pub fn w_origin(&self) -> f64 {
        self.grid.interpolate(&self.w().0, Parity::Even, 0.0)
    }

    /// `(ψ, ψ_t)` at an arbitrary radius.
    pub fn sample(&self, r: f64) -> (f64, f64) {
        let (w, wt) = self.w();
        let r2 = r * r;
        (r2 * self.grid.interpolate(&w, Parity::Even, r), r2 * self.grid.interpolate(&wt, Parity::Even, r))
    }

    pub fn sup_psi(&self) -> f64 {
        self.psi.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// `R_MAX − t − WALL_MARGIN`: beyond this radius the solution may have
    /// seen the wall.
    pub fn clean_radius(&self) -> f64 {
        R_MAX - self.t - WALL_MARGIN
    }

    /// `sup|ψ_t|` over `r ≤ R_MAX − t`, refined by a parabola through the
    /// largest sample.
    pub fn sup_psi_t(&self) -> f64 {
        let m = self.r().partition_point(|&r| r <= self.clean_radius()).max(3);
        peak(&self.psi_t[..m])
    }

    /// Conserved energy `∫ (ψ_t² + ψ_r² + 3ψ²(ψ+2)²/(2r²)) r² dr`.
    pub fn energy(&self) -> f64 {
        let (w, wt) = self.w();
        let dw = self.grid.derivative(&w, Parity::Even);
        let r = self.r();
        let dens: Vec<f64> = (0..r.len())
            .map(|i| {
                let (x, x2) = (r[i], r[i] * r[i]);
                let psi_r = 2.0 * x * w[i] + x2 * dw[i];
                let psi = x2 * w[i];
                x2 * (x2 * x2 * wt[i] * wt[i] + psi_r * psi_r + 1.5 * x2 * w[i] * w[i] * (psi + 2.0).powi(2))
            })
            .collect();
        self.grid.integrate(&dens)
    }

    /// Higher energy `∫ (φ̂_t² + φ̂_r²) dr` with `φ̂ = 𝒟²ψ`, conserved by the
    /// free equation.
    pub fn higher_energy(&self) -> f64 {
        let (w, wt) = self.w();
        let r = self.r();
        let d = |f: &[f64]| self.grid.derivative(f, Parity::Even);
        let (w1, wt1) = (d(&w), d(&wt));
        let w2 = self.grid.derivative(&w1, Parity::Odd);
        let wt2 = self.grid.derivative(&wt1, Parity::Odd);
        let w3 = d(&w2);
        let dens: Vec<f64> = (0..r.len())
            .map(|i| {
                let x = r[i];
                let x2 = x * x;
                let hat_t = x * (15.0 * wt[i] + 9.0 * x * wt1[i] + x2 * wt2[i]);
                let hat_r = 15.0 * w[i] + 33.0 * x * w1[i] + 12.0 * x2 * w2[i] + x2 * x * w3[i];
                hat_t * hat_t + hat_r * hat_r
            })
            .collect();
        self.grid.integrate(&dens)
    }
}

fn peak(v: &[f64]) -> f64 {
    let (i, m) = v.iter().enumerate().fold((0, 0.0), |(bi, bm), (i, x)| if x.abs() > bm { (i, x.abs()) } else { (bi, bm) });
    if i == 0 || i + 1 == v.len() {
        return m;
    }
    let (a, b, c) = (v[i - 1].abs(), m, v[i + 1].abs());
    let den = a - 2.0 * b + c;
    if den >= 0.0 {
        return m;
    }
    b - 0.125 * (c - a).powi(2) / den
}

/// Dense per-step diagnostics.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GrowthSample {
    pub t: f64,
    pub sup_psi_t: f64,
    pub w_origin: f64,
}

/// Result of [`evolve_physical`].
#[derive(Debug, Clone)]
pub struct PhysRun {
    pub config: PhysConfig,
    pub states: Vec<PhysState>,
    pub history: Vec<GrowthSample>,
    /// Time of the first non-finite value, if any.
    pub breakdown: Option<f64>,
    /// The run stopped because the scale estimate reached `stop_cells` cells.
    pub resolution_limit: bool,
}

impl PhysRun {
    pub fn last(&self) -> &PhysState {
        self.states.last().expect("a run stores at least the initial slice")
    }
}

/// Scale `(T−t)` implied by `w(t,0) = −8/(5(T−t)²)`.
pub fn scale_from_origin(w0: f64) -> Option<f64> {
    (w0 < 0.0).then(|| (1.6 / -w0).sqrt())
}

struct Stepper {
    n: usize,
    h: f64,
    r: Vec<f64>,
    nonlinear: bool,
    pad: Vec<f64>,
}

const GHOST: usize = 2;

impl Stepper {
    fn new(grid: &Grid, nonlinear: bool) -> Self {
        let n = grid.len();
        Stepper { n, h: grid.spacing().unwrap(), r: grid.nodes().to_vec(), nonlinear, pad: vec![0.0; n + 2 * GHOST] }
    }

    /// `w_tt` from `w`.
    fn accel(&mut self, w: &[f64], out: &mut [f64]) {
        let n = self.n;
        let p = &mut self.pad;
        p[GHOST..GHOST + n].copy_from_slice(w);
        for k in 0..GHOST {
            p[GHOST - 1 - k] = w[k];
            p[GHOST + n + k] = w[n - 1 - k];
        }
        let (c1, c2) = (1.0 / (12.0 * self.h), 1.0 / (12.0 * self.h * self.h));
        for i in 0..n {
            let j = i + GHOST;
            let (m2, m1, z, p1, p2) = (p[j - 2], p[j - 1], p[j], p[j + 1], p[j + 2]);
            let d1 = (m2 - 8.0 * m1 + 8.0 * p1 - p2) * c1;
            let d2 = (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * p1 - p2) * c2;
            let r = self.r[i];
            let mut a = d2 + 6.0 * d1 / r;
            if self.nonlinear {
                a -= z * z * (9.0 + 3.0 * r * r * z);
            }
            out[i] = a;
        }
    }

    fn step(&mut self, w: &mut [f64], v: &mut [f64], dt: f64) {
        let n = self.n;
        let mut kw = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut kv = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
        let mut ws = vec![0.0; n];
        let mut vs = vec![0.0; n];
        for s in 0..4 {
            let c = [0.0, 0.5, 0.5, 1.0][s] * dt;
            if s == 0 {
                ws.copy_from_slice(w);
                vs.copy_from_slice(v);
            } else {
                for i in 0..n {
                    ws[i] = w[i] + c * kw[s - 1][i];
                    vs[i] = v[i] + c * kv[s - 1][i];
                }
            }
            kw[s].copy_from_slice(&vs);
            self.accel(&ws, &mut kv[s]);
        }
        for i in 0..n {
            w[i] += dt / 6.0 * (kw[0][i] + 2.0 * kw[1][i] + 2.0 * kw[2][i] + kw[3][i]);
            v[i] += dt / 6.0 * (kv[0][i] + 2.0 * kv[1][i] + 2.0 * kv[2][i] + kv[3][i]);
        }
    }
}

/// Evolves data on `[0, 3/2]` until `t_max`, the resolution limit near a
/// blowup, or a non-finite value.
pub fn evolve_physical(data: &PhysData, cfg: &PhysConfig) -> Result<PhysRun> {
    cfg.validate()?;
    data.validate()?;
    let grid = Arc::new(Grid::staggered(cfg.n, R_MAX));
    let h = cfg.h();
    let dt_max = cfg.cfl * h;
    let (mut w, mut v): (Vec<f64>, Vec<f64>) = grid.nodes().iter().map(|&r| data.w(r)).unzip();
    if w.iter().chain(&v).any(|x| !x.is_finite()) {
        return input("initial data are not finite on [0, 3/2]");
    }
    let mut stepper = Stepper::new(&grid, cfg.nonlinear);
    let mut t = 0.0;
    let first = PhysState::from_w(t, &grid, &w, &v);
    let sample = |st: &PhysState| GrowthSample { t: st.t, sup_psi_t: st.sup_psi_t(), w_origin: st.w_origin() };
    let mut history = vec![sample(&first)];
    let mut states = vec![first];
    let mut last_scale = scale_from_origin(history[0].w_origin).unwrap_or(f64::INFINITY);
    let mut last_record = 0.0;
    let mut breakdown = None;
    let mut resolution_limit = false;
    while t < cfg.t_max * (1.0 - 1e-14) {
        let dt = dt_max.min(cfg.t_max - t);
        stepper.step(&mut w, &mut v, dt);
        t += dt;
        if w.iter().chain(&v).any(|x| !x.is_finite()) {
            breakdown = Some(t);
            break;
        }
        let st = PhysState::from_w(t, &grid, &w, &v);
        let gs = sample(&st);
        history.push(gs);
        let scale = scale_from_origin(gs.w_origin).unwrap_or(f64::INFINITY);
        let at_limit = scale < cfg.stop_cells * h;
        if at_limit || t - last_record >= cfg.record_dt * (1.0 - 1e-9) || scale <= cfg.record_ratio * last_scale || t >= cfg.t_max * (1.0 - 1e-14) {
            states.push(st);
            last_record = t;
            last_scale = last_scale.min(scale);
        }
        if at_limit {
            resolution_limit = true;
            break;
        }
    }
    Ok(PhysRun { config: *cfg, states, history, breakdown, resolution_limit })
}

/// Linear extrapolation of `1/sup|ψ_t|` to zero.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BlowupFit {
    pub t_fit: f64,
    /// Half-width of a two-sigma interval for `t_fit`.
    pub confidence: f64,
    pub window: (f64, f64),
    pub samples: usize,
    /// `t + (8/(5|w(t,0)|))^{1/2}` at the last sample.
    pub t_origin: Option<f64>,
}

impl BlowupFit {
    /// The origin estimate when available, else the linear extrapolation.
    ///
    /// Near the blowup `1/sup|ψ_t|` carries a relative correction of the
    /// order of the decaying perturbation, which biases the extrapolation;
    /// the origin estimate at the last sample has a much smaller bias.
    pub fn best(&self) -> f64 {
        self.t_origin.unwrap_or(self.t_fit)
    }
}

/// Fits `1/sup|ψ_t|` against `t` over the last `threshold`-fold growth of
/// `sup|ψ_t|` and extrapolates to zero.
pub fn detect_blowup(history: &[GrowthSample], threshold: f64) -> Result<BlowupFit> {
    if !(threshold > 1.0) {
        return input(format!("threshold {threshold} must exceed 1"));
    }
    let last = history.last().ok_or_else(|| Error::Detection("empty history".into()))?;
    let floor = last.sup_psi_t / threshold;
    let start = match history.iter().rposition(|s| s.sup_psi_t < floor) {
        Some(i) => i + 1,
        None => {
            return Err(Error::Detection(format!(
                "no blowup: sup|ψ_t| grew by less than a factor {threshold} (final {:.3e})",
                last.sup_psi_t
            )))
        }
    };
    let window = &history[start..];
    if window.len() < 5 {
        return Err(Error::Detection(format!("only {} samples in the fitting window", window.len())));
    }
    if let Some(p) = window.windows(2).find(|p| p[1].sup_psi_t < p[0].sup_psi_t) {
        return Err(Error::Detection(format!("sup|ψ_t| not monotone in the fitting window near t = {}", p[1].t)));
    }
    let xy: Vec<(f64, f64)> = window.iter().map(|s| (s.t, 1.0 / s.sup_psi_t)).collect();
    let (a, b, _, sa) = least_squares(&xy)?;
    if !(a < 0.0) {
        return Err(Error::Detection("1/sup|ψ_t| is not decreasing".into()));
    }
    let t_fit = -b / a;
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sigma = sa * sxx.sqrt();
    let var = sigma * sigma / (n * a * a) + my * my * sa * sa / a.powi(4);
    Ok(BlowupFit {
        t_fit,
        confidence: 2.0 * var.sqrt(),
        window: (window[0].t, last.t),
        samples: window.len(),
        t_origin: scale_from_origin(last.w_origin).map(|s| last.t + s),
    })
}

/// Difference norm at one slice.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SliceNorm {
    pub t: f64,
    /// `T − t`.
    pub s: f64,
    /// `s^{3/2}‖(ψ,ψ_t) − (ψ^T,ψ^T_t)‖_{ℰ(s)}` from finite differences on the
    /// solver grid.
    pub q: f64,
    /// Same quantity after resampling onto a spectral grid on `[0, s]`.
    pub q_resampled: f64,
    /// `s^{3/2}‖(ψ^T,ψ^T_t)‖_{ℰ(s)}`.
    pub q_reference: f64,
}

/// Settings of [`convergence_report`].
#[derive(Debug, Clone, Copy, Serialize, serde::Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    /// Nodes of the rescaled grid on `[0, T−t]`.
    pub n_rho: usize,
    /// Profile error is measured on `[0, profile_rho]`.
    pub profile_rho: f64,
    pub min_slices: usize,
    /// Fit over `T − t ∈ [s_min, decade·s_min]`.
    pub decade: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { n_rho: 40, profile_rho: 0.9, min_slices: 10, decade: 10.0 }
    }
}

/// Convergence of a blowup run to `ψ^{T_fit}`.
#[derive(Debug, Clone, Serialize)]
pub struct BlowupReport {
    pub t_fit: f64,
    pub profile_error: f64,
    /// Time of the slice used for `profile_error`.
    pub profile_t: f64,
    /// Fit of `ln q` against `−ln(T−t)`; the exponent is `−slope`.
    pub rate_fit: RateFit,
    pub exponent: f64,
    pub slices: Vec<SliceNorm>,
    /// Largest relative gap between the two routes for `q`.
    pub route_gap: f64,
    pub low_confidence: bool,
    pub notes: Vec<String>,
}

/// `s^{3/2}` times the `ℰ(s)` norms of the difference to `ψ^T` and of `ψ^T`
/// itself, by resampling `ψ/r²` onto a spectral grid on `[0, s]`.
pub fn rescaled_difference(state: &PhysState, big_t: f64, n_rho: usize) -> Result<(f64, f64)> {
    let s = big_t - state.t;
    if !(s > 0.0) {
        return input(format!("slice at t = {} is not before T = {big_t}", state.t));
    }
    let g = Arc::new(Grid::parity(n_rho, s));
    let (w, wt) = state.w();
    let mut da = Vec::with_capacity(n_rho);
    let mut db = Vec::with_capacity(n_rho);
    let mut ra = Vec::with_capacity(n_rho);
    let mut rb = Vec::with_capacity(n_rho);
    for &r in g.nodes() {
        let (a, b) = selfsim_w(state.t, r, big_t);
        da.push(state.grid.interpolate(&w, Parity::Even, r) - a);
        db.push(state.grid.interpolate(&wt, Parity::Even, r) - b);
        ra.push(a);
        rb.push(b);
    }
    let k = s.powf(1.5);
    let gf = |v: Vec<f64>| GridFunction::new(g.clone(), v, 0);
    let diff = energy_norm_reduced(&gf(da), &gf(db), s)?;
    let reference = energy_norm_reduced(&gf(ra), &gf(rb), s)?;
    Ok((k * diff, k * reference))
}

/// The difference norm of [`rescaled_difference`] with finite differences on
/// the solver grid.
pub fn direct_difference(state: &PhysState, big_t: f64) -> Result<f64> {
    let s = big_t - state.t;
    let (w, wt) = state.w();
    let (a, b): (Vec<f64>, Vec<f64>) = state
        .r()
        .iter()
        .enumerate()
        .map(|(i, &r)| {
            let (a, b) = selfsim_w(state.t, r, big_t);
            (w[i] - a, wt[i] - b)
        })
        .unzip();
    let gf = |v: Vec<f64>| GridFunction::new(state.grid.clone(), v, 0);
    Ok(s.powf(1.5) * energy_norm_reduced(&gf(a), &gf(b), s.min(R_MAX))?)
}

/// Energy-variable state of the difference to `ψ^T` at `τ = −ln(T − t)`,
/// on the similarity grid of `gen`: `s²(D²(r³δψ_t), ∂_r𝒟²δψ)(sρ)`.
pub fn similarity_state(state: &PhysState, big_t: f64, gen: &GeneratorMatrix) -> Result<FieldState> {
    let s = big_t - state.t;
    if !(s > 0.0 && s <= R_MAX) {
        return input(format!("slice at t = {} has no light cone of radius in (0, {R_MAX}] for T = {big_t}", state.t));
    }
    let (w, wt) = state.w();
    let r = state.r();
    let (a, b): (Vec<f64>, Vec<f64>) = (0..r.len())
        .map(|i| {
            let (p, q) = selfsim_w(state.t, r[i], big_t);
            (w[i] - p, wt[i] - q)
        })
        .unzip();
    let g = &state.grid;
    let a1 = g.derivative(&a, Parity::Even);
    let a2 = g.derivative(&a1, Parity::Odd);
    let a3 = g.derivative(&a2, Parity::Even);
    let b1 = g.derivative(&b, Parity::Even);
    let b2 = g.derivative(&b1, Parity::Odd);
    let mut e1 = vec![0.0; r.len()];
    let mut e2 = vec![0.0; r.len()];
    for i in 0..r.len() {
        let (x, x2) = (r[i], r[i] * r[i]);
        e1[i] = x * (15.0 * b[i] + 9.0 * x * b1[i] + x2 * b2[i]);
        e2[i] = 15.0 * a[i] + 33.0 * x * a1[i] + 12.0 * x2 * a2[i] + x2 * x * a3[i];
    }
    let n = gen.n();
    let mut energy = DVector::zeros(2 * n);
    for (i, &rho) in gen.ops.rho.iter().enumerate() {
        energy[i] = s * s * g.interpolate(&e1, Parity::Odd, s * rho);
        energy[n + i] = s * s * g.interpolate(&e2, Parity::Even, s * rho);
    }
    Ok(FieldState { tau: -s.ln(), energy })
}

/// `sup_{ρ ≤ ρ_max} |ψ(t, (T−t)ρ) + 1 − W0(ρ)|`.
pub fn profile_error(state: &PhysState, big_t: f64, rho_max: f64) -> f64 {
    let s = big_t - state.t;
    let (w, _) = state.w();
    (0..=200)
        .map(|k| {
            let rho = rho_max * k as f64 / 200.0;
            let r = s * rho;
            let psi = r * r * state.grid.interpolate(&w, Parity::Even, r);
            (psi + 1.0 - profiles::w0(rho)).abs()
        })
        .fold(0.0, f64::max)
}

/// Difference norms to `ψ^{T_fit}` on every slice before `T_fit`, the power
/// law fitted over the last decade of `T_fit − t`, and the profile error on
/// the last slice.
pub fn convergence_report(run: &PhysRun, t_fit: f64, cfg: &ReportConfig) -> Result<BlowupReport> {
    if cfg.n_rho < 8 || !(cfg.decade > 1.0) || !(cfg.profile_rho > 0.0 && cfg.profile_rho <= 1.0) {
        return input("report config: n_rho ≥ 8, decade > 1, profile_rho in (0, 1]");
    }
    let h = run.config.h();
    let usable: Vec<&PhysState> = run.states.iter().filter(|st| t_fit - st.t > 2.0 * h).collect();
    let last = *usable.last().ok_or_else(|| Error::Detection(format!("no slice before T = {t_fit}")))?;
    let slices: Vec<SliceNorm> = usable
        .par_iter()
        .map(|st| {
            let (q_resampled, q_reference) = rescaled_difference(st, t_fit, cfg.n_rho)?;
            let q = direct_difference(st, t_fit)?;
            Ok(SliceNorm { t: st.t, s: t_fit - st.t, q, q_resampled, q_reference })
        })
        .collect::<Result<_>>()?;
    let s_min = t_fit - last.t;
    let window: Vec<(f64, f64)> =
        slices.iter().filter(|sl| sl.s <= cfg.decade * s_min * (1.0 + 1e-9)).map(|sl| (-sl.s.ln(), sl.q)).collect();
    let mut notes = Vec::new();
    let span = slices.iter().map(|sl| sl.s).fold(0.0, f64::max) / s_min;
    if span < cfg.decade {
        notes.push(format!("slices span a factor {span:.2} in T − t, below {}", cfg.decade));
    }
    if window.len() < cfg.min_slices {
        notes.push(format!("{} slices in the fitting window, below {}", window.len(), cfg.min_slices));
    }
    if run.breakdown.is_some() {
        notes.push("run ended with non-finite values".into());
    }
    let lo = window.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let hi = window.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let rate_fit = crate::linear::fit_rate(&window, (lo, hi))?;
    let route_gap = slices
        .iter()
        .filter(|sl| sl.s <= cfg.decade * s_min * (1.0 + 1e-9))
        .map(|sl| (sl.q - sl.q_resampled).abs() / sl.q_reference)
        .fold(0.0, f64::max);
    Ok(BlowupReport {
        t_fit,
        profile_error: profile_error(last, t_fit, cfg.profile_rho),
        profile_t: last.t,
        exponent: -rate_fit.slope,
        rate_fit,
        slices,
        route_gap,
        low_confidence: !notes.is_empty(),
        notes,
    })
}
