//! Mode stability: the eigenvalue problem
//!
//! `-(1-ρ²)(u'' + 2u'/ρ) + 2λρu' + λ(λ+1)u + (6/ρ² + V)u = 0`
//!
//! solved by shooting from Frobenius seeds at both singular points and
//! matching at an interior point. Eigenvalues are the zeros of the
//! Wronskian of the two analytic solutions; they are counted by the
//! argument principle and refined by a secant iteration.

pub mod frobenius;
pub mod integrator;

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

pub use frobenius::{frobenius_seed, Endpoint, FrobeniusSeed};
pub use integrator::Tolerance;

use crate::error::{input, Error, Result};
use crate::grid::{Grid, Parity};
use crate::operators::GridFunction;
use crate::profiles;

/// Spectral parameters closer than this to `0` or `-1` are evaluated at a
/// point shifted by [`DETOUR`] in the imaginary direction.
pub const DEGENERATE_RADIUS: f64 = 1e-9;
pub const DETOUR: f64 = 1e-4;

/// Lower bound of the half plane where the mode equation describes the
/// spectrum, including the safety margin.
pub const RE_LAMBDA_MIN: f64 = -1.4;

/// Shooting parameters.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ShootingConfig {
    pub order: usize,
    pub delta: f64,
    pub rho_m: f64,
    pub rtol: f64,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        ShootingConfig { order: 25, delta: 0.05, rho_m: 0.5, rtol: 1e-12 }
    }
}

impl ShootingConfig {
    fn validate(&self) -> Result<()> {
        if !(self.rho_m > self.delta && self.rho_m < 1.0 - self.delta) {
            return input(format!("matching point {} must lie strictly between the step-off points", self.rho_m));
        }
        if !(self.rtol > 0.0 && self.rtol < 1e-3) {
            return input(format!("rtol {} out of range", self.rtol));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance { rtol: self.rtol, ..Tolerance::default() }
    }
}

/// Right-hand side of the mode equation as a first-order system in `ρ`.
pub fn mode_rhs(lambda: Complex64) -> impl Fn(f64, &[Complex64; 2]) -> [Complex64; 2] {
    let l1 = lambda * (lambda + 1.0);
    move |rho: f64, y: &[Complex64; 2]| {
        let pot = l1 + 6.0 / (rho * rho) + profiles::potential(rho);
        let upp = (y[1] * (2.0 * rho) * lambda + y[0] * pot) / (1.0 - rho * rho) - y[1] * (2.0 / rho);
        [y[1], upp]
    }
}

/// Integrates the mode equation from the seed's step-off point to `ρ_target`.
pub fn shoot(lambda: Complex64, seed: &FrobeniusSeed, rho_target: f64, rtol: f64) -> Result<(Complex64, Complex64)> {
    if !(rho_target > 0.0 && rho_target < 1.0) {
        return input(format!("target {rho_target} not inside (0, 1)"));
    }
    let (x0, y0) = seed.initial_state();
    let ok = match seed.endpoint {
        Endpoint::Centre => rho_target >= x0,
        Endpoint::Cone => rho_target <= x0,
    };
    if !ok {
        return input(format!("target {rho_target} lies on the wrong side of the step-off point {x0}"));
    }
    let mut h = 0.0;
    let y = integrator::integrate(
        mode_rhs(lambda),
        x0,
        rho_target,
        y0,
        Tolerance { rtol, ..Tolerance::default() },
        &mut h,
    )?;
    Ok((y[0], y[1]))
}

/// Value of the matching function at one spectral parameter.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConnectionValue {
    pub lambda: Complex64,
    /// Point actually evaluated (differs from `lambda` by a detour near the
    /// degenerate parameters `0` and `-1`).
    pub evaluated_at: Complex64,
    /// Wronskian divided by `scale`.
    pub value: Complex64,
    /// Product of the solution magnitudes `sqrt(|u|² + |u'|²)` at `ρ_m`.
    pub scale: f64,
    /// Raw Wronskian, analytic in `λ`.
    pub raw: Complex64,
}

fn detour(lambda: Complex64) -> Complex64 {
    let near = |a: f64| (lambda - a).norm() < DEGENERATE_RADIUS;
    if near(0.0) || near(-1.0) {
        lambda + Complex64::new(0.0, DETOUR)
    } else {
        lambda
    }
}

/// Wronskian `u_L u_R' - u_L' u_R` at `ρ_m` of the solutions analytic at
/// `ρ = 0` and at `ρ = 1`.
///
/// The solution at `ρ = 1` is multiplied by `λ(λ+1)`, which removes the
/// poles of its series coefficients at `λ = 0` and `λ = -1` so that the
/// Wronskian is analytic in `Re λ > -2`.
pub fn connection(lambda: Complex64, cfg: &ShootingConfig) -> Result<ConnectionValue> {
    cfg.validate()?;
    let at = detour(lambda);
    let left = frobenius_seed(at, Endpoint::Centre, cfg.order, cfg.delta)?;
    let right = frobenius_seed(at, Endpoint::Cone, cfg.order, cfg.delta)?;
    let (ul, dul) = shoot(at, &left, cfg.rho_m, cfg.rtol)?;
    let (ur, dur) = shoot(at, &right, cfg.rho_m, cfg.rtol)?;
    let s = if right.index == Complex64::new(0.0, 0.0) { at * (at + 1.0) } else { Complex64::new(1.0, 0.0) };
    let (ur, dur) = (ur * s, dur * s);
    let raw = ul * dur - dul * ur;
    let scale = (ul.norm_sqr() + dul.norm_sqr()).sqrt() * (ur.norm_sqr() + dur.norm_sqr()).sqrt();
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Integration { rho: cfg.rho_m, reason: "degenerate shot solutions".into() });
    }
    Ok(ConnectionValue { lambda, evaluated_at: at, value: raw / scale, scale, raw })
}

/// Axis-aligned rectangle in the `λ` plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Rect {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Rect { re, im }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        z.re >= self.re.0 && z.re <= self.re.1 && z.im >= self.im.0 && z.im <= self.im.1
    }

    pub fn centre(&self) -> Complex64 {
        Complex64::new(0.5 * (self.re.0 + self.re.1), 0.5 * (self.im.0 + self.im.1))
    }

    fn corners(&self) -> [Complex64; 4] {
        [
            Complex64::new(self.re.0, self.im.0),
            Complex64::new(self.re.1, self.im.0),
            Complex64::new(self.re.1, self.im.1),
            Complex64::new(self.re.0, self.im.1),
        ]
    }

    /// Square of half-width `r` around `z`.
    pub fn around(z: Complex64, r: f64) -> Self {
        Rect { re: (z.re - r, z.re + r), im: (z.im - r, z.im + r) }
    }

    fn quadrants(&self, split: f64) -> [Rect; 4] {
        let xm = self.re.0 + split * (self.re.1 - self.re.0);
        let ym = self.im.0 + split * (self.im.1 - self.im.0);
        [
            Rect::new((self.re.0, xm), (self.im.0, ym)),
            Rect::new((xm, self.re.1), (self.im.0, ym)),
            Rect::new((self.re.0, xm), (ym, self.im.1)),
            Rect::new((xm, self.re.1), (ym, self.im.1)),
        ]
    }
}

const MAX_BISECTIONS: u32 = 14;

fn phase_step(a: Complex64, b: Complex64) -> f64 {
    (b / a).arg()
}

fn segment_winding(za: Complex64, wa: Complex64, zb: Complex64, wb: Complex64, cfg: &ShootingConfig, depth: u32) -> Result<f64> {
    let d = phase_step(wa, wb);
    if d.abs() < PI / 2.0 {
        return Ok(d);
    }
    if depth >= MAX_BISECTIONS {
        return Err(Error::Inconclusive(format!(
            "phase jump {d:.3} between {za} and {zb} persists after {MAX_BISECTIONS} bisections"
        )));
    }
    let zm = 0.5 * (za + zb);
    let wm = connection(zm, cfg)?.value;
    Ok(segment_winding(za, wa, zm, wm, cfg, depth + 1)? + segment_winding(zm, wm, zb, wb, cfg, depth + 1)?)
}

/// Number of eigenvalues (with multiplicity) inside `rect`, from the winding
/// number of the matching function along its boundary.
pub fn count_eigenvalues(rect: &Rect, n_boundary: usize, cfg: &ShootingConfig) -> Result<i64> {
    cfg.validate()?;
    if !(rect.re.0 < rect.re.1 && rect.im.0 < rect.im.1) {
        return input("empty rectangle");
    }
    let per_edge = (n_boundary / 4).max(2);
    let corners = rect.corners();
    let pts: Vec<Complex64> = (0..4)
        .flat_map(|e| {
            let (a, b) = (corners[e], corners[(e + 1) % 4]);
            (0..per_edge).map(move |k| a + (b - a) * (k as f64 / per_edge as f64))
        })
        .collect();
    let vals: Vec<Complex64> = pts.par_iter().map(|&z| connection(z, cfg).map(|c| c.value)).collect::<Result<_>>()?;
    let n = pts.len();
    let total: f64 = (0..n)
        .into_par_iter()
        .map(|i| {
            let j = (i + 1) % n;
            segment_winding(pts[i], vals[i], pts[j], vals[j], cfg, 0)
        })
        .collect::<Result<Vec<f64>>>()?
        .iter()
        .sum();
    let w = total / (2.0 * PI);
    let k = w.round();
    if (w - k).abs() > 1e-6 {
        return Err(Error::Inconclusive(format!("winding number {w} is not an integer")));
    }
    Ok(k as i64)
}

/// A located eigenvalue.
#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueRecord {
    pub lambda: Complex64,
    pub multiplicity_count: i64,
    /// Real part of the eigenfunction on the folded grid over `(0, 1]`,
    /// scaled so that its largest entry in modulus is `+1`.
    #[serde(skip)]
    pub eigenfunction: GridFunction,
    #[serde(skip)]
    pub eigenfunction_imag: GridFunction,
    /// Sup of the `ρ²`-weighted equation residual over the interior nodes.
    pub residual: f64,
    /// `|connection|` at the refined value.
    pub connection_abs: f64,
    pub iterations: usize,
}

/// Eigenvalue refinement settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RefineConfig {
    pub shooting: ShootingConfig,
    pub max_iterations: usize,
    /// Required `|connection|` at convergence.
    pub tolerance: f64,
    /// Nodes of the folded grid for the eigenfunction.
    pub grid_n: usize,
    /// Half-width of the square used for the multiplicity count.
    pub count_radius: f64,
}

impl Default for RefineConfig {
    fn default() -> Self {
        RefineConfig {
            shooting: ShootingConfig::default(),
            max_iterations: 60,
            tolerance: 1e-10,
            grid_n: 100,
            count_radius: 0.05,
        }
    }
}

/// Secant iteration on the analytic Wronskian from `λ0`, followed by
/// eigenfunction assembly and a multiplicity count.
pub fn refine_eigenvalue(lambda0: Complex64, cfg: &RefineConfig) -> Result<EigenvalueRecord> {
    let sc = &cfg.shooting;
    let c0 = connection(lambda0, sc)?;
    let norm = c0.scale;
    let w = |z: Complex64| connection(z, sc).map(|c| (c.raw / norm, c.value.norm()));
    let mut z0 = lambda0;
    let mut w0 = c0.raw / norm;
    let mut z1 = lambda0 + Complex64::new(1e-3, 1e-3 * lambda0.im.signum());
    let (mut w1, mut a1) = w(z1)?;
    let mut trace = vec![(z1.re, a1)];
    let mut iters = 0;
    while iters < cfg.max_iterations {
        iters += 1;
        let denom = w1 - w0;
        if denom.norm() == 0.0 {
            break;
        }
        let z2 = z1 - w1 * (z1 - z0) / denom;
        let (w2, a2) = w(z2)?;
        trace.push((z2.re, a2));
        z0 = z1;
        w0 = w1;
        z1 = z2;
        w1 = w2;
        a1 = a2;
        if (z1 - z0).norm() < 1e-14 * z1.norm().max(1.0) || a1 < 1e-3 * cfg.tolerance {
            break;
        }
    }
    // Snap to the real axis when the imaginary part is at noise level.
    if z1.im.abs() < 1e-12 {
        z1.im = 0.0;
        a1 = connection(z1, sc)?.value.norm();
    }
    if !(a1 <= cfg.tolerance) {
        return Err(Error::Refinement { iterations: iters, last_residual: a1, trace });
    }
    let (ef_re, ef_im, residual) = eigenfunction(z1, cfg)?;
    let mult = count_eigenvalues(&Rect::around(z1, cfg.count_radius), 32, sc)?;
    Ok(EigenvalueRecord {
        lambda: z1,
        multiplicity_count: mult,
        eigenfunction: ef_re,
        eigenfunction_imag: ef_im,
        residual,
        connection_abs: a1,
        iterations: iters,
    })
}

/// Glued eigenfunction samples `(u, u')` at the nodes of a folded grid.
fn eigenfunction(lambda: Complex64, cfg: &RefineConfig) -> Result<(GridFunction, GridFunction, f64)> {
    let sc = &cfg.shooting;
    let grid = Arc::new(Grid::parity(cfg.grid_n, 1.0));
    let nodes = grid.nodes().to_vec();
    let at = detour(lambda);
    let left = frobenius_seed(at, Endpoint::Centre, sc.order, sc.delta)?;
    let right = frobenius_seed(at, Endpoint::Cone, sc.order, sc.delta)?;
    let tol = sc.tolerance();
    let rhs = mode_rhs(at);
    let n = nodes.len();
    let mut u = vec![[Complex64::new(0.0, 0.0); 2]; n];

    // Left part: series below δ, then march node to node up to ρ_m.
    let (x0, y0) = left.initial_state();
    let (mut x, mut y, mut h) = (x0, y0, 0.0);
    let im = nodes.partition_point(|&r| r <= sc.rho_m);
    for i in 0..im {
        let r = nodes[i];
        if r <= x0 {
            let (a, b, _) = left.eval_local(r);
            u[i] = [a, b];
        } else {
            y = integrator::integrate(&rhs, x, r, y, tol, &mut h)?;
            x = r;
            u[i] = y;
        }
    }
    let yl = integrator::integrate(&rhs, x, sc.rho_m, y, tol, &mut h)?;

    // Right part, marching down from ρ = 1 - δ.
    let (x1, y1) = right.initial_state();
    let (mut x, mut y, mut h) = (x1, y1, 0.0);
    for i in (im..n).rev() {
        let r = nodes[i];
        if r >= x1 {
            let (a, b, _) = right.eval_local(1.0 - r);
            u[i] = [a, -b];
        } else {
            y = integrator::integrate(&rhs, x, r, y, tol, &mut h)?;
            x = r;
            u[i] = y;
        }
    }
    let yr = integrator::integrate(&rhs, x, sc.rho_m, y, tol, &mut h)?;
    let scale = if yr[0].norm() >= yr[1].norm() { yl[0] / yr[0] } else { yl[1] / yr[1] };
    for v in u.iter_mut().skip(im) {
        v[0] *= scale;
        v[1] *= scale;
    }

    let (imax, _) = u.iter().enumerate().fold((0, 0.0), |acc, (i, v)| if v[0].norm() > acc.1 { (i, v[0].norm()) } else { acc });
    let norm = u[imax][0];
    for v in u.iter_mut() {
        v[0] /= norm;
        v[1] /= norm;
    }

    // Residual of ρ²·(equation) with u'' from spectral differentiation of u'.
    let du_re: Vec<f64> = u.iter().map(|v| v[1].re).collect();
    let du_im: Vec<f64> = u.iter().map(|v| v[1].im).collect();
    let ddu_re = grid.derivative(&du_re, Parity::Odd);
    let ddu_im = grid.derivative(&du_im, Parity::Odd);
    let l1 = lambda * (lambda + 1.0);
    let mut res = 0.0f64;
    for i in 0..n - 1 {
        let r = nodes[i];
        let (uu, du) = (u[i][0], u[i][1]);
        let ddu = Complex64::new(ddu_re[i], ddu_im[i]);
        let e = -(1.0 - r * r) * (ddu * r * r + du * 2.0 * r)
            + lambda * du * 2.0 * r * r * r
            + (l1 * r * r + 6.0 + r * r * profiles::potential(r)) * uu;
        if !e.norm().is_finite() {
            return Err(Error::Integration { rho: r, reason: "non-finite eigenfunction residual".into() });
        }
        res = res.max(e.norm());
    }
    let re = GridFunction::new(grid.clone(), u.iter().map(|v| v[0].re).collect(), 2);
    let imv = GridFunction::new(grid, u.iter().map(|v| v[0].im).collect(), 2);
    Ok((re, imv, res))
}

/// Scan settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ScanConfig {
    pub rect: Rect,
    /// Target cell size in the real and imaginary directions.
    pub cell: (f64, f64),
    /// Boundary samples per cell before adaptive refinement.
    pub n_boundary: usize,
    pub refine: RefineConfig,
    /// Maximum depth of cell subdivision when a cell holds several zeros.
    pub max_depth: u32,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig {
            rect: Rect::new((-1.4, 2.0), (-20.0, 20.0)),
            cell: (0.5, 2.0),
            n_boundary: 24,
            refine: RefineConfig::default(),
            max_depth: 6,
        }
    }
}

/// Per-cell count, for diagnostics and heat maps.
#[derive(Debug, Clone, Serialize)]
pub struct CellCount {
    pub rect: Rect,
    pub count: Option<i64>,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub eigenvalues: Vec<EigenvalueRecord>,
    pub cells: Vec<CellCount>,
    /// Cells where the argument principle or the refinement failed.
    pub inconclusive: Vec<CellCount>,
    /// Largest real part among eigenvalues other than `λ = 1`.
    pub spectral_bound: Option<f64>,
    pub total_count: i64,
}

fn cell_edges(lo: f64, hi: f64, target: f64, avoid_zero: bool) -> Vec<f64> {
    let mut n = ((hi - lo) / target).ceil().max(1.0) as usize;
    let edges = |n: usize| (0..=n).map(|k| lo + (hi - lo) * k as f64 / n as f64).collect::<Vec<_>>();
    if avoid_zero {
        while edges(n).iter().any(|e| e.abs() < 1e-9 * (hi - lo)) {
            n += 1;
        }
    }
    edges(n)
}

fn resolve_cell(rect: Rect, count: i64, cfg: &ScanConfig, depth: u32, found: &mut Vec<EigenvalueRecord>, bad: &mut Vec<CellCount>) {
    if count <= 0 {
        return;
    }
    if count == 1 || depth >= cfg.max_depth {
        match refine_eigenvalue(rect.centre(), &cfg.refine) {
            Ok(rec) if rect.contains(rec.lambda) || depth >= cfg.max_depth => {
                found.push(rec);
                if count == 1 || depth < cfg.max_depth {
                    return;
                }
            }
            Ok(_) | Err(_) if depth >= cfg.max_depth => {
                bad.push(CellCount { rect, count: Some(count), note: "refinement failed at maximum depth".into() });
                return;
            }
            _ => {}
        }
    }
    // Split off-centre so that sub-cell edges avoid symmetric positions.
    for sub in rect.quadrants(0.4871) {
        match count_eigenvalues(&sub, cfg.n_boundary, &cfg.refine.shooting) {
            Ok(k) => resolve_cell(sub, k, cfg, depth + 1, found, bad),
            Err(e) => bad.push(CellCount { rect: sub, count: None, note: e.to_string() }),
        }
    }
}

/// Counts eigenvalues cell by cell over the scan rectangle and refines every
/// zero found. Results are sorted by real part, then imaginary part.
pub fn spectrum_scan(cfg: &ScanConfig) -> Result<ScanReport> {
    cfg.refine.shooting.validate()?;
    if cfg.rect.re.0 < RE_LAMBDA_MIN - 1e-12 {
        return input(format!("scan must stay in Re λ ≥ {RE_LAMBDA_MIN}"));
    }
    let xs = cell_edges(cfg.rect.re.0, cfg.rect.re.1, cfg.cell.0, false);
    let ys = cell_edges(cfg.rect.im.0, cfg.rect.im.1, cfg.cell.1, true);
    let rects: Vec<Rect> = ys
        .windows(2)
        .flat_map(|y| xs.windows(2).map(move |x| Rect::new((x[0], x[1]), (y[0], y[1]))))
        .collect();
    let counts: Vec<Result<i64>> =
        rects.par_iter().map(|r| count_eigenvalues(r, cfg.n_boundary, &cfg.refine.shooting)).collect();
    let cells: Vec<CellCount> = rects
        .iter()
        .zip(&counts)
        .map(|(r, c)| CellCount {
            rect: *r,
            count: c.as_ref().ok().copied(),
            note: c.as_ref().err().map(|e| e.to_string()).unwrap_or_default(),
        })
        .collect();
    let results: Vec<(Vec<EigenvalueRecord>, Vec<CellCount>)> = cells
        .par_iter()
        .map(|c| {
            let mut found = Vec::new();
            let mut bad = Vec::new();
            match c.count {
                Some(k) => resolve_cell(c.rect, k, cfg, 0, &mut found, &mut bad),
                None => bad.push(c.clone()),
            }
            (found, bad)
        })
        .collect();
    let mut eigenvalues: Vec<EigenvalueRecord> = Vec::new();
    let mut inconclusive = Vec::new();
    for (f, b) in results {
        for rec in f {
            if !eigenvalues.iter().any(|e| (e.lambda - rec.lambda).norm() < 1e-7) {
                eigenvalues.push(rec);
            }
        }
        inconclusive.extend(b);
    }
    eigenvalues.sort_by(|a, b| a.lambda.re.total_cmp(&b.lambda.re).then(a.lambda.im.total_cmp(&b.lambda.im)));
    let spectral_bound = eigenvalues
        .iter()
        .filter(|e| (e.lambda - 1.0).norm() > 1e-6)
        .map(|e| e.lambda.re)
        .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))));
    let total_count = cells.iter().filter_map(|c| c.count).sum();
    Ok(ScanReport { eigenvalues, cells, inconclusive, spectral_bound, total_count })
}

/// Minimum of `|connection|` over a lattice with spacing `step` covering `rect`.
pub fn min_connection(rect: &Rect, step: f64, cfg: &ShootingConfig) -> Result<(f64, Complex64)> {
    let nx = ((rect.re.1 - rect.re.0) / step).round().max(1.0) as usize;
    let ny = ((rect.im.1 - rect.im.0) / step).round().max(1.0) as usize;
    let pts: Vec<Complex64> = (0..=ny)
        .flat_map(|j| {
            (0..=nx).map(move |i| {
                Complex64::new(
                    rect.re.0 + (rect.re.1 - rect.re.0) * i as f64 / nx as f64,
                    rect.im.0 + (rect.im.1 - rect.im.0) * j as f64 / ny as f64,
                )
            })
        })
        .collect();
    let vals: Vec<(f64, Complex64)> =
        pts.par_iter().map(|&z| connection(z, cfg).map(|c| (c.value.norm(), z))).collect::<Result<_>>()?;
    Ok(vals.into_iter().fold((f64::INFINITY, Complex64::new(0.0, 0.0)), |a, b| if b.0 < a.0 { b } else { a }))
}

/// Quantities attached to the symmetry eigenvalue `λ = 1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct SymmetryModeChecks {
    /// `∫_0^1 s² h0 g̃ ds` on the folded collocation grid.
    pub integral_collocation: f64,
    /// The same integral on a composite Gauss grid.
    pub integral_panels: f64,
    /// Max deviation of `W(h0, h1)` from `1/(ρ²(1-ρ²))` on `[0.1, 0.9]`.
    pub wronskian_error: f64,
    /// Max relative deviation between `h1` from reduction of order and `h1`
    /// from direct integration of the mode equation.
    pub h1_agreement: f64,
}

/// Evaluates the positivity integral by two quadratures and checks the
/// Wronskian of `h0` with the second solution `h1` built by reduction of
/// order, `h1 = h0 ∫_{1/2}^ρ ds / (s²(1-s²) h0(s)²)`.
pub fn symmetry_mode_checks() -> Result<SymmetryModeChecks> {
    let integrand = |s: f64| s * s * profiles::h0(s) * profiles::gtilde(s);
    let pg = Grid::parity(48, 1.0);
    let a = pg.integrate(&pg.nodes().iter().map(|&s| integrand(s)).collect::<Vec<_>>());
    let gg = Grid::panels(6, 16, 0, 1.0);
    let b = gg.integrate(&gg.nodes().iter().map(|&s| integrand(s)).collect::<Vec<_>>());

    // Reduction of order on [0.1, 0.9] with panels in the variable x = ρ - 0.1.
    let grid = Arc::new(Grid::panels(12, 16, 0, 0.8));
    let rho: Vec<f64> = grid.nodes().iter().map(|x| x + 0.1).collect();
    let w_exact = |r: f64| 1.0 / (r * r * (1.0 - r * r));
    let h0 = |r: f64| profiles::h0(r);
    let h0p = |r: f64| {
        let d = 5.0 + 3.0 * r * r;
        r * (10.0 - 6.0 * r * r) / (d * d * d)
    };
    let f: Vec<f64> = rho.iter().map(|&r| w_exact(r) / (h0(r) * h0(r))).collect();
    let cum = grid.cumulative(&f, Parity::Even);
    let offset = grid.interpolate(&cum, Parity::Even, 0.4);
    let h1: Vec<f64> = rho.iter().zip(&cum).map(|(&r, c)| h0(r) * (c - offset)).collect();
    let dh1 = grid.derivative(&h1, Parity::Even);
    let mut werr = 0.0f64;
    for i in 0..rho.len() {
        let r = rho[i];
        let w = h0(r) * dh1[i] - h0p(r) * h1[i];
        werr = werr.max((w - w_exact(r)).abs() / w_exact(r));
    }

    // Independent route: integrate the λ = 1 equation from ρ = 1/2 with
    // h1(1/2) = 0, h1'(1/2) = W(1/2)/h0(1/2).
    let rhs = mode_rhs(Complex64::new(1.0, 0.0));
    let y0 = [Complex64::new(0.0, 0.0), Complex64::new(w_exact(0.5) / h0(0.5), 0.0)];
    let tol = Tolerance { rtol: 1e-13, ..Tolerance::default() };
    let mut agree = 0.0f64;
    let hmax = h1.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for i in 0..rho.len() {
        let mut h = 0.0;
        let y = integrator::integrate(&rhs, 0.5, rho[i], y0, tol, &mut h)?;
        agree = agree.max((y[0].re - h1[i]).abs() / hmax);
    }
    Ok(SymmetryModeChecks { integral_collocation: a, integral_panels: b, wronskian_error: werr, h1_agreement: agree })
}
