//! The linearized generator `L = L₀ + L'` in similarity variables, its
//! rank-one spectral projection, and linear decay measurements.
//!
//! States are stored in energy variables `w1 = D²u1` (odd) and `w2 = u2'`
//! (even) on a folded Legendre–Gauss–Lobatto grid. In these variables the
//! inner product is the plain `L²(0,1)` product, so adjoints are transposes
//! with respect to the quadrature weights. The transport term `-ρ∂_ρ` is
//! written as `-(ρD + Dρ)/2 + 1/2`, which makes the discrete free operator
//! dissipative with the same bound `-3/2` as the continuous one.

use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::grid::{Grid, Parity};
use crate::operators::{apply_d, apply_k, apply_k2, GridFunction, NormReport};
use crate::profiles;

/// Minimum grid size accepted by [`GeneratorMatrix::assemble`].
pub const MIN_N: usize = 16;

/// Collocation matrices on the folded grid used by the energy-variable
/// discretization.
#[derive(Debug, Clone)]
pub struct EnergyOps {
    pub grid: Arc<Grid>,
    pub rho: DVector<f64>,
    /// Derivative of an odd function (result even).
    pub d_odd: DMatrix<f64>,
    /// Derivative of an even function (result odd).
    pub d_even: DMatrix<f64>,
    /// `K` applied to an odd function.
    pub k_odd: DMatrix<f64>,
    /// `∫_0^ρ` of an even function.
    pub j_even: DMatrix<f64>,
}

impl EnergyOps {
    pub fn new(n: usize) -> Self {
        let grid = Arc::new(Grid::parity(n, 1.0));
        let rho = DVector::from_column_slice(grid.nodes());
        let odd = grid.folded(Parity::Odd).unwrap();
        let even = grid.folded(Parity::Even).unwrap();
        let r = DMatrix::from_diagonal(&rho);
        EnergyOps {
            d_odd: odd.diff.clone(),
            d_even: even.diff.clone(),
            k_odd: &even.cumulative * &r,
            j_even: even.cumulative.clone(),
            grid,
            rho,
        }
    }

    pub fn n(&self) -> usize {
        self.rho.len()
    }

    /// `D²f = ρ⁻¹∂(ρ⁻¹∂f)` for odd `f`; `Df` is odd again.
    pub fn d2_odd(&self, f: &DVector<f64>) -> DVector<f64> {
        let a = (&self.d_odd * f).component_div(&self.rho);
        (&self.d_odd * a).component_div(&self.rho)
    }

    /// `x = ρ⁻³K²u2` with `u2 = ∫ w2`.
    pub fn a_of_w2(&self, w2: &DVector<f64>) -> DVector<f64> {
        let u2 = &self.j_even * w2;
        let k2 = &self.k_odd * (&self.k_odd * u2);
        k2.zip_map(&self.rho, |v, r| v / (r * r * r))
    }

    /// Energy-variable form of the nonlinearity, `-D²(ρ Ñ(x, ρ))`.
    pub fn nonlinearity(&self, w2: &DVector<f64>) -> DVector<f64> {
        let x = self.a_of_w2(w2);
        let m = DVector::from_fn(self.n(), |i, _| self.rho[i] * profiles::ntilde(x[i], self.rho[i]));
        -self.d2_odd(&m)
    }

    /// Quadrature weights of the `L²(0,1)` product, one copy per component.
    pub fn weights(&self) -> DVector<f64> {
        let w = self.grid.weights();
        DVector::from_fn(2 * self.n(), |i, _| w[i % self.n()])
    }
}

/// Discretized generator acting on stacked energy variables `(w1, w2)`.
#[derive(Debug, Clone)]
pub struct GeneratorMatrix {
    pub ops: EnergyOps,
    /// The free part `L₀`.
    pub free: DMatrix<f64>,
    /// The potential part `L'`; only the `(w1, w2)` block is nonzero.
    pub potential: DMatrix<f64>,
    pub full: DMatrix<f64>,
    weights: DVector<f64>,
}

impl GeneratorMatrix {
    pub fn assemble(n: usize) -> Result<Self> {
        if n < MIN_N {
            return input(format!("generator needs at least {MIN_N} nodes, got {n}"));
        }
        let ops = EnergyOps::new(n);
        let r = DMatrix::from_diagonal(&ops.rho);
        let id = DMatrix::<f64>::identity(n, n);
        let transport_odd = (&r * &ops.d_odd + &ops.d_even * &r) * 0.5 - &id * 0.5;
        let transport_even = (&r * &ops.d_even + &ops.d_odd * &r) * 0.5 - &id * 0.5;
        let mut free = DMatrix::zeros(2 * n, 2 * n);
        free.view_mut((0, 0), (n, n)).copy_from(&(-transport_odd - &id * 2.0));
        free.view_mut((0, n), (n, n)).copy_from(&ops.d_even);
        free.view_mut((n, 0), (n, n)).copy_from(&ops.d_odd);
        free.view_mut((n, n), (n, n)).copy_from(&(-transport_even - &id * 2.0));

        let diag = |f: fn(f64) -> f64| DMatrix::from_diagonal(&ops.rho.map(f));
        let u2 = ops.j_even.clone();
        let ku2 = &ops.k_odd * &u2;
        let k2u2 = &ops.k_odd * &ku2;
        let block = diag(profiles::potential) * u2
            + diag(profiles::potential_d1) * ku2 * 2.0
            + diag(profiles::potential_d2) * k2u2;
        let mut potential = DMatrix::zeros(2 * n, 2 * n);
        potential.view_mut((0, n), (n, n)).copy_from(&(-block));
        let full = &free + &potential;
        let weights = ops.weights();
        Ok(GeneratorMatrix { ops, free, potential, full, weights })
    }

    pub fn n(&self) -> usize {
        self.ops.n()
    }

    pub fn dimension(&self) -> usize {
        2 * self.n()
    }

    pub fn matrix(&self, with_potential: bool) -> &DMatrix<f64> {
        if with_potential {
            &self.full
        } else {
            &self.free
        }
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.iter().zip(b.iter()).zip(self.weights.iter()).map(|((x, y), w)| x * y * w).sum()
    }

    pub fn norm(&self, v: &DVector<f64>) -> f64 {
        self.inner(v, v).max(0.0).sqrt()
    }

    /// `(‖w1‖, ‖w2‖)` packaged as a norm report.
    pub fn norm_report(&self, v: &DVector<f64>) -> NormReport {
        let n = self.n();
        let w = self.ops.grid.weights();
        let part = |o: usize| (0..n).map(|i| v[o + i] * v[o + i] * w[i]).sum::<f64>().sqrt();
        let (a, b) = (part(0), part(n));
        NormReport::from_parts(a, b, a.hypot(b))
    }

    /// The symmetry mode `g` in energy variables, sampled from closed forms.
    pub fn symmetry_mode(&self) -> DVector<f64> {
        let n = self.n();
        DVector::from_fn(2 * n, |i, _| {
            let (a, b) = profiles::symmetry_mode_energy(self.ops.rho[i % n]);
            if i < n {
                a
            } else {
                b
            }
        })
    }

    /// Converts the pair `(u1, u2)` into the energy vector.
    pub fn to_energy(&self, u1: &GridFunction, u2: &GridFunction) -> Result<DVector<f64>> {
        let w1 = apply_d(&apply_d(u1)?)?;
        let w2 = u2.derivative();
        Ok(DVector::from_iterator(2 * self.n(), w1.values.into_iter().chain(w2.values)))
    }

    /// Reconstructs `(u1, u2) = (K²w1, ∫w2)`.
    pub fn from_energy(&self, v: &DVector<f64>) -> (GridFunction, GridFunction) {
        let n = self.n();
        let w1 = v.rows(0, n).into_owned();
        let w2 = v.rows(n, n).into_owned();
        let g = &self.ops.grid;
        let w1f = GridFunction::new(g.clone(), w1.as_slice().to_vec(), 1);
        let u1 = apply_k2(&w1f);
        let u2 = GridFunction::new(g.clone(), (&self.ops.j_even * w2).as_slice().to_vec(), 1);
        (u1, u2)
    }

    /// Eigenvalues sorted by decreasing real part.
    pub fn eigenvalues(&self, with_potential: bool) -> Vec<Complex64> {
        let mut ev: Vec<Complex64> = self.matrix(with_potential).complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.re.total_cmp(&a.re).then(a.im.total_cmp(&b.im)));
        ev
    }

    /// Upper bound of the numerical range of the free part in the energy
    /// inner product.
    pub fn free_numerical_range(&self) -> f64 {
        let s = self.weights.map(f64::sqrt);
        let a = DMatrix::from_fn(self.dimension(), self.dimension(), |i, j| s[i] * self.free[(i, j)] / s[j]);
        let h = (&a + a.transpose()) * 0.5;
        h.symmetric_eigenvalues().max()
    }
}

/// Rank-one projection onto the symmetry mode along the remaining spectrum.
#[derive(Debug, Clone, Serialize)]
pub struct ProjectionData {
    pub eigenvalue: f64,
    /// Discrete eigenvector, scaled to have unit `g`-coordinate.
    #[serde(skip)]
    pub right: DVector<f64>,
    /// Left eigenvector in raw coefficient space; `P u = (left·u) right`.
    #[serde(skip)]
    pub left: DVector<f64>,
    /// `left·right` before rescaling `left` to make it one.
    pub normalization: f64,
    /// Distance from the eigenvalue to the rest of the discrete spectrum.
    pub gap: f64,
    /// `‖right - g‖ / ‖g‖`.
    pub mode_error: f64,
}

impl ProjectionData {
    /// Coordinate of `v` along the symmetry mode.
    pub fn amplitude(&self, v: &DVector<f64>) -> f64 {
        self.left.dot(v)
    }

    pub fn apply(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.right * self.amplitude(v)
    }

    pub fn complement(&self, v: &DVector<f64>) -> DVector<f64> {
        v - self.apply(v)
    }
}

/// Required separation of the unstable eigenvalue from the rest.
pub const MIN_GAP: f64 = 0.5;

fn inverse_iteration(a: &DMatrix<f64>, sigma: f64, start: &DVector<f64>) -> Result<DVector<f64>> {
    let n = a.nrows();
    let shifted = a - DMatrix::<f64>::identity(n, n) * sigma;
    let lu = shifted.lu();
    let mut x = start.clone();
    for _ in 0..4 {
        x = lu
            .solve(&x)
            .ok_or_else(|| Error::Resolution("singular shifted matrix in inverse iteration".into()))?;
        let m = x.amax();
        x /= m;
    }
    Ok(x)
}

/// Builds the spectral projection for the eigenvalue near 1 from the right
/// and left discrete eigenvectors.
pub fn build_projection(gen: &GeneratorMatrix) -> Result<ProjectionData> {
    let ev = gen.eigenvalues(true);
    let (k, lam) = ev
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - 1.0).norm().total_cmp(&(b.1 - 1.0).norm()))
        .map(|(k, l)| (k, *l))
        .unwrap();
    if (lam - 1.0).norm() > 0.1 || lam.im.abs() > 1e-8 {
        return Err(Error::Resolution(format!("no real discrete eigenvalue near 1 (closest {lam}); increase N")));
    }
    let gap = ev.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, l)| (l - lam).norm()).fold(f64::INFINITY, f64::min);
    if gap < MIN_GAP {
        return Err(Error::Resolution(format!("spectral gap {gap:.3} below {MIN_GAP}; increase N")));
    }
    let sigma = lam.re - 1e-9;
    let g = gen.symmetry_mode();
    let mut right = inverse_iteration(&gen.full, sigma, &g)?;
    right *= gen.inner(&g, &g) / gen.inner(&right, &g);
    let mut left = inverse_iteration(&gen.full.transpose(), sigma, &gen.weights.component_mul(&g))?;
    let normalization = left.dot(&right);
    if normalization.abs() < 1e-14 * left.norm() * right.norm() {
        return Err(Error::Resolution("left and right eigenvectors are orthogonal".into()));
    }
    left /= normalization;
    let mode_error = gen.norm(&(&right - &g)) / gen.norm(&g);
    Ok(ProjectionData { eigenvalue: lam.re, right, left, normalization, gap, mode_error })
}

/// Applies the contour-integral projection
/// `(2πi)⁻¹ ∮_{|λ-1|=radius} (λ - L)⁻¹ v dλ` by the trapezoidal rule.
pub fn contour_projection(gen: &GeneratorMatrix, v: &DVector<f64>, radius: f64, nodes: usize) -> Result<DVector<f64>> {
    let dim = gen.dimension();
    let lc = gen.full.map(|x| Complex64::new(x, 0.0));
    let vc = v.map(|x| Complex64::new(x, 0.0));
    let mut acc = DVector::<Complex64>::zeros(dim);
    for k in 0..nodes {
        let th = 2.0 * PI * (k as f64 + 0.5) / nodes as f64;
        let e = Complex64::from_polar(radius, th);
        let lam = Complex64::new(1.0, 0.0) + e;
        let m = DMatrix::<Complex64>::identity(dim, dim) * lam - &lc;
        let x = m
            .lu()
            .solve(&vc)
            .ok_or_else(|| Error::Resolution(format!("resolvent singular at {lam}")))?;
        acc += x * (e / nodes as f64);
    }
    Ok(acc.map(|z| z.re))
}

/// `L̃₀` applied to `(u1, u2)` in the original variables:
/// `(-ρu1' + 2u1 + ρ²u2 - 3Ku2, D²u1 - ρu2' - u2)`, with the first
/// component's last two terms computed as `K(ρu2' - u2)`.
pub fn free_generator_action(u1: &GridFunction, u2: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    let du1 = u1.derivative();
    let du2 = u2.derivative();
    let fused = apply_k(&u2.with_values(
        (0..u2.values.len()).map(|i| u2.nodes()[i] * du2.values[i] - u2.values[i]).collect(),
        u2.parity_hint + 2,
    ));
    let a: Vec<f64> = (0..u1.values.len())
        .map(|i| -u1.nodes()[i] * du1.values[i] + 2.0 * u1.values[i] + fused.values[i])
        .collect();
    let d2 = apply_d(&apply_d(u1)?)?;
    let b: Vec<f64> =
        (0..u2.values.len()).map(|i| d2.values[i] - u2.nodes()[i] * du2.values[i] - u2.values[i]).collect();
    Ok((u1.with_values(a, u1.parity_hint), u2.with_values(b, u2.parity_hint)))
}

/// Solves `(2 - L̃₀)u = f` by the explicit formula
///
/// `u(ρ) = ρ³(1-ρ²)⁻² ∫_ρ^1 (1-s²) s⁻⁴ [f1(s) + s²Kf2(s)] ds`,
/// `u2 = Du`, `u1 = K(ρ²Du) + Ku - K²f2`.
///
/// The integral is evaluated after the substitution `s = ρ + (1-ρ)t`, which
/// cancels the factor `(1-ρ)²` analytically so that the quotient is regular
/// up to `ρ = 1`.
pub fn free_resolvent_at_2(f1: &GridFunction, f2: &GridFunction) -> Result<(GridFunction, GridFunction)> {
    if !Arc::ptr_eq(&f1.grid, &f2.grid) && f1.nodes() != f2.nodes() {
        return input("resolvent inputs live on different grids");
    }
    f1.check_hint(3, "resolvent (f1)")?;
    f2.check_hint(1, "resolvent (f2)")?;
    let grid = f1.grid.clone();
    let kf2 = apply_k(f2);
    let big_f = f1.with_values(
        (0..f1.values.len()).map(|i| f1.values[i] + f1.nodes()[i].powi(2) * kf2.values[i]).collect(),
        f1.parity_hint.min(kf2.parity_hint + 2),
    );
    let (tq, wq) = composite_gauss(16, 16);
    let u: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&rho| {
            let integral: f64 = tq
                .iter()
                .zip(&wq)
                .map(|(&t, &w)| {
                    let s = rho + (1.0 - rho) * t;
                    w * (1.0 - t) * (1.0 + s) * big_f.interpolate(s) / s.powi(4)
                })
                .sum();
            rho.powi(3) / (1.0 + rho).powi(2) * integral
        })
        .collect();
    if u.iter().any(|v| !v.is_finite()) {
        return input("resolvent integral diverges; inputs must vanish faster at the origin");
    }
    let u = GridFunction::new(grid, u, 3);
    let du = apply_d(&u)?;
    let r2du = du.map(du.parity_hint + 2, |r, v| r * r * v);
    let ku = apply_k(&u);
    let k2f2 = apply_k2(f2);
    let u1 = apply_k(&r2du);
    let vals = (0..u1.values.len()).map(|i| u1.values[i] + ku.values[i] - k2f2.values[i]).collect();
    Ok((u1.with_values(vals, 5), du))
}

fn composite_gauss(panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = crate::grid::gauss_nodes(order);
    let mut t = Vec::with_capacity(panels * order);
    let mut wt = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let (a, b) = (p as f64 / panels as f64, (p + 1) as f64 / panels as f64);
        for (xi, wi) in x.iter().zip(&w) {
            t.push(a + 0.5 * (b - a) * (xi + 1.0));
            wt.push(0.5 * (b - a) * wi);
        }
    }
    (t, wt)
}

/// One sample of a linear trajectory.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct LinearSample {
    pub tau: f64,
    pub norm: NormReport,
    /// `‖(1-P)u(τ)‖` when a projection is supplied.
    pub stable: Option<f64>,
    /// Coordinate of `u(τ)` along the symmetry mode.
    pub amplitude: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinearTrace {
    pub with_potential: bool,
    pub samples: Vec<LinearSample>,
}

impl LinearTrace {
    pub fn totals(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.tau, s.norm.total)).collect()
    }

    pub fn stable(&self) -> Vec<(f64, f64)> {
        self.samples.iter().filter_map(|s| s.stable.map(|v| (s.tau, v))).collect()
    }
}

/// Propagator `exp(dτ L)` over one recording interval.
pub fn propagator(gen: &GeneratorMatrix, dtau: f64, with_potential: bool) -> DMatrix<f64> {
    (gen.matrix(with_potential) * dtau).exp()
}

/// Evolves `du/dτ = Lu` (or `L₀u`) with the exact discrete propagator and
/// records norms every `dtau`.
pub fn linear_evolve(
    gen: &GeneratorMatrix,
    projection: Option<&ProjectionData>,
    u0: &DVector<f64>,
    tau_max: f64,
    dtau: f64,
    with_potential: bool,
) -> Result<LinearTrace> {
    if !(dtau > 0.0 && tau_max > 0.0 && dtau <= tau_max) {
        return input(format!("invalid time interval: tau_max = {tau_max}, dtau = {dtau}"));
    }
    if u0.len() != gen.dimension() {
        return input("initial state has the wrong dimension");
    }
    let e = propagator(gen, dtau, with_potential);
    let steps = (tau_max / dtau).round() as usize;
    let n0 = gen.norm(u0);
    let sample = |tau: f64, u: &DVector<f64>| LinearSample {
        tau,
        norm: gen.norm_report(u),
        stable: projection.map(|p| gen.norm(&p.complement(u))),
        amplitude: projection.map(|p| p.amplitude(u)),
    };
    let mut u = u0.clone();
    let mut samples = vec![sample(0.0, &u)];
    for k in 1..=steps {
        u = &e * u;
        let tau = k as f64 * dtau;
        let s = sample(tau, &u);
        if !s.norm.total.is_finite() || s.norm.total > n0 * (2.0 * tau).exp() * 1.01 + 1e-300 {
            return Err(Error::StepSize(format!("norm growth beyond e^(2τ) at τ = {tau}")));
        }
        samples.push(s);
    }
    Ok(LinearTrace { with_potential, samples })
}

/// Least-squares fit of `log(norm)` against `τ`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual of the log fit.
    pub residual: f64,
    /// Standard error of the slope.
    pub slope_std: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub fn fit_rate(trace: &[(f64, f64)], window: (f64, f64)) -> Result<RateFit> {
    let pts: Vec<(f64, f64)> = trace.iter().copied().filter(|(t, _)| *t >= window.0 && *t <= window.1).collect();
    if pts.len() < 2 {
        return Err(Error::Fit(format!("fewer than two samples in window {window:?}")));
    }
    if let Some((t, v)) = pts.iter().find(|(_, v)| !(*v > 0.0)) {
        return Err(Error::Fit(format!("nonpositive norm {v} at τ = {t}")));
    }
    let xy: Vec<(f64, f64)> = pts.iter().map(|&(t, v)| (t, v.ln())).collect();
    let (slope, intercept, residual, slope_std) = least_squares(&xy)?;
    Ok(RateFit { slope, intercept, residual, slope_std, window, samples: pts.len() })
}

/// Straight-line fit `y = a x + b`; returns `(a, b, rms residual, σ_a)`.
pub fn least_squares(xy: &[(f64, f64)]) -> Result<(f64, f64, f64, f64)> {
    let n = xy.len() as f64;
    let mx = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let my = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Fit("degenerate abscissae".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let a = sxy / sxx;
    let b = my - a * mx;
    let ss: f64 = xy.iter().map(|p| (p.1 - a * p.0 - b).powi(2)).sum();
    let rms = (ss / n).sqrt();
    let sa = if xy.len() > 2 { (ss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok((a, b, rms, sa))
}

/// A discrete eigenvalue with its drift under doubling of `N`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct DiscreteEigenvalue {
    pub lambda: Complex64,
    /// Distance to the nearest eigenvalue at `2N`.
    pub drift: f64,
    pub spurious: bool,
}

/// Drift beyond which a discrete eigenvalue is flagged spurious.
pub const SPURIOUS_DRIFT: f64 = 0.05;

/// Eigenvalues with `Re λ > re_min` at `N`, compared against `2N`.
pub fn classify_spectrum(n: usize, re_min: f64) -> Result<Vec<DiscreteEigenvalue>> {
    let coarse = GeneratorMatrix::assemble(n)?.eigenvalues(true);
    let fine = GeneratorMatrix::assemble(2 * n)?.eigenvalues(true);
    Ok(coarse
        .into_iter()
        .filter(|l| l.re > re_min)
        .map(|l| {
            let drift = fine.iter().map(|m| (m - l).norm()).fold(f64::INFINITY, f64::min);
            DiscreteEigenvalue { lambda: l, drift, spurious: drift > SPURIOUS_DRIFT }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetry_mode_is_eigenvector() {
        let gen = GeneratorMatrix::assemble(48).unwrap();
        let g = gen.symmetry_mode();
        let r = &gen.full * &g - &g;
        assert!(gen.norm(&r) < 1e-8 * gen.norm(&g), "{}", gen.norm(&r));
    }

    #[test]
    fn free_part_is_dissipative() {
        let gen = GeneratorMatrix::assemble(24).unwrap();
        assert!(gen.free_numerical_range() <= -1.5 + 1e-10);
    }

    #[test]
    fn exact_exponential_fit() {
        let tr: Vec<(f64, f64)> = (0..20).map(|k| (k as f64 * 0.5, (-0.6 * k as f64 * 0.5).exp())).collect();
        let f = fit_rate(&tr, (0.0, 10.0)).unwrap();
        assert!((f.slope + 0.6).abs() < 1e-12);
    }
}
