//! Radial grids and the discrete calculus on them.
//!
//! Three kinds are provided:
//!
//! * [`GridKind::Parity`]: Legendre–Gauss–Lobatto collocation on `[-R, R]`
//!   with an even number of nodes, folded onto the positive half by parity.
//!   No node sits at the origin and the outer endpoint `R` is a node. This is
//!   the grid used for all dynamics in similarity variables.
//! * [`GridKind::Panels`]: composite Gauss–Legendre panels on `[0, R]`,
//!   clustered at both ends and geometrically graded towards `0`. Used for
//!   quadrature of functions with no parity structure or with singular
//!   weights.
//! * [`GridKind::Staggered`]: uniform cell-centred nodes `(j + 1/2) h` with
//!   fourth-order finite differences. Used by the physical-space solver.
//!
//! Parity information enters through [`Parity`]: a function of definite
//! parity is reflected across the origin when a stencil or an interpolant
//! needs values at negative radius.

use nalgebra::DMatrix;

/// Parity of a radial function under `ρ ↦ -ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    /// Parity of `ρ^p`.
    pub fn of_power(p: u32) -> Self {
        if p % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn flip(self) -> Self {
        match self {
            Parity::Even => Parity::Odd,
            Parity::Odd => Parity::Even,
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    Parity,
    Panels,
    Staggered,
}

/// Folded collocation matrices for one parity.
#[derive(Debug, Clone)]
pub struct Folded {
    /// Derivative of a function with this parity.
    pub diff: DMatrix<f64>,
    /// `∫_0^ρ f` for a function with this parity.
    pub cumulative: DMatrix<f64>,
}

#[derive(Debug, Clone)]
struct ParityData {
    full_nodes: Vec<f64>,
    bary: Vec<f64>,
    even: Folded,
    odd: Folded,
}

#[derive(Debug, Clone)]
struct PanelData {
    breaks: Vec<f64>,
    ref_nodes: Vec<f64>,
    ref_bary: Vec<f64>,
    ref_weights: Vec<f64>,
    ref_diff: DMatrix<f64>,
    ref_cumulative: DMatrix<f64>,
}

/// An ordered set of nodes in `(0, R]` with its discrete calculus.
#[derive(Debug, Clone)]
pub struct Grid {
    kind: GridKind,
    r_max: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    parity: Option<ParityData>,
    panels: Option<PanelData>,
}

/// Values `P_0(x), ..., P_n(x)` of the Legendre polynomials.
pub fn legendre_all(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        p[k] = ((2 * k - 1) as f64 * x * p[k - 1] - (k - 1) as f64 * p[k - 2]) / k as f64;
    }
    p
}

/// Legendre–Gauss–Lobatto nodes (ascending) and weights on `[-1, 1]`.
pub fn lgl_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(m >= 2);
    let n = m - 1;
    let mut x: Vec<f64> = (0..m).map(|j| -(std::f64::consts::PI * j as f64 / n as f64).cos()).collect();
    for _ in 0..100 {
        let mut change = 0.0f64;
        for xi in x.iter_mut().take(m - 1).skip(1) {
            let p = legendre_all(n, *xi);
            let dx = (*xi * p[n] - p[n - 1]) / (m as f64 * p[n]);
            *xi -= dx;
            change = change.max(dx.abs());
        }
        if change < 1e-16 {
            break;
        }
    }
    x[0] = -1.0;
    x[n] = 1.0;
    // Enforce exact symmetry.
    for j in 0..m / 2 {
        let s = 0.5 * (x[m - 1 - j] - x[j]);
        x[j] = -s;
        x[m - 1 - j] = s;
    }
    if m % 2 == 1 {
        x[m / 2] = 0.0;
    }
    let w = x
        .iter()
        .map(|&xi| {
            let pn = legendre_all(n, xi)[n];
            2.0 / ((n * m) as f64 * pn * pn)
        })
        .collect();
    (x, w)
}

/// Gauss–Legendre nodes (ascending) and weights on `[-1, 1]`.
pub fn gauss_nodes(m: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; m];
    let mut w = vec![0.0; m];
    for i in 0..m {
        let mut z = -(std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp;
        for _ in 0..100 {
            let p = legendre_all(m, z);
            dp = m as f64 * (z * p[m] - p[m - 1]) / (z * z - 1.0);
            let dz = p[m] / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let p = legendre_all(m, z);
        dp = m as f64 * (z * p[m] - p[m - 1]) / (z * z - 1.0);
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Barycentric weights for arbitrary distinct nodes, scaled to avoid overflow.
pub fn barycentric_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let span = x[n - 1] - x[0];
    let c = 4.0 / span;
    let mut w = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                w[j] *= c * (x[j] - x[k]);
            }
        }
        w[j] = 1.0 / w[j];
    }
    let m = w.iter().fold(0.0f64, |a, b| a.max(b.abs()));
    w.iter().map(|v| v / m).collect()
}

/// Differentiation matrix of the polynomial interpolant at `x`.
pub fn diff_matrix(x: &[f64], bary: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let mut d = DMatrix::zeros(n, n);
    for i in 0..n {
        let mut s = 0.0;
        for j in 0..n {
            if i != j {
                let v = bary[j] / bary[i] / (x[i] - x[j]);
                d[(i, j)] = v;
                s += v;
            }
        }
        d[(i, i)] = -s;
    }
    d
}

/// `(Qf)(x_i) = ∫_{-1}^{x_i} p(s) ds` for the interpolant `p` through a
/// Gauss-type node set with weights `w`, using discrete Legendre orthogonality.
/// `lobatto` selects the top normalization for Gauss–Lobatto nodes.
fn cumulative_matrix(x: &[f64], w: &[f64], lobatto: bool, anchor: f64) -> DMatrix<f64> {
    let m = x.len();
    let n = m - 1;
    let pv: Vec<Vec<f64>> = x.iter().map(|&xi| legendre_all(n + 1, xi)).collect();
    let prim = |p: &[f64], k: usize, xx: f64| -> f64 {
        if k == 0 {
            xx + 1.0
        } else {
            (p[k + 1] - p[k - 1]) / (2 * k + 1) as f64
        }
    };
    let pa = legendre_all(n + 1, anchor);
    let mut q = DMatrix::zeros(m, m);
    for k in 0..=n {
        let gamma = if lobatto && k == n { 2.0 / n as f64 } else { 2.0 / (2 * k + 1) as f64 };
        let a0 = prim(&pa, k, anchor);
        for i in 0..m {
            let pi = prim(&pv[i], k, x[i]) - a0;
            if pi == 0.0 {
                continue;
            }
            for j in 0..m {
                q[(i, j)] += pi * w[j] * pv[j][k] / gamma;
            }
        }
    }
    q
}

/// Barycentric interpolation at `t`.
pub fn barycentric_eval(x: &[f64], bary: &[f64], f: &[f64], t: f64) -> f64 {
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..x.len() {
        let d = t - x[j];
        if d == 0.0 {
            return f[j];
        }
        let c = bary[j] / d;
        num += c * f[j];
        den += c;
    }
    num / den
}

/// Weights `c_j` with `∫_a^b p = Σ c_j f(x_j)` for the interpolant through `x`.
pub fn lagrange_integral_weights(x: &[f64], a: f64, b: f64) -> Vec<f64> {
    let (gx, gw) = gauss_nodes(x.len().max(2));
    let bary = barycentric_weights(x);
    let mut c = vec![0.0; x.len()];
    for (&g, &wg) in gx.iter().zip(&gw) {
        let t = 0.5 * (a + b) + 0.5 * (b - a) * g;
        let l = lagrange_basis(x, &bary, t);
        for j in 0..x.len() {
            c[j] += 0.5 * (b - a) * wg * l[j];
        }
    }
    c
}

fn lagrange_basis(x: &[f64], bary: &[f64], t: f64) -> Vec<f64> {
    if let Some(j) = x.iter().position(|&xj| xj == t) {
        let mut l = vec![0.0; x.len()];
        l[j] = 1.0;
        return l;
    }
    let c: Vec<f64> = x.iter().zip(bary).map(|(&xj, &bj)| bj / (t - xj)).collect();
    let s: f64 = c.iter().sum();
    c.iter().map(|v| v / s).collect()
}

impl Grid {
    /// Folded Legendre–Gauss–Lobatto grid with `n` positive nodes on `(0, R]`.
    pub fn parity(n: usize, r_max: f64) -> Grid {
        assert!(n >= 2, "parity grid needs at least two nodes");
        let m = 2 * n;
        let (x, w) = lgl_nodes(m);
        let bary: Vec<f64> = (0..m).map(|j| if j % 2 == 0 { 1.0 } else { -1.0 } * w[j].sqrt()).collect();
        let d = diff_matrix(&x, &bary);
        let q = cumulative_matrix(&x, &w, true, 0.0);
        let fold = |a: &DMatrix<f64>, s: f64, scale: f64| {
            DMatrix::from_fn(n, n, |i, j| scale * (a[(n + i, n + j)] + s * a[(n + i, n - 1 - j)]))
        };
        let even = Folded { diff: fold(&d, 1.0, 1.0 / r_max), cumulative: fold(&q, 1.0, r_max) };
        let odd = Folded { diff: fold(&d, -1.0, 1.0 / r_max), cumulative: fold(&q, -1.0, r_max) };
        Grid {
            kind: GridKind::Parity,
            r_max,
            nodes: x[n..].iter().map(|v| v * r_max).collect(),
            weights: w[n..].iter().map(|v| v * r_max).collect(),
            parity: Some(ParityData { full_nodes: x.iter().map(|v| v * r_max).collect(), bary, even, odd }),
            panels: None,
        }
    }

    /// Composite Gauss–Legendre grid on `(0, R)`: `n_panels` panels clustered
    /// at both ends, the first of which is further split into `n_graded`
    /// panels with ratio 1/4 towards the origin.
    pub fn panels(n_panels: usize, order: usize, n_graded: usize, r_max: f64) -> Grid {
        assert!(n_panels >= 1 && order >= 2);
        let mut breaks: Vec<f64> = (0..=n_panels)
            .map(|k| 0.5 * r_max * (1.0 - (std::f64::consts::PI * k as f64 / n_panels as f64).cos()))
            .collect();
        let b1 = breaks[1];
        let mut graded: Vec<f64> = (0..n_graded).map(|k| b1 * 0.25f64.powi((n_graded - k) as i32)).collect();
        graded.insert(0, 0.0);
        breaks.splice(0..1, graded);
        let (gx, gw) = gauss_nodes(order);
        let ref_bary = barycentric_weights(&gx);
        let ref_diff = diff_matrix(&gx, &ref_bary);
        let ref_cumulative = cumulative_matrix(&gx, &gw, false, -1.0);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for win in breaks.windows(2) {
            let (a, b) = (win[0], win[1]);
            for (&g, &wg) in gx.iter().zip(&gw) {
                nodes.push(0.5 * (a + b) + 0.5 * (b - a) * g);
                weights.push(0.5 * (b - a) * wg);
            }
        }
        Grid {
            kind: GridKind::Panels,
            r_max,
            nodes,
            weights,
            parity: None,
            panels: Some(PanelData { breaks, ref_nodes: gx, ref_weights: gw, ref_bary, ref_diff, ref_cumulative }),
        }
    }

    /// Uniform cell-centred grid with `n` nodes on `(0, R)`.
    pub fn staggered(n: usize, r_max: f64) -> Grid {
        assert!(n >= 8, "staggered grid needs at least eight nodes");
        let h = r_max / n as f64;
        let nodes: Vec<f64> = (0..n).map(|j| (j as f64 + 0.5) * h).collect();
        let mut grid = Grid { kind: GridKind::Staggered, r_max, nodes, weights: vec![], parity: None, panels: None };
        // Quadrature weights: cumulative integral to R of unit vectors, with
        // one-sided stencils next to the origin so that the rule does not
        // depend on parity.
        let mut w = vec![0.0; n];
        for (j, wj) in w.iter_mut().enumerate() {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            *wj = grid.staggered_integral_to_end(&e, None);
        }
        grid.weights = w;
        grid
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Quadrature weights for `∫_0^R`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Uniform spacing of a staggered grid.
    pub fn spacing(&self) -> Option<f64> {
        (self.kind == GridKind::Staggered).then(|| self.r_max / self.nodes.len() as f64)
    }

    /// Folded matrices of a parity grid.
    pub fn folded(&self, p: Parity) -> Option<&Folded> {
        self.parity.as_ref().map(|d| match p {
            Parity::Even => &d.even,
            Parity::Odd => &d.odd,
        })
    }

    pub fn integrate(&self, f: &[f64]) -> f64 {
        f.iter().zip(&self.weights).map(|(a, b)| a * b).sum()
    }

    pub fn derivative(&self, f: &[f64], p: Parity) -> Vec<f64> {
        match self.kind {
            GridKind::Parity => {
                let d = &self.folded(p).unwrap().diff;
                matvec(d, f)
            }
            GridKind::Panels => self.panel_apply(f, |pd| &pd.ref_diff, true),
            GridKind::Staggered => self.staggered_derivative(f, p),
        }
    }

    /// `∫_0^{ρ_i} f` at every node.
    pub fn cumulative(&self, f: &[f64], p: Parity) -> Vec<f64> {
        match self.kind {
            GridKind::Parity => matvec(&self.folded(p).unwrap().cumulative, f),
            GridKind::Panels => self.panel_apply(f, |pd| &pd.ref_cumulative, false),
            GridKind::Staggered => self.staggered_cumulative(f, p),
        }
    }

    /// Interpolant of `f` (of parity `p`) at `t ∈ [0, R]`.
    pub fn interpolate(&self, f: &[f64], p: Parity, t: f64) -> f64 {
        match self.kind {
            GridKind::Parity => {
                let pd = self.parity.as_ref().unwrap();
                let n = self.nodes.len();
                let full: Vec<f64> = (0..2 * n)
                    .map(|i| if i < n { p.sign() * f[n - 1 - i] } else { f[i - n] })
                    .collect();
                barycentric_eval(&pd.full_nodes, &pd.bary, &full, t)
            }
            GridKind::Panels => {
                let pd = self.panels.as_ref().unwrap();
                let k = pd.breaks.partition_point(|&b| b <= t).clamp(1, pd.breaks.len() - 1) - 1;
                let (a, b) = (pd.breaks[k], pd.breaks[k + 1]);
                let m = pd.ref_nodes.len();
                let s = (2.0 * t - a - b) / (b - a);
                barycentric_eval(&pd.ref_nodes, &pd.ref_bary, &f[k * m..(k + 1) * m], s)
            }
            GridKind::Staggered => {
                let (idx, x) = self.staggered_stencil(t, 6);
                let vals: Vec<f64> = idx.iter().map(|&i| self.staggered_value(f, p, i)).collect();
                let bary = barycentric_weights(&x);
                barycentric_eval(&x, &bary, &vals, t)
            }
        }
    }

    /// `∫_0^{upper} f` for `upper ∈ [0, R]`.
    pub fn integrate_upto(&self, f: &[f64], p: Parity, upper: f64) -> f64 {
        if upper >= self.r_max {
            return self.integrate(f);
        }
        match self.kind {
            GridKind::Staggered => {
                let h = self.spacing().unwrap();
                let n = self.nodes.len();
                // Whole cells [0, x_0], [x_0, x_1], ... then a partial piece.
                let c = self.staggered_cumulative(f, p);
                let j = (((upper / h) - 0.5).floor().max(-1.0)) as isize;
                let (base, a) = if j < 0 { (0.0, 0.0) } else { (c[j as usize], self.nodes[j as usize]) };
                let lo = (j - 1).clamp(-2, n as isize - 4);
                let pts: Vec<isize> = (lo..lo + 4).collect();
                let x: Vec<f64> = pts.iter().map(|&i| (i as f64 + 0.5) * h).collect();
                let v: Vec<f64> = pts.iter().map(|&i| self.staggered_value(f, p, i)).collect();
                let wts = lagrange_integral_weights(&x, a, upper);
                base + wts.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>()
            }
            _ => {
                let c = self.cumulative(f, p);
                self.interpolate(&c, p.flip(), upper)
            }
        }
    }

    fn panel_apply(&self, f: &[f64], which: impl Fn(&PanelData) -> &DMatrix<f64>, diff: bool) -> Vec<f64> {
        let pd = self.panels.as_ref().unwrap();
        let m = pd.ref_nodes.len();
        let mat = which(pd);
        let mut out = vec![0.0; f.len()];
        let mut offset = 0.0;
        for (k, win) in pd.breaks.windows(2).enumerate() {
            let half = 0.5 * (win[1] - win[0]);
            let local = &f[k * m..(k + 1) * m];
            for i in 0..m {
                let s: f64 = (0..m).map(|j| mat[(i, j)] * local[j]).sum();
                out[k * m + i] = if diff { s / half } else { offset + s * half };
            }
            if !diff {
                offset += half * pd.ref_weights.iter().zip(local).map(|(a, b)| a * b).sum::<f64>();
            }
        }
        out
    }

    /// Value at staggered index `i`, which may be a reflected ghost (`i < 0`).
    fn staggered_value(&self, f: &[f64], p: Parity, i: isize) -> f64 {
        if i >= 0 {
            f[i as usize]
        } else {
            p.sign() * f[(-i - 1) as usize]
        }
    }

    /// `k` consecutive staggered indices around `t`, shifted inside the grid
    /// at the outer end, and their abscissae.
    fn staggered_stencil(&self, t: f64, k: usize) -> (Vec<isize>, Vec<f64>) {
        let h = self.spacing().unwrap();
        let n = self.nodes.len() as isize;
        let c = (t / h - 0.5).floor() as isize;
        let lo = (c - k as isize / 2 + 1).min(n - k as isize).max(-(k as isize));
        let idx: Vec<isize> = (lo..lo + k as isize).collect();
        let x = idx.iter().map(|&i| (i as f64 + 0.5) * h).collect();
        (idx, x)
    }

    fn staggered_derivative(&self, f: &[f64], p: Parity) -> Vec<f64> {
        let h = self.spacing().unwrap();
        let n = self.nodes.len();
        let v = |i: isize| self.staggered_value(f, p, i);
        let xs: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let edge = diff_matrix(&xs, &barycentric_weights(&xs));
        let mut out = vec![0.0; n];
        for i in 0..n {
            let ii = i as isize;
            out[i] = if i + 2 < n {
                (v(ii - 2) - 8.0 * v(ii - 1) + 8.0 * v(ii + 1) - v(ii + 2)) / (12.0 * h)
            } else {
                // One-sided five-point stencil at the outer end.
                let row = 4 - (n - 1 - i);
                (0..5).map(|k| edge[(row, k)] * f[n - 5 + k]).sum::<f64>() / h
            };
        }
        out
    }

    fn staggered_cumulative(&self, f: &[f64], p: Parity) -> Vec<f64> {
        self.staggered_cumulative_impl(f, Some(p))
    }

    /// With `p = None` the cells next to the origin use one-sided stencils.
    fn staggered_cumulative_impl(&self, f: &[f64], p: Option<Parity>) -> Vec<f64> {
        let h = self.spacing().unwrap();
        let n = self.nodes.len();
        let v = |i: isize| self.staggered_value(f, p.unwrap_or(Parity::Even), i);
        let mut out = vec![0.0; n];
        let mut first = 0;
        if p.is_some() {
            // First half cell from the cubic through x_{-2..1}.
            let x0: Vec<f64> = (-2..2).map(|i| (i as f64 + 0.5) * h).collect();
            let w0 = lagrange_integral_weights(&x0, 0.0, 0.5 * h);
            out[0] = (0..4).map(|k| w0[k] * v(k as isize - 2)).sum();
        } else {
            let x0 = &self.nodes[..4];
            let w0 = lagrange_integral_weights(x0, 0.0, 0.5 * h);
            let w1 = lagrange_integral_weights(x0, x0[0], x0[1]);
            out[0] = (0..4).map(|k| w0[k] * f[k]).sum();
            out[1] = out[0] + (0..4).map(|k| w1[k] * f[k]).sum::<f64>();
            first = 1;
        }
        for j in first..n - 1 {
            let jj = j as isize;
            let seg = if j + 2 < n {
                h * (-v(jj - 1) + 13.0 * v(jj) + 13.0 * v(jj + 1) - v(jj + 2)) / 24.0
            } else {
                h * (v(jj - 2) - 5.0 * v(jj - 1) + 19.0 * v(jj) + 9.0 * v(jj + 1)) / 24.0
            };
            out[j + 1] = out[j] + seg;
        }
        out
    }

    fn staggered_integral_to_end(&self, f: &[f64], p: Option<Parity>) -> f64 {
        let h = self.spacing().unwrap();
        let n = self.nodes.len();
        let c = self.staggered_cumulative_impl(f, p);
        let x: Vec<f64> = (n - 4..n).map(|i| (i as f64 + 0.5) * h).collect();
        let w = lagrange_integral_weights(&x, self.nodes[n - 1], self.r_max);
        c[n - 1] + (0..4).map(|k| w[k] * f[n - 4 + k]).sum::<f64>()
    }
}

pub(crate) fn matvec(a: &DMatrix<f64>, x: &[f64]) -> Vec<f64> {
    let n = a.nrows();
    let mut y = vec![0.0; n];
    for j in 0..a.ncols() {
        let xj = x[j];
        if xj == 0.0 {
            continue;
        }
        let col = a.column(j);
        for i in 0..n {
            y[i] += col[i] * xj;
        }
    }
    y
}

#[cfg(test)]
mod tests {
    use super::*;

    fn max_err(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn lgl_weights_sum_and_symmetry() {
        let (x, w) = lgl_nodes(40);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        for j in 0..20 {
            assert_eq!(x[j], -x[39 - j]);
        }
    }

    #[test]
    fn parity_grid_calculus() {
        let g = Grid::parity(24, 1.5);
        let r = g.nodes().to_vec();
        let f: Vec<f64> = r.iter().map(|x| (x * x).cos()).collect();
        let df: Vec<f64> = r.iter().map(|x| -2.0 * x * (x * x).sin()).collect();
        assert!(max_err(&g.derivative(&f, Parity::Even), &df) < 1e-10);
        let s: Vec<f64> = r.iter().map(|x| x.sin()).collect();
        let cs: Vec<f64> = r.iter().map(|x| 1.0 - x.cos()).collect();
        assert!(max_err(&g.cumulative(&s, Parity::Odd), &cs) < 1e-13);
        let v = g.interpolate(&s, Parity::Odd, 0.37);
        assert!((v - 0.37f64.sin()).abs() < 1e-13);
        let total = g.integrate(&f);
        let alt = g.integrate_upto(&f, Parity::Even, 1.5);
        assert!((total - alt).abs() < 1e-14);
        let part = g.integrate_upto(&s, Parity::Odd, 0.8);
        assert!((part - (1.0 - 0.8f64.cos())).abs() < 1e-13);
    }

    #[test]
    fn panel_grid_calculus() {
        let g = Grid::panels(8, 12, 6, 1.0);
        let r = g.nodes().to_vec();
        let f: Vec<f64> = r.iter().map(|x| x.exp()).collect();
        assert!(max_err(&g.derivative(&f, Parity::Even), &f) < 1e-8);
        let c: Vec<f64> = r.iter().map(|x| x.exp() - 1.0).collect();
        assert!(max_err(&g.cumulative(&f, Parity::Even), &c) < 1e-13);
        assert!((g.integrate(&f) - (1f64.exp() - 1.0)).abs() < 1e-13);
        assert!((g.interpolate(&f, Parity::Even, 0.123) - 0.123f64.exp()).abs() < 1e-13);
        let sq: Vec<f64> = r.iter().map(|x| x.sqrt()).collect();
        assert!((g.integrate(&sq) - 2.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn staggered_grid_calculus() {
        let g = Grid::staggered(400, 1.0);
        let r = g.nodes().to_vec();
        let f: Vec<f64> = r.iter().map(|x| (x * x).cos()).collect();
        let df: Vec<f64> = r.iter().map(|x| -2.0 * x * (x * x).sin()).collect();
        assert!(max_err(&g.derivative(&f, Parity::Even), &df) < 1e-8);
        let s: Vec<f64> = r.iter().map(|x| x.sin()).collect();
        let cs: Vec<f64> = r.iter().map(|x| 1.0 - x.cos()).collect();
        assert!(max_err(&g.cumulative(&s, Parity::Odd), &cs) < 1e-11);
        assert!((g.integrate(&s) - (1.0 - 1f64.cos())).abs() < 1e-11);
        assert!((g.integrate_upto(&s, Parity::Odd, 0.4321) - (1.0 - 0.4321f64.cos())).abs() < 1e-11);
        assert!((g.interpolate(&s, Parity::Odd, 0.001) - 0.001f64.sin()).abs() < 1e-12);
    }
}
