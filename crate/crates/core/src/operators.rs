//! Integral and differential operators on radial grid functions, the
//! weighted norms of the problem, and Hardy-type bound checks.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{input, Result};
use crate::grid::{Grid, Parity};
use crate::profiles;

/// Samples of a radial function with the expected power `ρ^p` at the origin.
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: Arc<Grid>,
    pub values: Vec<f64>,
    pub parity_hint: u32,
}

impl GridFunction {
    pub fn new(grid: Arc<Grid>, values: Vec<f64>, parity_hint: u32) -> Self {
        assert_eq!(grid.len(), values.len(), "values do not match grid");
        GridFunction { grid, values, parity_hint }
    }

    pub fn from_fn(grid: &Arc<Grid>, parity_hint: u32, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().iter().map(|&r| f(r)).collect();
        GridFunction { grid: grid.clone(), values, parity_hint }
    }

    pub fn zeros(grid: &Arc<Grid>, parity_hint: u32) -> Self {
        GridFunction { grid: grid.clone(), values: vec![0.0; grid.len()], parity_hint }
    }

    pub fn parity(&self) -> Parity {
        Parity::of_power(self.parity_hint)
    }

    pub fn nodes(&self) -> &[f64] {
        self.grid.nodes()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Same grid, new values and hint.
    pub fn with_values(&self, values: Vec<f64>, parity_hint: u32) -> Self {
        GridFunction { grid: self.grid.clone(), values, parity_hint }
    }

    /// Pointwise map `v ↦ f(ρ, v)`.
    pub fn map(&self, parity_hint: u32, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = self.nodes().iter().zip(&self.values).map(|(&r, &v)| f(r, v)).collect();
        self.with_values(values, parity_hint)
    }

    pub fn derivative(&self) -> Self {
        let hint = if self.parity_hint == 0 { 1 } else { self.parity_hint - 1 };
        self.with_values(self.grid.derivative(&self.values, self.parity()), hint)
    }

    pub fn interpolate(&self, t: f64) -> f64 {
        self.grid.interpolate(&self.values, self.parity(), t)
    }

    pub fn integrate(&self) -> f64 {
        self.grid.integrate(&self.values)
    }

    /// `‖f‖_{L²(0,R)}`.
    pub fn l2_norm(&self) -> f64 {
        self.grid.integrate(&self.values.iter().map(|v| v * v).collect::<Vec<_>>()).sqrt()
    }

    /// Checks that `f/ρ^p` stays bounded on the three smallest nodes.
    ///
    /// A function that behaves like a lower power than declared makes
    /// `|f|/ρ^p` grow towards the origin by at least the node ratio, which
    /// is what this detects.
    pub fn check_hint(&self, min_hint: u32, what: &str) -> Result<()> {
        if self.parity_hint < min_hint {
            return input(format!("{what}: needs O(ρ^{min_hint}) at the origin, got parity hint {}", self.parity_hint));
        }
        if self.values.len() < 3 {
            return Ok(());
        }
        let scale = self.max_abs();
        if scale == 0.0 || !scale.is_finite() {
            return if scale == 0.0 { Ok(()) } else { input(format!("{what}: non-finite values")) };
        }
        let r = self.nodes();
        let q: Vec<f64> = (0..3).map(|i| self.values[i].abs() / r[i].powi(self.parity_hint as i32)).collect();
        let small = self.values[..3].iter().all(|v| v.abs() <= 1e-10 * scale);
        if !small && q[0] > 3.0 * q[2] && q[0] > q[1] {
            return input(format!(
                "{what}: values are not O(ρ^{}) at the origin (|f|/ρ^p = {:.3e}, {:.3e}, {:.3e})",
                self.parity_hint, q[0], q[1], q[2]
            ));
        }
        Ok(())
    }
}

/// Norms of a pair `(u1, u2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NormReport {
    /// `‖u1‖₁ = ‖D²u1‖_{L²}`.
    pub norm1: f64,
    /// `‖u2‖₂ = ‖u2'‖_{L²}`.
    pub norm2: f64,
    pub total: f64,
    /// `ℰ(R)` norm of the physical pair reconstructed from `(u1, u2)`.
    pub energy_r: f64,
}

impl NormReport {
    pub fn from_parts(norm1: f64, norm2: f64, energy_r: f64) -> Self {
        NormReport { norm1, norm2, total: norm1.hypot(norm2), energy_r }
    }
}

/// `Kf(ρ) = ∫_0^ρ s f(s) ds`.
pub fn apply_k(f: &GridFunction) -> GridFunction {
    let sf = f.map(f.parity_hint + 1, |r, v| r * v);
    f.with_values(f.grid.cumulative(&sf.values, sf.parity()), f.parity_hint + 2)
}

pub fn apply_k2(f: &GridFunction) -> GridFunction {
    apply_k(&apply_k(f))
}

/// `Au = ρ⁻³ K²u`.
pub fn apply_a(u: &GridFunction) -> Result<GridFunction> {
    u.check_hint(1, "A")?;
    let k2 = apply_k2(u);
    Ok(k2.map(u.parity_hint + 1, |r, v| v / (r * r * r)))
}

/// `Df = ρ⁻¹ ∂_ρ f`.
pub fn apply_d(f: &GridFunction) -> Result<GridFunction> {
    let p = f.parity_hint;
    if p % 2 == 1 && p < 3 {
        return input("D: an odd function must be O(ρ³) for f'/ρ to be finite");
    }
    let d = f.derivative();
    Ok(d.map(p.saturating_sub(2), |r, v| v / r))
}

/// `𝒟²f = r f'' + 5 f' + 3 f / r`.
pub fn apply_d2_weighted(f: &GridFunction) -> Result<GridFunction> {
    f.check_hint(1, "D2 weighted")?;
    let d1 = f.derivative();
    let d2 = d1.derivative();
    let vals = (0..f.values.len())
        .map(|i| {
            let r = f.nodes()[i];
            r * d2.values[i] + 5.0 * d1.values[i] + 3.0 * f.values[i] / r
        })
        .collect();
    Ok(f.with_values(vals, f.parity_hint - 1))
}

/// `φ̂ = r⁻¹∂_r[r⁻¹∂_r(r³φ)]`.
pub fn hat_transform(phi: &GridFunction) -> Result<GridFunction> {
    phi.check_hint(2, "hat transform")?;
    let r3 = phi.map(phi.parity_hint + 3, |r, v| r * r * r * v);
    apply_d(&apply_d(&r3)?)
}

/// Pair norm `(‖D²u1‖², ‖u2'‖²)` together with the `ℰ(R)` norm of the
/// physical pair `(ρ⁻³K²u2, ρ⁻³u1)`, which must agree with the total.
pub fn pair_norm(u1: &GridFunction, u2: &GridFunction) -> Result<NormReport> {
    u1.check_hint(2, "pair norm (u1)")?;
    u2.check_hint(1, "pair norm (u2)")?;
    let w1 = apply_d(&apply_d(u1)?)?;
    let w2 = u2.derivative();
    let (n1, n2) = (w1.l2_norm(), w2.l2_norm());
    let energy = if u1.parity_hint >= 4 {
        let f = apply_a(u2)?;
        let g = u1.map(u1.parity_hint - 3, |r, v| v / (r * r * r));
        energy_norm(&f, &g, u1.grid.r_max())?
    } else {
        n1.hypot(n2)
    };
    Ok(NormReport::from_parts(n1, n2, energy))
}

/// `ℰ(R)` norm with both integrands written out literally:
/// `∫_0^R (r f''' + 6f'' + 3f'/r - 3f/r²)² + (r g'' + 5g' + 3g/r)² dr`.
pub fn energy_norm(f: &GridFunction, g: &GridFunction, r_upper: f64) -> Result<f64> {
    f.check_hint(2, "energy norm (f)")?;
    g.check_hint(1, "energy norm (g)")?;
    if !(r_upper > 0.0 && r_upper <= f.grid.r_max() * (1.0 + 1e-14)) {
        return input(format!("energy norm: R = {r_upper} outside (0, {}]", f.grid.r_max()));
    }
    let f1 = f.derivative();
    let f2 = f1.derivative();
    let f3 = f2.derivative();
    let g1 = g.derivative();
    let g2 = g1.derivative();
    let integrand: Vec<f64> = (0..f.values.len())
        .map(|i| {
            let r = f.nodes()[i];
            let a = r * f3.values[i] + 6.0 * f2.values[i] + 3.0 * f1.values[i] / r - 3.0 * f.values[i] / (r * r);
            let b = r * g2.values[i] + 5.0 * g1.values[i] + 3.0 * g.values[i] / r;
            a * a + b * b
        })
        .collect();
    Ok(f.grid.integrate_upto(&integrand, Parity::Even, r_upper).max(0.0).sqrt())
}

/// `ℰ(R)` norm of `(r²a, r²b)` for even `a, b`, from the expanded integrands
/// `(15a + 33ra' + 12r²a'' + r³a''')² + (15rb + 9r²b' + r³b'')²`. These avoid
/// the cancellations of [`energy_norm`] near the origin.
pub fn energy_norm_reduced(a: &GridFunction, b: &GridFunction, r_upper: f64) -> Result<f64> {
    if a.parity() != Parity::Even || b.parity() != Parity::Even {
        return input("reduced energy norm: a and b must be even");
    }
    if !(r_upper > 0.0 && r_upper <= a.grid.r_max() * (1.0 + 1e-14)) {
        return input(format!("energy norm: R = {r_upper} outside (0, {}]", a.grid.r_max()));
    }
    let a1 = a.derivative();
    let a2 = a1.derivative();
    let a3 = a2.derivative();
    let b1 = b.derivative();
    let b2 = b1.derivative();
    let integrand: Vec<f64> = (0..a.values.len())
        .map(|i| {
            let r = a.nodes()[i];
            let r2 = r * r;
            let x = 15.0 * a.values[i] + 33.0 * r * a1.values[i] + 12.0 * r2 * a2.values[i] + r2 * r * a3.values[i];
            let y = r * (15.0 * b.values[i] + 9.0 * r * b1.values[i] + r2 * b2.values[i]);
            x * x + y * y
        })
        .collect();
    Ok(a.grid.integrate_upto(&integrand, Parity::Even, r_upper).max(0.0).sqrt())
}

/// Both sides of `∫ u²/ρ^α ≤ (2/(α-1))² ∫ (u')²/ρ^{α-2}`.
pub fn hardy_check(u: &GridFunction, alpha: f64) -> (f64, f64) {
    let du = u.derivative();
    let r = u.nodes();
    let lhs: Vec<f64> = (0..r.len()).map(|i| u.values[i].powi(2) / r[i].powf(alpha)).collect();
    let rhs: Vec<f64> = (0..r.len()).map(|i| du.values[i].powi(2) / r[i].powf(alpha - 2.0)).collect();
    let c = 2.0 / (alpha - 1.0);
    (u.grid.integrate(&lhs), c * c * u.grid.integrate(&rhs))
}

/// First component of the nonlinearity, `-ρ Ñ(A u2, ρ)`.
pub fn nonlinear_term(u2: &GridFunction) -> Result<GridFunction> {
    let x = apply_a(u2)?;
    Ok(x.map(2 * x.parity_hint + 1, |r, v| -r * profiles::ntilde(v, r)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pg(n: usize) -> Arc<Grid> {
        Arc::new(Grid::parity(n, 1.0))
    }

    fn close(f: &GridFunction, exact: impl Fn(f64) -> f64, tol: f64) {
        for (&r, &v) in f.nodes().iter().zip(&f.values) {
            assert!((v - exact(r)).abs() <= tol, "at {r}: {v} vs {}", exact(r));
        }
    }

    #[test]
    fn monomials() {
        let g = pg(20);
        close(&apply_k(&GridFunction::from_fn(&g, 0, |_| 1.0)), |r| r * r / 2.0, 1e-14);
        close(&apply_k(&GridFunction::from_fn(&g, 1, |r| r)), |r| r.powi(3) / 3.0, 1e-14);
        close(&apply_k2(&GridFunction::from_fn(&g, 2, |r| r * r)), |r| r.powi(6) / 24.0, 1e-14);
        close(&apply_a(&GridFunction::from_fn(&g, 1, |r| r)).unwrap(), |r| r * r / 15.0, 1e-12);
        close(&apply_d2_weighted(&GridFunction::from_fn(&g, 2, |r| r * r)).unwrap(), |r| 15.0 * r, 1e-10);
        close(&apply_d2_weighted(&GridFunction::from_fn(&g, 1, |r| r)).unwrap(), |_| 8.0, 1e-10);
        close(&apply_d2_weighted(&GridFunction::from_fn(&g, 3, |r| r.powi(3))).unwrap(), |r| 24.0 * r * r, 1e-10);
        close(&hat_transform(&GridFunction::from_fn(&g, 2, |r| r * r)).unwrap(), |r| 15.0 * r, 1e-9);
    }

    #[test]
    fn pair_norm_monomials() {
        let g = pg(20);
        let z = |h| GridFunction::zeros(&g, h);
        let n = pair_norm(&GridFunction::from_fn(&g, 4, |r| r.powi(4)), &z(1)).unwrap();
        assert!((n.norm1 * n.norm1 - 64.0).abs() < 1e-9 && n.norm2 == 0.0);
        let n = pair_norm(&z(5), &GridFunction::from_fn(&g, 1, |r| r)).unwrap();
        assert!((n.norm2 * n.norm2 - 1.0).abs() < 1e-12 && n.norm1 == 0.0);
    }

    #[test]
    fn reduced_energy_norm_matches_literal() {
        let g = pg(32);
        let a = GridFunction::from_fn(&g, 0, |r| (1.0 + r * r).recip());
        let b = GridFunction::from_fn(&g, 0, |r| (-r * r).exp());
        let f = a.map(2, |r, v| r * r * v);
        let h = b.map(2, |r, v| r * r * v);
        for upper in [0.4, 1.0] {
            let lit = energy_norm(&f, &h, upper).unwrap();
            let red = energy_norm_reduced(&a, &b, upper).unwrap();
            assert!((lit - red).abs() < 1e-10 * red, "{lit} {red}");
        }
    }

    #[test]
    fn hint_violations() {
        let g = pg(32);
        let one = GridFunction::from_fn(&g, 1, |_| 1.0);
        assert!(apply_a(&one).is_err());
        assert!(apply_d2_weighted(&GridFunction::from_fn(&g, 0, |_| 1.0)).is_err());
        assert!(hat_transform(&GridFunction::from_fn(&g, 1, |r| r)).is_err());
    }

    #[test]
    fn hardy_monomial() {
        let g = Arc::new(Grid::panels(8, 12, 10, 1.0));
        let (l, r) = hardy_check(&GridFunction::from_fn(&g, 2, |r| r * r), 2.0);
        assert!((l - 1.0 / 3.0).abs() < 1e-13 && (r - 16.0 / 3.0).abs() < 1e-12);
        assert_eq!(hardy_check(&GridFunction::zeros(&g, 2), 3.0), (0.0, 0.0));
    }
}
