//! Closed-form evaluators for the ground state, the blowup family and the
//! functions that appear in its linearization.
//!
//! All rational functions are written over a power of `5 + 3ρ²` with integer
//! coefficients, so that no cancellation occurs near `ρ = 1`.

use serde::Serialize;

use crate::error::{input, Result};

pub mod jet;

pub use jet::Jet;

/// Largest radius accepted by the checked evaluators.
pub const RHO_MAX: f64 = 1.5;

/// Named closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ClosedForm {
    W0,
    W0Prime,
    PsiT,
    PsiTt,
    F,
    FPrime,
    V,
    NTilde,
    G1,
    G2,
    H0,
    GTilde,
}

impl ClosedForm {
    pub const ALL: [ClosedForm; 12] = [
        ClosedForm::W0,
        ClosedForm::W0Prime,
        ClosedForm::PsiT,
        ClosedForm::PsiTt,
        ClosedForm::F,
        ClosedForm::FPrime,
        ClosedForm::V,
        ClosedForm::NTilde,
        ClosedForm::G1,
        ClosedForm::G2,
        ClosedForm::H0,
        ClosedForm::GTilde,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClosedForm::W0 => "W0",
            ClosedForm::W0Prime => "W0_prime",
            ClosedForm::PsiT => "psiT",
            ClosedForm::PsiTt => "psiT_t",
            ClosedForm::F => "F",
            ClosedForm::FPrime => "Fprime",
            ClosedForm::V => "V",
            ClosedForm::NTilde => "Ntilde",
            ClosedForm::G1 => "g1",
            ClosedForm::G2 => "g2",
            ClosedForm::H0 => "h0",
            ClosedForm::GTilde => "gtilde",
        }
    }

    /// Interval of the primary argument. `F` and `F'` take the field value,
    /// `psiT` takes `r`, `Ntilde` takes `ρ` (its first argument is free).
    pub fn domain(self) -> (f64, f64) {
        match self {
            ClosedForm::F | ClosedForm::FPrime => (f64::NEG_INFINITY, f64::INFINITY),
            ClosedForm::PsiT | ClosedForm::PsiTt => (0.0, f64::INFINITY),
            _ => (0.0, RHO_MAX),
        }
    }

    /// Evaluate a single-argument closed form with a domain check.
    ///
    /// `PsiT`, `PsiTt` and `NTilde` need extra arguments; use [`eval_psi_t`]
    /// and [`ntilde`] for those.
    pub fn eval(self, x: f64) -> Result<f64> {
        let (lo, hi) = self.domain();
        if !(x >= lo && x <= hi) {
            return input(format!("{}: argument {x} outside [{lo}, {hi}]", self.name()));
        }
        Ok(match self {
            ClosedForm::W0 => w0(x),
            ClosedForm::W0Prime => w0_prime(x),
            ClosedForm::F => f_nl(x),
            ClosedForm::FPrime => f_prime(x),
            ClosedForm::V => potential(x),
            ClosedForm::G1 => symmetry_mode(x).0,
            ClosedForm::G2 => symmetry_mode(x).1,
            ClosedForm::H0 => h0(x),
            ClosedForm::GTilde => gtilde(x),
            ClosedForm::PsiT | ClosedForm::PsiTt | ClosedForm::NTilde => {
                return input(format!("{} needs more than one argument", self.name()))
            }
        })
    }
}

#[inline]
fn q(rho: f64) -> f64 {
    5.0 + 3.0 * rho * rho
}

/// Ground state `W0(ρ) = (1-ρ²)/(1+3ρ²/5)`.
#[inline]
pub fn w0(rho: f64) -> f64 {
    5.0 * (1.0 - rho * rho) / q(rho)
}

#[inline]
pub fn w0_prime(rho: f64) -> f64 {
    let d = q(rho);
    -80.0 * rho / (d * d)
}

/// `F(ψ) = ψ(ψ+1)(ψ+2)`.
#[inline]
pub fn f_nl(psi: f64) -> f64 {
    psi * (psi + 1.0) * (psi + 2.0)
}

#[inline]
pub fn f_prime(psi: f64) -> f64 {
    3.0 * psi * psi + 6.0 * psi + 2.0
}

/// Potential `V(ρ) = -144(5-ρ²)/(5+3ρ²)²`.
#[inline]
pub fn potential(rho: f64) -> f64 {
    let d = q(rho);
    -144.0 * (5.0 - rho * rho) / (d * d)
}

/// `(ρ⁻¹∂_ρ) V`.
#[inline]
pub fn potential_d1(rho: f64) -> f64 {
    let d = q(rho);
    -288.0 * (3.0 * rho * rho - 35.0) / (d * d * d)
}

/// `(ρ⁻¹∂_ρ)² V`.
#[inline]
pub fn potential_d2(rho: f64) -> f64 {
    let d = q(rho);
    3456.0 * (3.0 * rho * rho - 55.0) / (d * d * d * d)
}

/// Normalized symmetry mode `g = (g1, g2)`.
pub fn symmetry_mode(rho: f64) -> (f64, f64) {
    let r2 = rho * rho;
    let d = q(rho);
    let d3 = d * d * d;
    let g1 = rho * r2 * r2 * (5.0 - r2) / d3;
    let g2 = rho * (125.0 - 50.0 * r2 - 3.0 * r2 * r2) / (d3 * d);
    (g1, g2)
}

/// Symmetry mode in energy variables: `((ρ⁻¹∂_ρ)² g1, g2')`.
pub fn symmetry_mode_energy(rho: f64) -> (f64, f64) {
    let r2 = rho * rho;
    let d = q(rho);
    let d5 = d * d * d * d * d;
    let w1 = rho * (((9.0 * r2 + 345.0) * r2 - 3125.0) * r2 + 1875.0) / d5;
    let w2 = (((27.0 * r2 + 675.0) * r2 - 3375.0) * r2 + 625.0) / d5;
    (w1, w2)
}

/// `h0(ρ) = ρ²/(5+3ρ²)²`, the regular solution of the mode equation at λ = 1.
#[inline]
pub fn h0(rho: f64) -> f64 {
    let d = q(rho);
    rho * rho / (d * d)
}

/// `g̃(ρ) = ρ²(35-3ρ²)/(3(5+3ρ²)³)`.
#[inline]
pub fn gtilde(rho: f64) -> f64 {
    let d = q(rho);
    rho * rho * (35.0 - 3.0 * rho * rho) / (3.0 * d * d * d)
}

/// `Ñ(x,ρ) = 9 W0(ρ) x² + 3 x³`.
#[inline]
pub fn ntilde(x: f64, rho: f64) -> f64 {
    x * x * (9.0 * w0(rho) + 3.0 * x)
}

/// `∂_x Ñ(x,ρ)`.
#[inline]
pub fn ntilde_x(x: f64, rho: f64) -> f64 {
    x * (18.0 * w0(rho) + 9.0 * x)
}

/// `ψ^T(t,r) = W0(r/(T-t)) - 1` and its time derivative.
#[inline]
pub fn psi_t(t: f64, r: f64, big_t: f64) -> (f64, f64) {
    let s = big_t - t;
    let d = 5.0 * s * s + 3.0 * r * r;
    (-8.0 * r * r / d, -80.0 * s * r * r / (d * d))
}

/// Checked version of [`psi_t`].
pub fn eval_psi_t(t: f64, r: f64, big_t: f64) -> Result<(f64, f64)> {
    if !(t < big_t) {
        return input(format!("psiT: need t < T, got t = {t}, T = {big_t}"));
    }
    if !(r >= 0.0) {
        return input(format!("psiT: negative radius {r}"));
    }
    Ok(psi_t(t, r, big_t))
}

/// Self-similar data blocks of `ψ^T` at `t = 0`:
/// `(r³ ψ^T_t(0,r), 𝒟²ψ^T(0,·)(r))`.
pub fn selfsim_blocks(big_t: f64, r: f64) -> (f64, f64) {
    let t2 = big_t * big_t;
    let r2 = r * r;
    let d = 5.0 * t2 + 3.0 * r2;
    let s1 = -80.0 * big_t * r2 * r2 * r / (d * d);
    let s2 = -24.0 * r * (125.0 * t2 * t2 + 50.0 * t2 * r2 + 9.0 * r2 * r2) / (d * d * d);
    (s1, s2)
}

/// Energy-variable form of [`selfsim_blocks`]: `((r⁻¹∂_r)² S1, S2')`.
pub fn selfsim_blocks_energy(big_t: f64, r: f64) -> (f64, f64) {
    let t2 = big_t * big_t;
    let r2 = r * r;
    let d = 5.0 * t2 + 3.0 * r2;
    let d4 = d * d * d * d;
    let w1 = -240.0 * big_t * r * (125.0 * t2 * t2 - 50.0 * t2 * r2 - 3.0 * r2 * r2) / d4;
    let w2 = -24.0
        * (625.0 * t2 * t2 * t2 - 1125.0 * t2 * t2 * r2 - 225.0 * t2 * r2 * r2 - 27.0 * r2 * r2 * r2)
        / d4;
    (w1, w2)
}

/// One row of the identity report.
#[derive(Debug, Clone, Serialize)]
pub struct IdentityCheck {
    pub identity_name: String,
    pub grid_size: usize,
    pub max_abs_error: f64,
}

fn dense_grid(n: usize, lo: f64, hi: f64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| lo + (hi - lo) * (i as f64 + 0.5) / n as f64)
}

fn w0_jet(rho: f64) -> Jet {
    let x = Jet::variable(rho);
    let x2 = x * x;
    (Jet::constant(1.0) - x2) / (Jet::constant(1.0) + x2 * 0.6)
}

/// Unnormalized symmetry mode built directly from `W0` by Taylor-jet
/// differentiation: `(ρ³[ρ g' + g], (ρ⁻¹∂)²(ρ³ g))` with `g = ρ W0'`.
pub fn symmetry_mode_unnormalized(rho: f64) -> (f64, f64) {
    let x = Jet::variable(rho);
    let g = x * w0_jet(rho).derivative();
    let c1 = x * x * x * (x * g.derivative() + g);
    let y = x * x * x * g;
    let dy = y.derivative() / x;
    let d2y = dy.derivative() / x;
    (c1.value(), d2y.value())
}

/// Residual of the wave equation for `ψ^T` at `(t, r)`, with exact
/// derivatives from Taylor jets in `t` and in `r`.
pub fn psi_t_residual_exact(t: f64, r: f64, big_t: f64) -> f64 {
    let psi_of = |tt: Jet, rr: Jet| {
        let s = Jet::constant(big_t) - tt;
        Jet::constant(-8.0) * rr * rr / (s * s * 5.0 + rr * rr * 3.0)
    };
    let in_t = psi_of(Jet::variable(t), Jet::constant(r));
    let in_r = psi_of(Jet::constant(t), Jet::variable(r));
    let psi = in_r.value();
    let psi_tt = in_t.derivative().derivative().value();
    let psi_r = in_r.derivative().value();
    let psi_rr = in_r.derivative().derivative().value();
    psi_tt - psi_rr - 2.0 / r * psi_r + 3.0 / (r * r) * f_nl(psi)
}

/// Same residual with centered second-order finite differences of width `h`.
pub fn psi_t_residual_fd(t: f64, r: f64, big_t: f64, h: f64) -> f64 {
    let p = |tt: f64, rr: f64| psi_t(tt, rr, big_t).0;
    let c = p(t, r);
    let psi_tt = (p(t + h, r) - 2.0 * c + p(t - h, r)) / (h * h);
    let psi_rr = (p(t, r + h) - 2.0 * c + p(t, r - h)) / (h * h);
    let psi_r = (p(t, r + h) - p(t, r - h)) / (2.0 * h);
    psi_tt - psi_rr - 2.0 / r * psi_r + 3.0 / (r * r) * f_nl(c)
}

/// Identity suite over a dense grid of `n` points.
///
/// Every exact identity is reported as a maximum absolute error. The
/// finite-difference residual of `ψ^T` is reported at two stencil widths
/// together with its observed order (`psiT_residual_fd_order`, error against 2).
pub fn identity_suite(n: usize) -> Vec<IdentityCheck> {
    let mut out = Vec::new();
    let mut push = |name: &str, err: f64| {
        out.push(IdentityCheck { identity_name: name.to_string(), grid_size: n, max_abs_error: err })
    };

    let e = dense_grid(n, 0.0, 1.0)
        .map(|r| {
            let lhs = r * r * potential(r);
            let rhs = 3.0 * f_prime(w0(r) - 1.0) - 6.0;
            (lhs - rhs).abs() / rhs.abs().max(1.0)
        })
        .fold(0.0, f64::max);
    push("rho2_V_equals_3Fprime_minus_6", e);

    let e = dense_grid(n, 0.0, 1.0)
        .map(|r| (r * w0_jet(r).derivative().value() + 80.0 * h0(r)).abs())
        .fold(0.0, f64::max);
    push("rho_W0prime_plus_80_h0", e);

    let e = dense_grid(n, 0.0, 1.0)
        .map(|r| (w0_prime(r) - w0_jet(r).derivative().value()).abs())
        .fold(0.0, f64::max);
    push("W0prime_closed_form", e);

    let (mut e1, mut e2) = (0.0f64, 0.0f64);
    for r in dense_grid(n, 0.0, 1.0) {
        let (u1, u2) = symmetry_mode_unnormalized(r);
        let (g1, g2) = symmetry_mode(r);
        e1 = e1.max((g1 + u1 / 240.0).abs());
        e2 = e2.max((g2 + u2 / 240.0).abs());
    }
    push("g1_normalization", e1);
    push("g2_normalization", e2);

    let e = dense_grid(n, 0.0, 1.0)
        .map(|r| {
            let (w1, _) = symmetry_mode_energy(r);
            let x = Jet::variable(r);
            let d = Jet::constant(5.0) + x * x * 3.0;
            let g1 = x.powi(5) * (Jet::constant(5.0) - x * x) / (d * d * d);
            let dg = g1.derivative() / x;
            (w1 - (dg.derivative() / x).value()).abs()
        })
        .fold(0.0, f64::max);
    push("g1_energy_form", e);

    let e = dense_grid(n, 0.05, 0.95)
        .flat_map(|r| [0.0, 0.3, 0.6].map(move |t| (t, r)))
        .map(|(t, r)| psi_t_residual_exact(t, r, 1.0).abs())
        .fold(0.0, f64::max);
    push("psiT_residual_exact", e);

    let (h1, h2) = (4e-3, 2e-3);
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for r in dense_grid(n.min(64), 0.1, 0.9) {
        r1 = r1.max(psi_t_residual_fd(0.3, r, 1.0, h1).abs());
        r2 = r2.max(psi_t_residual_fd(0.3, r, 1.0, h2).abs());
    }
    push("psiT_residual_fd_h4e-3", r1);
    push("psiT_residual_fd_h2e-3", r2);
    push("psiT_residual_fd_order", ((r1 / r2).log2() - 2.0).abs());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tabulated_values() {
        assert_eq!(w0(0.0), 1.0);
        assert_eq!(w0(1.0), 0.0);
        assert!((w0(0.5) - 15.0 / 23.0).abs() < 1e-15);
        assert!((potential(0.0) + 28.8).abs() < 1e-13);
        assert!((potential(1.0) + 9.0).abs() < 1e-13);
        assert!((potential(0.5) + 10944.0 / 529.0).abs() < 1e-13);
        let (a, b) = symmetry_mode(1.0);
        assert!((a - 1.0 / 128.0).abs() < 1e-16 && (b - 9.0 / 512.0).abs() < 1e-16);
        assert_eq!(symmetry_mode(0.0), (0.0, 0.0));
        assert!((gtilde(1.0) - 1.0 / 48.0).abs() < 1e-16);
        assert_eq!(ntilde(0.0, 0.3), 0.0);
    }

    #[test]
    fn checked_domain() {
        assert!(ClosedForm::W0.eval(-0.1).is_err());
        assert!(ClosedForm::W0.eval(1.4).is_ok());
        assert!(eval_psi_t(1.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn suite_is_tight() {
        for c in identity_suite(400) {
            assert!(c.max_abs_error <= 1e-11 || c.identity_name.starts_with("psiT_residual_fd"), "{c:?}");
        }
    }
}
