//! Frobenius series of the mode equation at its regular singular points.
//!
//! The equation is multiplied through so that it reads
//! `z² q2(z) u'' + z q1(z) u' + q0(z) u = 0` with polynomial `q_k`, where
//! `z = ρ` at the centre and `z = 1 - ρ` at the light cone.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{input, Error, Result};

type Poly = Vec<Complex64>;

fn c(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

fn pmul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![c(0.0); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn padd(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![c(0.0); a.len().max(b.len())];
    for (i, x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, y) in b.iter().enumerate() {
        out[i] += y;
    }
    out
}

fn pscale(a: &Poly, s: Complex64) -> Poly {
    a.iter().map(|x| x * s).collect()
}

fn real(coeffs: &[f64]) -> Poly {
    coeffs.iter().map(|&x| c(x)).collect()
}

/// Which singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Endpoint {
    /// `ρ = 0`, indices `{-3, 2}`.
    Centre,
    /// `ρ = 1`, indices `{0, 1 - λ}`.
    Cone,
}

impl Endpoint {
    pub fn rho(self) -> f64 {
        match self {
            Endpoint::Centre => 0.0,
            Endpoint::Cone => 1.0,
        }
    }
}

/// Polynomial coefficients `(q2, q1, q0)` in the local variable.
pub fn coefficient_polys(lambda: Complex64, endpoint: Endpoint) -> [Poly; 3] {
    let l1 = lambda * (lambda + 1.0);
    match endpoint {
        Endpoint::Centre => {
            let p = real(&[25.0, 0.0, 30.0, 0.0, 9.0]);
            let one_minus = real(&[1.0, 0.0, -1.0]);
            let z2 = real(&[0.0, 0.0, 1.0]);
            let q2 = pscale(&pmul(&one_minus, &p), c(-1.0));
            let q1 = padd(&pscale(&pmul(&one_minus, &p), c(-2.0)), &pscale(&pmul(&z2, &p), 2.0 * lambda));
            let v = real(&[0.0, 0.0, -720.0, 0.0, 144.0]);
            let q0 = padd(&padd(&pscale(&pmul(&z2, &p), l1), &pscale(&p, c(6.0))), &v);
            [q2, q1, q0]
        }
        Endpoint::Cone => {
            // ρ = 1 - z.
            let rho = real(&[1.0, -1.0]);
            let rho2 = pmul(&rho, &rho);
            let p = {
                let q = padd(&real(&[5.0]), &pscale(&rho2, c(3.0)));
                pmul(&q, &q)
            };
            let two_minus_z = real(&[2.0, -1.0]);
            let q2 = pscale(&pmul(&pmul(&two_minus_z, &rho2), &p), c(-1.0));
            let one_minus_rho2 = padd(&real(&[1.0]), &pscale(&rho2, c(-1.0)));
            let t = padd(
                &pscale(&pmul(&rho, &one_minus_rho2), c(2.0)),
                &pscale(&pmul(&rho, &rho2), -2.0 * lambda),
            );
            let q1 = pmul(&t, &p);
            let v = pscale(&pmul(&rho2, &padd(&real(&[5.0]), &pscale(&rho2, c(-1.0)))), c(-144.0));
            let inner = padd(&padd(&pscale(&pmul(&rho2, &p), l1), &pscale(&p, c(6.0))), &v);
            let q0 = pmul(&real(&[0.0, 1.0]), &inner);
            [q2, q1, q0]
        }
    }
}

/// Coefficients `c_0 = 1, c_1, ..., c_m` of `u = z^s Σ c_k z^k`.
///
/// Fails with [`Error::DegenerateLambda`] if the indicial factor vanishes at
/// some order while the right-hand side does not (a logarithmic case).
pub fn series_coefficients(lambda: Complex64, endpoint: Endpoint, s: Complex64, m: usize) -> Result<Vec<Complex64>> {
    let [q2, q1, q0] = coefficient_polys(lambda, endpoint);
    let get = |p: &Poly, j: usize| if j < p.len() { p[j] } else { c(0.0) };
    let deg = q2.len().max(q1.len()).max(q0.len()) - 1;
    let indicial = |r: Complex64| q2[0] * r * (r - 1.0) + q1[0] * r + q0[0];
    let mut coeffs = vec![c(1.0)];
    for n in 1..=m {
        let mut rhs = c(0.0);
        for j in 1..=n.min(deg) {
            let r = s + (n - j) as f64;
            rhs -= coeffs[n - j] * (get(&q2, j) * r * (r - 1.0) + get(&q1, j) * r + get(&q0, j));
        }
        let ind = indicial(s + n as f64);
        let scale = q2[0].norm() * (n as f64 + s.norm()).powi(2);
        if ind.norm() <= 1e-13 * scale {
            let mag: f64 = coeffs.iter().map(|x| x.norm()).fold(0.0, f64::max);
            if rhs.norm() <= 1e-13 * scale * mag {
                coeffs.push(c(0.0));
                continue;
            }
            return Err(Error::DegenerateLambda { order: n });
        }
        coeffs.push(rhs / ind);
    }
    Ok(coeffs)
}

/// Truncated Frobenius series of the solution that is analytic at a
/// singular point, with its step-off distance.
#[derive(Debug, Clone, Serialize)]
pub struct FrobeniusSeed {
    pub endpoint: Endpoint,
    pub index: Complex64,
    pub order: usize,
    pub coeffs: Vec<Complex64>,
    pub radius: f64,
    /// Relative residual of the truncated series in the equation at the
    /// step-off point.
    pub residual: f64,
}

impl FrobeniusSeed {
    /// `(u, du/dz, d²u/dz²)` at local distance `z`.
    pub fn eval_local(&self, z: f64) -> (Complex64, Complex64, Complex64) {
        if z == 0.0 {
            return self.eval_at_point();
        }
        let (mut u, mut du, mut ddu) = (c(0.0), c(0.0), c(0.0));
        let zs = Complex64::new(z, 0.0).powc(self.index);
        for (k, ck) in self.coeffs.iter().enumerate().rev() {
            let e = self.index + k as f64;
            u = u * z + ck;
            du = du * z + ck * e;
            ddu = ddu * z + ck * e * (e - 1.0);
        }
        (u * zs, du * zs / z, ddu * zs / (z * z))
    }

    fn eval_at_point(&self) -> (Complex64, Complex64, Complex64) {
        let mut out = [c(0.0); 3];
        for (k, ck) in self.coeffs.iter().enumerate() {
            let e = self.index + k as f64;
            for (d, o) in out.iter_mut().enumerate() {
                if (e - d as f64).norm() < 1e-12 {
                    *o = ck * [1.0, 1.0, 2.0][d];
                }
            }
        }
        (out[0], out[1], out[2])
    }

    /// Step-off point in `ρ` and the state `(u, du/dρ)` there.
    pub fn initial_state(&self) -> (f64, [Complex64; 2]) {
        let (u, du, _) = self.eval_local(self.radius);
        match self.endpoint {
            Endpoint::Centre => (self.radius, [u, du]),
            Endpoint::Cone => (1.0 - self.radius, [u, -du]),
        }
    }
}

/// Frobenius seed of the analytic solution.
///
/// At `ρ = 0` this is the index-2 branch. At `ρ = 1` it is the index-0
/// branch; for `λ = 1 - k` with an integer `k ≥ 1` where that branch carries
/// a logarithm, the analytic solution is the index-`k` branch and is
/// returned instead.
pub fn frobenius_seed(lambda: Complex64, endpoint: Endpoint, m: usize, delta: f64) -> Result<FrobeniusSeed> {
    if m < 10 {
        return input(format!("series order {m} below 10"));
    }
    if !(delta > 0.0 && delta <= 0.1) {
        return input(format!("step-off distance {delta} outside (0, 0.1]"));
    }
    let (index, coeffs) = match endpoint {
        Endpoint::Centre => (c(2.0), series_coefficients(lambda, endpoint, c(2.0), m)?),
        Endpoint::Cone => match series_coefficients(lambda, endpoint, c(0.0), m) {
            Ok(cs) => (c(0.0), cs),
            Err(Error::DegenerateLambda { order }) => {
                let s = c(order as f64);
                (s, series_coefficients(lambda, endpoint, s, m)?)
            }
            Err(e) => return Err(e),
        },
    };
    let mut seed = FrobeniusSeed { endpoint, index, order: m, coeffs, radius: delta, residual: 0.0 };
    seed.residual = series_residual(&seed, lambda);
    Ok(seed)
}

/// Relative residual of the truncated series in the multiplied equation.
pub fn series_residual(seed: &FrobeniusSeed, lambda: Complex64) -> f64 {
    let [q2, q1, q0] = coefficient_polys(lambda, seed.endpoint);
    let z = seed.radius;
    let ev = |p: &Poly| p.iter().rev().fold(c(0.0), |acc, x| acc * z + x);
    let (u, du, ddu) = seed.eval_local(z);
    let t2 = ev(&q2) * z * z * ddu;
    let t1 = ev(&q1) * z * du;
    let t0 = ev(&q0) * u;
    (t2 + t1 + t0).norm() / (t2.norm() + t1.norm() + t0.norm()).max(1e-300)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicial_roots() {
        for &(ep, roots) in &[(Endpoint::Centre, [-3.0, 2.0]), (Endpoint::Cone, [0.0, 0.7])] {
            let lambda = c(0.3);
            let [q2, q1, q0] = coefficient_polys(lambda, ep);
            for r in roots {
                let v = q2[0] * r * (r - 1.0) + q1[0] * r + q0[0];
                assert!(v.norm() < 1e-12, "{ep:?} {r}");
            }
        }
    }

    #[test]
    fn logarithmic_cases() {
        for (l, k) in [(0.0, 1), (-1.0, 2)] {
            let e = series_coefficients(c(l), Endpoint::Cone, c(0.0), 20).unwrap_err();
            assert_eq!(e, Error::DegenerateLambda { order: k });
        }
        let s = frobenius_seed(c(0.0), Endpoint::Cone, 25, 0.05).unwrap();
        assert_eq!(s.index, c(1.0));
        assert!(s.residual < 1e-12);
    }
}
