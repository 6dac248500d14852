//! Adaptive Dormand–Prince 5(4) integrator for small complex systems.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type State = [Complex64; 2];

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Tolerances and step limits.
#[derive(Debug, Clone, Copy)]
pub struct Tolerance {
    pub rtol: f64,
    pub max_steps: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rtol: 1e-12, max_steps: 200_000 }
    }
}

fn norm(y: &State) -> f64 {
    (y[0].norm_sqr() + y[1].norm_sqr()).sqrt()
}

/// Integrates `y' = f(x, y)` from `x0` to `x1` (either direction). The error
/// is measured relative to the Euclidean norm of the state, which makes the
/// control invariant under rescaling of the solution.
///
/// `h` carries the step size between calls; pass `0.0` for an automatic start.
pub fn integrate(
    f: impl Fn(f64, &State) -> State,
    x0: f64,
    x1: f64,
    y0: State,
    tol: Tolerance,
    h: &mut f64,
) -> Result<State> {
    let span = x1 - x0;
    if span == 0.0 {
        return Ok(y0);
    }
    let dir = span.signum();
    let mut x = x0;
    let mut y = y0;
    let mut step = if *h == 0.0 { 1e-3 * span.abs() } else { h.abs().min(span.abs()) };
    let mut k = [[Complex64::new(0.0, 0.0); 2]; 7];
    k[0] = f(x, &y);
    let hmin = 1e-14 * span.abs().max(x0.abs()).max(1.0);
    for _ in 0..tol.max_steps {
        let remaining = (x1 - x) * dir;
        if remaining <= 0.0 {
            *h = step;
            return Ok(y);
        }
        let last = step >= remaining;
        let hs = if last { remaining } else { step } * dir;
        for s in 1..7 {
            let mut ys = y;
            for j in 0..s {
                let a = A[s][j];
                if a != 0.0 {
                    ys[0] += k[j][0] * (a * hs);
                    ys[1] += k[j][1] * (a * hs);
                }
            }
            k[s] = f(x + C[s] * hs, &ys);
        }
        let mut yn = y;
        let mut err = [Complex64::new(0.0, 0.0); 2];
        for s in 0..7 {
            yn[0] += k[s][0] * (B[s] * hs);
            yn[1] += k[s][1] * (B[s] * hs);
            err[0] += k[s][0] * (E[s] * hs);
            err[1] += k[s][1] * (E[s] * hs);
        }
        let scale = tol.rtol * norm(&y).max(norm(&yn)).max(1e-300);
        let e = norm(&err) / scale;
        if !e.is_finite() {
            return Err(Error::Integration { rho: x, reason: "non-finite state".into() });
        }
        if e <= 1.0 {
            x = if last { x1 } else { x + hs };
            y = yn;
            k[0] = k[6];
        }
        let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
        if !(last && e <= 1.0) {
            step = hs.abs() * fac;
        }
        if step < hmin {
            return Err(Error::Integration {
                rho: x,
                reason: "step size underflow; increase the step-off distance from the singular point".into(),
            });
        }
    }
    Err(Error::Integration { rho: x, reason: format!("exceeded {} steps", tol.max_steps) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator() {
        let w = Complex64::new(3.0, 0.5);
        let f = |_x: f64, y: &State| [y[1], -w * w * y[0]];
        let mut h = 0.0;
        let y = integrate(f, 0.0, 2.0, [Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)], Tolerance::default(), &mut h)
            .unwrap();
        let exact = (w * 2.0).cos();
        assert!((y[0] - exact).norm() < 1e-10 * exact.norm().max(1.0));
        let back = integrate(f, 2.0, 0.0, y, Tolerance::default(), &mut h).unwrap();
        assert!((back[0] - 1.0).norm() < 1e-10);
    }
}
