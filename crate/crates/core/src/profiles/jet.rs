use std::ops::{Add, Div, Mul, Neg, Sub};

const LEN: usize = 8;

/// Truncated Taylor series `Σ c_k h^k` about a fixed point.
///
/// Used as an exact differentiation oracle for the closed forms: each call to
/// [`Jet::derivative`] consumes one coefficient, so up to `LEN - 1`
/// derivatives are exact.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    c: [f64; LEN],
}

impl Jet {
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = v;
        Jet { c }
    }

    /// The independent variable at `x`.
    pub fn variable(x: f64) -> Self {
        let mut c = [0.0; LEN];
        c[0] = x;
        c[1] = 1.0;
        Jet { c }
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn derivative(&self) -> Self {
        let mut c = [0.0; LEN];
        for k in 0..LEN - 1 {
            c[k] = (k + 1) as f64 * self.c[k + 1];
        }
        Jet { c }
    }

    pub fn powi(self, n: u32) -> Self {
        (0..n).fold(Jet::constant(1.0), |acc, _| acc * self)
    }

    pub fn exp(self) -> Self {
        let mut c = [0.0; LEN];
        c[0] = self.c[0].exp();
        for k in 1..LEN {
            let s: f64 = (1..=k).map(|j| j as f64 * self.c[j] * c[k - j]).sum();
            c[k] = s / k as f64;
        }
        Jet { c }
    }

    /// `n`-th derivative at the expansion point.
    pub fn nth_derivative(&self, n: usize) -> f64 {
        (0..n).fold(*self, |acc, _| acc.derivative()).value()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(mut self, o: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] += o.c[k];
        }
        self
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(mut self, o: Jet) -> Jet {
        for k in 0..LEN {
            self.c[k] -= o.c[k];
        }
        self
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(mut self) -> Jet {
        for v in &mut self.c {
            *v = -*v;
        }
        self
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for i in 0..LEN {
            for j in 0..LEN - i {
                c[i + j] += self.c[i] * o.c[j];
            }
        }
        Jet { c }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(mut self, s: f64) -> Jet {
        for v in &mut self.c {
            *v *= s;
        }
        self
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        let mut c = [0.0; LEN];
        for k in 0..LEN {
            let mut s = self.c[k];
            for j in 1..=k {
                s -= o.c[j] * c[k - j];
            }
            c[k] = s / o.c[0];
        }
        Jet { c }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn derivatives_of_rational() {
        let x = Jet::variable(0.7);
        let f = Jet::constant(1.0) / (Jet::constant(1.0) + x * x);
        let d = 1.0 + 0.49;
        assert!((f.derivative().value() + 1.4 / (d * d)).abs() < 1e-15);
        let f2 = 2.0 * (3.0 * 0.49 - 1.0) / (d * d * d);
        assert!((f.derivative().derivative().value() - f2).abs() < 1e-14);
    }

    #[test]
    fn exp_derivatives() {
        let x = Jet::variable(0.3);
        let f = (x * x * -2.0).exp();
        let e = (-0.18f64).exp();
        assert!((f.nth_derivative(1) - -1.2 * e).abs() < 1e-15);
        assert!((f.nth_derivative(2) - (1.44 - 4.0) * e).abs() < 1e-14);
    }
}
