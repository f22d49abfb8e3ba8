//! The closed family `c r^beta (a + b ln r)` that fundamental solutions of
//! `(-Delta)^{alpha/2}` live in, together with its symbolic Laplacian.
//!
//! The family is closed under the radial Laplacian:
//!
//! ```text
//! Delta [ r^beta (a + b ln r) ]
//!   = r^{beta-2} [ a k + b (2 beta + n - 2) + b k ln r ],   k = beta (beta + n - 2),
//! ```
//!
//! so iterated Laplacians of a calibrated solution are exact, no numerical
//! differentiation involved.

/// `c * r^beta * (a + b ln r)`; a pure power has `a = 1, b = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialPowerLog {
    pub c: f64,
    pub beta: f64,
    pub a: f64,
    pub b: f64,
}

impl RadialPowerLog {
    pub fn power(c: f64, beta: f64) -> Self {
        Self { c, beta, a: 1.0, b: 0.0 }
    }

    pub fn is_zero(&self) -> bool {
        self.c == 0.0 || (self.a == 0.0 && self.b == 0.0)
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let base = self.c * r.powf(self.beta);
        if self.b == 0.0 {
            base * self.a
        } else {
            base * (self.a + self.b * r.ln())
        }
    }

    /// Symbolic radial Laplacian in dimension `dim`.
    pub fn laplacian(&self, dim: usize) -> RadialPowerLog {
        let n = dim as f64;
        let k = self.beta * (self.beta + n - 2.0);
        RadialPowerLog {
            c: self.c,
            beta: self.beta - 2.0,
            a: self.a * k + self.b * (2.0 * self.beta + n - 2.0),
            b: self.b * k,
        }
    }
}
