//! Closed-form radial solutions of the scalar singular Liouville equation
//! Δu + |x|^β e^u = 0:
//!
//! u(r) = log μ − 2 log(1 + κ r^{β+2}),   κ = μ / (2 (β+2)²).
//!
//! Every member of the family has energy ∫_0^∞ r^{1+β} e^u dr = 2(2+β),
//! independent of μ.

use crate::error::{Error, Result};

/// One member of the radial family, parametrized by μ = e^{u(0)}.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarSolution {
    mu: f64,
    beta: f64,
}

impl ScalarSolution {
    pub fn new(mu: f64, beta: f64) -> Result<Self> {
        if !(mu > 0.0) || !mu.is_finite() {
            return Err(Error::InvalidArgument(format!("mu must be positive (got {mu})")));
        }
        if !(beta > -2.0) || !beta.is_finite() {
            return Err(Error::BetaOutOfRange { index: 0, value: beta });
        }
        Ok(Self { mu, beta })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn kappa(&self) -> f64 {
        let g = self.beta + 2.0;
        self.mu / (2.0 * g * g)
    }

    /// `(u(r), r u'(r))`.
    pub fn eval(&self, r: f64) -> (f64, f64) {
        assert!(r >= 0.0, "radius must be nonnegative");
        if r == 0.0 {
            return (self.mu.ln(), 0.0);
        }
        self.eval_log(r.ln())
    }

    /// `(ũ(t), dũ/dt)` at `r = e^t`, stable for very small and very large r.
    pub fn eval_log(&self, t: f64) -> (f64, f64) {
        let g = self.beta + 2.0;
        let log_x = self.kappa().ln() + g * t;
        let log1p_x = if log_x > 0.0 {
            log_x + (-log_x).exp().ln_1p()
        } else {
            log_x.exp().ln_1p()
        };
        let u = self.mu.ln() - 2.0 * log1p_x;
        // x / (1 + x) = 1 / (1 + e^{-log x})
        let ratio = 1.0 / (1.0 + (-log_x).exp());
        (u, -2.0 * g * ratio)
    }

    /// Asymptotic slope m = 2(2+β).
    pub fn slope(&self) -> f64 {
        2.0 * (2.0 + self.beta)
    }

    /// Asymptotic intercept: u(r) = −m log r + c + o(1).
    pub fn intercept(&self) -> f64 {
        self.mu.ln() - 2.0 * self.kappa().ln()
    }
}

/// The unique positive root 2(2+β) of 2(2+β)σ − σ² = 0.
pub fn forced_energy(beta: f64) -> f64 {
    2.0 * (2.0 + beta)
}
