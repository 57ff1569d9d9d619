#![allow(dead_code)]

use liouville::radial::ProblemSpec;
use liouville::{CouplingMatrix, SingularityExponents};

pub fn spec(a: &[&[f64]], beta: &[f64]) -> ProblemSpec {
    let rows: Vec<Vec<f64>> = a.iter().map(|r| r.to_vec()).collect();
    ProblemSpec::new(
        CouplingMatrix::new(&rows).unwrap(),
        SingularityExponents::new(beta.to_vec()).unwrap(),
    )
    .unwrap()
}

/// Closed-form radial solution of Δu + a r^β e^u = 0 with u(0) = log μ,
/// written out independently of the library:
/// u = log μ − 2 log(1 + a μ r^γ / (2γ²)), r u' = −2γ x/(1+x).
pub fn exact(a: f64, mu: f64, beta: f64, r: f64) -> (f64, f64) {
    let g = 2.0 + beta;
    let x = a * mu * r.powf(g) / (2.0 * g * g);
    (mu.ln() - 2.0 * x.ln_1p(), -2.0 * g * x / (1.0 + x))
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
