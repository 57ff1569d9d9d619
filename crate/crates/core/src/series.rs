//! Generalized power series near the singular point r = 0.
//!
//! A term is `coef · r^p` with `p = base + Σ_j k_j γ_j`, where `γ_j = 2 + β_j`
//! and `k` is a multi-index. The Picard operator of the radial system maps
//! such a monomial to another one of the same form, so the iteration can be
//! carried out exactly on coefficients; truncating at total degree `|k| ≤ K`
//! after `K` iterations gives the solution to order `q^{K+1}`, where `q` is
//! the contraction ratio.

use std::collections::BTreeMap;

/// Multi-index keyed series with a common exponent offset.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Series {
    base: f64,
    terms: BTreeMap<Vec<u8>, f64>,
}

fn degree(k: &[u8]) -> usize {
    k.iter().map(|&d| d as usize).sum()
}

impl Series {
    pub fn zero(base: f64) -> Self {
        Self {
            base,
            terms: BTreeMap::new(),
        }
    }

    /// `value · r^base`.
    pub fn monomial(n: usize, base: f64, value: f64) -> Self {
        let mut s = Self::zero(base);
        if value != 0.0 {
            s.terms.insert(vec![0; n], value);
        }
        s
    }

    pub fn exponent(&self, k: &[u8], gammas: &[f64]) -> f64 {
        self.base + k.iter().zip(gammas).map(|(&d, g)| d as f64 * g).sum::<f64>()
    }

    fn add_term(&mut self, k: Vec<u8>, v: f64) {
        *self.terms.entry(k).or_insert(0.0) += v;
    }

    pub fn scale(&mut self, s: f64) {
        for v in self.terms.values_mut() {
            *v *= s;
        }
    }

    /// `self += s · other`; offsets must agree.
    pub fn axpy(&mut self, s: f64, other: &Series) {
        debug_assert_eq!(self.base, other.base);
        for (k, v) in &other.terms {
            self.add_term(k.clone(), s * v);
        }
    }

    /// Product truncated at total degree `max_degree`.
    pub fn mul(&self, other: &Series, max_degree: usize) -> Series {
        let mut out = Series::zero(self.base + other.base);
        for (ka, va) in &self.terms {
            let da = degree(ka);
            for (kb, vb) in &other.terms {
                if da + degree(kb) > max_degree {
                    continue;
                }
                let k: Vec<u8> = ka.iter().zip(kb).map(|(x, y)| x + y).collect();
                out.add_term(k, va * vb);
            }
        }
        out
    }

    /// `exp(self)` for a zero-offset series without constant term, truncated
    /// at total degree `max_degree`.
    pub fn exp(&self, n: usize, max_degree: usize) -> Series {
        debug_assert_eq!(self.base, 0.0);
        let mut out = Series::monomial(n, 0.0, 1.0);
        let mut power = Series::monomial(n, 0.0, 1.0);
        let mut factorial = 1.0;
        for m in 1..=max_degree {
            power = power.mul(self, max_degree);
            factorial *= m as f64;
            out.axpy(1.0 / factorial, &power);
        }
        out
    }

    /// Inverse of `φ ↦ φ'' + φ'/r − mode²/r² φ` applied to `r^{γ_j − 2} · self`:
    /// the monomial `r^{p+γ_j−2}` maps to `r^{p+γ_j} / ((p+γ_j)² − mode²)`.
    pub fn kernel(&self, j: usize, gammas: &[f64], mode: f64) -> Series {
        let mut out = Series::zero(self.base);
        for (k, v) in &self.terms {
            let p = self.exponent(k, gammas) + gammas[j];
            let mut kk = k.clone();
            kk[j] += 1;
            out.add_term(kk, v / (p * p - mode * mode));
        }
        out
    }

    /// The series of `r ↦ self(δ r)`, given `log δ`.
    pub fn dilate(&self, log_delta: f64, gammas: &[f64]) -> Series {
        let mut out = self.clone();
        for (k, v) in out.terms.iter_mut() {
            *v *= (self.exponent(k, gammas) * log_delta).exp();
        }
        out
    }

    /// Value at `r = e^t`.
    pub fn eval(&self, t: f64, gammas: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| v * (self.exponent(k, gammas) * t).exp())
            .sum()
    }

    /// `r d/dr` at `r = e^t`.
    pub fn eval_log_derivative(&self, t: f64, gammas: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                let p = self.exponent(k, gammas);
                v * p * (p * t).exp()
            })
            .sum()
    }

    /// `∫_0^r s^{γ_i − 1} · self(s) ds` at `r = e^t`.
    pub fn weighted_integral(&self, t: f64, gammas: &[f64], i: usize) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                let q = self.exponent(k, gammas) + gammas[i];
                v * (q * t).exp() / q
            })
            .sum()
    }

    /// `∫_0^r log s · s^{γ_i − 1} · self(s) ds` at `r = e^t`.
    pub fn weighted_log_integral(&self, t: f64, gammas: &[f64], i: usize) -> f64 {
        self.terms
            .iter()
            .map(|(k, v)| {
                let q = self.exponent(k, gammas) + gammas[i];
                v * (q * t).exp() * (t / q - 1.0 / (q * q))
            })
            .sum()
    }

    /// Sum of |terms| of exactly the given degree, evaluated at `r = e^t`.
    pub fn degree_magnitude(&self, t: f64, gammas: &[f64], d: usize) -> f64 {
        self.terms
            .iter()
            .filter(|(k, _)| degree(k) == d)
            .map(|(k, v)| (v * (self.exponent(k, gammas) * t).exp()).abs())
            .sum()
    }
}

/// Symbolic Picard iteration for the radial system with u(0) = c.
///
/// Returns the non-constant parts `s_i` (so `u_i = c_i + s_i`) and the
/// density series `e^{u_i}` (including the `e^{c_i}` factor).
pub(crate) fn picard_radial(
    a: &dyn Fn(usize, usize) -> f64,
    gammas: &[f64],
    c: &[f64],
    iterations: usize,
) -> (Vec<Series>, Vec<Series>) {
    let n = c.len();
    let mut s: Vec<Series> = vec![Series::zero(0.0); n];
    for _ in 0..iterations {
        let dens = density(&s, c, iterations);
        s = (0..n)
            .map(|i| {
                let mut acc = Series::zero(0.0);
                for (j, dj) in dens.iter().enumerate() {
                    let aij = a(i, j);
                    if aij != 0.0 {
                        acc.axpy(-aij, &dj.kernel(j, gammas, 0.0));
                    }
                }
                acc
            })
            .collect();
    }
    let dens = density(&s, c, iterations);
    (s, dens)
}

fn density(s: &[Series], c: &[f64], max_degree: usize) -> Vec<Series> {
    let n = c.len();
    s.iter()
        .zip(c)
        .map(|(si, ci)| {
            let mut e = si.exp(n, max_degree);
            e.scale(ci.exp());
            e
        })
        .collect()
}

/// Symbolic Picard iteration for the linearized system at Fourier mode
/// `mode`, with regular behaviour `φ_i ≈ leading_i r^mode` at the origin.
pub(crate) fn picard_linear(
    a: &dyn Fn(usize, usize) -> f64,
    gammas: &[f64],
    densities: &[Series],
    leading: &[f64],
    mode: u32,
    iterations: usize,
) -> Vec<Series> {
    let n = leading.len();
    let base = mode as f64;
    let seed: Vec<Series> = leading
        .iter()
        .map(|&l| Series::monomial(n, base, l))
        .collect();
    let mut phi = seed.clone();
    for _ in 0..iterations {
        let sources: Vec<Series> = (0..n)
            .map(|j| densities[j].mul(&phi[j], iterations))
            .collect();
        phi = (0..n)
            .map(|i| {
                let mut acc = seed[i].clone();
                for (j, src) in sources.iter().enumerate() {
                    let aij = a(i, j);
                    if aij != 0.0 {
                        acc.axpy(-aij, &src.kernel(j, gammas, base));
                    }
                }
                acc
            })
            .collect();
    }
    phi
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_liouville_series_matches_closed_form() {
        // Δu + e^u = 0, u(0) = log 8: u = log 8 − 2 log(1 + r²)
        let c = [8f64.ln()];
        let (s, _) = picard_radial(&|_, _| 1.0, &[2.0], &c, 4);
        for &r in &[1e-3f64, 1e-2, 3e-2] {
            let t = r.ln();
            let exact = -2.0 * (1.0 + r * r).ln();
            assert!((s[0].eval(t, &[2.0]) - exact).abs() < 1e-12 * (1.0 + exact.abs()) + 1e-16);
            let exact_d = -4.0 * r * r / (1.0 + r * r);
            assert!((s[0].eval_log_derivative(t, &[2.0]) - exact_d).abs() < 1e-14);
        }
    }

    #[test]
    fn exp_of_series() {
        // exp(x) with x = r^2 truncated at degree 3
        let mut x = Series::zero(0.0);
        x.terms.insert(vec![1], 1.0);
        let e = x.exp(1, 3);
        let t = (0.1f64).ln();
        let r2 = 0.01;
        let exact = 1.0 + r2 + r2 * r2 / 2.0 + r2 * r2 * r2 / 6.0;
        assert!((e.eval(t, &[2.0]) - exact).abs() < 1e-16);
    }

    #[test]
    fn mode_one_translation_series() {
        // β = 0, μ = 8: u' = -4r/(1+r²) solves the k = 1 equation
        let c = [8f64.ln()];
        let (_, dens) = picard_radial(&|_, _| 1.0, &[2.0], &c, 4);
        let phi = picard_linear(&|_, _| 1.0, &[2.0], &dens, &[-4.0], 1, 4);
        let r: f64 = 0.01;
        let exact = -4.0 * r / (1.0 + r * r);
        assert!((phi[0].eval(r.ln(), &[2.0]) - exact).abs() < 1e-14);
    }
}
