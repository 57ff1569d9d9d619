//! Radial solutions of Δu_i + Σ_j a_ij |x|^{β_j} e^{u_j} = 0.
//!
//! Everything is computed in the log-radius t = log r. With ũ_i(t) = u_i(e^t)
//! and γ_i = 2 + β_i the system becomes autonomous-looking:
//!
//! ũ_i'' = −Σ_j a_ij F_j,   F_j(t) = e^{γ_j t + ũ_j(t)},
//!
//! and the energies are σ_i = ∫ F_i dt. The state carried by the stepper is
//! (ũ, w) with w = dũ/dt = r u'(r).

use serde::{Deserialize, Serialize};

use crate::algebra::{
    lambda_all_proper, lambda_full, lambda_scale, CouplingMatrix, EnergyVector, SingularityExponents,
    MAX_SUBSET_DIM,
};
use crate::error::{Error, Result};
use crate::ode::{mixed_norm, Stepper};
use crate::quad::{gl5, hermite5, second_derivative_3pt, Jet};
use crate::series::{picard_radial, Series};

pub const DEFAULT_TOL_STEP: f64 = 1e-10;
pub const DEFAULT_TOL_ENERGY: f64 = 1e-9;
pub const DEFAULT_T_MIN: f64 = -18.0;
pub const DEFAULT_T_MAX: f64 = 60.0;

/// Contraction ratio targeted by the series start.
pub const START_CONTRACTION: f64 = 1e-4;
const PICARD_ITERATIONS: usize = 4;
/// Local error tolerance handed to the stepper, relative to `tol_step`.
pub(crate) const TOL_SAFETY: f64 = 0.1;
pub(crate) const H_MAX: f64 = 0.05;
/// Empirical constant in the three-node defect estimate
/// `FD_CONST · (γ h)^4 · |ũ''|`.
const FD_CONST: f64 = 2e-3;

/// Step cap keeping the finite-difference defect of the stored grid below
/// `10 · tol_step` where the curvature is `curvature`.
pub(crate) fn step_cap(tol_step: f64, gamma_max: f64, curvature: f64) -> f64 {
    if curvature <= 0.0 {
        return H_MAX;
    }
    let h = (10.0 * tol_step / (FD_CONST * curvature)).powf(0.25) / gamma_max;
    h.min(H_MAX)
}

/// How far past `t_max` a solution that is already decaying is followed
/// until its tail drops below `tol_energy`.
pub const DECAY_EXTENSION: f64 = 4000.0;
const MAX_STEPS: usize = 2_000_000;

/// A validated problem instance: coupling, exponents, tolerances, window.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub a: CouplingMatrix,
    pub beta: SingularityExponents,
    pub tol_step: f64,
    pub tol_energy: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl ProblemSpec {
    /// Spec with default tolerances and window.
    pub fn new(a: CouplingMatrix, beta: SingularityExponents) -> Result<Self> {
        let spec = Self {
            a,
            beta,
            tol_step: DEFAULT_TOL_STEP,
            tol_energy: DEFAULT_TOL_ENERGY,
            t_min: DEFAULT_T_MIN,
            t_max: DEFAULT_T_MAX,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_tolerances(mut self, tol_step: f64, tol_energy: f64) -> Result<Self> {
        self.tol_step = tol_step;
        self.tol_energy = tol_energy;
        self.validate()?;
        Ok(self)
    }

    pub fn with_window(mut self, t_min: f64, t_max: f64) -> Result<Self> {
        self.t_min = t_min;
        self.t_max = t_max;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta.len() != self.a.n() {
            return Err(Error::DimensionMismatch {
                expected: self.a.n(),
                got: self.beta.len(),
            });
        }
        for (name, tol) in [("tol_step", self.tol_step), ("tol_energy", self.tol_energy)] {
            if !(tol > 0.0 && tol <= 1e-2) {
                return Err(Error::InvalidTolerance(format!("{name} = {tol} must lie in (0, 1e-2]")));
            }
        }
        if !(self.t_min.is_finite() && self.t_max.is_finite() && self.t_min < self.t_max) {
            return Err(Error::InvalidTolerance(format!(
                "window [{}, {}] must be finite with t_min < t_max",
                self.t_min, self.t_max
            )));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.beta.gammas()
    }

    /// Row-major copy of the coupling entries.
    pub(crate) fn coupling(&self) -> Vec<f64> {
        let n = self.n();
        (0..n * n).map(|k| self.a.get(k / n, k % n)).collect()
    }
}

/// Initial heights c_i = u_i(0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct InitialHeights(Vec<f64>);

impl InitialHeights {
    pub fn new(c: Vec<f64>) -> Result<Self> {
        if let Some(i) = c.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("initial height {} is not finite", i + 1)));
        }
        Ok(Self(c))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl std::ops::Index<usize> for InitialHeights {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Values at the start radius produced by the series iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PicardStart {
    pub r0: f64,
    pub u: Vec<f64>,
    pub du: Vec<f64>,
    pub error_bound: f64,
    pub contraction: f64,
}

/// Series solution near the origin, valid for t ≤ t0.
#[derive(Debug, Clone)]
pub(crate) struct LocalStart {
    pub t0: f64,
    pub parts: Vec<Series>,
    pub densities: Vec<Series>,
    pub contraction: f64,
    pub error_bound: f64,
}

/// max_i Σ_j a_ij e^{c_j} r^{γ_j} / γ_j² at r = e^t.
pub(crate) fn contraction_ratio(a: &CouplingMatrix, gammas: &[f64], c: &[f64], t: f64) -> f64 {
    let n = gammas.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| a.get(i, j) * (c[j] + gammas[j] * t).exp() / (gammas[j] * gammas[j]))
                .sum::<f64>()
        })
        .fold(0.0, f64::max)
}

impl LocalStart {
    pub fn build(spec: &ProblemSpec, c: &[f64], t0: f64) -> Result<Self> {
        let gammas = spec.gammas();
        let q = contraction_ratio(&spec.a, &gammas, c, t0);
        if !(q < 0.5) {
            return Err(Error::R0TooLarge {
                ratio: q,
                bound: f64::INFINITY,
            });
        }
        let a = |i: usize, j: usize| spec.a.get(i, j);
        let (parts, densities) = picard_radial(&a, &gammas, c, PICARD_ITERATIONS);
        // the neglected terms start at degree K+1; the degree-K terms are
        // a geometric proxy for them
        let p_max = 1.0 + PICARD_ITERATIONS as f64 * gammas.iter().cloned().fold(0.0, f64::max);
        let error_bound = parts
            .iter()
            .map(|s| s.degree_magnitude(t0, &gammas, PICARD_ITERATIONS) * p_max * q / (1.0 - q))
            .fold(0.0, f64::max);
        if error_bound > spec.tol_step {
            return Err(Error::R0TooLarge { ratio: q, bound: error_bound });
        }
        Ok(Self {
            t0,
            parts,
            densities,
            contraction: q,
            error_bound,
        })
    }

    pub fn state(&self, c: &[f64], gammas: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let u = self
            .parts
            .iter()
            .zip(c)
            .map(|(s, ci)| ci + s.eval(self.t0, gammas))
            .collect();
        let du = self
            .parts
            .iter()
            .map(|s| s.eval_log_derivative(self.t0, gammas))
            .collect();
        (u, du)
    }
}

/// Values and log-derivatives of u at `r0` by symbolic Picard iteration.
pub fn picard_local(spec: &ProblemSpec, c: &InitialHeights, r0: f64) -> Result<PicardStart> {
    spec.validate()?;
    check_heights(spec, c)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!("r0 = {r0} must be positive")));
    }
    let start = LocalStart::build(spec, c.as_slice(), r0.ln())?;
    let (u, du) = start.state(c.as_slice(), &spec.gammas());
    Ok(PicardStart {
        r0,
        u,
        du,
        error_bound: start.error_bound,
        contraction: start.contraction,
    })
}

fn check_heights(spec: &ProblemSpec, c: &InitialHeights) -> Result<()> {
    if c.len() != spec.n() {
        return Err(Error::DimensionMismatch {
            expected: spec.n(),
            got: c.len(),
        });
    }
    Ok(())
}

/// Log-radius of the start: `t_min`, or earlier if the contraction target
/// is not met there.
pub(crate) fn start_time(spec: &ProblemSpec, c: &[f64]) -> f64 {
    let gammas = spec.gammas();
    let q = |t: f64| contraction_ratio(&spec.a, &gammas, c, t);
    if q(spec.t_min) <= START_CONTRACTION {
        return spec.t_min;
    }
    let mut hi = spec.t_min;
    let mut lo = spec.t_min - 1.0;
    while q(lo) > START_CONTRACTION {
        let width = hi - lo;
        hi = lo;
        lo -= 2.0 * width;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if q(mid) > START_CONTRACTION {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Energy bookkeeping of a profile.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Diagnostics {
    /// Λ_I(σ).
    pub lambda_i: f64,
    /// max(1, ‖σ‖²‖A‖) used to normalize Λ residuals.
    pub lambda_scale: f64,
    /// Λ_J(σ) for every proper nonempty J (0-based); empty when n > 16.
    pub lambda_j: Vec<(Vec<usize>, f64)>,
    /// ‖Aσ − m‖∞ between the quadrature energies and the slopes.
    pub energy_crosscheck: f64,
    /// Analytic tail energies added beyond the last grid point.
    pub tail_energy: Vec<f64>,
    /// Slowest decay rate of the remainder ũ_i + m_i t − c_i.
    pub tail_exponent_estimate: f64,
    /// Intercepts from c_i + Σ_j a_ij ∫ t F_j dt.
    pub c_integral: Vec<f64>,
    /// max_i |c_const_i − c_integral_i|.
    pub c_crosscheck: f64,
    pub start_error_bound: f64,
    pub start_contraction: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    /// The run went past `t_max` to let a slow tail decay.
    pub extended: bool,
}

/// Result of the energy quadrature.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    pub sigma: EnergyVector,
    pub m: Vec<f64>,
    pub c_const: Vec<f64>,
    pub tail: Vec<f64>,
    pub crosscheck: f64,
    pub c_integral: Vec<f64>,
    pub tail_exponent: f64,
}

/// A radial solution on a log-radius grid.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    spec: ProblemSpec,
    c: InitialHeights,
    grid: Vec<f64>,
    u: Vec<Vec<f64>>,
    du: Vec<Vec<f64>>,
    head_series: Vec<Series>,
    head_energy: Vec<f64>,
    head_log_moment: Vec<f64>,
    sigma: EnergyVector,
    m: Vec<f64>,
    c_const: Vec<f64>,
    converged: bool,
    diagnostics: Diagnostics,
}

impl RadialProfile {
    /// Wrap externally computed samples (for instance a re-read CSV or an
    /// analytic solution). The head of the energy integral is estimated from
    /// the leading power law at the first node; the profile is marked not
    /// converged.
    pub fn from_samples(spec: ProblemSpec, grid: Vec<f64>, u: Vec<Vec<f64>>, du: Vec<Vec<f64>>) -> Result<Self> {
        spec.validate()?;
        let n = spec.n();
        if u.len() != n || du.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: u.len().min(du.len()),
            });
        }
        if grid.is_empty() {
            return Err(Error::InvalidArgument("empty grid".into()));
        }
        for row in u.iter().chain(&du) {
            if row.len() != grid.len() {
                return Err(Error::DimensionMismatch {
                    expected: grid.len(),
                    got: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::InvalidArgument("non-finite profile value".into()));
            }
        }
        if grid.iter().any(|t| !t.is_finite()) || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidArgument("grid must be finite and strictly increasing".into()));
        }
        let gammas = spec.gammas();
        let t0 = grid[0];
        let mut head_energy = Vec::with_capacity(n);
        let mut head_log_moment = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for i in 0..n {
            let rate = gammas[i] + du[i][0];
            let f0 = (gammas[i] * t0 + u[i][0]).exp();
            if rate > 0.0 {
                head_energy.push(f0 / rate);
                head_log_moment.push(f0 * (t0 / rate - 1.0 / (rate * rate)));
            } else {
                head_energy.push(0.0);
                head_log_moment.push(0.0);
            }
            c.push(u[i][0] - du[i][0] / gammas[i]);
        }
        let last = grid.len() - 1;
        let t_end = grid[last];
        let m: Vec<f64> = du.iter().map(|d| -d[last]).collect();
        let c_const = (0..n).map(|i| u[i][last] + m[i] * t_end).collect();
        Ok(Self {
            spec,
            c: InitialHeights::new(c)?,
            grid,
            u,
            du,
            head_series: Vec::new(),
            head_energy,
            head_log_moment,
            sigma: EnergyVector::new(vec![0.0; n])?,
            m,
            c_const,
            converged: false,
            diagnostics: Diagnostics::default(),
        })
    }

    pub fn spec(&self) -> &ProblemSpec {
        &self.spec
    }

    pub fn initial_heights(&self) -> &InitialHeights {
        &self.c
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// ũ_i on the grid.
    pub fn u(&self, i: usize) -> &[f64] {
        &self.u[i]
    }

    /// r u_i'(r) = dũ_i/dt on the grid.
    pub fn du(&self, i: usize) -> &[f64] {
        &self.du[i]
    }

    pub fn sigma(&self) -> &EnergyVector {
        &self.sigma
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn c_const(&self) -> &[f64] {
        &self.c_const
    }

    pub fn converged(&self) -> bool {
        self.converged
    }

    pub fn diagnostics(&self) -> &Diagnostics {
        &self.diagnostics
    }

    pub fn n(&self) -> usize {
        self.u.len()
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn t_start(&self) -> f64 {
        self.grid[0]
    }

    pub fn t_end(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// F_i = e^{γ_i t + ũ_i} at node `k`.
    pub fn potential(&self, i: usize, k: usize) -> f64 {
        (self.spec.beta.gamma(i) * self.grid[k] + self.u[i][k]).exp()
    }

    /// dw_i/dt = −Σ_j a_ij F_j at node `k`.
    pub(crate) fn curvature(&self, i: usize, k: usize) -> f64 {
        -(0..self.n()).map(|j| self.spec.a.get(i, j) * self.potential(j, k)).sum::<f64>()
    }

    /// d²w_i/dt² = −Σ_j a_ij F_j (γ_j + w_j) at node `k`.
    pub(crate) fn curvature_rate(&self, i: usize, k: usize) -> f64 {
        -(0..self.n())
            .map(|j| self.spec.a.get(i, j) * self.potential(j, k) * (self.spec.beta.gamma(j) + self.du[j][k]))
            .sum::<f64>()
    }

    fn jets(&self, i: usize, k: usize) -> (Jet, Jet) {
        let d1 = self.curvature(i, k);
        (
            Jet {
                v: self.u[i][k],
                d1: self.du[i][k],
                d2: d1,
            },
            Jet {
                v: self.du[i][k],
                d1,
                d2: self.curvature_rate(i, k),
            },
        )
    }

    /// Index `k` of the interval [t_k, t_{k+1}] containing `t`.
    pub(crate) fn interval(&self, t: f64) -> usize {
        let k = self.grid.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.grid.len().saturating_sub(2))
    }

    /// (ũ(t), dũ/dt(t)) anywhere: Hermite interpolation inside the grid, the
    /// series below it, and the asymptotic model beyond it. Returns `None`
    /// where no reliable model exists (below an externally supplied grid,
    /// or beyond the end of an unconverged profile).
    pub fn eval(&self, t: f64) -> Option<(Vec<f64>, Vec<f64>)> {
        let n = self.n();
        let gammas = self.spec.gammas();
        let last = self.grid.len() - 1;
        if t < self.grid[0] {
            if self.head_series.is_empty() {
                return None;
            }
            let u = (0..n).map(|i| self.c[i] + self.head_series[i].eval(t, &gammas)).collect();
            let du = (0..n).map(|i| self.head_series[i].eval_log_derivative(t, &gammas)).collect();
            return Some((u, du));
        }
        if t > self.grid[last] {
            if !self.converged {
                return None;
            }
            return Some(self.extrapolate(t));
        }
        if last == 0 {
            return Some(((0..n).map(|i| self.u[i][0]).collect(), (0..n).map(|i| self.du[i][0]).collect()));
        }
        let k = self.interval(t);
        let h = self.grid[k + 1] - self.grid[k];
        let s = (t - self.grid[k]) / h;
        let mut u = Vec::with_capacity(n);
        let mut du = Vec::with_capacity(n);
        for i in 0..n {
            let (ua, wa) = self.jets(i, k);
            let (ub, wb) = self.jets(i, k + 1);
            u.push(hermite5(ua, ub, h, s).0);
            du.push(hermite5(wa, wb, h, s).0);
        }
        Some((u, du))
    }

    fn extrapolate(&self, t: f64) -> (Vec<f64>, Vec<f64>) {
        let n = self.n();
        let last = self.grid.len() - 1;
        let s = t - self.grid[last];
        let lam: Vec<f64> = (0..n).map(|j| -self.du[j][last] - self.spec.beta.gamma(j)).collect();
        let f: Vec<f64> = (0..n).map(|j| self.potential(j, last)).collect();
        let mut u = Vec::with_capacity(n);
        let mut du = Vec::with_capacity(n);
        for i in 0..n {
            let mut ui = self.u[i][last] + self.du[i][last] * s;
            let mut wi = self.du[i][last];
            for j in 0..n {
                let decay = -(-lam[j] * s).exp_m1();
                ui -= self.spec.a.get(i, j) * f[j] * (s / lam[j] - decay / (lam[j] * lam[j]));
                wi -= self.spec.a.get(i, j) * f[j] * decay / lam[j];
            }
            u.push(ui);
            du.push(wi);
        }
        (u, du)
    }

    /// F_i at the 5 Gauss nodes of every interval, as `[interval][i][node]`.
    pub(crate) fn gauss_potentials(&self) -> Vec<Vec<[f64; 5]>> {
        let n = self.n();
        let gammas = self.spec.gammas();
        let jets: Vec<Vec<Jet>> = (0..n)
            .map(|i| (0..self.grid.len()).map(|k| self.jets(i, k).0).collect())
            .collect();
        self.grid
            .windows(2)
            .enumerate()
            .map(|(k, w)| {
                let h = w[1] - w[0];
                (0..n)
                    .map(|i| {
                        let mut out = [0.0; 5];
                        for (q, (x, _)) in gl5().enumerate() {
                            let (ui, _) = hermite5(jets[i][k], jets[i][k + 1], h, x);
                            out[q] = (gammas[i] * (w[0] + x * h) + ui).exp();
                        }
                        out
                    })
                    .collect()
            })
            .collect()
    }

    fn attach_energy(&mut self, report: &EnergyReport) {
        let s = report.sigma.as_slice();
        self.sigma = report.sigma.clone();
        self.m = report.m.clone();
        self.c_const = report.c_const.clone();
        let d = &mut self.diagnostics;
        d.lambda_i = lambda_full(s, &self.spec.a, &self.spec.beta);
        d.lambda_scale = lambda_scale(s, &self.spec.a);
        d.lambda_j = if self.spec.n() <= MAX_SUBSET_DIM {
            lambda_all_proper(s, &self.spec.a, &self.spec.beta).unwrap_or_default()
        } else {
            Vec::new()
        };
        d.energy_crosscheck = report.crosscheck;
        d.tail_energy = report.tail.clone();
        d.tail_exponent_estimate = report.tail_exponent;
        d.c_integral = report.c_integral.clone();
        d.c_crosscheck = report
            .c_const
            .iter()
            .zip(&report.c_integral)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
}

fn radial_rhs(n: usize, gammas: Vec<f64>, coupling: Vec<f64>) -> impl FnMut(f64, &[f64], &mut [f64]) {
    let mut f = vec![0.0; n];
    move |t, y, dy| {
        for j in 0..n {
            f[j] = (gammas[j] * t + y[j]).exp();
        }
        for i in 0..n {
            dy[i] = y[n + i];
            dy[n + i] = -(0..n).map(|j| coupling[i * n + j] * f[j]).sum::<f64>();
        }
    }
}

/// Integrate from u(0) = c. Starts at r0 = min(e^{t_min}, contraction radius).
pub fn integrate(spec: &ProblemSpec, c: &InitialHeights) -> Result<RadialProfile> {
    spec.validate()?;
    check_heights(spec, c)?;
    integrate_from(spec, c, start_time(spec, c.as_slice()))
}

/// Integrate from u(0) = c starting the stepper at an explicit radius `r0`.
pub fn integrate_with_start(spec: &ProblemSpec, c: &InitialHeights, r0: f64) -> Result<RadialProfile> {
    spec.validate()?;
    check_heights(spec, c)?;
    if !(r0 > 0.0 && r0.is_finite()) {
        return Err(Error::InvalidArgument(format!("r0 = {r0} must be positive")));
    }
    integrate_from(spec, c, r0.ln())
}

fn integrate_from(spec: &ProblemSpec, c: &InitialHeights, t0: f64) -> Result<RadialProfile> {
    let n = spec.n();
    let gammas = spec.gammas();
    let start = LocalStart::build(spec, c.as_slice(), t0)?;
    let (u0, du0) = start.state(c.as_slice(), &gammas);
    let mut y: Vec<f64> = u0.iter().chain(&du0).copied().collect();

    let g_max = gammas.iter().cloned().fold(0.0, f64::max);
    let mut stepper = Stepper::new(radial_rhs(n, gammas.clone(), spec.coupling()), 2 * n, 1e-3 / g_max, H_MAX);
    let tol = spec.tol_step * TOL_SAFETY;
    let norm = |a: &[f64], b: &[f64], e: &[f64]| mixed_norm(tol, tol, a, b, e);

    let mut grid = vec![t0];
    let mut u: Vec<Vec<f64>> = u0.iter().map(|&v| vec![v]).collect();
    let mut du: Vec<Vec<f64>> = du0.iter().map(|&v| vec![v]).collect();
    let delta_stop = 0.05 * gammas.iter().cloned().fold(f64::INFINITY, f64::min);
    let hard_end = spec.t_max + DECAY_EXTENSION;

    let mut t = t0;
    let mut converged = false;
    while t < hard_end && grid.len() < MAX_STEPS {
        let limit = if t < spec.t_max { spec.t_max } else { hard_end };
        let curvature = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| spec.a.get(i, j) * (gammas[j] * t + y[j]).exp())
                    .sum::<f64>()
            })
            .fold(0.0, f64::max);
        stepper.set_h_max(step_cap(spec.tol_step, g_max, curvature));
        let mut next = y.clone();
        let t_next = stepper.advance(t, &mut next, limit, norm)?;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        t = t_next;
        y = next;
        grid.push(t);
        for i in 0..n {
            u[i].push(y[i]);
            du[i].push(y[n + i]);
        }
        let margin = if t <= spec.t_max { delta_stop } else { 0.0 };
        let mut decaying = true;
        let mut tail_small = true;
        for i in 0..n {
            let lam = -y[n + i] - gammas[i];
            if !(lam > 0.0 && lam >= margin) {
                decaying = false;
            }
            let tail = (gammas[i] * t + y[i]).exp() / lam;
            if !(lam > 0.0 && tail < spec.tol_energy) {
                tail_small = false;
            }
        }
        if decaying && tail_small {
            converged = true;
            break;
        }
        let positive = (0..n).all(|i| -y[n + i] - gammas[i] > 0.0);
        if t >= spec.t_max && !positive {
            break;
        }
    }

    let mut profile = RadialProfile {
        spec: spec.clone(),
        c: c.clone(),
        grid,
        u,
        du,
        head_series: start.parts.clone(),
        head_energy: start
            .densities
            .iter()
            .enumerate()
            .map(|(i, d)| d.weighted_integral(t0, &gammas, i))
            .collect(),
        head_log_moment: start
            .densities
            .iter()
            .enumerate()
            .map(|(i, d)| d.weighted_log_integral(t0, &gammas, i))
            .collect(),
        sigma: EnergyVector::new(vec![0.0; n])?,
        m: Vec::new(),
        c_const: Vec::new(),
        converged,
        diagnostics: Diagnostics {
            start_error_bound: start.error_bound,
            start_contraction: start.contraction,
            steps_accepted: stepper.accepted,
            steps_rejected: stepper.rejected,
            extended: t > spec.t_max,
            ..Diagnostics::default()
        },
    };
    if converged {
        let report = energy_report(&profile)?;
        profile.attach_energy(&report);
    } else {
        let partial = partial_energy(&profile);
        let last = profile.grid.len() - 1;
        let t_end = profile.grid[last];
        profile.m = (0..n).map(|i| -profile.du[i][last]).collect();
        profile.c_const = (0..n).map(|i| profile.u[i][last] + profile.m[i] * t_end).collect();
        profile.sigma = EnergyVector::new(partial.0)?;
    }
    Ok(profile)
}

/// Head plus grid quadrature of ∫ F_i dt and ∫ t F_i dt.
fn partial_energy(profile: &RadialProfile) -> (Vec<f64>, Vec<f64>) {
    let n = profile.n();
    let mut sigma = profile.head_energy.clone();
    let mut moment = profile.head_log_moment.clone();
    for (k, pots) in profile.gauss_potentials().iter().enumerate() {
        let ta = profile.grid[k];
        let h = profile.grid[k + 1] - ta;
        for i in 0..n {
            for (q, (x, wq)) in gl5().enumerate() {
                sigma[i] += h * wq * pots[i][q];
                moment[i] += h * wq * (ta + x * h) * pots[i][q];
            }
        }
    }
    (sigma, moment)
}

/// Quadrature energies, slopes and intercepts with analytic tails.
pub fn energy_report(profile: &RadialProfile) -> Result<EnergyReport> {
    let n = profile.n();
    let spec = &profile.spec;
    let gammas = spec.gammas();
    let last = profile.grid.len() - 1;
    let t_end = profile.grid[last];
    let lam: Vec<f64> = (0..n).map(|j| -profile.du[j][last] - gammas[j]).collect();
    if lam.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::NotConverged { t_end });
    }
    let f: Vec<f64> = (0..n).map(|j| profile.potential(j, last)).collect();
    let tail: Vec<f64> = (0..n)
        .map(|j| {
            let second: f64 = (0..n)
                .map(|k| spec.a.get(j, k) * f[k] / (lam[j] * lam[j] * (lam[j] + lam[k])))
                .sum();
            f[j] / lam[j] - f[j] * second
        })
        .collect();
    if let Some(&worst) = tail.iter().find(|&&x| x > 10.0 * spec.tol_energy) {
        return Err(Error::TailDominates { tail: worst });
    }
    let (mut sigma, mut moment) = partial_energy(profile);
    for j in 0..n {
        sigma[j] += tail[j];
        moment[j] += f[j] * (t_end / lam[j] + 1.0 / (lam[j] * lam[j]));
    }
    let m: Vec<f64> = (0..n)
        .map(|i| -profile.du[i][last] + (0..n).map(|j| spec.a.get(i, j) * tail[j]).sum::<f64>())
        .collect();
    let c_const: Vec<f64> = (0..n)
        .map(|i| {
            profile.u[i][last]
                + m[i] * t_end
                + (0..n).map(|j| spec.a.get(i, j) * f[j] / (lam[j] * lam[j])).sum::<f64>()
        })
        .collect();
    let c_integral: Vec<f64> = (0..n)
        .map(|i| profile.c[i] + (0..n).map(|j| spec.a.get(i, j) * moment[j]).sum::<f64>())
        .collect();
    let a_sigma = spec.a.apply(&sigma);
    let crosscheck = a_sigma.iter().zip(&m).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    Ok(EnergyReport {
        sigma: EnergyVector::new(sigma.iter().map(|v| v.max(0.0)).collect())?,
        m,
        c_const,
        tail,
        crosscheck,
        c_integral,
        tail_exponent: lam.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

/// Energies σ_i = ∫ r^{1+β_i} e^{u_i} dr of a profile in its decay regime.
pub fn compute_energy(profile: &RadialProfile) -> Result<EnergyVector> {
    energy_report(profile).map(|r| r.sigma)
}

/// Profile of v_i(r) = u_i(δ r) + (2+β_i) log δ. Energies and slopes are
/// copied; the grid is shifted by −log δ.
pub fn scale_profile(profile: &RadialProfile, delta: f64) -> Result<RadialProfile> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidArgument(format!("delta = {delta} must be positive")));
    }
    let ld = delta.ln();
    let gammas = profile.spec.gammas();
    let n = profile.n();
    let mut out = profile.clone();
    if ld == 0.0 {
        return Ok(out);
    }
    out.grid = profile.grid.iter().map(|t| t - ld).collect();
    for i in 0..n {
        let shift = gammas[i] * ld;
        out.u[i] = profile.u[i].iter().map(|v| v + shift).collect();
        out.c_const[i] = profile.c_const[i] + (gammas[i] - profile.m[i]) * ld;
        out.head_log_moment[i] = profile.head_log_moment[i] - ld * profile.head_energy[i];
    }
    out.c = InitialHeights((0..n).map(|i| profile.c[i] + gammas[i] * ld).collect());
    out.head_series = profile.head_series.iter().map(|s| s.dilate(ld, &gammas)).collect();
    if !out.diagnostics.c_integral.is_empty() {
        for i in 0..n {
            out.diagnostics.c_integral[i] += (gammas[i] - profile.m[i]) * ld;
        }
    }
    Ok(out)
}

/// Pointwise defect of the profile as a solution of the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    /// max_i |ũ_i'' + Σ_j a_ij F_j| at each grid point.
    pub per_point: Vec<f64>,
    pub max: f64,
}

/// Finite-difference defect |ũ_i'' + Σ_j a_ij e^{γ_j t + ũ_j}|, with ũ''
/// taken from the quintic through three neighbouring nodes (values and
/// slopes).
pub fn residual(profile: &RadialProfile) -> ResidualReport {
    let len = profile.grid.len();
    let n = profile.n();
    if len < 3 {
        return ResidualReport {
            per_point: vec![0.0; len],
            max: 0.0,
        };
    }
    let g = &profile.grid;
    let per_point: Vec<f64> = (0..len)
        .map(|k| {
            let c = k.clamp(1, len - 2);
            let nodes = [g[c - 1], g[c], g[c + 1]];
            (0..n)
                .map(|i| {
                    let f = [profile.u[i][c - 1], profile.u[i][c], profile.u[i][c + 1]];
                    let df = [profile.du[i][c - 1], profile.du[i][c], profile.du[i][c + 1]];
                    let d2 = second_derivative_3pt(nodes, f, df, g[k]);
                    (d2 - profile.curvature(i, k)).abs()
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let max = per_point.iter().cloned().fold(0.0, f64::max);
    ResidualReport { per_point, max }
}
