//! Linearized equations along a radial solution.
//!
//! At Fourier mode k the perturbation φ_i(t) (t = log r) solves
//!
//! φ_i'' = k² φ_i − Σ_j a_ij F_j φ_j,   F_j = e^{γ_j t + ũ_j},
//!
//! with the regular branch φ_i ≈ leading_i · r^k at the origin. Mode 0 with
//! φ_i(0) = α_i gives the sensitivities of the radial solution to its initial
//! heights.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::ode::{mixed_norm, Stepper};
use crate::quad::{gl5, hermite5, second_derivative_3pt, Jet};
use crate::radial::{integrate, step_cap, InitialHeights, LocalStart, ProblemSpec, RadialProfile, H_MAX, TOL_SAFETY};
use crate::series::{picard_linear, Series};

const SERIES_ITERATIONS: usize = 4;
/// Solutions growing past this magnitude are truncated.
const OVERFLOW_GUARD: f64 = 1e250;
/// Envelope violation factor classifying a mode-k solution as unbounded.
pub const UNBOUNDED_FACTOR: f64 = 1e3;

/// Solution of the linearized system at one mode, on the base grid.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedProfile {
    pub mode: u32,
    /// Shared with the base profile (a prefix of it if `truncated`).
    pub grid: Vec<f64>,
    pub phi: Vec<Vec<f64>>,
    /// r φ_i' = dφ_i/dt.
    pub dphi: Vec<Vec<f64>>,
    /// φ_i(0) for mode 0, the r^k coefficients otherwise.
    pub alpha: Vec<f64>,
    /// ∫ F_i φ_i dt from the origin; mode 0 includes the analytic tail
    /// beyond the last grid point, other modes stop at the last grid point.
    pub moments: Vec<f64>,
    /// The part of `moments` below the first grid point (from the series).
    pub head_moments: Vec<f64>,
    /// Growth relative to r^k (1+r)^{−2k}, normalized at the first node
    /// (modes k ≥ 1 only).
    pub envelope_factor: Option<f64>,
    /// The solution exceeded the overflow guard before the end of the grid.
    pub truncated: bool,
}

impl LinearizedProfile {
    /// Whether the envelope test classifies the solution as unbounded.
    pub fn violates_envelope(&self) -> bool {
        self.truncated || self.envelope_factor.is_some_and(|f| f >= UNBOUNDED_FACTOR)
    }
}

fn column_scale(y: &[f64], y_new: &[f64]) -> f64 {
    y.iter().chain(y_new).fold(0.0, |m: f64, v| m.max(v.abs()))
}

/// Integrate the base system together with `columns.len()` linearized
/// solutions, landing on every base grid point.
fn joint_solve(base: &RadialProfile, mode: u32, columns: &[Vec<f64>]) -> Result<Vec<LinearizedProfile>> {
    if !base.converged() {
        return Err(Error::BaseNotConverged);
    }
    let spec = base.spec();
    let n = spec.n();
    for col in columns {
        if col.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: col.len(),
            });
        }
    }
    let gammas = spec.gammas();
    let coupling = spec.coupling();
    let p = columns.len();
    let grid = base.grid();
    let t0 = grid[0];
    let start = LocalStart::build(spec, base.initial_heights().as_slice(), t0)?;
    let a = |i: usize, j: usize| spec.a.get(i, j);
    let series: Vec<Vec<Series>> = columns
        .iter()
        .map(|l| picard_linear(&a, &gammas, &start.densities, l, mode, SERIES_ITERATIONS))
        .collect();
    let k2 = (mode as f64).powi(2);
    let dim = 2 * n * (p + 1);

    let mut y = vec![0.0; dim];
    for i in 0..n {
        y[i] = base.u(i)[0];
        y[n + i] = base.du(i)[0];
    }
    for (c, s) in series.iter().enumerate() {
        let off = 2 * n * (c + 1);
        for i in 0..n {
            y[off + i] = s[i].eval(t0, &gammas);
            y[off + n + i] = s[i].eval_log_derivative(t0, &gammas);
        }
    }

    let rhs = {
        let gammas = gammas.clone();
        let mut f = vec![0.0; n];
        move |t: f64, y: &[f64], dy: &mut [f64]| {
            for j in 0..n {
                f[j] = (gammas[j] * t + y[j]).exp();
            }
            for i in 0..n {
                dy[i] = y[n + i];
                dy[n + i] = -(0..n).map(|j| coupling[i * n + j] * f[j]).sum::<f64>();
            }
            for c in 0..p {
                let off = 2 * n * (c + 1);
                for i in 0..n {
                    dy[off + i] = y[off + n + i];
                    dy[off + n + i] =
                        k2 * y[off + i] - (0..n).map(|j| coupling[i * n + j] * f[j] * y[off + j]).sum::<f64>();
                }
            }
        }
    };
    let tol = spec.tol_step * TOL_SAFETY;
    let norm = |y: &[f64], y_new: &[f64], err: &[f64]| {
        let mut worst = mixed_norm(tol, tol, &y[..2 * n], &y_new[..2 * n], &err[..2 * n]);
        for c in 0..p {
            let r = 2 * n * (c + 1)..2 * n * (c + 2);
            let scale = column_scale(&y[r.clone()], &y_new[r.clone()]);
            if scale > 0.0 {
                let e = err[r].iter().fold(0.0, |m: f64, v| m.max(v.abs()));
                worst = worst.max(e / (tol * scale));
            }
        }
        worst
    };
    let h_init = if grid.len() > 1 { grid[1] - grid[0] } else { H_MAX };
    let mut stepper = Stepper::new(rhs, dim, h_init, H_MAX);
    let g_max = gammas.iter().cloned().fold(0.0, f64::max);

    let mut phi = vec![vec![Vec::with_capacity(grid.len()); n]; p];
    let mut dphi = vec![vec![Vec::with_capacity(grid.len()); n]; p];
    let record = |y: &[f64], phi: &mut Vec<Vec<Vec<f64>>>, dphi: &mut Vec<Vec<Vec<f64>>>| {
        for c in 0..p {
            let off = 2 * n * (c + 1);
            for i in 0..n {
                phi[c][i].push(y[off + i]);
                dphi[c][i].push(y[off + n + i]);
            }
        }
    };
    record(&y, &mut phi, &mut dphi);
    let mut truncated = false;
    let mut t = t0;
    for k in 0..grid.len() - 1 {
        let target = grid[k + 1];
        let curvature = (0..n).map(|i| -base.curvature(i, k)).fold(0.0, f64::max);
        stepper.set_h_max(step_cap(spec.tol_step, g_max, curvature));
        while t < target {
            t = stepper.advance(t, &mut y, target, norm)?;
        }
        t = target;
        // keep the base components on the stored trajectory
        for i in 0..n {
            y[i] = base.u(i)[k + 1];
            y[n + i] = base.du(i)[k + 1];
        }
        if y[2 * n..].iter().any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD) {
            truncated = true;
            break;
        }
        record(&y, &mut phi, &mut dphi);
    }

    let len = phi.first().map_or(grid.len(), |c| c[0].len());
    let potentials = base.gauss_potentials();
    let mut out = Vec::with_capacity(p);
    for (c, s) in series.iter().enumerate() {
        let head_moments: Vec<f64> = (0..n)
            .map(|i| start.densities[i].mul(&s[i], SERIES_ITERATIONS).weighted_integral(t0, &gammas, i))
            .collect();
        let mut moments = head_moments.clone();
        let jets = |k: usize, i: usize| {
            let forcing: f64 = (0..n).map(|j| spec.a.get(i, j) * base.potential(j, k) * phi[c][j][k]).sum();
            Jet {
                v: phi[c][i][k],
                d1: dphi[c][i][k],
                d2: k2 * phi[c][i][k] - forcing,
            }
        };
        for k in 0..len - 1 {
            let h = grid[k + 1] - grid[k];
            for (i, m) in moments.iter_mut().enumerate() {
                let (ja, jb) = (jets(k, i), jets(k + 1, i));
                for (q, (x, wq)) in gl5().enumerate() {
                    *m += h * wq * potentials[k][i][q] * hermite5(ja, jb, h, x).0;
                }
            }
        }
        if mode == 0 && !truncated {
            let last = len - 1;
            for (i, m) in moments.iter_mut().enumerate() {
                let lam = -base.du(i)[last] - gammas[i];
                let f = base.potential(i, last);
                *m += f * (phi[c][i][last] / lam + dphi[c][i][last] / (lam * lam));
            }
        }
        let envelope_factor = (mode > 0).then(|| envelope_growth(&grid[..len], &phi[c], mode));
        out.push(LinearizedProfile {
            mode,
            grid: grid[..len].to_vec(),
            phi: std::mem::take(&mut phi[c]),
            dphi: std::mem::take(&mut dphi[c]),
            alpha: columns[c].clone(),
            moments,
            head_moments,
            envelope_factor,
            truncated,
        });
    }
    Ok(out)
}

/// max_t (max_i |φ_i| / env(t)) divided by the same ratio at the first
/// node, with env = r^k (1+r)^{−2k}.
fn envelope_growth(grid: &[f64], phi: &[Vec<f64>], mode: u32) -> f64 {
    let k = mode as f64;
    let log_env = |t: f64| {
        let log1p_r = if t > 0.0 { t + (-t).exp().ln_1p() } else { t.exp().ln_1p() };
        k * t - 2.0 * k * log1p_r
    };
    let log_ratio = |idx: usize| {
        let amp = phi.iter().fold(0.0, |m: f64, row| m.max(row[idx].abs()));
        amp.ln() - log_env(grid[idx])
    };
    let first = log_ratio(0);
    if !first.is_finite() {
        return 1.0;
    }
    let worst = (0..grid.len()).map(log_ratio).fold(f64::NEG_INFINITY, f64::max);
    (worst - first).exp()
}

/// Mode-0 solution with φ_i(0) = α_i, r φ_i'(0) = 0.
pub fn solve_mode0(base: &RadialProfile, alpha: &[f64]) -> Result<LinearizedProfile> {
    Ok(joint_solve(base, 0, &[alpha.to_vec()])?.remove(0))
}

/// Mode-k solution (k ≥ 1) with φ_i ≈ leading_i r^k at the origin.
pub fn solve_mode_k(base: &RadialProfile, k: u32, leading: &[f64]) -> Result<LinearizedProfile> {
    if k < 1 {
        return Err(Error::InvalidMode(k));
    }
    Ok(joint_solve(base, k, &[leading.to_vec()])?.remove(0))
}

/// Relative defect of a linearized solution:
/// |φ_i'' − k² φ_i + Σ_j a_ij F_j φ_j| / max_i(|φ_i| + |dφ_i|) per node.
pub fn linear_residual(base: &RadialProfile, lin: &LinearizedProfile) -> f64 {
    let g = &lin.grid;
    let len = g.len();
    if len < 3 {
        return 0.0;
    }
    let n = lin.phi.len();
    let k2 = (lin.mode as f64).powi(2);
    let spec = base.spec();
    let mut worst: f64 = 0.0;
    for k in 0..len {
        let c = k.clamp(1, len - 2);
        let scale = (0..n).fold(0.0, |m: f64, i| m.max(lin.phi[i][k].abs() + lin.dphi[i][k].abs()));
        if scale == 0.0 {
            continue;
        }
        for i in 0..n {
            let d2 = second_derivative_3pt(
                [g[c - 1], g[c], g[c + 1]],
                [lin.phi[i][c - 1], lin.phi[i][c], lin.phi[i][c + 1]],
                [lin.dphi[i][c - 1], lin.dphi[i][c], lin.dphi[i][c + 1]],
                g[k],
            );
            let forcing: f64 = (0..n).map(|j| spec.a.get(i, j) * base.potential(j, k) * lin.phi[j][k]).sum();
            worst = worst.max((d2 - k2 * lin.phi[i][k] + forcing).abs() / scale);
        }
    }
    worst
}

/// Check of ∫_{−∞}^t F_i φ⁰_i = F_i(t) for the scaling kernel φ⁰ = w + γ.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelCheck {
    /// max |lhs − rhs| / sup rhs over all nodes and components.
    pub max_residual: f64,
    /// max |lhs − rhs| / rhs over nodes where rhs ≥ 1e-3 · sup rhs.
    pub pointwise_relative: f64,
    /// |∫_0^∞ F_i φ⁰_i| (vanishes since m_i > 2 + β_i).
    pub total_moment: f64,
}

/// Compare the running moment of the kernel solution with F_i(t).
pub fn kernel_partial_integral_check(base: &RadialProfile, phi0: &LinearizedProfile) -> KernelCheck {
    let n = phi0.phi.len();
    let spec = base.spec();
    let gammas = spec.gammas();
    let len = phi0.grid.len();
    let potentials = base.gauss_potentials();
    let mut running = phi0.head_moments.clone();
    let sup: Vec<f64> = (0..n)
        .map(|i| (0..len).map(|k| base.potential(i, k)).fold(0.0, f64::max))
        .collect();
    let mut max_residual: f64 = 0.0;
    let mut pointwise: f64 = 0.0;
    let jet = |k: usize, i: usize| {
        let forcing: f64 = (0..n).map(|j| spec.a.get(i, j) * base.potential(j, k) * phi0.phi[j][k]).sum();
        Jet {
            v: phi0.phi[i][k],
            d1: phi0.dphi[i][k],
            d2: -forcing,
        }
    };
    for k in 0..len - 1 {
        let h = phi0.grid[k + 1] - phi0.grid[k];
        for i in 0..n {
            let (ja, jb) = (jet(k, i), jet(k + 1, i));
            for (q, (x, wq)) in gl5().enumerate() {
                running[i] += h * wq * potentials[k][i][q] * hermite5(ja, jb, h, x).0;
            }
            let rhs = base.potential(i, k + 1);
            let diff = (running[i] - rhs).abs();
            max_residual = max_residual.max(diff / sup[i]);
            if rhs >= 1e-3 * sup[i] {
                pointwise = pointwise.max(diff / rhs);
            }
        }
    }
    let last = len - 1;
    let total_moment = (0..n)
        .map(|i| {
            let lam = -base.du(i)[last] - gammas[i];
            (running[i] + base.potential(i, last) * (phi0.phi[i][last] / lam + phi0.dphi[i][last] / (lam * lam)))
                .abs()
        })
        .fold(0.0, f64::max);
    KernelCheck {
        max_residual,
        pointwise_relative: pointwise,
        total_moment,
    }
}

/// Sensitivities of the energies to the first n−1 initial heights.
#[derive(Debug, Clone)]
pub struct JacobianReport {
    /// (n−1)×(n−1): ∂σ_i/∂c_m for i, m < n.
    pub m: DMatrix<f64>,
    /// n×(n−1): ∂σ_i/∂c_m for all i.
    pub full: DMatrix<f64>,
    /// σ_max/σ_min of `m`; `None` for n = 1.
    pub condition: Option<f64>,
    pub smallest_singular_value: Option<f64>,
    pub base: RadialProfile,
}

/// Jacobian of c ↦ σ from the mode-0 solutions ψ^m with ψ_i^m(0) = δ_im.
pub fn variational_jacobian(spec: &ProblemSpec, c: &InitialHeights) -> Result<JacobianReport> {
    let base = integrate(spec, c)?;
    jacobian_of(base)
}

/// As [`variational_jacobian`] for an already integrated base.
pub fn jacobian_of(base: RadialProfile) -> Result<JacobianReport> {
    if !base.converged() {
        return Err(Error::BaseNotConverged);
    }
    let n = base.n();
    let p = n - 1;
    let columns: Vec<Vec<f64>> = (0..p)
        .map(|m| (0..n).map(|i| if i == m { 1.0 } else { 0.0 }).collect())
        .collect();
    let sols = if p > 0 { joint_solve(&base, 0, &columns)? } else { Vec::new() };
    let full = DMatrix::from_fn(n, p, |i, m| sols[m].moments[i]);
    let m = full.rows(0, p).into_owned();
    let (condition, smallest) = if p == 0 {
        (None, None)
    } else {
        let sv = m.clone().svd(false, false).singular_values;
        let max = sv.max();
        let min = sv.min();
        (Some(max / min), Some(min))
    };
    Ok(JacobianReport {
        m,
        full,
        condition,
        smallest_singular_value: smallest,
        base,
    })
}

/// Sign conditions for the comparison function f_i = −u_i'.
#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonReport {
    pub mode: u32,
    /// f_i > 0 at every node.
    pub positive: bool,
    /// f_i / r^k increases toward the origin.
    pub blows_up_at_origin: bool,
    /// f_i r^k increases toward infinity.
    pub blows_up_at_infinity: bool,
    /// The mode-k operator applied to f is negative at every node.
    pub operator_negative: bool,
    /// Largest value of L f / (|Σ a β r^{β−1} e^u| + (k²−1) f / r²) (negative
    /// when the condition holds everywhere).
    pub worst_margin: f64,
    /// Relative disagreement between the closed form of L f and the operator
    /// evaluated from the derivatives of the profile.
    pub operator_crosscheck: f64,
}

impl ComparisonReport {
    pub fn all_hold(&self) -> bool {
        self.positive && self.blows_up_at_origin && self.blows_up_at_infinity && self.operator_negative
    }
}

/// Verify the comparison-function conditions on the grid for mode `k`.
pub fn comparison_function_check(base: &RadialProfile, k: u32) -> Result<ComparisonReport> {
    let spec = base.spec();
    if let Some((index, &value)) = spec.beta.as_slice().iter().enumerate().find(|(_, &b)| b >= 0.0) {
        return Err(Error::BetaNotNegative { index, value });
    }
    if k < 2 {
        return Err(Error::InvalidMode(k));
    }
    if !base.converged() {
        return Err(Error::BaseNotConverged);
    }
    let n = base.n();
    let kf = k as f64;
    let k2m1 = kf * kf - 1.0;
    let len = base.len();
    let last = len - 1;
    let mut positive = true;
    let mut origin = true;
    let mut infinity = true;
    let mut worst_margin = f64::NEG_INFINITY;
    let mut crosscheck: f64 = 0.0;
    for i in 0..n {
        // d/dt log(f r^{∓k}) = w'/w − 1 ∓ k
        let w0 = base.du(i)[0];
        if !(w0 < 0.0 && base.curvature(i, 0) / w0 - 1.0 - kf < 0.0) {
            origin = false;
        }
        let wl = base.du(i)[last];
        if !(base.curvature(i, last) / wl - 1.0 + kf > 0.0) {
            infinity = false;
        }
        for idx in 0..len {
            let w = base.du(i)[idx];
            if !(w < 0.0) {
                positive = false;
            }
            // e^{3t} L f in closed form
            let source: f64 = (0..n)
                .map(|j| spec.a.get(i, j) * spec.beta[j] * base.potential(j, idx))
                .sum();
            let closed = source + k2m1 * w;
            // e^{3t} L f from f = −w e^{−t}: −(w'' − 2w' + w) + k² w − Σ a F w_j
            let w1 = base.curvature(i, idx);
            let w2 = base.curvature_rate(i, idx);
            let coupled: f64 = (0..n)
                .map(|j| spec.a.get(i, j) * base.potential(j, idx) * base.du(j)[idx])
                .sum();
            let operator = -(w2 - 2.0 * w1 + w) + kf * kf * w - coupled;
            let scale = source.abs() + k2m1 * w.abs();
            if scale > 0.0 {
                worst_margin = worst_margin.max(closed / scale);
                crosscheck = crosscheck.max((closed - operator).abs() / scale);
            }
        }
    }
    Ok(ComparisonReport {
        mode: k,
        positive,
        blows_up_at_origin: origin,
        blows_up_at_infinity: infinity,
        operator_negative: worst_margin < 0.0,
        worst_margin,
        operator_crosscheck: crosscheck,
    })
}
