//! Inverse energy map: find initial heights c (with c_n = 0) whose radial
//! solution has a prescribed energy vector, by damped Newton iteration on
//! σ_1..σ_{n−1} with the variational Jacobian.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::algebra::{lambda_all_proper, lambda_scale, pi2_membership, EnergyVector, Membership, MEMBERSHIP_TOL};
use crate::error::{Error, Result};
use crate::linearized::jacobian_of;
use crate::radial::{integrate, InitialHeights, ProblemSpec, RadialProfile};

pub const DEFAULT_SHOOT_TOL: f64 = 1e-8;
const MAX_ITERATIONS: usize = 50;
/// Iteration-cap multiplier for targets close to the boundary of Π₂.
const BOUNDARY_RELAXATION: usize = 4;
/// Relative Λ_J margin below which a target counts as near the boundary.
const BOUNDARY_MARGIN: f64 = 1e-3;
const MIN_DAMPING: f64 = 1.0 / 256.0;
/// Largest change of any c_i in one Newton step.
const STEP_CAP: f64 = 3.0;
/// Largest accepted jump of σ in one step, relative to ‖σ‖∞.
const MAX_SIGMA_JUMP: f64 = 0.5;

/// Outcome of a shooting run.
#[derive(Debug, Clone)]
pub struct ShootingResult {
    pub c: InitialHeights,
    pub profile: RadialProfile,
    pub target: EnergyVector,
    pub achieved: EnergyVector,
    pub iterations: usize,
    pub converged: bool,
    /// The target was within the boundary margin of Π₂.
    pub near_boundary: bool,
    /// ‖σ_{1..n−1} − target‖∞ at each iterate.
    pub residual_history: Vec<f64>,
    /// max ‖F_{k+1}‖/‖F_k‖² over iterates with ‖F_k‖ < 1e-3.
    pub quadratic_ratio: Option<f64>,
    /// Condition number of the last Jacobian used.
    pub condition: Option<f64>,
}

impl ShootingResult {
    /// ‖achieved − target‖∞ over all components.
    pub fn mismatch(&self) -> f64 {
        self.achieved
            .as_slice()
            .iter()
            .zip(self.target.as_slice())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Initial guess from the scalar scaling law σ = 2γ²e^{h}/… : h_i =
/// log(σ_i γ_i² / 2), shifted so that the last height is 0.
pub fn default_guess(spec: &ProblemSpec, target: &EnergyVector) -> InitialHeights {
    let n = spec.n();
    let h: Vec<f64> = (0..n)
        .map(|i| {
            let g = spec.beta.gamma(i);
            (target[i].max(1e-12) * g * g / 2.0).ln()
        })
        .collect();
    InitialHeights::new((0..n).map(|i| h[i] - h[n - 1]).collect()).expect("finite guess")
}

fn check_target(spec: &ProblemSpec, target: &EnergyVector) -> Result<bool> {
    let n = spec.n();
    if target.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: target.len(),
        });
    }
    match pi2_membership(target, &spec.a, &spec.beta, MEMBERSHIP_TOL)? {
        Membership::Inside => {}
        other => return Err(Error::TargetNotInPi2(other.to_string())),
    }
    let s = target.as_slice();
    let scale = lambda_scale(s, &spec.a);
    let min_j = lambda_all_proper(s, &spec.a, &spec.beta)?
        .into_iter()
        .map(|(_, v)| v)
        .fold(f64::INFINITY, f64::min);
    Ok(min_j < BOUNDARY_MARGIN * scale)
}

fn solve_converged(spec: &ProblemSpec, c: &[f64]) -> Option<RadialProfile> {
    let heights = InitialHeights::new(c.to_vec()).ok()?;
    integrate(spec, &heights).ok().filter(|p| p.converged())
}

fn residual_vec(profile: &RadialProfile, target: &EnergyVector) -> DVector<f64> {
    let p = profile.n() - 1;
    DVector::from_fn(p, |i, _| profile.sigma()[i] - target[i])
}

/// Solve J dx = −F, falling back to a least-squares solve when J is
/// numerically singular.
fn newton_direction(jac: &DMatrix<f64>, f: &DVector<f64>) -> DVector<f64> {
    if let Some(x) = jac.clone().lu().solve(&(-f)) {
        if x.iter().all(|v| v.is_finite()) {
            return x;
        }
    }
    jac.clone()
        .svd(true, true)
        .solve(&(-f), 1e-14)
        .unwrap_or_else(|_| DVector::zeros(f.len()))
}

/// Find c with c_n = 0 such that σ(c) = target.
pub fn shoot(
    spec: &ProblemSpec,
    target: &EnergyVector,
    guess: Option<&InitialHeights>,
    shoot_tol: f64,
) -> Result<ShootingResult> {
    spec.validate()?;
    if !(shoot_tol > 0.0) {
        return Err(Error::InvalidTolerance(format!("shoot_tol = {shoot_tol}")));
    }
    let near_boundary = check_target(spec, target)?;
    let n = spec.n();
    let mut c: Vec<f64> = match guess {
        Some(g) if g.len() == n => g.as_slice().to_vec(),
        Some(g) => {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: g.len(),
            })
        }
        None => default_guess(spec, target).into_inner(),
    };
    c[n - 1] = 0.0;
    let cap = if near_boundary {
        MAX_ITERATIONS * BOUNDARY_RELAXATION
    } else {
        MAX_ITERATIONS
    };

    let mut profile = solve_converged(spec, &c).ok_or_else(|| Error::IntegrationFailed { c: c.clone() })?;
    let mut history = Vec::new();
    let mut quadratic_ratio: Option<f64> = None;
    let mut condition = None;
    let mut iterations = 0;
    loop {
        let f = residual_vec(&profile, target);
        let norm = f.amax();
        if let Some(&prev) = history.last() {
            if prev < 1e-3 && prev > 0.0 {
                let ratio = norm / (prev * prev);
                quadratic_ratio = Some(quadratic_ratio.map_or(ratio, |q: f64| q.max(ratio)));
            }
        }
        history.push(norm);
        // σ_n follows from Λ_I = 0 only up to the conditioning of the
        // surface, so the full vector is checked
        let full = norm.max((profile.sigma()[n - 1] - target[n - 1]).abs());
        if full <= shoot_tol || norm <= 1e-3 * shoot_tol || n == 1 {
            break;
        }
        if iterations >= cap {
            return Err(Error::MaxIterations {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let jac = jacobian_of(profile.clone())?;
        condition = jac.condition;
        let mut dx = newton_direction(&jac.m, &f);
        let biggest = dx.amax();
        if biggest > STEP_CAP {
            dx *= STEP_CAP / biggest;
        }
        let sigma_norm = profile.sigma().max_norm();
        let mut damping = 1.0;
        let mut accepted = None;
        let mut fallback = None;
        while damping >= MIN_DAMPING {
            let mut trial = c.clone();
            for i in 0..n - 1 {
                trial[i] += damping * dx[i];
            }
            if let Some(p) = solve_converged(spec, &trial) {
                let jump = p
                    .sigma()
                    .as_slice()
                    .iter()
                    .zip(profile.sigma().as_slice())
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max);
                if jump <= MAX_SIGMA_JUMP * sigma_norm {
                    let trial_norm = residual_vec(&p, target).amax();
                    if trial_norm < norm {
                        accepted = Some((trial, p));
                        break;
                    }
                    fallback = Some((trial, p));
                }
            }
            damping *= 0.5;
        }
        match accepted.or(fallback) {
            Some((trial, p)) => {
                c = trial;
                profile = p;
            }
            None => return Err(Error::IntegrationFailed { c }),
        }
    }
    let achieved = profile.sigma().clone();
    let mut result = ShootingResult {
        c: InitialHeights::new(c)?,
        profile,
        target: target.clone(),
        achieved,
        iterations,
        converged: false,
        near_boundary,
        residual_history: history,
        quadratic_ratio,
        condition,
    };
    result.converged = result.mismatch() <= shoot_tol;
    Ok(result)
}

/// Agreement of shooting runs started from different guesses.
#[derive(Debug, Clone)]
pub struct UniquenessReport {
    pub solutions: Vec<InitialHeights>,
    /// max_i (max c_i − min c_i) over the runs.
    pub spread: f64,
    pub all_converged: bool,
}

/// Shoot from `trials` random guesses around the default one.
pub fn uniqueness_probe(
    spec: &ProblemSpec,
    target: &EnergyVector,
    trials: usize,
    seed: u64,
    shoot_tol: f64,
) -> Result<UniquenessReport> {
    check_target(spec, target)?;
    let n = spec.n();
    let base = default_guess(spec, target);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut solutions = Vec::with_capacity(trials);
    let mut all_converged = true;
    for _ in 0..trials {
        let mut g = base.as_slice().to_vec();
        for v in g.iter_mut().take(n - 1) {
            *v += rng.gen_range(-1.0..1.0);
        }
        let result = shoot(spec, target, Some(&InitialHeights::new(g)?), shoot_tol)?;
        all_converged &= result.converged;
        solutions.push(result.c);
    }
    let spread = (0..n)
        .map(|i| {
            let (lo, hi) = solutions
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| (lo.min(c[i]), hi.max(c[i])));
            if solutions.is_empty() {
                0.0
            } else {
                hi - lo
            }
        })
        .fold(0.0, f64::max);
    Ok(UniquenessReport {
        solutions,
        spread,
        all_converged,
    })
}

/// The same problem with coupling A + εI.
pub fn perturbed_spec(spec: &ProblemSpec, epsilon: f64) -> Result<ProblemSpec> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon = {epsilon} must be >= 0")));
    }
    let mut out = spec.clone();
    if epsilon > 0.0 {
        out.a = spec.a.perturbed(epsilon)?;
    }
    Ok(out)
}

/// Rescale σ radially onto Λ_I = 0 for the given spec:
/// s σ with s = 2 Σ γ_i σ_i / σᵀ A σ.
pub fn project_to_pi2(spec: &ProblemSpec, sigma: &[f64]) -> Result<EnergyVector> {
    let n = spec.n();
    let linear: f64 = (0..n).map(|i| spec.beta.gamma(i) * sigma[i]).sum();
    let quadratic: f64 = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| spec.a.get(i, j) * sigma[i] * sigma[j])
        .sum();
    if !(quadratic > 0.0) {
        return Err(Error::TargetNotInPi2("σᵀAσ must be positive".into()));
    }
    let s = 2.0 * linear / quadratic;
    EnergyVector::new(sigma.iter().map(|v| s * v).collect())
}

/// One rung of the ε ladder.
#[derive(Debug, Clone)]
pub struct Rung {
    pub epsilon: f64,
    pub target: EnergyVector,
    pub result: ShootingResult,
}

#[derive(Debug, Clone)]
pub struct ContinuationReport {
    pub rungs: Vec<Rung>,
    /// ‖c(ε_last) − c(ε_prev)‖∞.
    pub cauchy_gap: f64,
}

/// Shoot on A + εI for each ε in `ladder` (decreasing), targeting the
/// radial projection of `target` onto the perturbed hypersurface and
/// warm-starting each rung from the previous one.
pub fn continuation(
    spec: &ProblemSpec,
    target: &EnergyVector,
    ladder: &[f64],
    shoot_tol: f64,
) -> Result<ContinuationReport> {
    let mut rungs: Vec<Rung> = Vec::with_capacity(ladder.len());
    for &eps in ladder {
        let perturbed = perturbed_spec(spec, eps)?;
        let projected = project_to_pi2(&perturbed, target.as_slice())?;
        let guess = rungs.last().map(|r| r.result.c.clone());
        let result = shoot(&perturbed, &projected, guess.as_ref(), shoot_tol)?;
        rungs.push(Rung {
            epsilon: eps,
            target: projected,
            result,
        });
    }
    let cauchy_gap = match rungs.len() {
        0 | 1 => 0.0,
        len => {
            let a = &rungs[len - 1].result.c;
            let b = &rungs[len - 2].result.c;
            a.as_slice()
                .iter()
                .zip(b.as_slice())
                .map(|(x, y)| (x - y).abs())
                .fold(0.0, f64::max)
        }
    };
    Ok(ContinuationReport { rungs, cauchy_gap })
}
