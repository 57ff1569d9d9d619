//! Coupling-matrix validation, the Λ functionals and the admissible energy
//! hypersurface Π₂ = {Λ_I(σ) = 0, Λ_J(σ) > 0 for every proper nonempty J}.
//!
//! Index sets are represented as bitmasks (`bit i` set means component `i`,
//! 0-based) for enumeration, and as index slices at the public surface.

use std::collections::VecDeque;
use std::fmt;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest system size for which the 2^n − 2 proper subsets are enumerated.
pub const MAX_SUBSET_DIM: usize = 16;

/// Membership tolerance used when tagging roots and samples.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

const MAX_REJECTIONS: usize = 1_000_000;

/// A validated coupling matrix: symmetric, nonnegative, irreducible and
/// invertible.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    entries: DMatrix<f64>,
    inverse: DMatrix<f64>,
    diag_positive: bool,
}

impl CouplingMatrix {
    /// Validate a raw row-major matrix.
    pub fn new(raw: &[Vec<f64>]) -> Result<Self> {
        validate_matrix(raw)
    }

    pub fn n(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// True when every diagonal entry is strictly positive, in which case
    /// every choice of initial heights yields a finite-energy solution.
    pub fn diag_positive(&self) -> bool {
        self.diag_positive
    }

    /// Largest entry in absolute value.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.n())
            .map(|i| (0..self.n()).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// `A + εI`. Adding a nonnegative multiple of the identity keeps every
    /// structural property; only invertibility has to be re-checked.
    pub fn perturbed(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0) || !epsilon.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "perturbation epsilon must be finite and >= 0 (got {epsilon})"
            )));
        }
        if epsilon == 0.0 {
            return Ok(self.clone());
        }
        let mut rows = self.to_rows();
        for (i, row) in rows.iter_mut().enumerate() {
            row[i] += epsilon;
        }
        validate_matrix(&rows)
    }

    /// `Σ_j a_ij x_j` for every `i`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }
}

/// Singularity exponents β_i > −2.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SingularityExponents(Vec<f64>);

impl SingularityExponents {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        for (index, &value) in beta.iter().enumerate() {
            if !value.is_finite() || value <= -2.0 {
                return Err(Error::BetaOutOfRange { index, value });
            }
        }
        Ok(Self(beta))
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

    /// `2 + β_i`, the homogeneity degree of component `i`.
    #[inline]
    pub fn gamma(&self, i: usize) -> f64 {
        2.0 + self.0[i]
    }

    pub fn gammas(&self) -> Vec<f64> {
        self.0.iter().map(|b| 2.0 + b).collect()
    }
}

impl std::ops::Index<usize> for SingularityExponents {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Energies σ_i = ∫_0^∞ r^{1+β_i} e^{u_i(r)} dr.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EnergyVector(Vec<f64>);

impl EnergyVector {
    pub fn new(sigma: Vec<f64>) -> Result<Self> {
        for (i, &s) in sigma.iter().enumerate() {
            if !s.is_finite() || s < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "energy component {} must be finite and >= 0 (got {s})",
                    i + 1
                )));
            }
        }
        Ok(Self(sigma))
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

    pub fn max_norm(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for EnergyVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

/// Why an energy vector is not in Π₂.
#[derive(Debug, Clone, PartialEq)]
pub enum OutsideReason {
    /// |Λ_I(σ)| exceeds the scaled tolerance.
    LambdaINonzero { value: f64 },
    /// Some proper subset has Λ_J ≤ tol (0-based indices).
    LambdaJNotPositive { subset: Vec<usize>, value: f64 },
    /// Every component is zero.
    ZeroEnergy,
}

/// Result of a Π₂ membership test.
#[derive(Debug, Clone, PartialEq)]
pub enum Membership {
    Inside,
    /// Λ_I vanishes and the first failing Λ_J is zero within tolerance, with
    /// every component strictly positive (0-based indices).
    OnBoundary(Vec<usize>),
    Outside(OutsideReason),
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside)
    }
}

impl fmt::Display for Membership {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Membership::Inside => write!(f, "inside"),
            Membership::OnBoundary(j) => write!(f, "on_boundary({})", subset_label(j)),
            Membership::Outside(OutsideReason::LambdaINonzero { value }) => {
                write!(f, "outside(Lambda_I = {value:e})")
            }
            Membership::Outside(OutsideReason::LambdaJNotPositive { subset, value }) => {
                write!(f, "outside(Lambda_{} = {value:e})", subset_label(subset))
            }
            Membership::Outside(OutsideReason::ZeroEnergy) => write!(f, "outside(sigma = 0)"),
        }
    }
}

/// 1-based set label such as `{1,3}`.
pub fn subset_label(subset: &[usize]) -> String {
    let items: Vec<String> = subset.iter().map(|i| (i + 1).to_string()).collect();
    format!("{{{}}}", items.join(","))
}

/// Indices contained in a bitmask.
pub fn mask_indices(mask: u32, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

/// Proper nonempty subsets of {0..n} as bitmasks, in increasing mask order.
pub fn proper_subsets(n: usize) -> Result<impl Iterator<Item = u32>> {
    if n > MAX_SUBSET_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let full: u32 = if n == 0 { 0 } else { (1u32 << n) - 1 };
    Ok((1..full).filter(move |m| *m != full))
}

/// Validate a raw matrix against symmetry, nonnegativity, irreducibility and
/// invertibility, computing its inverse.
pub fn validate_matrix(raw: &[Vec<f64>]) -> Result<CouplingMatrix> {
    let n = raw.len();
    if n == 0 {
        return Err(Error::Shape("empty matrix".into()));
    }
    for (i, row) in raw.iter().enumerate() {
        if row.len() != n {
            return Err(Error::Shape(format!(
                "row {} has {} entries, expected {n}",
                i + 1,
                row.len()
            )));
        }
        for (j, v) in row.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if raw[i][j] != raw[j][i] {
                return Err(Error::NotSymmetric { row: i, col: j });
            }
        }
    }
    for (i, row) in raw.iter().enumerate() {
        for (j, &value) in row.iter().enumerate() {
            if value < 0.0 {
                return Err(Error::NegativeEntry { row: i, col: j, value });
            }
        }
    }
    if let Some((part1, part2)) = disconnected_partition(raw) {
        return Err(Error::Reducible {
            part1: part1.into_iter().map(|i| i + 1).collect(),
            part2: part2.into_iter().map(|i| i + 1).collect(),
        });
    }

    let entries = DMatrix::from_fn(n, n, |i, j| raw[i][j]);
    let scale = entries.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let lu = entries.clone().lu();
    let det = lu.determinant();
    if det.abs() < 1e-12 * scale.powi(n as i32) {
        return Err(Error::Singular { det });
    }
    let mut inverse = lu.try_inverse().ok_or(Error::Singular { det })?;
    // one step of iterative refinement: X <- X + X (I - A X)
    let identity = DMatrix::<f64>::identity(n, n);
    let defect = &identity - &entries * &inverse;
    inverse += &inverse * defect;
    let check = &inverse * &entries - &identity;
    if check.iter().any(|v| v.abs() > 1e-12) {
        return Err(Error::Singular { det });
    }

    let diag_positive = (0..n).all(|i| raw[i][i] > 0.0);
    Ok(CouplingMatrix {
        entries,
        inverse,
        diag_positive,
    })
}

/// Breadth-first search on the graph with edges {i, j : a_ij > 0}. Returns
/// the reached component and its complement when the graph is disconnected.
fn disconnected_partition(raw: &[Vec<f64>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = raw.len();
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([0usize]);
    seen[0] = true;
    while let Some(i) = queue.pop_front() {
        for j in 0..n {
            if !seen[j] && raw[i][j] > 0.0 {
                seen[j] = true;
                queue.push_back(j);
            }
        }
    }
    if seen.iter().all(|&s| s) {
        return None;
    }
    let reached = (0..n).filter(|&i| seen[i]).collect();
    let rest = (0..n).filter(|&i| !seen[i]).collect();
    Some((reached, rest))
}

fn check_dims(a: &CouplingMatrix, beta: &SingularityExponents, sigma: &[f64]) -> Result<()> {
    let n = a.n();
    if beta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
    }
    if sigma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    Ok(())
}

/// Λ over a bitmask, no validation.
pub(crate) fn lambda_mask(mask: u32, sigma: &[f64], a: &CouplingMatrix, beta: &SingularityExponents) -> f64 {
    let n = a.n();
    let mut linear = 0.0;
    let mut quadratic = 0.0;
    for i in (0..n).filter(|i| mask & (1 << i) != 0) {
        linear += beta.gamma(i) * sigma[i];
        for j in (0..n).filter(|j| mask & (1 << j) != 0) {
            quadratic += a.get(i, j) * sigma[i] * sigma[j];
        }
    }
    2.0 * linear - quadratic
}

/// Λ_J(σ) = 2 Σ_{i∈J} (2+β_i) σ_i − Σ_{i,j∈J} a_ij σ_i σ_j for a 0-based
/// index set `subset`.
pub fn lambda_j(
    subset: &[usize],
    sigma: &EnergyVector,
    a: &CouplingMatrix,
    beta: &SingularityExponents,
) -> Result<f64> {
    check_dims(a, beta, sigma.as_slice())?;
    if subset.is_empty() {
        return Err(Error::EmptySubset);
    }
    let n = a.n();
    let mut seen = vec![false; n];
    let mut linear = 0.0;
    let mut idx = Vec::with_capacity(subset.len());
    for &i in subset {
        if i >= n {
            return Err(Error::IndexOutOfRange { index: i, n });
        }
        if !seen[i] {
            seen[i] = true;
            idx.push(i);
        }
    }
    let mut quadratic = 0.0;
    for &i in &idx {
        linear += beta.gamma(i) * sigma[i];
        for &j in &idx {
            quadratic += a.get(i, j) * sigma[i] * sigma[j];
        }
    }
    Ok(2.0 * linear - quadratic)
}

/// Λ_I(σ) over the full index set; `sigma` need not be nonnegative.
pub fn lambda_full(sigma: &[f64], a: &CouplingMatrix, beta: &SingularityExponents) -> f64 {
    let n = a.n();
    let full = if n >= 32 { u32::MAX } else { (1u32 << n) - 1 };
    lambda_mask(full, sigma, a, beta)
}

/// Residual scale `max(1, ‖σ‖∞² ‖A‖_max)` for the quadratic Λ functionals.
pub fn lambda_scale(sigma: &[f64], a: &CouplingMatrix) -> f64 {
    let s = sigma.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    (s * s * a.max_abs()).max(1.0)
}

/// Λ_J for every proper nonempty subset, as (0-based subset, value) pairs.
pub fn lambda_all_proper(
    sigma: &[f64],
    a: &CouplingMatrix,
    beta: &SingularityExponents,
) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = a.n();
    Ok(proper_subsets(n)?
        .map(|m| (mask_indices(m, n), lambda_mask(m, sigma, a, beta)))
        .collect())
}

/// Test σ against Π₂ with residual tolerance `tol`.
pub fn pi2_membership(
    sigma: &EnergyVector,
    a: &CouplingMatrix,
    beta: &SingularityExponents,
    tol: f64,
) -> Result<Membership> {
    check_dims(a, beta, sigma.as_slice())?;
    let n = a.n();
    let subsets: Vec<u32> = proper_subsets(n)?.collect();
    let s = sigma.as_slice();
    // no proper subset guards this when n = 1
    if s.iter().all(|&v| v == 0.0) {
        return Ok(Membership::Outside(OutsideReason::ZeroEnergy));
    }
    let scale = lambda_scale(s, a);
    let full = lambda_full(s, a, beta);
    if full.abs() > tol * scale {
        return Ok(Membership::Outside(OutsideReason::LambdaINonzero { value: full }));
    }
    let all_positive = s.iter().all(|&v| v > 0.0);
    for mask in subsets {
        let value = lambda_mask(mask, s, a, beta);
        if value <= tol {
            let subset = mask_indices(mask, n);
            if all_positive && value >= -tol * scale {
                return Ok(Membership::OnBoundary(subset));
            }
            return Ok(Membership::Outside(OutsideReason::LambdaJNotPositive { subset, value }));
        }
    }
    Ok(Membership::Inside)
}

/// A candidate last component together with its membership tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SigmaRoot {
    pub sigma: EnergyVector,
    pub membership: Membership,
}

/// Solve Λ_I(σ) = 0 for σ_n given σ_1..σ_{n−1}. Quadratic in σ_n when
/// a_nn > 0, linear otherwise. Returns the nonnegative roots in increasing
/// order, each tagged with its Π₂ membership.
pub fn solve_sigma_last(
    sigma_partial: &[f64],
    a: &CouplingMatrix,
    beta: &SingularityExponents,
) -> Result<Vec<SigmaRoot>> {
    let n = a.n();
    if beta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
    }
    if sigma_partial.len() + 1 != n {
        return Err(Error::DimensionMismatch {
            expected: n - 1,
            got: sigma_partial.len(),
        });
    }
    if let Some(bad) = sigma_partial.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "partial energies must be finite and >= 0 (got {bad})"
        )));
    }
    let last = n - 1;
    let head_mask: u32 = (1u32 << last) - 1;
    let mut padded = sigma_partial.to_vec();
    padded.push(0.0);
    let qa = -a.get(last, last);
    let coupling: f64 = (0..last).map(|j| a.get(last, j) * sigma_partial[j]).sum();
    let qb = 2.0 * beta.gamma(last) - 2.0 * coupling;
    let qc = if last == 0 {
        0.0
    } else {
        lambda_mask(head_mask, &padded, a, beta)
    };

    let mut roots = Vec::with_capacity(2);
    if qa == 0.0 {
        if qb != 0.0 {
            roots.push(-qc / qb);
        }
    } else {
        let disc = qb * qb - 4.0 * qa * qc;
        if disc >= 0.0 {
            let sq = disc.sqrt();
            let q = -0.5 * (qb + qb.signum() * sq);
            if q != 0.0 {
                roots.push(q / qa);
                roots.push(qc / q);
            } else {
                // qb = 0 and disc = 0: double root at zero
                roots.push(0.0);
            }
        }
    }
    let mut roots: Vec<f64> = roots
        .into_iter()
        .filter(|x| x.is_finite() && *x >= 0.0)
        .map(|x| if x == 0.0 { 0.0 } else { x })
        .collect();
    roots.sort_by(|x, y| x.partial_cmp(y).unwrap());
    roots.dedup();
    if roots.is_empty() {
        return Err(Error::NoNonnegativeRoot);
    }
    roots
        .into_iter()
        .map(|x| {
            let mut full = sigma_partial.to_vec();
            full.push(x);
            let sigma = EnergyVector::new(full)?;
            let membership = pi2_membership(&sigma, a, beta, MEMBERSHIP_TOL)?;
            Ok(SigmaRoot { sigma, membership })
        })
        .collect()
}

/// Upper edge of the sampling box for component `i`: Λ_{{i}} > 0 forces
/// σ_i < 2(2+β_i)/a_ii when a_ii > 0.
fn sampling_bound(a: &CouplingMatrix, beta: &SingularityExponents, i: usize) -> f64 {
    let aii = a.get(i, i);
    if aii > 0.0 {
        2.0 * beta.gamma(i) / aii
    } else {
        4.0 * beta.gamma(i)
    }
}

/// Draw `count` points of Π₂ by rejection sampling σ_1..σ_{n−1} in a box and
/// completing σ_n from Λ_I = 0. Deterministic for a fixed seed.
pub fn sample_pi2(
    a: &CouplingMatrix,
    beta: &SingularityExponents,
    count: usize,
    seed: u64,
) -> Result<Vec<EnergyVector>> {
    let n = a.n();
    if beta.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: beta.len() });
    }
    if n > MAX_SUBSET_DIM {
        return Err(Error::DimensionTooLarge(n));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bounds: Vec<f64> = (0..n.saturating_sub(1)).map(|i| sampling_bound(a, beta, i)).collect();
    let mut out = Vec::with_capacity(count);
    let mut rejected = 0usize;
    while out.len() < count {
        // (0, b]: 1 - U with U in [0, 1)
        let partial: Vec<f64> = bounds
            .iter()
            .map(|b| b * (1.0 - rng.gen::<f64>()))
            .collect();
        let accepted = match solve_sigma_last(&partial, a, beta) {
            Ok(roots) => roots.into_iter().find(|r| r.membership.is_inside()),
            Err(Error::NoNonnegativeRoot) => None,
            Err(e) => return Err(e),
        };
        match accepted {
            Some(root) => out.push(root.sigma),
            None => {
                rejected += 1;
                if rejected >= MAX_REJECTIONS {
                    return Err(Error::SamplingExhausted(rejected));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[f64]]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| r.to_vec()).collect()
    }

    fn beta(b: &[f64]) -> SingularityExponents {
        SingularityExponents::new(b.to_vec()).unwrap()
    }

    fn sigma(s: &[f64]) -> EnergyVector {
        EnergyVector::new(s.to_vec()).unwrap()
    }

    #[test]
    fn validates_positive_definite_pair() {
        let a = validate_matrix(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        assert!(a.diag_positive());
        let inv = a.inverse();
        assert!((inv[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        assert!((inv[(0, 1)] + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn identity_is_reducible() {
        let err = validate_matrix(&mat(&[&[1.0, 0.0], &[0.0, 1.0]])).unwrap_err();
        assert_eq!(
            err,
            Error::Reducible {
                part1: vec![1],
                part2: vec![2]
            }
        );
    }

    #[test]
    fn zero_diagonal_is_valid() {
        let a = validate_matrix(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert!(!a.diag_positive());
    }

    #[test]
    fn structural_errors() {
        assert!(matches!(
            validate_matrix(&mat(&[&[1.0, 2.0], &[1.0, 1.0]])),
            Err(Error::NotSymmetric { .. })
        ));
        assert!(matches!(
            validate_matrix(&mat(&[&[1.0, -1.0], &[-1.0, 1.0]])),
            Err(Error::NegativeEntry { .. })
        ));
        assert!(matches!(
            validate_matrix(&mat(&[&[1.0, 1.0], &[1.0, 1.0]])),
            Err(Error::Singular { .. })
        ));
        assert!(matches!(validate_matrix(&mat(&[&[1.0, 1.0]])), Err(Error::Shape(_))));
        assert!(matches!(validate_matrix(&[vec![0.0]]), Err(Error::Singular { .. })));
    }

    #[test]
    fn beta_bound() {
        assert!(SingularityExponents::new(vec![-2.0]).is_err());
        assert!(SingularityExponents::new(vec![-1.999]).is_ok());
    }

    #[test]
    fn lambda_examples() {
        let a = validate_matrix(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let b = beta(&[0.0, 0.0]);
        let s = sigma(&[4.0 / 3.0, 4.0 / 3.0]);
        assert!(lambda_j(&[0, 1], &s, &a, &b).unwrap().abs() < 1e-14);
        assert!((lambda_j(&[0], &s, &a, &b).unwrap() - 16.0 / 9.0).abs() < 1e-14);
        assert_eq!(lambda_j(&[1], &sigma(&[0.0, 0.0]), &a, &b).unwrap(), 0.0);
        assert_eq!(lambda_j(&[], &s, &a, &b), Err(Error::EmptySubset));
        assert!(matches!(
            lambda_j(&[2], &s, &a, &b),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let a = validate_matrix(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let b = beta(&[0.0, 0.0]);
        let m = pi2_membership(&sigma(&[4.0 / 3.0, 4.0 / 3.0]), &a, &b, 1e-9).unwrap();
        assert_eq!(m, Membership::Inside);
        for s in [0.5, 2.0, 3.0] {
            let m = pi2_membership(&sigma(&[0.0, s]), &a, &b, 1e-9).unwrap();
            assert!(matches!(m, Membership::Outside(_)), "{m}");
        }
        // exactly on Λ_I = 0 with a vanishing component: Λ_{1} = 0 fails
        let m = pi2_membership(&sigma(&[0.0, 2.0]), &a, &b, 1e-9).unwrap();
        assert_eq!(
            m,
            Membership::Outside(OutsideReason::LambdaJNotPositive {
                subset: vec![0],
                value: 0.0
            })
        );
        let one = validate_matrix(&[vec![1.0]]).unwrap();
        let m = pi2_membership(&sigma(&[4.0]), &one, &beta(&[0.0]), 1e-9).unwrap();
        assert_eq!(m, Membership::Inside);
    }

    #[test]
    fn membership_boundary_point() {
        // a_11 = 4 > 2 a_12: σ = (1, 2) has Λ_{1} = 0 and Λ_I = 0
        let a = validate_matrix(&mat(&[&[4.0, 1.0], &[1.0, 1.0]])).unwrap();
        let b = beta(&[0.0, 0.0]);
        let m = pi2_membership(&sigma(&[1.0, 2.0]), &a, &b, 1e-9).unwrap();
        assert_eq!(m, Membership::OnBoundary(vec![0]));
    }

    #[test]
    fn sigma_last_examples() {
        let one = validate_matrix(&[vec![1.0]]).unwrap();
        let roots = solve_sigma_last(&[], &one, &beta(&[0.0])).unwrap();
        let values: Vec<f64> = roots.iter().map(|r| r.sigma[0]).collect();
        assert_eq!(values, vec![0.0, 4.0]);
        assert!(!roots[0].membership.is_inside());
        assert!(roots[1].membership.is_inside());

        let a = validate_matrix(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let roots = solve_sigma_last(&[4.0 / 3.0], &a, &beta(&[0.0, 0.0])).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0].sigma[1] - 4.0 / 3.0).abs() < 1e-14);
        assert!(roots[0].membership.is_inside());

        let z = validate_matrix(&mat(&[&[0.0, 1.0], &[1.0, 0.0]])).unwrap();
        assert_eq!(
            solve_sigma_last(&[2.0], &z, &beta(&[0.0, 0.0])),
            Err(Error::NoNonnegativeRoot)
        );
        // σ_2 = 4σ_1 / (2σ_1 − 4) away from the pole
        let roots = solve_sigma_last(&[3.0], &z, &beta(&[0.0, 0.0])).unwrap();
        assert!((roots[0].sigma[1] - 6.0).abs() < 1e-14);
    }

    #[test]
    fn sampling_examples() {
        let one = validate_matrix(&[vec![1.0]]).unwrap();
        assert!(sample_pi2(&one, &beta(&[0.0]), 0, 1).unwrap().is_empty());
        let pts = sample_pi2(&one, &beta(&[-0.5]), 1, 1).unwrap();
        assert_eq!(pts[0].as_slice(), &[3.0]);

        let a = validate_matrix(&mat(&[&[2.0, 1.0], &[1.0, 2.0]])).unwrap();
        let b = beta(&[0.0, 0.0]);
        let pts = sample_pi2(&a, &b, 10, 42).unwrap();
        assert_eq!(pts.len(), 10);
        for p in &pts {
            assert!(pi2_membership(p, &a, &b, 1e-9).unwrap().is_inside());
        }
        assert_eq!(pts, sample_pi2(&a, &b, 10, 42).unwrap());
        assert_ne!(pts, sample_pi2(&a, &b, 10, 43).unwrap());
    }

    #[test]
    fn subset_cap() {
        let n = 17;
        let raw: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 2.0 } else { 0.01 }).collect())
            .collect();
        let a = validate_matrix(&raw).unwrap();
        let b = SingularityExponents::new(vec![0.0; n]).unwrap();
        let s = EnergyVector::new(vec![0.1; n]).unwrap();
        assert_eq!(
            pi2_membership(&s, &a, &b, 1e-9),
            Err(Error::DimensionTooLarge(17))
        );
    }
}
