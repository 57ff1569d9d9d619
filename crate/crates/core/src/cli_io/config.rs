use serde::Deserialize;

use crate::algebra::{validate_matrix, EnergyVector, SingularityExponents};
use crate::error::{Error, Result};
use crate::radial::{InitialHeights, ProblemSpec, DEFAULT_TOL_ENERGY, DEFAULT_TOL_STEP, DEFAULT_T_MAX, DEFAULT_T_MIN};
use crate::shooting::DEFAULT_SHOOT_TOL;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Validate,
    Solve,
    Energy,
    Shoot,
    Linearize,
    Modes,
    Sample,
    Oracle,
    Suite,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Validate => "validate",
            Command::Solve => "solve",
            Command::Energy => "energy",
            Command::Shoot => "shoot",
            Command::Linearize => "linearize",
            Command::Modes => "modes",
            Command::Sample => "sample",
            Command::Oracle => "oracle",
            Command::Suite => "suite",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    tol_step: Option<f64>,
    tol_energy: Option<f64>,
    shoot_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindow {
    t_min: Option<f64>,
    t_max: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    command: Command,
    #[serde(rename = "A")]
    a: Option<Vec<Vec<f64>>>,
    beta: Option<Vec<f64>>,
    c: Option<Vec<f64>>,
    target: Option<Vec<f64>>,
    k: Option<u32>,
    alpha: Option<Vec<f64>>,
    delta: Option<f64>,
    epsilon_ladder: Option<Vec<f64>>,
    count: Option<usize>,
    seed: Option<u64>,
    #[serde(default)]
    tolerances: RawTolerances,
    #[serde(default)]
    window: RawWindow,
}

/// A parsed and validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    /// Absent only for `suite`.
    pub spec: Option<ProblemSpec>,
    pub c: Option<InitialHeights>,
    pub target: Option<EnergyVector>,
    pub k: Option<u32>,
    pub alpha: Option<Vec<f64>>,
    pub delta: Option<f64>,
    pub epsilon_ladder: Option<Vec<f64>>,
    pub count: Option<usize>,
    pub seed: Option<u64>,
    pub shoot_tol: f64,
}

impl RunConfig {
    /// The problem, or a validation error naming the missing key.
    pub fn spec(&self) -> Result<&ProblemSpec> {
        self.spec.as_ref().ok_or_else(|| missing("A"))
    }

    pub fn heights(&self) -> Result<&InitialHeights> {
        self.c.as_ref().ok_or_else(|| missing("c"))
    }

    pub fn target(&self) -> Result<&EnergyVector> {
        self.target.as_ref().ok_or_else(|| missing("target"))
    }
}

fn missing(key: &str) -> Error {
    Error::Validation(Box::new(Error::InvalidArgument(format!("missing `{key}`"))))
}

fn validation(e: Error) -> Error {
    match e {
        Error::Validation(_) => e,
        other => Error::Validation(Box::new(other)),
    }
}

fn check_len(name: &str, got: usize, n: usize) -> Result<()> {
    if got != n {
        return Err(validation(Error::InvalidArgument(format!(
            "`{name}` has length {got}, expected {n}"
        ))));
    }
    Ok(())
}

/// Parse a JSON configuration, fill defaults and validate the problem.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| Error::Schema {
        path: e.path().to_string(),
        message: e.into_inner().to_string(),
    })?;

    let spec = match (raw.a, raw.beta) {
        (Some(a), Some(beta)) => {
            let a = validate_matrix(&a).map_err(validation)?;
            let beta = SingularityExponents::new(beta).map_err(validation)?;
            let spec = ProblemSpec::new(a, beta)
                .and_then(|s| {
                    s.with_tolerances(
                        raw.tolerances.tol_step.unwrap_or(DEFAULT_TOL_STEP),
                        raw.tolerances.tol_energy.unwrap_or(DEFAULT_TOL_ENERGY),
                    )
                })
                .and_then(|s| {
                    s.with_window(
                        raw.window.t_min.unwrap_or(DEFAULT_T_MIN),
                        raw.window.t_max.unwrap_or(DEFAULT_T_MAX),
                    )
                })
                .map_err(validation)?;
            Some(spec)
        }
        (None, None) if raw.command == Command::Suite => None,
        (None, _) => return Err(missing("A")),
        (_, None) => return Err(missing("beta")),
    };
    let n = spec.as_ref().map(ProblemSpec::n);

    let c = match raw.c {
        Some(c) => {
            if let Some(n) = n {
                check_len("c", c.len(), n)?;
            }
            Some(InitialHeights::new(c).map_err(validation)?)
        }
        None => None,
    };
    let target = match raw.target {
        Some(t) => {
            if let Some(n) = n {
                check_len("target", t.len(), n)?;
            }
            Some(EnergyVector::new(t).map_err(validation)?)
        }
        None => None,
    };
    if let (Some(alpha), Some(n)) = (&raw.alpha, n) {
        check_len("alpha", alpha.len(), n)?;
    }
    if let Some(delta) = raw.delta {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(validation(Error::InvalidArgument(format!("delta = {delta} must be positive"))));
        }
    }
    if let Some(ladder) = &raw.epsilon_ladder {
        if ladder.is_empty() || ladder.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return Err(validation(Error::InvalidArgument(
                "epsilon_ladder must be a nonempty list of positive numbers".into(),
            )));
        }
    }
    let shoot_tol = raw.tolerances.shoot_tol.unwrap_or(DEFAULT_SHOOT_TOL);
    if !(shoot_tol > 0.0 && shoot_tol.is_finite()) {
        return Err(validation(Error::InvalidTolerance(format!("shoot_tol = {shoot_tol}"))));
    }

    Ok(RunConfig {
        command: raw.command,
        spec,
        c,
        target,
        k: raw.k,
        alpha: raw.alpha,
        delta: raw.delta,
        epsilon_ladder: raw.epsilon_ladder,
        count: raw.count,
        seed: raw.seed,
        shoot_tol,
    })
}
