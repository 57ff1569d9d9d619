//! Configuration ingestion, command dispatch and report/CSV emission.
//!
//! Every run writes `report.json` into the output directory; commands that
//! produce a profile also write `profile.csv` (and `linearized.csv` for the
//! linearized solvers). Reports carry no timestamps, so an identical config
//! and seed reproduce them byte for byte.

mod config;
mod csv;

use std::fs;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::algebra::{
    lambda_all_proper, lambda_full, pi2_membership, sample_pi2, subset_label, MEMBERSHIP_TOL,
};
use crate::error::{Error, Result};
use crate::linearized::{
    comparison_function_check, jacobian_of, kernel_partial_integral_check, linear_residual, solve_mode0,
    solve_mode_k, LinearizedProfile,
};
use crate::oracle::{forced_energy, ScalarSolution};
use crate::radial::{energy_report, integrate, residual, scale_profile, RadialProfile};
use crate::shooting::{continuation, shoot, uniqueness_probe, ShootingResult};
use crate::suite;

pub use config::{parse_config, Command, RunConfig};
pub use csv::{linearized_csv, profile_csv, read_profile_csv};

pub const REPORT_FILE: &str = "report.json";
pub const PROFILE_FILE: &str = "profile.csv";
pub const LINEARIZED_FILE: &str = "linearized.csv";

/// Exit status of a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Success,
    NotConverged,
    /// The command ran but its checks failed (the acceptance battery).
    Failed,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Success => 0,
            Status::NotConverged => 2,
            Status::Failed => 1,
        }
    }
}

/// Everything a command produced, before it is written to disk.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub status: Status,
    pub report: Value,
    /// (file name, contents) pairs.
    pub files: Vec<(&'static str, String)>,
    /// Human-readable summary for stdout.
    pub summary: Option<String>,
}

fn vec_value(v: &[f64]) -> Value {
    Value::from(v.to_vec())
}

fn lambda_j_map(sigma: &[f64], profile_spec: &crate::radial::ProblemSpec) -> Result<Value> {
    let mut map = Map::new();
    for (subset, value) in lambda_all_proper(sigma, &profile_spec.a, &profile_spec.beta)? {
        map.insert(subset_label(&subset), Value::from(value));
    }
    Ok(Value::Object(map))
}

/// Energies, slopes, Λ values and integration diagnostics of a profile.
fn profile_report(profile: &RadialProfile) -> Result<Map<String, Value>> {
    let spec = profile.spec();
    let sigma = profile.sigma().as_slice();
    let d = profile.diagnostics();
    let mut map = Map::new();
    map.insert("c".into(), vec_value(profile.initial_heights().as_slice()));
    map.insert("sigma".into(), vec_value(sigma));
    map.insert("m".into(), vec_value(profile.m()));
    map.insert("c_const".into(), vec_value(profile.c_const()));
    map.insert("lambda_I_residual".into(), Value::from(lambda_full(sigma, &spec.a, &spec.beta).abs()));
    map.insert("lambda_J".into(), lambda_j_map(sigma, spec)?);
    map.insert("converged".into(), Value::from(profile.converged()));
    map.insert("iterations".into(), Value::from(d.steps_accepted));
    map.insert("steps_rejected".into(), Value::from(d.steps_rejected));
    map.insert("condition_M".into(), Value::Null);
    map.insert("tail_exponent_estimate".into(), Value::from(d.tail_exponent_estimate));
    map.insert("energy_crosscheck".into(), Value::from(d.energy_crosscheck));
    map.insert("start_radius".into(), Value::from(profile.t_start().exp()));
    map.insert("t_end".into(), Value::from(profile.t_end()));
    map.insert("decay_extension_used".into(), Value::from(d.extended));
    map.insert("residual_max".into(), Value::from(residual(profile).max));
    Ok(map)
}

fn converged_status(converged: bool) -> Status {
    if converged {
        Status::Success
    } else {
        Status::NotConverged
    }
}

fn with_command(command: Command, mut map: Map<String, Value>) -> Value {
    map.insert("command".into(), Value::from(command.name()));
    Value::Object(map)
}

fn validate(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    let mut map = Map::new();
    map.insert("valid".into(), Value::from(true));
    map.insert("n".into(), Value::from(spec.n()));
    let inverse = spec.a.inverse();
    let rows: Vec<Value> = (0..spec.n())
        .map(|i| Value::from((0..spec.n()).map(|j| inverse[(i, j)]).collect::<Vec<_>>()))
        .collect();
    map.insert("inverse".into(), Value::Array(rows));
    map.insert("diagonal_positive".into(), Value::from(spec.a.diag_positive()));
    if let Some(target) = &config.target {
        let s = target.as_slice();
        map.insert("sigma".into(), vec_value(s));
        map.insert("lambda_I_residual".into(), Value::from(lambda_full(s, &spec.a, &spec.beta).abs()));
        map.insert("lambda_J".into(), lambda_j_map(s, spec)?);
        let membership = pi2_membership(target, &spec.a, &spec.beta, MEMBERSHIP_TOL)?;
        map.insert("membership".into(), Value::from(membership.to_string()));
    }
    Ok(Outcome {
        status: Status::Success,
        report: with_command(config.command, map),
        files: Vec::new(),
        summary: None,
    })
}

fn solve(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    let mut profile = integrate(spec, config.heights()?)?;
    if let Some(delta) = config.delta {
        profile = scale_profile(&profile, delta)?;
    }
    let mut map = profile_report(&profile)?;
    if let Some(delta) = config.delta {
        map.insert("delta".into(), Value::from(delta));
    }
    Ok(Outcome {
        status: converged_status(profile.converged()),
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&profile))],
        summary: None,
    })
}

fn energy(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    let profile = integrate(spec, config.heights()?)?;
    let mut map = profile_report(&profile)?;
    if profile.converged() {
        let report = energy_report(&profile)?;
        map.insert("tail".into(), vec_value(&report.tail));
        map.insert("c_integral".into(), vec_value(&report.c_integral));
        map.insert("c_crosscheck".into(), Value::from(report.crosscheck));
    }
    Ok(Outcome {
        status: converged_status(profile.converged()),
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&profile))],
        summary: None,
    })
}

fn shooting_report(result: &ShootingResult) -> Result<Map<String, Value>> {
    let mut map = profile_report(&result.profile)?;
    map.insert("target".into(), vec_value(result.target.as_slice()));
    map.insert("mismatch".into(), Value::from(result.mismatch()));
    map.insert("converged".into(), Value::from(result.converged));
    map.insert("iterations".into(), Value::from(result.iterations));
    map.insert("near_boundary".into(), Value::from(result.near_boundary));
    map.insert("residual_history".into(), vec_value(&result.residual_history));
    map.insert("quadratic_ratio".into(), json!(result.quadratic_ratio));
    map.insert("condition_M".into(), json!(result.condition));
    Ok(map)
}

fn shoot_command(config: &RunConfig, seed: u64) -> Result<Outcome> {
    let spec = config.spec()?;
    let target = config.target()?;
    if let Some(ladder) = &config.epsilon_ladder {
        let report = continuation(spec, target, ladder, config.shoot_tol)?;
        let last = report.rungs.last().expect("nonempty ladder");
        let mut map = shooting_report(&last.result)?;
        let rungs: Vec<Value> = report
            .rungs
            .iter()
            .map(|r| {
                json!({
                    "epsilon": r.epsilon,
                    "target": r.target.as_slice(),
                    "c": r.result.c.as_slice(),
                    "converged": r.result.converged,
                    "iterations": r.result.iterations,
                })
            })
            .collect();
        map.insert("rungs".into(), Value::Array(rungs));
        map.insert("cauchy_gap".into(), Value::from(report.cauchy_gap));
        let converged = report.rungs.iter().all(|r| r.result.converged);
        map.insert("converged".into(), Value::from(converged));
        return Ok(Outcome {
            status: converged_status(converged),
            report: with_command(config.command, map),
            files: vec![(PROFILE_FILE, profile_csv(&last.result.profile))],
            summary: None,
        });
    }
    let result = shoot(spec, target, config.c.as_ref(), config.shoot_tol)?;
    let mut map = shooting_report(&result)?;
    let mut converged = result.converged;
    if let Some(count) = config.count.filter(|&c| c > 1) {
        let probe = uniqueness_probe(spec, target, count, seed, config.shoot_tol)?;
        converged &= probe.all_converged;
        map.insert(
            "uniqueness".into(),
            json!({
                "trials": count,
                "spread": probe.spread,
                "all_converged": probe.all_converged,
                "solutions": probe.solutions.iter().map(|c| c.as_slice().to_vec()).collect::<Vec<_>>(),
            }),
        );
    }
    Ok(Outcome {
        status: converged_status(converged),
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&result.profile))],
        summary: None,
    })
}

fn linearized_report(base: &RadialProfile, lin: &LinearizedProfile) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("mode".into(), Value::from(lin.mode));
    map.insert("alpha".into(), vec_value(&lin.alpha));
    map.insert("moments".into(), vec_value(&lin.moments));
    map.insert("head_moments".into(), vec_value(&lin.head_moments));
    map.insert("envelope_factor".into(), json!(lin.envelope_factor));
    map.insert("violates_envelope".into(), Value::from(lin.violates_envelope()));
    map.insert("truncated".into(), Value::from(lin.truncated));
    map.insert("linear_residual".into(), Value::from(linear_residual(base, lin)));
    map
}

fn linearize(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    let base = integrate(spec, config.heights()?)?;
    if !base.converged() {
        return Err(Error::BaseNotConverged);
    }
    let k = config.k.unwrap_or(0);
    let mut map = profile_report(&base)?;
    let lin = if k == 0 {
        // the scaling direction unless initial data is given
        let alpha = config.alpha.clone().unwrap_or_else(|| spec.gammas());
        let lin = solve_mode0(&base, &alpha)?;
        let check = kernel_partial_integral_check(&base, &lin);
        map.insert(
            "kernel_check".into(),
            json!({
                "max_residual": check.max_residual,
                "pointwise_relative": check.pointwise_relative,
                "total_moment": check.total_moment,
            }),
        );
        if spec.n() > 1 {
            let jac = jacobian_of(base.clone())?;
            let rows: Vec<Value> = (0..jac.full.nrows())
                .map(|i| Value::from((0..jac.full.ncols()).map(|j| jac.full[(i, j)]).collect::<Vec<_>>()))
                .collect();
            map.insert("jacobian".into(), Value::Array(rows));
            map.insert("condition_M".into(), json!(jac.condition));
            map.insert("smallest_singular_value".into(), json!(jac.smallest_singular_value));
        }
        lin
    } else {
        let leading = config.alpha.clone().unwrap_or_else(|| vec![1.0; spec.n()]);
        solve_mode_k(&base, k, &leading)?
    };
    map.insert("linearized".into(), Value::Object(linearized_report(&base, &lin)));
    Ok(Outcome {
        status: Status::Success,
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&base)), (LINEARIZED_FILE, linearized_csv(&lin))],
        summary: None,
    })
}

fn modes(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    let base = integrate(spec, config.heights()?)?;
    let k = config.k.unwrap_or(2);
    let check = comparison_function_check(&base, k)?;
    let mut map = profile_report(&base)?;
    map.insert(
        "comparison".into(),
        json!({
            "mode": check.mode,
            "positive": check.positive,
            "blows_up_at_origin": check.blows_up_at_origin,
            "blows_up_at_infinity": check.blows_up_at_infinity,
            "operator_negative": check.operator_negative,
            "worst_margin": check.worst_margin,
            "operator_crosscheck": check.operator_crosscheck,
            "all_hold": check.all_hold(),
        }),
    );
    Ok(Outcome {
        status: Status::Success,
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&base))],
        summary: None,
    })
}

fn sample(config: &RunConfig, seed: u64) -> Result<Outcome> {
    let spec = config.spec()?;
    let count = config.count.unwrap_or(10);
    let samples = sample_pi2(&spec.a, &spec.beta, count, seed)?;
    let values: Vec<Value> = samples.iter().map(|s| vec_value(s.as_slice())).collect();
    let worst = samples
        .iter()
        .map(|s| lambda_full(s.as_slice(), &spec.a, &spec.beta).abs())
        .fold(0.0, f64::max);
    let mut map = Map::new();
    map.insert("seed".into(), Value::from(seed));
    map.insert("samples".into(), Value::Array(values));
    map.insert("lambda_I_residual".into(), Value::from(worst));
    Ok(Outcome {
        status: Status::Success,
        report: with_command(config.command, map),
        files: Vec::new(),
        summary: None,
    })
}

fn oracle(config: &RunConfig) -> Result<Outcome> {
    let spec = config.spec()?;
    if spec.n() != 1 || spec.a.get(0, 0) != 1.0 {
        return Err(Error::InvalidArgument("oracle requires A = [[1]]".into()));
    }
    let c = config.heights()?;
    let exact = ScalarSolution::new(c[0].exp(), spec.beta[0])?;
    let profile = integrate(spec, c)?;
    let mut error_u = 0.0_f64;
    let mut error_du = 0.0_f64;
    for (k, &t) in profile.grid().iter().enumerate() {
        let (u, du) = exact.eval_log(t);
        error_u = error_u.max((profile.u(0)[k] - u).abs());
        error_du = error_du.max((profile.du(0)[k] - du).abs());
    }
    let mut map = profile_report(&profile)?;
    map.insert("mu".into(), Value::from(exact.mu()));
    map.insert("expected_sigma".into(), Value::from(forced_energy(spec.beta[0])));
    map.insert("expected_c_const".into(), Value::from(exact.intercept()));
    map.insert("max_error_u".into(), Value::from(error_u));
    map.insert("max_error_rdu".into(), Value::from(error_du));
    map.insert(
        "sigma_error".into(),
        Value::from((profile.sigma()[0] - forced_energy(spec.beta[0])).abs()),
    );
    Ok(Outcome {
        status: converged_status(profile.converged()),
        report: with_command(config.command, map),
        files: vec![(PROFILE_FILE, profile_csv(&profile))],
        summary: None,
    })
}

fn suite_command(config: &RunConfig, seed: u64) -> Result<Outcome> {
    let reports = suite::run_all(seed);
    let all = reports.iter().all(|r| r.passed);
    let table = reports.iter().map(|r| r.to_string()).collect::<Vec<_>>().join("\n");
    let mut map = Map::new();
    map.insert("seed".into(), Value::from(seed));
    map.insert("criteria".into(), serde_json::to_value(&reports).expect("serializable"));
    map.insert("all_passed".into(), Value::from(all));
    Ok(Outcome {
        status: if all { Status::Success } else { Status::Failed },
        report: with_command(config.command, map),
        files: Vec::new(),
        summary: Some(table),
    })
}

/// Execute a parsed configuration. `seed` overrides the config's seed.
pub fn run(config: &RunConfig, seed: Option<u64>) -> Result<Outcome> {
    let seed = seed.or(config.seed).unwrap_or(suite::DEFAULT_SEED);
    match config.command {
        Command::Validate => validate(config),
        Command::Solve => solve(config),
        Command::Energy => energy(config),
        Command::Shoot => shoot_command(config, seed),
        Command::Linearize => linearize(config),
        Command::Modes => modes(config),
        Command::Sample => sample(config, seed),
        Command::Oracle => oracle(config),
        Command::Suite => suite_command(config, seed),
    }
}

/// Machine-readable error report.
pub fn error_report(error: &Error) -> Value {
    let mut body = json!({ "code": error.code(), "message": error.to_string() });
    if let Error::Validation(inner) = error {
        body["cause"] = Value::from(inner.code());
    }
    json!({ "error": body })
}

fn write_outcome(outcome: &Outcome, out_dir: &Path) -> Result<()> {
    fs::create_dir_all(out_dir)?;
    for (name, contents) in &outcome.files {
        fs::write(out_dir.join(name), contents)?;
    }
    let mut text = serde_json::to_string_pretty(&outcome.report).expect("serializable");
    text.push('\n');
    fs::write(out_dir.join(REPORT_FILE), text)?;
    Ok(())
}

/// Read, run and write for the command named on the command line; returns
/// the process exit code. Errors are written
/// to the report file (when possible) and to stderr.
pub fn execute(command: &str, config_path: &Path, out_dir: &Path, seed: Option<u64>) -> i32 {
    let result = fs::read_to_string(config_path)
        .map_err(|e| Error::Io(format!("{}: {e}", config_path.display())))
        .and_then(|text| parse_config(&text))
        .and_then(|config| {
            if config.command.name() != command {
                return Err(Error::InvalidArgument(format!(
                    "command `{command}` does not match config command `{}`",
                    config.command.name()
                )));
            }
            run(&config, seed)
        });
    match result {
        Ok(outcome) => {
            if let Some(summary) = &outcome.summary {
                println!("{summary}");
            }
            match write_outcome(&outcome, out_dir) {
                Ok(()) => outcome.status.exit_code(),
                Err(e) => {
                    eprintln!("error [{}]: {e}", e.code());
                    1
                }
            }
        }
        Err(e) => {
            eprintln!("error [{}]: {e}", e.code());
            let failure = Outcome {
                status: Status::Failed,
                report: error_report(&e),
                files: Vec::new(),
                summary: None,
            };
            let _ = write_outcome(&failure, out_dir);
            if matches!(e, Error::NotConverged { .. }) {
                2
            } else {
                1
            }
        }
    }
}

