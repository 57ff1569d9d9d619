use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linearized::LinearizedProfile;
use crate::radial::{ProblemSpec, RadialProfile};

fn header(out: &mut String, value: &str, slope: &str, n: usize) {
    out.push_str("t,r");
    for i in 1..=n {
        let _ = write!(out, ",{value}_{i}");
    }
    for i in 1..=n {
        let _ = write!(out, ",{slope}_{i}");
    }
    out.push('\n');
}

fn rows<'a>(out: &mut String, grid: &[f64], values: impl Fn(usize) -> &'a [f64], slopes: impl Fn(usize) -> &'a [f64], n: usize) {
    for (k, t) in grid.iter().enumerate() {
        let _ = write!(out, "{:.16e},{:.16e}", t, t.exp());
        for i in 0..n {
            let _ = write!(out, ",{:.16e}", values(i)[k]);
        }
        for i in 0..n {
            let _ = write!(out, ",{:.16e}", slopes(i)[k]);
        }
        out.push('\n');
    }
}

/// `t,r,u_1..u_n,rdu_1..rdu_n`, one row per grid node; `rdu_i = r u_i'`.
pub fn profile_csv(profile: &RadialProfile) -> String {
    let n = profile.n();
    let mut out = String::new();
    header(&mut out, "u", "rdu", n);
    rows(&mut out, profile.grid(), |i| profile.u(i), |i| profile.du(i), n);
    out
}

/// `t,r,phi_1..phi_n,rdphi_1..rdphi_n`.
pub fn linearized_csv(lin: &LinearizedProfile) -> String {
    let n = lin.phi.len();
    let mut out = String::new();
    header(&mut out, "phi", "rdphi", n);
    rows(&mut out, &lin.grid, |i| &lin.phi[i], |i| &lin.dphi[i], n);
    out
}

/// Re-read a profile CSV as samples of a solution of `spec`.
pub fn read_profile_csv(spec: &ProblemSpec, text: &str) -> Result<RadialProfile> {
    let n = spec.n();
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let head = lines.next().ok_or_else(|| Error::InvalidArgument("empty profile CSV".into()))?;
    let mut expected = String::new();
    header(&mut expected, "u", "rdu", n);
    if head.trim() != expected.trim() {
        return Err(Error::InvalidArgument(format!("unexpected CSV header `{head}`")));
    }
    let mut grid = Vec::new();
    let mut u = vec![Vec::new(); n];
    let mut du = vec![Vec::new(); n];
    for (row, line) in lines.enumerate() {
        let fields: Vec<f64> = line
            .split(',')
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::InvalidArgument(format!("CSV row {}: {e}", row + 2)))?;
        if fields.len() != 2 + 2 * n {
            return Err(Error::DimensionMismatch {
                expected: 2 + 2 * n,
                got: fields.len(),
            });
        }
        grid.push(fields[0]);
        for i in 0..n {
            u[i].push(fields[2 + i]);
            du[i].push(fields[2 + n + i]);
        }
    }
    RadialProfile::from_samples(spec.clone(), grid, u, du)
}
