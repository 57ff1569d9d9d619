mod common;

use common::{exact, max_diff, spec};
use liouville::radial::{
    compute_energy, energy_report, integrate, picard_local, residual, scale_profile, InitialHeights, RadialProfile,
};
use liouville::Error;

fn heights(c: &[f64]) -> InitialHeights {
    InitialHeights::new(c.to_vec()).unwrap()
}

#[test]
fn series_start_matches_closed_form() {
    let s = spec(&[&[1.0]], &[0.0]);
    let r0 = 1e-4;
    let start = picard_local(&s, &heights(&[8f64.ln()]), r0).unwrap();
    let (u, rdu) = exact(1.0, 8.0, 0.0, r0);
    assert!((start.u[0] - u).abs() < 1e-10);
    assert!((start.du[0] - rdu).abs() < 1e-10);
    assert!(start.error_bound < 1e-10);
}

#[test]
fn series_start_tends_to_initial_data() {
    let s = spec(&[&[2.0, 1.0], &[1.0, 2.0]], &[0.5, -0.7]);
    let c = [0.3, -1.2];
    let start = picard_local(&s, &heights(&c), 1e-12).unwrap();
    assert!(max_diff(&start.u, &c) < 1e-12);
    assert!(start.du.iter().all(|d| d.abs() < 1e-12));
}

#[test]
fn series_start_symmetric_pair() {
    let s = spec(&[&[2.0, 1.0], &[1.0, 2.0]], &[0.0, 0.0]);
    let r0 = 1e-4;
    let start = picard_local(&s, &heights(&[0.0, 0.0]), r0).unwrap();
    // both components solve Δu + 3 e^u = 0 with u(0) = 0
    let (u, rdu) = exact(3.0, 1.0, 0.0, r0);
    for i in 0..2 {
        assert!((start.u[i] - u).abs() < 1e-10);
        assert!((start.du[i] - rdu).abs() < 1e-10);
    }
}

#[test]
fn series_start_rejects_large_radius() {
    let s = spec(&[&[1.0]], &[0.0]);
    assert!(matches!(
        picard_local(&s, &heights(&[8f64.ln()]), 1.0),
        Err(Error::R0TooLarge { .. })
    ));
}

#[test]
fn scalar_profile_matches_closed_form() {
    for (mu, beta) in [(8.0, 0.0), (2.0, -1.0), (0.1, 1.5), (100.0, -1.5)] {
        let s = spec(&[&[1.0]], &[beta]);
        let p = integrate(&s, &heights(&[f64::ln(mu)])).unwrap();
        assert!(p.converged());
        let mut err: f64 = 0.0;
        for (k, &t) in p.grid().iter().enumerate() {
            let (u, rdu) = exact(1.0, mu, beta, t.exp());
            err = err.max((p.u(0)[k] - u).abs()).max((p.du(0)[k] - rdu).abs());
        }
        assert!(err < 1e-8, "mu {mu} beta {beta}: {err:e}");
        let g = 2.0 + beta;
        assert!((p.sigma()[0] - 2.0 * g).abs() < 1e-8);
        assert!((p.m()[0] - 2.0 * g).abs() < 1e-8);
        // u ≈ −m log r + log μ − 2 log(μ/(2γ²))
        let c_exact = mu.ln() - 2.0 * (mu / (2.0 * g * g)).ln();
        assert!((p.c_const()[0] - c_exact).abs() < 1e-7, "{} vs {c_exact}", p.c_const()[0]);
    }
}

#[test]
fn scalar_energy_examples() {
    let s = spec(&[&[1.0]], &[0.0]);
    let p = integrate(&s, &heights(&[8f64.ln()])).unwrap();
    assert!((compute_energy(&p).unwrap()[0] - 4.0).abs() < 1e-8);
    assert!((p.c_const()[0] - 8f64.ln()).abs() < 1e-8);

    let s = spec(&[&[1.0]], &[-1.0]);
    let p = integrate(&s, &heights(&[0.0])).unwrap();
    assert!((compute_energy(&p).unwrap()[0] - 2.0).abs() < 1e-8);
}

#[test]
fn symmetric_pair_energies() {
    let s = spec(&[&[2.0, 1.0], &[1.0, 2.0]], &[0.0, 0.0]);
    let p = integrate(&s, &heights(&[0.0, 0.0])).unwrap();
    assert!(max_diff(p.sigma().as_slice(), &[4.0 / 3.0, 4.0 / 3.0]) < 1e-8);
    assert!(max_diff(p.m(), &[4.0, 4.0]) < 1e-8);
}

#[test]
fn structural_properties_of_profiles() {
    let s = spec(&[&[1.0, 0.5, 0.0], &[0.5, 0.8, 1.2], &[0.0, 1.2, 0.4]], &[0.3, -1.1, 2.0]);
    let p = integrate(&s, &heights(&[0.5, -1.0, 2.0])).unwrap();
    assert!(p.converged());
    for i in 0..3 {
        let du = p.du(i);
        assert!(du[1..].iter().all(|&d| d < 0.0), "component {i} not decreasing");
        assert!(du.windows(2).all(|w| w[1] <= w[0] + 1e-14), "component {i} not concave");
        assert!(p.m()[i] > 2.0 + s.beta[i]);
    }
    let sigma = p.sigma().as_slice();
    let a_sigma = s.a.apply(sigma);
    assert!(max_diff(&a_sigma, p.m()) <= 1e-6);
    let report = energy_report(&p).unwrap();
    assert!(report.crosscheck < 1e-6);
    assert!(max_diff(&report.c_integral, p.c_const()) < 1e-6);
}

#[test]
fn scaling_identity_and_closed_form() {
    let s = spec(&[&[1.0]], &[0.0]);
    let p = integrate(&s, &heights(&[8f64.ln()])).unwrap();
    let same = scale_profile(&p, 1.0).unwrap();
    assert_eq!(same.grid(), p.grid());
    assert_eq!(same.u(0), p.u(0));

    let q = scale_profile(&p, 2.0).unwrap();
    let mut err: f64 = 0.0;
    for (k, &t) in q.grid().iter().enumerate() {
        err = err.max((q.u(0)[k] - exact(1.0, 32.0, 0.0, t.exp()).0).abs());
    }
    assert!(err < 1e-8, "{err:e}");
    assert_eq!(q.sigma(), p.sigma());

    let back = scale_profile(&q, 0.5).unwrap();
    assert!(max_diff(back.grid(), p.grid()) < 1e-12);
    assert!(max_diff(back.u(0), p.u(0)) < 1e-12);
}

#[test]
fn scale_rejects_nonpositive_factor() {
    let s = spec(&[&[1.0]], &[0.0]);
    let p = integrate(&s, &heights(&[0.0])).unwrap();
    assert!(scale_profile(&p, 0.0).is_err());
    assert!(scale_profile(&p, -1.0).is_err());
}

#[test]
fn residual_of_sampled_closed_form() {
    let s = spec(&[&[1.0]], &[0.0]);
    let h = 0.01;
    let grid: Vec<f64> = (0..=3000).map(|k| -15.0 + h * k as f64).collect();
    let (u, du): (Vec<f64>, Vec<f64>) = grid.iter().map(|t| exact(1.0, 8.0, 0.0, t.exp())).unzip();
    let p = RadialProfile::from_samples(s, grid, vec![u], vec![du]).unwrap();
    // quintic interpolation through three nodes: O(h^4) with curvature of order 1
    let report = residual(&p);
    assert!(report.max < 100.0 * h.powi(4), "{:e}", report.max);
}

#[test]
fn residual_of_integrated_profile() {
    for (a, beta, c) in [
        (vec![vec![1.0]], vec![0.0], vec![8f64.ln()]),
        (vec![vec![2.0, 1.0], vec![1.0, 2.0]], vec![-0.5, 1.0], vec![1.0, -1.0]),
    ] {
        let rows: Vec<&[f64]> = a.iter().map(|r| r.as_slice()).collect();
        let s = spec(&rows, &beta);
        let p = integrate(&s, &heights(&c)).unwrap();
        let report = residual(&p);
        assert!(report.max <= 100.0 * s.tol_step, "{:e}", report.max);
    }
}

#[test]
fn residual_of_constant_fake_profile() {
    let s = spec(&[&[1.0]], &[0.0]);
    let grid: Vec<f64> = (0..10).map(|k| k as f64 * 0.1).collect();
    let p = RadialProfile::from_samples(s, grid, vec![vec![0.0; 10]], vec![vec![0.0; 10]]).unwrap();
    let report = residual(&p);
    assert!(report.per_point.iter().all(|&d| d > 0.0));
}

#[test]
fn eval_interpolates_between_nodes() {
    let s = spec(&[&[1.0]], &[-0.5]);
    let p = integrate(&s, &heights(&[1.0])).unwrap();
    for t in [-20.0, -3.3, 0.1234, 5.0, 40.0] {
        let (u, du) = p.eval(t).unwrap();
        let (eu, edu) = exact(1.0, 1f64.exp(), -0.5, f64::exp(t));
        assert!((u[0] - eu).abs() < 1e-8, "t {t}");
        assert!((du[0] - edu).abs() < 1e-8, "t {t}");
    }
}

#[test]
fn rejects_mismatched_heights() {
    let s = spec(&[&[2.0, 1.0], &[1.0, 2.0]], &[0.0, 0.0]);
    assert!(matches!(
        integrate(&s, &heights(&[0.0])),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn short_window_reports_unconverged() {
    let s = spec(&[&[1.0]], &[0.0]).with_window(-18.0, -2.0).unwrap();
    let p = integrate(&s, &heights(&[0.0])).unwrap();
    assert!(!p.converged());
}
