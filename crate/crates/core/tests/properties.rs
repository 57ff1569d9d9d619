mod common;

use common::max_diff;
use liouville::algebra::{
    lambda_full, lambda_j, lambda_scale, pi2_membership, solve_sigma_last, validate_matrix, EnergyVector,
};
use liouville::radial::{integrate, scale_profile, InitialHeights, ProblemSpec};
use liouville::{CouplingMatrix, SingularityExponents};
use proptest::prelude::*;

/// Symmetric nonnegative matrix with positive diagonal and a connected
/// off-diagonal chain, so that most draws satisfy the structural checks.
fn coupling(n: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (
        prop::collection::vec(0.2f64..2.0, n),
        prop::collection::vec(0.0f64..2.0, n * (n - 1) / 2),
        prop::collection::vec(0.1f64..2.0, n - 1),
    )
        .prop_map(move |(diag, off, chain)| {
            let mut a = vec![vec![0.0; n]; n];
            let mut k = 0;
            for i in 0..n {
                a[i][i] = diag[i];
                for j in 0..i {
                    a[i][j] = off[k];
                    a[j][i] = off[k];
                    k += 1;
                }
            }
            for i in 1..n {
                let v = a[i][i - 1].max(chain[i - 1]);
                a[i][i - 1] = v;
                a[i - 1][i] = v;
            }
            a
        })
}

fn problem(n: usize) -> impl Strategy<Value = (Vec<Vec<f64>>, Vec<f64>, Vec<f64>)> {
    (
        coupling(n),
        prop::collection::vec(-1.9f64..3.0, n),
        prop::collection::vec(0.0f64..5.0, n),
    )
}

fn permute(a: &[Vec<f64>], p: &[usize]) -> Vec<Vec<f64>> {
    p.iter().map(|&i| p.iter().map(|&j| a[i][j]).collect()).collect()
}

fn dims() -> impl Strategy<Value = usize> {
    2usize..=4
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn validation_is_permutation_invariant(
        (a, beta, sigma) in dims().prop_flat_map(problem),
        seed in any::<u64>(),
    ) {
        let n = a.len();
        let mut p: Vec<usize> = (0..n).collect();
        // Fisher–Yates with a small LCG driven by the seed
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            p.swap(i, (s >> 33) as usize % (i + 1));
        }
        let pa = permute(&a, &p);
        prop_assert_eq!(validate_matrix(&a).is_ok(), validate_matrix(&pa).is_ok());
        if let (Ok(m), Ok(pm)) = (CouplingMatrix::new(&a), CouplingMatrix::new(&pa)) {
            let b = SingularityExponents::new(beta.clone()).unwrap();
            let pb = SingularityExponents::new(p.iter().map(|&i| beta[i]).collect()).unwrap();
            let sig = EnergyVector::new(sigma.clone()).unwrap();
            let psig = EnergyVector::new(p.iter().map(|&i| sigma[i]).collect()).unwrap();
            let l = lambda_full(sig.as_slice(), &m, &b);
            let pl = lambda_full(psig.as_slice(), &pm, &pb);
            prop_assert!((l - pl).abs() <= 1e-12 * lambda_scale(sig.as_slice(), &m));
            let inside = pi2_membership(&sig, &m, &b, 1e-9).unwrap().is_inside();
            let pinside = pi2_membership(&psig, &pm, &pb, 1e-9).unwrap().is_inside();
            prop_assert_eq!(inside, pinside);
        }
    }

    #[test]
    fn lambda_of_disjoint_union(
        (a, beta, sigma) in dims().prop_flat_map(problem),
        split in any::<u32>(),
    ) {
        let n = a.len();
        let Ok(m) = CouplingMatrix::new(&a) else { return Ok(()) };
        let b = SingularityExponents::new(beta).unwrap();
        let s = EnergyVector::new(sigma.clone()).unwrap();
        let left: Vec<usize> = (0..n).filter(|i| split >> i & 1 == 1).collect();
        let right: Vec<usize> = (0..n).filter(|i| split >> i & 1 == 0).collect();
        prop_assume!(!left.is_empty() && !right.is_empty());
        let all: Vec<usize> = (0..n).collect();
        let cross: f64 = left
            .iter()
            .flat_map(|&i| right.iter().map(move |&j| (i, j)))
            .map(|(i, j)| a[i][j] * sigma[i] * sigma[j])
            .sum();
        let lhs = lambda_j(&all, &s, &m, &b).unwrap();
        let rhs = lambda_j(&left, &s, &m, &b).unwrap() + lambda_j(&right, &s, &m, &b).unwrap() - 2.0 * cross;
        prop_assert!((lhs - rhs).abs() <= 1e-12 * lambda_scale(&sigma, &m));
    }

    #[test]
    fn completed_roots_satisfy_the_identity((a, beta, sigma) in dims().prop_flat_map(problem)) {
        let n = a.len();
        let Ok(m) = CouplingMatrix::new(&a) else { return Ok(()) };
        let b = SingularityExponents::new(beta).unwrap();
        if let Ok(roots) = solve_sigma_last(&sigma[..n - 1], &m, &b) {
            for root in roots {
                let s = root.sigma.as_slice();
                prop_assert_eq!(&s[..n - 1], &sigma[..n - 1]);
                prop_assert!(s[n - 1] >= 0.0);
                prop_assert!(lambda_full(s, &m, &b).abs() <= 1e-10 * lambda_scale(s, &m));
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solutions_satisfy_energy_identities(
        (a, beta, _) in (2usize..=3).prop_flat_map(problem),
        c in prop::collection::vec(-3.0f64..3.0, 3),
    ) {
        let n = a.len();
        let Ok(m) = CouplingMatrix::new(&a) else { return Ok(()) };
        let spec = ProblemSpec::new(m, SingularityExponents::new(beta).unwrap()).unwrap();
        let p = integrate(&spec, &InitialHeights::new(c[..n].to_vec()).unwrap()).unwrap();
        prop_assume!(p.converged());
        let s = p.sigma().as_slice();
        prop_assert!(lambda_full(s, &spec.a, &spec.beta).abs() <= 1e-6 * lambda_scale(s, &spec.a));
        prop_assert!(max_diff(&spec.a.apply(s), p.m()) <= 1e-5);
        for i in 0..n {
            prop_assert!(p.m()[i] > 2.0 + spec.beta[i]);
        }
    }

    #[test]
    fn scaling_round_trip(
        (a, beta, _) in (1usize..=3).prop_flat_map(problem),
        delta in 0.05f64..20.0,
    ) {
        let n = a.len();
        let Ok(m) = CouplingMatrix::new(&a) else { return Ok(()) };
        let spec = ProblemSpec::new(m, SingularityExponents::new(beta).unwrap()).unwrap();
        let p = integrate(&spec, &InitialHeights::new(vec![0.0; n]).unwrap()).unwrap();
        let back = scale_profile(&scale_profile(&p, delta).unwrap(), 1.0 / delta).unwrap();
        prop_assert!(max_diff(back.grid(), p.grid()) <= 1e-12);
        for i in 0..n {
            prop_assert!(max_diff(back.u(i), p.u(i)) <= 1e-12);
        }
        prop_assert_eq!(back.sigma(), p.sigma());
    }
}
