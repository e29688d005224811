mod common;

use common::*;
use lsrank::io::{parse_aggregated_csv, write_aggregated_csv};
use lsrank::{
    aggregate, analyze, balanced_multigraph, digraph_to_ranking_problem, fixtures,
    generalized_row_sum, laplacian, least_squares_direct, least_squares_iterative, objective_value,
    positional_power, scores, validate, RoundMatrix, DEFAULT_MAX_ITER, DEFAULT_TOL,
};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random rounds over `n` objects; each pair is compared in a round with
/// probability 1/2, with a win, loss, draw or fractional result.
fn random_rounds(seed: u64, n: usize, count: usize) -> Vec<RoundMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let mut round = RoundMatrix::new(n);
            for i in 0..n {
                for j in (i + 1)..n {
                    if rng.gen_bool(0.5) {
                        let r = match rng.gen_range(0..4) {
                            0 => 0.0,
                            1 => 1.0,
                            2 => 0.5,
                            _ => rng.gen_range(0.0..=1.0),
                        };
                        round.insert(i, j, r).unwrap();
                    }
                }
            }
            round
        })
        .collect()
}

proptest! {
    #[test]
    fn aggregation_satisfies_invariants(seed in any::<u64>(), n in 1usize..8, count in 1usize..6) {
        let problem = aggregate(&random_rounds(seed, n, count)).unwrap();
        prop_assert!(validate(&problem).is_empty());
        prop_assert_eq!(problem.rounds(), Some(count));
    }

    #[test]
    fn scores_are_additive_over_rounds(seed in any::<u64>(), n in 2usize..8, count in 1usize..6) {
        let rounds = random_rounds(seed, n, count);
        let total = scores(&aggregate(&rounds).unwrap());
        let mut summed = vec![0.0; n];
        for round in &rounds {
            let single = scores(&aggregate(std::slice::from_ref(round)).unwrap());
            for (acc, x) in summed.iter_mut().zip(single.values) {
                *acc += x;
            }
        }
        prop_assert!(max_abs_diff(&total.values, &summed) < 1e-12);
        let sum: f64 = total.values.iter().sum();
        prop_assert!(sum.abs() < 1e-12);
    }

    #[test]
    fn laplacian_kernel_and_semidefiniteness(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = fixtures::random_connected(&mut rng, n, 4, 0.3);
        let l = laplacian(&problem);
        let ones = DVector::from_element(n, 1.0);
        prop_assert_eq!(&l * &ones, DVector::zeros(n));
        prop_assert_eq!(ones.transpose() * &l, DVector::zeros(n).transpose());
        for _ in 0..5 {
            let x = DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
            prop_assert!(x.dot(&(&l * &x)) >= -1e-12);
        }
    }

    #[test]
    fn objective_is_translation_invariant(seed in any::<u64>(), shift in -10.0f64..10.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..8);
        let problem = fixtures::random_connected(&mut rng, n, 3, 0.4);
        let q: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let moved: Vec<f64> = q.iter().map(|x| x + shift).collect();
        let a = objective_value(&problem, &q).unwrap();
        let b = objective_value(&problem, &moved).unwrap();
        prop_assert!((a - b).abs() <= 1e-9 * a.max(1.0));
    }

    #[test]
    fn aggregated_csv_round_trip(seed in any::<u64>(), n in 1usize..8, count in 1usize..4) {
        let problem = aggregate(&random_rounds(seed, n, count)).unwrap();
        let reparsed = parse_aggregated_csv(&write_aggregated_csv(&problem));
        // A problem without any comparison serializes to an empty body.
        if problem.matches().iter().all(|&m| m == 0.0) {
            prop_assert!(reparsed.is_err());
        } else {
            let reparsed = reparsed.unwrap();
            // Objects that were never compared are not listed.
            let perm: Vec<usize> = reparsed
                .objects()
                .iter()
                .map(|l| problem.objects().iter().position(|o| o == l).unwrap())
                .collect();
            let restricted = lsrank::RankingProblem::from_matrices(
                nalgebra::DMatrix::from_fn(perm.len(), perm.len(), |i, j| problem.results()[(perm[i], perm[j])]),
                nalgebra::DMatrix::from_fn(perm.len(), perm.len(), |i, j| problem.matches()[(perm[i], perm[j])]),
            ).unwrap();
            prop_assert_eq!(reparsed.results(), restricted.results());
            prop_assert_eq!(reparsed.matches(), restricted.matches());
        }
    }

    #[test]
    fn diagnostics_are_permutation_equivariant(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2..10);
        let problem = if rng.gen_bool(0.5) {
            fixtures::random_connected(&mut rng, n, 3, 0.3)
        } else {
            fixtures::random_disconnected(&mut rng, &[n / 2 + 1, n - n / 2], 3)
        };
        let perm = random_permutation(&mut rng, problem.len());
        let base = analyze(&problem);
        let moved = analyze(&problem.permuted(&perm));
        for (k, &p) in perm.iter().enumerate() {
            prop_assert_eq!(moved.degrees[k], base.degrees[p]);
        }
        prop_assert_eq!(moved.components.len(), base.components.len());
        prop_assert_eq!(moved.bipartition.is_some(), base.bipartition.is_some());
        prop_assert_eq!(moved.is_regular, base.is_regular);
        prop_assert_eq!(moved.is_regular_bipartite, base.is_regular_bipartite);
        // Power iteration starts from a fixed vector, so relabelling changes
        // the path; nearly degenerate top eigenvalues converge slowly under
        // the iteration cap.
        prop_assert!((moved.mu1_estimate - base.mu1_estimate).abs() <= 1e-4 * base.mu1_estimate.max(1.0));
        let loops = balanced_multigraph(&problem).loops;
        let moved_loops = balanced_multigraph(&problem.permuted(&perm)).loops;
        for (k, &p) in perm.iter().enumerate() {
            prop_assert_eq!(moved_loops[k], loops[p]);
        }
        prop_assert!(loops.contains(&0.0));
    }

    #[test]
    fn methods_are_neutral(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = connected_not_regular_bipartite(&mut rng, 2..=10, 3);
        let perm = random_permutation(&mut rng, problem.len());
        let moved = problem.permuted(&perm);
        let pick = |v: &[f64]| perm.iter().map(|&p| v[p]).collect::<Vec<_>>();

        let s = scores(&problem).values;
        prop_assert!(max_abs_diff(&scores(&moved).values, &pick(&s)) < 1e-12);
        let q = least_squares_direct(&problem).unwrap().values;
        prop_assert!(max_abs_diff(&least_squares_direct(&moved).unwrap().values, &pick(&q)) < 1e-9);
        let (qi, _) = least_squares_iterative(&moved, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        prop_assert!(max_abs_diff(&qi.values, &pick(&q)) < 1e-8);
        let x = generalized_row_sum(&problem, 0.3).unwrap().values;
        prop_assert!(max_abs_diff(&generalized_row_sum(&moved, 0.3).unwrap().values, &pick(&x)) < 1e-9);
    }

    #[test]
    fn digraph_conversion_and_positional_power(seed in any::<u64>(), n in 1usize..30, density in 0.0f64..1.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = fixtures::random_digraph(&mut rng, n, density);
        prop_assert!(validate(&digraph_to_ranking_problem(&g)).is_empty());

        let p = positional_power(&g, 1e-10, 10_000).unwrap();
        for (pi, out) in p.values.iter().zip(g.out_degrees()) {
            prop_assert!(*pi >= out);
        }
        let perm = random_permutation(&mut rng, n);
        let moved = positional_power(&g.permuted(&perm), 1e-10, 10_000).unwrap();
        let expected: Vec<f64> = perm.iter().map(|&k| p.values[k]).collect();
        prop_assert!(max_abs_diff(&moved.values, &expected) < 1e-9);
    }
}
