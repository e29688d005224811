//! Rating methods: least squares (direct solve and score-propagation
//! iteration), generalized row sum (direct solve and power series), and
//! extraction of a weak order from ratings.
//!
//! The least squares rating `q` is the solution of `Lq = s`, `Σ q_i = 0`.
//! On a connected comparison graph it equals `(L + J/n)^{-1} s`, which is
//! what the direct solver computes. Writing `L = 𝔡I - C` with `C` the matches
//! matrix plus `𝔡 - d_i` loops on the diagonal gives
//! `q = (1/𝔡) Σ_k P^k s` with the stochastic matrix `P = C/𝔡`, valid unless
//! the graph is regular bipartite. The iterative solver sums that series.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{analyze_structure, connected_components, largest_laplacian_eigenvalue};
use crate::model::{laplacian, score_vector, Method, Ranking, RankingProblem, RatingVector};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100_000;
pub const DEFAULT_TIE_TOL: f64 = 1e-9;
/// `grs_series` requires `epsilon < (1 - margin) / mu1`.
pub const SERIES_SAFETY_MARGIN: f64 = 0.01;

/// Every iterate of the least squares iteration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationTrace {
    pub objects: Vec<String>,
    /// `iterates[k]` is `q^(k)`.
    pub iterates: Vec<Vec<f64>>,
    /// `step_deltas[k]` is the max-norm of `q^(k) - q^(k-1)`, with `q^(-1) = 0`.
    pub step_deltas: Vec<f64>,
    pub converged_at: Option<usize>,
    /// First step from which the induced ranking equals the final one.
    pub ranking_stable_at: Option<usize>,
    pub max_degree: f64,
}

impl IterationTrace {
    pub fn iterate(&self, k: usize) -> Option<RatingVector> {
        self.iterates.get(k).map(|q| {
            RatingVector::new(
                self.objects.clone(),
                q.clone(),
                Method::LeastSquaresIterative,
            )
            .with_parameter("step", k as f64)
        })
    }

    pub fn steps(&self) -> usize {
        self.iterates.len().saturating_sub(1)
    }
}

fn ensure_connected(problem: &RankingProblem) -> Result<()> {
    let components = connected_components(problem);
    if components.len() > 1 {
        let labels = problem.objects();
        return Err(Error::DisconnectedGraph {
            components: components
                .into_iter()
                .map(|c| c.into_iter().map(|i| labels[i].clone()).collect())
                .collect(),
        });
    }
    Ok(())
}

fn ensure_nonempty(problem: &RankingProblem) -> Result<()> {
    if problem.is_empty() {
        Err(Error::EmptyProblem)
    } else {
        Ok(())
    }
}

/// Least squares rating via a Cholesky solve of `(L + J/n) q = s`.
pub fn least_squares_direct(problem: &RankingProblem) -> Result<RatingVector> {
    ensure_nonempty(problem)?;
    ensure_connected(problem)?;
    let n = problem.len();
    let mut system = laplacian(problem);
    system.add_scalar_mut(1.0 / n as f64);
    let chol = system
        .cholesky()
        .ok_or_else(|| Error::Numerical("L + J/n is not positive definite".into()))?;
    let q = chol.solve(&score_vector(problem));
    Ok(RatingVector::new(
        problem.objects().to_vec(),
        q.as_slice().to_vec(),
        Method::LeastSquaresDirect,
    ))
}

/// Least squares rating as the limit of `q^(0) = s/𝔡`,
/// `q^(k) = q^(k-1) + P^k s / 𝔡`, stopping once the increment's max-norm
/// drops below `tol`.
pub fn least_squares_iterative(
    problem: &RankingProblem,
    tol: f64,
    max_iter: usize,
) -> Result<(RatingVector, IterationTrace)> {
    ensure_nonempty(problem)?;
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    ensure_connected(problem)?;

    let n = problem.len();
    let structure = analyze_structure(problem);
    let max_degree = structure.max_degree;
    let objects = problem.objects().to_vec();

    let mut trace = IterationTrace {
        objects: objects.clone(),
        iterates: Vec::new(),
        step_deltas: Vec::new(),
        converged_at: None,
        ranking_stable_at: None,
        max_degree,
    };

    // A single object is trivially rated 0; nothing to propagate.
    if max_degree == 0.0 {
        trace.iterates.push(vec![0.0; n]);
        trace.step_deltas.push(0.0);
        trace.converged_at = Some(0);
        trace.ranking_stable_at = Some(0);
        return Ok((finish(objects, vec![0.0; n], tol, 0), trace));
    }
    if structure.is_regular_bipartite {
        return Err(Error::RegularBipartiteGraph);
    }

    let matches = problem.matches();
    let loops: DVector<f64> =
        DVector::from_iterator(n, structure.degrees.iter().map(|&d| max_degree - d));

    // `propagated` holds P^k s.
    let mut propagated = score_vector(problem);
    let mut q = &propagated / max_degree;
    let delta = q.amax();
    trace.iterates.push(q.as_slice().to_vec());
    trace.step_deltas.push(delta);
    if delta < tol {
        trace.converged_at = Some(0);
    }

    let mut k = 0;
    while trace.converged_at.is_none() {
        if k == max_iter {
            return Err(Error::MaxIterationsExceeded {
                iterations: max_iter,
                last_delta: *trace.step_deltas.last().expect("at least q^(0)"),
                trace: Some(Box::new(trace)),
            });
        }
        k += 1;
        let mut next = matches * &propagated + loops.component_mul(&propagated);
        next /= max_degree;
        // P^k s stays orthogonal to e; remove the rounding drift along e,
        // which P would otherwise carry forward undamped.
        let mean = next.mean();
        next.add_scalar_mut(-mean);
        propagated = next;

        let increment = &propagated / max_degree;
        q += &increment;
        let delta = increment.amax();
        trace.iterates.push(q.as_slice().to_vec());
        trace.step_deltas.push(delta);
        if delta < tol {
            trace.converged_at = Some(k);
        }
    }

    trace.ranking_stable_at = Some(ranking_stable_at(&trace.iterates, DEFAULT_TIE_TOL));
    let steps = trace.steps();
    Ok((finish(objects, q.as_slice().to_vec(), tol, steps), trace))
}

fn finish(objects: Vec<String>, q: Vec<f64>, tol: f64, steps: usize) -> RatingVector {
    RatingVector::new(objects, q, Method::LeastSquaresIterative)
        .with_parameter("tol", tol)
        .with_parameter("steps", steps as f64)
}

fn ranking_stable_at(iterates: &[Vec<f64>], tie_tol: f64) -> usize {
    let Some(last) = iterates.last() else {
        return 0;
    };
    let final_groups = rank_groups(last, tie_tol);
    iterates
        .iter()
        .rposition(|q| rank_groups(q, tie_tol) != final_groups)
        .map_or(0, |k| k + 1)
}

/// Generalized row sum: solves `(I + εL) x = (1 + ε m n) s`, where `m` is
/// the problem's round count. Defined for every problem, connected or not.
pub fn generalized_row_sum(problem: &RankingProblem, epsilon: f64) -> Result<RatingVector> {
    check_epsilon(epsilon)?;
    let n = problem.len();
    let rounds = problem.round_count();
    let s = score_vector(problem);
    let x = if epsilon == 0.0 {
        s
    } else {
        let mut system = laplacian(problem) * epsilon;
        for i in 0..n {
            system[(i, i)] += 1.0;
        }
        let rhs = s * (1.0 + epsilon * rounds * n as f64);
        system
            .cholesky()
            .ok_or_else(|| Error::Numerical("I + εL is not positive definite".into()))?
            .solve(&rhs)
    };
    Ok(RatingVector::new(
        problem.objects().to_vec(),
        x.as_slice().to_vec(),
        Method::Grs,
    )
    .with_parameter("epsilon", epsilon)
    .with_parameter("rounds", rounds))
}

/// Truncated power series `Σ_{k ≤ k_max} ε^k (-L)^k (1 + ε m n) s` of the
/// generalized row sum. Converges to [`generalized_row_sum`] as `k_max`
/// grows, provided `ε < 1/mu1`; refused for `ε ≥ 0.99/mu1`.
pub fn grs_series(problem: &RankingProblem, epsilon: f64, k_max: usize) -> Result<RatingVector> {
    check_epsilon(epsilon)?;
    let mu1 = largest_laplacian_eigenvalue(problem);
    if mu1 > 0.0 {
        let limit = (1.0 - SERIES_SAFETY_MARGIN) / mu1;
        if epsilon >= limit {
            return Err(Error::EpsilonTooLarge { epsilon, limit });
        }
    }
    let n = problem.len();
    let rounds = problem.round_count();
    let l = laplacian(problem);
    let mut term = score_vector(problem) * (1.0 + epsilon * rounds * n as f64);
    let mut x = term.clone();
    for _ in 0..k_max {
        term = (&l * &term) * (-epsilon);
        x += &term;
    }
    Ok(RatingVector::new(
        problem.objects().to_vec(),
        x.as_slice().to_vec(),
        Method::GrsSeries,
    )
    .with_parameter("epsilon", epsilon)
    .with_parameter("rounds", rounds)
    .with_parameter("k_max", k_max as f64))
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon >= 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::NegativeEpsilon(epsilon))
    }
}

/// Sorts objects by decreasing rating; consecutive values no more than
/// `tie_tol` apart share a group. Negative tolerances are treated as 0.
pub fn ranking_from_ratings(ratings: &RatingVector, tie_tol: f64) -> Ranking {
    let tie_tol = tie_tol.max(0.0);
    Ranking {
        objects: ratings.objects.clone(),
        groups: rank_groups(&ratings.values, tie_tol),
        tie_tolerance: tie_tol,
    }
}

pub(crate) fn rank_groups(values: &[f64], tie_tol: f64) -> Vec<Vec<usize>> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    // Stable sort keeps input order inside ties.
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut previous = None;
    for i in order {
        match previous {
            Some(p) if values[p] - values[i] <= tie_tol => {
                groups.last_mut().expect("group opened").push(i)
            }
            _ => groups.push(vec![i]),
        }
        previous = Some(i);
    }
    for g in &mut groups {
        g.sort_unstable();
    }
    groups
}

/// `(L + J/n)^{-1} - J/n`, the Moore-Penrose inverse of the Laplacian of a
/// connected comparison graph.
pub fn laplacian_pseudoinverse(problem: &RankingProblem) -> Result<DMatrix<f64>> {
    ensure_nonempty(problem)?;
    ensure_connected(problem)?;
    let n = problem.len();
    let shift = 1.0 / n as f64;
    let mut system = laplacian(problem);
    system.add_scalar_mut(shift);
    let mut inv = system
        .try_inverse()
        .ok_or_else(|| Error::Numerical("L + J/n is singular".into()))?;
    inv.add_scalar_mut(-shift);
    Ok(inv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    const SAMPLE_Q: [f64; 7] = [1.810, 0.476, 0.810, -0.524, -0.190, -1.524, -0.857];

    fn two_objects() -> RankingProblem {
        let a = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, -1.0, 0.0]);
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        RankingProblem::from_matrices(a, m).unwrap()
    }

    fn labels(r: &Ranking) -> Vec<Vec<String>> {
        r.labelled_groups()
    }

    fn singletons(names: &[&str]) -> Vec<Vec<String>> {
        names.iter().map(|n| vec![n.to_string()]).collect()
    }

    #[test]
    fn direct_reproduces_sample() {
        let q = least_squares_direct(&fixtures::sample_problem()).unwrap();
        for (got, want) in q.values.iter().zip(SAMPLE_Q) {
            assert!((got - want).abs() < 1e-3, "{got} vs {want}");
        }
        let r = ranking_from_ratings(&q, DEFAULT_TIE_TOL);
        assert_eq!(
            labels(&r),
            singletons(&["X1", "X3", "X2", "X5", "X4", "X7", "X6"])
        );
    }

    #[test]
    fn direct_two_objects() {
        let q = least_squares_direct(&two_objects()).unwrap();
        assert!((q.values[0] - 0.5).abs() < 1e-15);
        assert!((q.values[1] + 0.5).abs() < 1e-15);
    }

    #[test]
    fn direct_refuses_disconnected() {
        let a = DMatrix::zeros(4, 4);
        let mut m = DMatrix::zeros(4, 4);
        m[(0, 1)] = 1.0;
        m[(1, 0)] = 1.0;
        m[(2, 3)] = 1.0;
        m[(3, 2)] = 1.0;
        let p = RankingProblem::from_matrices(a, m).unwrap();
        match least_squares_direct(&p) {
            Err(Error::DisconnectedGraph { components }) => {
                assert_eq!(components, vec![vec!["X1", "X2"], vec!["X3", "X4"]]);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            least_squares_iterative(&p, DEFAULT_TOL, 10),
            Err(Error::DisconnectedGraph { .. })
        ));
    }

    #[test]
    fn iterative_first_steps_are_exact_fractions() {
        let (_, trace) =
            least_squares_iterative(&fixtures::sample_problem(), DEFAULT_TOL, DEFAULT_MAX_ITER)
                .unwrap();
        let q0 = [1.0 / 3.0, 1.0 / 3.0, 0.0, 0.0, 1.0 / 3.0, -1.0, 0.0];
        let q1 = [5.0, 5.0, 2.0, -2.0, 0.0, -8.0, -2.0].map(|x| x / 9.0);
        let q2 = [21.0, 17.0, 7.0, -5.0, 1.0, -31.0, -10.0].map(|x| x / 27.0);
        let q3 = [76.0, 56.0, 29.0, -19.0, -7.0, -95.0, -40.0].map(|x| x / 81.0);
        for (k, want) in [q0, q1, q2, q3].iter().enumerate() {
            for (got, want) in trace.iterates[k].iter().zip(want) {
                assert!((got - want).abs() < 1e-12, "step {k}: {got} vs {want}");
            }
        }
        assert_eq!(trace.ranking_stable_at, Some(13));
    }

    #[test]
    fn iterative_zero_scores_converge_immediately() {
        let mut p = fixtures::sample_problem();
        p = RankingProblem::from_matrices(DMatrix::zeros(7, 7), p.matches().clone()).unwrap();
        let (q, trace) = least_squares_iterative(&p, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(trace.converged_at, Some(0));
        assert!(q.values.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn iterative_reports_max_iterations_with_trace() {
        match least_squares_iterative(&fixtures::sample_problem(), DEFAULT_TOL, 5) {
            Err(Error::MaxIterationsExceeded {
                iterations,
                trace: Some(trace),
                ..
            }) => {
                assert_eq!(iterations, 5);
                assert_eq!(trace.iterates.len(), 6);
                assert!(trace.converged_at.is_none());
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn iterative_rejects_bad_tolerance() {
        assert!(matches!(
            least_squares_iterative(&two_objects(), 0.0, 10),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn iterative_single_object() {
        let p = RankingProblem::from_matrices(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1)).unwrap();
        let (q, trace) = least_squares_iterative(&p, DEFAULT_TOL, 10).unwrap();
        assert_eq!(q.values, vec![0.0]);
        assert_eq!(trace.converged_at, Some(0));
    }

    #[test]
    fn two_objects_are_regular_bipartite() {
        assert!(matches!(
            least_squares_iterative(&two_objects(), DEFAULT_TOL, 10),
            Err(Error::RegularBipartiteGraph)
        ));
    }

    #[test]
    fn grs_zero_epsilon_is_scores() {
        let p = fixtures::sample_problem();
        let x = generalized_row_sum(&p, 0.0).unwrap();
        assert_eq!(x.values, vec![1.0, 1.0, 0.0, 0.0, 1.0, -3.0, 0.0]);
    }

    #[test]
    fn grs_large_epsilon_gives_least_squares_order() {
        let x = generalized_row_sum(&fixtures::sample_problem(), 1e6).unwrap();
        let r = ranking_from_ratings(&x, DEFAULT_TIE_TOL);
        assert_eq!(
            labels(&r),
            singletons(&["X1", "X3", "X2", "X5", "X4", "X7", "X6"])
        );
    }

    #[test]
    fn grs_rejects_negative_epsilon() {
        assert!(matches!(
            generalized_row_sum(&two_objects(), -1.0),
            Err(Error::NegativeEpsilon(_))
        ));
        assert!(grs_series(&two_objects(), -1.0, 3).is_err());
    }

    #[test]
    fn grs_series_zeroth_and_first_order() {
        let p = fixtures::sample_problem();
        let eps = 0.05;
        let scale = 1.0 + eps * 1.0 * 7.0;
        let x0 = grs_series(&p, eps, 0).unwrap();
        let s = [1.0, 1.0, 0.0, 0.0, 1.0, -3.0, 0.0];
        for (got, si) in x0.values.iter().zip(s) {
            assert_eq!(*got, scale * si);
        }

        // First order, written out entrywise: s_i - ε (d_i s_i - Σ_j m_ij s_j).
        let x1 = grs_series(&p, eps, 1).unwrap();
        let m = p.matches();
        let d = p.degrees();
        for i in 0..7 {
            let neighbour_sum: f64 = (0..7).map(|j| m[(i, j)] * s[j]).sum();
            let want = scale * (s[i] - eps * (d[i] * s[i] - neighbour_sum));
            assert!((x1.values[i] - want).abs() < 1e-14);
        }
    }

    #[test]
    fn grs_series_refuses_large_epsilon() {
        // mu1 of the single edge is 2.
        assert!(matches!(
            grs_series(&two_objects(), 0.5, 10),
            Err(Error::EpsilonTooLarge { .. })
        ));
        assert!(grs_series(&two_objects(), 0.49, 10).is_ok());
    }

    #[test]
    fn ranking_groups_ties() {
        let s = RatingVector::new(
            crate::model::default_labels(7),
            vec![1.0, 1.0, 0.0, 0.0, 1.0, -3.0, 0.0],
            Method::Score,
        );
        let r = ranking_from_ratings(&s, 0.0);
        assert_eq!(r.groups, vec![vec![0, 1, 4], vec![2, 3, 6], vec![5]]);

        let flat = RatingVector::new(crate::model::default_labels(3), vec![2.0; 3], Method::Score);
        assert_eq!(ranking_from_ratings(&flat, 0.0).groups, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn pseudoinverse_of_single_edge() {
        // L = [[1,-1],[-1,1]] has pseudoinverse L/4.
        let pinv = laplacian_pseudoinverse(&two_objects()).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[0.25, -0.25, -0.25, 0.25]);
        assert!((pinv - want).amax() < 1e-15);
    }
}
