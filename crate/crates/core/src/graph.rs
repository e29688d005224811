//! Structure of the comparison multigraph: connectivity, bipartiteness,
//! regularity, the loop-balanced multigraph, and the largest Laplacian
//! eigenvalue.

use std::collections::VecDeque;

use nalgebra::DVector;
use serde::Serialize;

use crate::model::{laplacian, RankingProblem};

const MU1_MAX_ITER: usize = 10_000;
const MU1_REL_TOL: f64 = 1e-8;
/// Relative slack when comparing real-valued degrees.
const DEGREE_TOL: f64 = 1e-12;
/// Relative slack for detecting `mu1 = 2 * max_degree`.
pub const REGULAR_BIPARTITE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphDiagnostics {
    /// Connected components, each sorted by object index, ordered by their smallest index.
    pub components: Vec<Vec<usize>>,
    pub degrees: Vec<f64>,
    pub max_degree: f64,
    /// Two-colouring of the objects, present iff the graph has no odd cycle.
    pub bipartition: Option<(Vec<usize>, Vec<usize>)>,
    pub is_regular: bool,
    pub is_regular_bipartite: bool,
    /// Largest Laplacian eigenvalue, from power iteration.
    pub mu1_estimate: f64,
}

impl GraphDiagnostics {
    pub fn is_connected(&self) -> bool {
        self.components.len() <= 1
    }
}

/// The comparison multigraph with `max_degree - d_i` loops added at every
/// object so that all degrees become equal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalancedMultigraph {
    pub loops: Vec<f64>,
    pub max_degree: f64,
}

pub fn analyze(problem: &RankingProblem) -> GraphDiagnostics {
    let mut diagnostics = analyze_structure(problem);
    diagnostics.mu1_estimate = largest_laplacian_eigenvalue(problem);
    diagnostics
}

/// Everything in [`analyze`] except the eigenvalue estimate, which is left at 0.
pub(crate) fn analyze_structure(problem: &RankingProblem) -> GraphDiagnostics {
    let n = problem.len();
    let adjacency = adjacency_lists(problem);
    let degrees = problem.degrees();
    let max_degree = degrees.iter().copied().fold(0.0, f64::max);

    let components = components_of(&adjacency);
    let bipartition = two_colouring(&adjacency);
    let is_regular = n == 0
        || degrees
            .iter()
            .all(|&d| (d - max_degree).abs() <= DEGREE_TOL * max_degree.max(1.0));
    let is_regular_bipartite = is_regular && bipartition.is_some();

    GraphDiagnostics {
        components,
        degrees,
        max_degree,
        bipartition,
        is_regular,
        is_regular_bipartite,
        mu1_estimate: 0.0,
    }
}

pub fn balanced_multigraph(problem: &RankingProblem) -> BalancedMultigraph {
    let degrees = problem.degrees();
    let max_degree = degrees.iter().copied().fold(0.0, f64::max);
    BalancedMultigraph {
        loops: degrees.iter().map(|&d| max_degree - d).collect(),
        max_degree,
    }
}

/// Components as lists of object indices (BFS over edges with `m_ij > 0`).
pub fn connected_components(problem: &RankingProblem) -> Vec<Vec<usize>> {
    components_of(&adjacency_lists(problem))
}

fn adjacency_lists(problem: &RankingProblem) -> Vec<Vec<usize>> {
    let m = problem.matches();
    let n = problem.len();
    (0..n)
        .map(|i| (0..n).filter(|&j| j != i && m[(i, j)] > 0.0).collect())
        .collect()
}

fn components_of(adjacency: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = adjacency.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut component = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for &v in &adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    component.push(v);
                    queue.push_back(v);
                }
            }
        }
        component.sort_unstable();
        out.push(component);
    }
    out
}

fn two_colouring(adjacency: &[Vec<usize>]) -> Option<(Vec<usize>, Vec<usize>)> {
    let n = adjacency.len();
    let mut colour: Vec<Option<bool>> = vec![None; n];
    for start in 0..n {
        if colour[start].is_some() {
            continue;
        }
        colour[start] = Some(false);
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            let cu = colour[u].expect("coloured on push");
            for &v in &adjacency[u] {
                match colour[v] {
                    None => {
                        colour[v] = Some(!cu);
                        queue.push_back(v);
                    }
                    Some(cv) if cv == cu => return None,
                    Some(_) => {}
                }
            }
        }
    }
    let (left, right): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| colour[i] == Some(false));
    Some((left, right))
}

/// Power iteration on the Laplacian itself. `L` is positive semidefinite,
/// so its dominant eigenvalue is `mu1`; the start vector is kept orthogonal
/// to the all-ones kernel vector.
pub(crate) fn largest_laplacian_eigenvalue(problem: &RankingProblem) -> f64 {
    let n = problem.len();
    if n < 2 {
        return 0.0;
    }
    let l = laplacian(problem);

    let mut x = DVector::from_fn(n, |i, _| start_entry(i as u64));
    let mean = x.mean();
    x.add_scalar_mut(-mean);
    let norm = x.norm();
    if norm == 0.0 {
        return 0.0;
    }
    x /= norm;

    // Stop on the eigen-residual rather than on Rayleigh quotient changes:
    // the quotient can stall near a lower eigenvalue for many steps.
    let mut estimate = 0.0;
    for _ in 0..MU1_MAX_ITER {
        let y = &l * &x;
        estimate = x.dot(&y);
        let residual = (&y - &x * estimate).norm();
        let ynorm = y.norm();
        if ynorm == 0.0 {
            return 0.0;
        }
        if residual <= MU1_REL_TOL * estimate {
            return estimate;
        }
        x = y / ynorm;
    }
    estimate
}

/// Deterministic pseudo-random entry in [0, 1) (splitmix64). Arithmetic
/// sequences like `frac(i * phi)` can be orthogonal to Laplacian eigenvectors
/// of cycles.
fn start_entry(i: u64) -> f64 {
    let mut z = i.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64
}
