//! Reference instances and random problem generators shared by tests,
//! benchmarks and examples.

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::digraph::Digraph;
use crate::model::{default_labels, RankingProblem};

/// Dominance edges of a sparse seven-object preference graph (0-based).
/// Each edge is one decisive comparison won by the first object.
pub const SAMPLE_EDGES: [(usize, usize); 7] =
    [(0, 2), (2, 4), (4, 5), (4, 6), (1, 3), (3, 5), (6, 5)];

/// The seven-object problem built from [`SAMPLE_EDGES`] with `a_ij = m_ij = 1`
/// along each edge.
pub fn sample_problem() -> RankingProblem {
    let mut a = DMatrix::zeros(7, 7);
    let mut m = DMatrix::zeros(7, 7);
    for &(i, j) in SAMPLE_EDGES.iter() {
        a[(i, j)] = 1.0;
        a[(j, i)] = -1.0;
        m[(i, j)] = 1.0;
        m[(j, i)] = 1.0;
    }
    RankingProblem::from_matrices(a, m).expect("square matrices")
}

pub fn sample_digraph() -> Digraph {
    Digraph::new(default_labels(7), SAMPLE_EDGES.to_vec()).expect("valid edges")
}

/// Round-robin problem (`m_ij = 1` for all `i != j`) with the given results.
/// Only the strict upper triangle of `upper` is read.
pub fn round_robin(upper: &DMatrix<f64>) -> RankingProblem {
    let n = upper.nrows();
    let a = DMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Less => upper[(i, j)],
        std::cmp::Ordering::Greater => -upper[(j, i)],
        std::cmp::Ordering::Equal => 0.0,
    });
    let m = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { 1.0 });
    RankingProblem::from_matrices(a, m).expect("square matrices")
}

/// Random round-robin with real-valued results in `[-1, 1]`.
pub fn random_round_robin<R: Rng + ?Sized>(rng: &mut R, n: usize) -> RankingProblem {
    let upper = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..=1.0));
    round_robin(&upper)
}

/// Complete bipartite graph `K_{t,t}` with unit weights and random decisive results.
pub fn complete_bipartite<R: Rng + ?Sized>(rng: &mut R, t: usize) -> RankingProblem {
    let n = 2 * t;
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for i in 0..t {
        for j in t..n {
            let r = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            a[(i, j)] = r;
            a[(j, i)] = -r;
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
    }
    RankingProblem::from_matrices(a, m).expect("square matrices")
}

/// Random connected problem: a random spanning tree plus each remaining pair
/// with probability `density`, integer match counts in `1..=max_weight`, and
/// net results from simulated win/draw/loss outcomes.
pub fn random_connected<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    max_weight: u32,
    density: f64,
) -> RankingProblem {
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for k in 1..n {
        let parent = order[rng.gen_range(0..k)];
        edges.push((order[k], parent));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let in_tree = edges
                .iter()
                .any(|&(u, v)| (u, v) == (i, j) || (u, v) == (j, i));
            if !in_tree && rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    build_from_edges(rng, n, &edges, max_weight)
}

/// Random problem whose comparison graph has (at least) the given components.
/// Every component of size `k` is filled with a random connected instance.
pub fn random_disconnected<R: Rng + ?Sized>(
    rng: &mut R,
    sizes: &[usize],
    max_weight: u32,
) -> RankingProblem {
    let n: usize = sizes.iter().sum();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    let mut offset = 0;
    for &k in sizes {
        let block = random_connected(rng, k, max_weight, 0.5);
        a.view_mut((offset, offset), (k, k))
            .copy_from(block.results());
        m.view_mut((offset, offset), (k, k))
            .copy_from(block.matches());
        offset += k;
    }
    RankingProblem::from_matrices(a, m).expect("square matrices")
}

/// Random digraph where each ordered pair is an edge with probability `density`.
pub fn random_digraph<R: Rng + ?Sized>(rng: &mut R, n: usize, density: f64) -> Digraph {
    let mut edges = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.gen_bool(density) {
                edges.push((i, j));
            }
        }
    }
    Digraph::new(default_labels(n), edges).expect("valid edges")
}

fn build_from_edges<R: Rng + ?Sized>(
    rng: &mut R,
    n: usize,
    edges: &[(usize, usize)],
    max_weight: u32,
) -> RankingProblem {
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for &(i, j) in edges {
        let games = rng.gen_range(1..=max_weight.max(1));
        let net: i32 = (0..games).map(|_| rng.gen_range(-1..=1)).sum();
        a[(i, j)] = net as f64;
        a[(j, i)] = -(net as f64);
        m[(i, j)] = games as f64;
        m[(j, i)] = games as f64;
    }
    RankingProblem::from_matrices(a, m).expect("square matrices")
}
