//! Seeded workloads for the `lsrank` benchmarks.

use lsrank::{analyze, fixtures, Digraph, RankingProblem};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Object counts the solver benchmarks sweep over.
pub const SIZES: [usize; 4] = [10, 50, 100, 200];

fn rng(n: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0x5eed ^ n as u64)
}

/// Sparse connected problem with about four opponents per object and up to
/// three matches per pair. Never regular bipartite, so the iteration applies.
pub fn sparse_problem(n: usize) -> RankingProblem {
    let mut rng = rng(n);
    let density = (4.0 / n as f64).min(1.0);
    loop {
        let p = fixtures::random_connected(&mut rng, n, 3, density);
        if !analyze(&p).is_regular_bipartite {
            return p;
        }
    }
}

/// Round-robin problem: every pair compared once.
pub fn round_robin(n: usize) -> RankingProblem {
    fixtures::random_round_robin(&mut rng(n), n)
}

pub fn digraph(n: usize) -> Digraph {
    fixtures::random_digraph(&mut rng(n), n, 0.3)
}
