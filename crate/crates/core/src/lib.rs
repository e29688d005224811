//! Rating and ranking of objects from paired comparisons with missing and
//! repeated matches.
//!
//! A [`RankingProblem`] holds a skew-symmetric results matrix and a symmetric
//! matches matrix. On top of it the crate provides the row sum ([`scores`]),
//! the [`generalized_row_sum`], and the least squares rating, either by a
//! direct solve ([`least_squares_direct`]) or by propagating scores through
//! the loop-balanced comparison multigraph ([`least_squares_iterative`]).
//! [`analyze`] reports the graph properties that decide whether these are
//! well defined: connectivity, bipartiteness, regularity and the largest
//! Laplacian eigenvalue. Dominance digraphs can be converted to ranking
//! problems and rated by [`positional_power`].
//!
//! ```
//! use lsrank::{fixtures, least_squares_direct, ranking_from_ratings};
//!
//! let q = least_squares_direct(&fixtures::sample_problem()).unwrap();
//! let ranking = ranking_from_ratings(&q, 1e-9);
//! assert_eq!(ranking.to_string(), "X1 > X3 > X2 > X5 > X4 > X7 > X6");
//! ```

pub mod digraph;
pub mod error;
pub mod fixtures;
pub mod graph;
pub mod io;
pub mod model;
pub mod solvers;

pub use digraph::{
    digraph_to_ranking_problem, digraph_to_ranking_problem_with, positional_power,
    positional_power_with_decay, Digraph, MutualEdges,
};
pub use error::{Error, Result};
pub use graph::{analyze, balanced_multigraph, BalancedMultigraph, GraphDiagnostics};
pub use model::{
    aggregate, laplacian, objective_value, scores, validate, Method, Ranking, RankingProblem,
    RatingVector, RoundMatrix, Violation,
};
pub use solvers::{
    generalized_row_sum, grs_series, laplacian_pseudoinverse, least_squares_direct,
    least_squares_iterative, ranking_from_ratings, IterationTrace, DEFAULT_MAX_ITER,
    DEFAULT_TIE_TOL, DEFAULT_TOL,
};
