//! Dominance digraphs: conversion into ranking problems and the positional
//! power rating of their nodes.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::model::{Method, RankingProblem, RatingVector};

/// Irreflexive digraph; an edge `(i, j)` means `i` dominates `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct Digraph {
    nodes: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl Digraph {
    pub fn new(
        nodes: Vec<String>,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut set = BTreeSet::new();
        for (i, j) in edges {
            if i >= n || j >= n {
                return Err(Error::InvalidDigraph(format!(
                    "edge ({i},{j}) out of range"
                )));
            }
            if i == j {
                return Err(Error::InvalidDigraph(format!("self-loop at {}", nodes[i])));
            }
            if !set.insert((i, j)) {
                return Err(Error::InvalidDigraph(format!(
                    "duplicate edge {} -> {}",
                    nodes[i], nodes[j]
                )));
            }
        }
        Ok(Self { nodes, edges: set })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.edges.contains(&(i, j))
    }

    /// 0/1 adjacency matrix, `t_ij = 1` iff `(i, j)` is an edge.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut t = DMatrix::zeros(n, n);
        for &(i, j) in &self.edges {
            t[(i, j)] = 1.0;
        }
        t
    }

    pub fn out_degrees(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.len()];
        for &(i, _) in &self.edges {
            out[i] += 1.0;
        }
        out
    }

    /// Relabels so that new node `k` is old node `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut inverse = vec![0; perm.len()];
        for (k, &p) in perm.iter().enumerate() {
            inverse[p] = k;
        }
        Self {
            nodes: perm.iter().map(|&p| self.nodes[p].clone()).collect(),
            edges: self
                .edges
                .iter()
                .map(|&(i, j)| (inverse[i], inverse[j]))
                .collect(),
        }
    }
}

/// How a pair of opposite edges is counted when building a ranking problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MutualEdges {
    /// One drawn match: `a_ij = 0`, `m_ij = 1`.
    #[default]
    OneMatch,
    /// One win each: `a_ij = 0`, `m_ij = 2`.
    TwoMatches,
}

/// `a_ij = ±1` for one-way edges, 0 for mutual or absent ones; `m_ij = 1`
/// whenever any edge joins the pair.
pub fn digraph_to_ranking_problem(g: &Digraph) -> RankingProblem {
    digraph_to_ranking_problem_with(g, MutualEdges::OneMatch)
}

pub fn digraph_to_ranking_problem_with(g: &Digraph, mutual: MutualEdges) -> RankingProblem {
    let n = g.len();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for &(i, j) in &g.edges {
        if g.has_edge(j, i) {
            let count = match mutual {
                MutualEdges::OneMatch => 1.0,
                MutualEdges::TwoMatches => 2.0,
            };
            m[(i, j)] = count;
            m[(j, i)] = count;
        } else {
            a[(i, j)] = 1.0;
            a[(j, i)] = -1.0;
            m[(i, j)] = 1.0;
            m[(j, i)] = 1.0;
        }
    }
    RankingProblem::new(g.nodes.clone(), a, m).expect("square matrices")
}

/// Positional power: limit of `p^0 = 0`, `p^k = T e + (1/n) T p^(k-1)`.
pub fn positional_power(g: &Digraph, tol: f64, max_iter: usize) -> Result<RatingVector> {
    let n = g.len() as f64;
    positional_power_with_decay(g, n.max(1.0), tol, max_iter)
}

/// Positional power with successor weight `1/decay_denominator` in place of
/// `1/n`. Any `decay_denominator > n - 1` gives a convergent iteration.
pub fn positional_power_with_decay(
    g: &Digraph,
    decay_denominator: f64,
    tol: f64,
    max_iter: usize,
) -> Result<RatingVector> {
    let n = g.len();
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let lower = n.saturating_sub(1) as f64;
    if !(decay_denominator > lower && decay_denominator.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "decay denominator must exceed {lower}, got {decay_denominator}"
        )));
    }

    let t = g.adjacency();
    let base = DVector::from_vec(g.out_degrees());
    let weight = 1.0 / decay_denominator;
    let mut p = DVector::zeros(n);
    let mut last_delta = f64::INFINITY;
    for step in 1..=max_iter {
        let next = &base + (&t * &p) * weight;
        last_delta = (&next - &p).amax();
        p = next;
        if last_delta < tol {
            return Ok(RatingVector::new(
                g.nodes.clone(),
                p.as_slice().to_vec(),
                Method::PositionalPower,
            )
            .with_parameter("decay_denominator", decay_denominator)
            .with_parameter("tol", tol)
            .with_parameter("steps", step as f64));
        }
    }
    Err(Error::MaxIterationsExceeded {
        iterations: max_iter,
        last_delta,
        trace: None,
    })
}
