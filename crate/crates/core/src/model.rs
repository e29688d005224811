//! Data model of a ranking problem: per-round comparison outcomes, the
//! aggregated results/matches matrices, and the quantities derived directly
//! from them (scores, Laplacian, least squares objective).

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Slack used when checking the exact algebraic invariants of input data.
const INVARIANT_TOL: f64 = 1e-12;

/// Outcomes of one round of paired comparisons.
///
/// Only compared pairs are stored. `r(i, j)` is the share of the comparison
/// won by `i`, so `r(i, j) + r(j, i) = 1` whenever the pair is defined.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RoundMatrix {
    n: usize,
    entries: BTreeMap<(usize, usize), f64>,
}

impl RoundMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: BTreeMap::new(),
        }
    }

    /// Builds a round from raw entries without any checking. `aggregate`
    /// validates rounds built this way.
    pub fn from_raw(n: usize, entries: BTreeMap<(usize, usize), f64>) -> Self {
        Self { n, entries }
    }

    /// Records that `i` obtained `r` against `j`; `r(j, i) = 1 - r` is filled in.
    pub fn insert(&mut self, i: usize, j: usize, r: f64) -> Result<()> {
        let invalid = |reason: &str| Error::InvalidRoundEntry {
            round: 0,
            i,
            j,
            reason: reason.to_string(),
        };
        if i >= self.n || j >= self.n {
            return Err(invalid("object index out of range"));
        }
        if i == j {
            return Err(invalid("an object cannot be compared with itself"));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(invalid("result must lie in [0, 1]"));
        }
        if self.entries.contains_key(&(i, j)) {
            return Err(invalid("pair already compared in this round"));
        }
        self.entries.insert((i, j), r);
        self.entries.insert((j, i), 1.0 - r);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries.get(&(i, j)).copied()
    }

    /// All defined ordered pairs with their result.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), f64)> + '_ {
        self.entries.iter().map(|(&k, &v)| (k, v))
    }

    fn check(&self, round: usize) -> Result<()> {
        for (&(i, j), &r) in &self.entries {
            let invalid = |reason: &str| Error::InvalidRoundEntry {
                round,
                i,
                j,
                reason: reason.to_string(),
            };
            if i >= self.n || j >= self.n {
                return Err(invalid("object index out of range"));
            }
            if i == j {
                return Err(invalid("diagonal entries are not allowed"));
            }
            if !(0.0..=1.0).contains(&r) {
                return Err(invalid("result must lie in [0, 1]"));
            }
            match self.entries.get(&(j, i)) {
                None => return Err(invalid("reverse orientation missing")),
                Some(&back) if ((r + back) - 1.0).abs() > INVARIANT_TOL => {
                    return Err(Error::InconsistentRound {
                        round,
                        i,
                        j,
                        sum: r + back,
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }
}

/// Objects together with the results matrix `A` and matches matrix `M`.
///
/// `A` is skew-symmetric (net wins of `i` over `j`), `M` symmetric and
/// nonnegative (number of comparisons, possibly fractional).
/// [`RankingProblem::new`] only checks shapes; use [`validate`] or
/// [`RankingProblem::checked`] for the full set of invariants.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingProblem {
    objects: Vec<String>,
    results: DMatrix<f64>,
    matches: DMatrix<f64>,
    rounds: Option<usize>,
}

impl RankingProblem {
    pub fn new(objects: Vec<String>, results: DMatrix<f64>, matches: DMatrix<f64>) -> Result<Self> {
        let n = objects.len();
        for m in [&results, &matches] {
            if m.nrows() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.nrows(),
                });
            }
            if m.ncols() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: m.ncols(),
                });
            }
        }
        Ok(Self {
            objects,
            results,
            matches,
            rounds: None,
        })
    }

    /// Like [`RankingProblem::new`] but rejects any invariant violation.
    pub fn checked(
        objects: Vec<String>,
        results: DMatrix<f64>,
        matches: DMatrix<f64>,
    ) -> Result<Self> {
        let problem = Self::new(objects, results, matches)?;
        let violations = validate(&problem);
        if violations.is_empty() {
            Ok(problem)
        } else {
            Err(Error::InvalidProblem(violations))
        }
    }

    /// Builds a problem with generated labels `X1..Xn`.
    pub fn from_matrices(results: DMatrix<f64>, matches: DMatrix<f64>) -> Result<Self> {
        Self::new(default_labels(results.nrows()), results, matches)
    }

    pub fn with_rounds(mut self, rounds: usize) -> Self {
        self.rounds = Some(rounds);
        self
    }

    pub fn with_objects(mut self, objects: Vec<String>) -> Result<Self> {
        if objects.len() != self.len() {
            return Err(Error::DimensionMismatch {
                expected: self.len(),
                found: objects.len(),
            });
        }
        self.objects = objects;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.objects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.objects.is_empty()
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn results(&self) -> &DMatrix<f64> {
        &self.results
    }

    pub fn matches(&self) -> &DMatrix<f64> {
        &self.matches
    }

    pub fn rounds(&self) -> Option<usize> {
        self.rounds
    }

    /// Number of rounds used by the generalized row sum: the recorded round
    /// count, or `ceil(max m_ij)` when none was recorded.
    pub fn round_count(&self) -> f64 {
        match self.rounds {
            Some(m) => m as f64,
            None => self
                .matches
                .iter()
                .fold(0.0_f64, |acc, &x| acc.max(x))
                .ceil(),
        }
    }

    /// Total comparisons `d_i` of every object.
    pub fn degrees(&self) -> Vec<f64> {
        self.matches.row_iter().map(|row| row.sum()).collect()
    }

    /// Reorders objects so that new index `k` holds old object `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let n = self.len();
        assert_eq!(perm.len(), n, "permutation length must match object count");
        Self {
            objects: perm.iter().map(|&p| self.objects[p].clone()).collect(),
            results: DMatrix::from_fn(n, n, |i, j| self.results[(perm[i], perm[j])]),
            matches: DMatrix::from_fn(n, n, |i, j| self.matches[(perm[i], perm[j])]),
            rounds: self.rounds,
        }
    }
}

pub(crate) fn default_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("X{i}")).collect()
}

/// A violated [`RankingProblem`] invariant, with the offending indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    NonFinite { i: usize, j: usize },
    NonZeroDiagonal { i: usize },
    ResultsNotSkewSymmetric { i: usize, j: usize },
    MatchesNotSymmetric { i: usize, j: usize },
    NegativeMatches { i: usize, j: usize },
    ResultExceedsMatches { i: usize, j: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::NonFinite { i, j } => write!(f, "non-finite entry at ({i},{j})"),
            Violation::NonZeroDiagonal { i } => write!(f, "non-zero diagonal at ({i},{i})"),
            Violation::ResultsNotSkewSymmetric { i, j } => {
                write!(f, "a({i},{j}) != -a({j},{i})")
            }
            Violation::MatchesNotSymmetric { i, j } => write!(f, "m({i},{j}) != m({j},{i})"),
            Violation::NegativeMatches { i, j } => write!(f, "m({i},{j}) < 0"),
            Violation::ResultExceedsMatches { i, j } => write!(f, "|a({i},{j})| > m({i},{j})"),
        }
    }
}

/// Lists every violated invariant of `problem`; empty when the problem is valid.
pub fn validate(problem: &RankingProblem) -> Vec<Violation> {
    let a = problem.results();
    let m = problem.matches();
    let n = problem.len();
    let mut out = Vec::new();

    for i in 0..n {
        for j in 0..n {
            if !a[(i, j)].is_finite() || !m[(i, j)].is_finite() {
                out.push(Violation::NonFinite { i, j });
            }
        }
    }
    if !out.is_empty() {
        return out;
    }

    for i in 0..n {
        if a[(i, i)] != 0.0 || m[(i, i)] != 0.0 {
            out.push(Violation::NonZeroDiagonal { i });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (aij, aji, mij, mji) = (a[(i, j)], a[(j, i)], m[(i, j)], m[(j, i)]);
            let scale = 1.0_f64.max(aij.abs()).max(mij.abs());
            if (aij + aji).abs() > INVARIANT_TOL * scale {
                out.push(Violation::ResultsNotSkewSymmetric { i, j });
            }
            if (mij - mji).abs() > INVARIANT_TOL * scale {
                out.push(Violation::MatchesNotSymmetric { i, j });
            }
            if mij < 0.0 || mji < 0.0 {
                out.push(Violation::NegativeMatches { i, j });
            }
            if aij.abs() > mij + INVARIANT_TOL * scale || aji.abs() > mji + INVARIANT_TOL * scale {
                out.push(Violation::ResultExceedsMatches { i, j });
            }
        }
    }
    out
}

/// Sums rounds into a ranking problem: `a_ij = Σ (r_ij - r_ji)` and
/// `m_ij` = number of rounds comparing `i` and `j`.
pub fn aggregate(rounds: &[RoundMatrix]) -> Result<RankingProblem> {
    let Some(first) = rounds.first() else {
        return Err(Error::EmptyProblem);
    };
    let n = first.len();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for (p, round) in rounds.iter().enumerate() {
        if round.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: round.len(),
            });
        }
        round.check(p)?;
        for ((i, j), r) in round.entries() {
            // The reverse orientation is present and consistent after `check`.
            let back = round.get(j, i).expect("checked round");
            a[(i, j)] += r - back;
            m[(i, j)] += 1.0;
        }
    }
    Ok(RankingProblem::from_matrices(a, m)?.with_rounds(rounds.len()))
}

/// Identifies which rating method produced a [`RatingVector`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Score,
    Grs,
    LeastSquaresDirect,
    LeastSquaresIterative,
    GrsSeries,
    PositionalPower,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Score => "score",
            Method::Grs => "grs",
            Method::LeastSquaresDirect => "least-squares-direct",
            Method::LeastSquaresIterative => "least-squares-iterative",
            Method::GrsSeries => "grs-series",
            Method::PositionalPower => "positional-power",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Ratings of every object, tagged with the method and parameters used.
#[derive(Debug, Clone, PartialEq)]
pub struct RatingVector {
    pub objects: Vec<String>,
    pub values: Vec<f64>,
    pub method: Method,
    pub parameters: BTreeMap<String, f64>,
}

impl RatingVector {
    pub fn new(objects: Vec<String>, values: Vec<f64>, method: Method) -> Self {
        debug_assert_eq!(objects.len(), values.len());
        Self {
            objects,
            values,
            method,
            parameters: BTreeMap::new(),
        }
    }

    pub fn with_parameter(mut self, name: &str, value: f64) -> Self {
        self.parameters.insert(name.to_string(), value);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn as_vector(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.values)
    }
}

/// Weak order of objects, best group first.
#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub objects: Vec<String>,
    /// Tie groups of object indices; inside a group, input order.
    pub groups: Vec<Vec<usize>>,
    pub tie_tolerance: f64,
}

impl Ranking {
    pub fn labelled_groups(&self) -> Vec<Vec<String>> {
        self.groups
            .iter()
            .map(|g| g.iter().map(|&i| self.objects[i].clone()).collect())
            .collect()
    }

    /// Position of the group containing each object (0 = best).
    pub fn positions(&self) -> Vec<usize> {
        let mut pos = vec![0; self.objects.len()];
        for (g, group) in self.groups.iter().enumerate() {
            for &i in group {
                pos[i] = g;
            }
        }
        pos
    }
}

/// Renders as `A > C > B = D`.
impl fmt::Display for Ranking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let groups: Vec<String> = self
            .labelled_groups()
            .into_iter()
            .map(|g| g.join(" = "))
            .collect();
        f.write_str(&groups.join(" > "))
    }
}

pub(crate) fn score_vector(problem: &RankingProblem) -> DVector<f64> {
    let a = problem.results();
    DVector::from_iterator(problem.len(), a.row_iter().map(|row| row.sum()))
}

/// Row sums `s_i = Σ_j a_ij`.
pub fn scores(problem: &RankingProblem) -> RatingVector {
    RatingVector::new(
        problem.objects().to_vec(),
        score_vector(problem).as_slice().to_vec(),
        Method::Score,
    )
}

/// Laplacian of the comparison multigraph: degrees on the diagonal, `-m_ij` elsewhere.
pub fn laplacian(problem: &RankingProblem) -> DMatrix<f64> {
    let m = problem.matches();
    let n = problem.len();
    let mut l = -m.clone();
    for i in 0..n {
        l[(i, i)] = (0..n).filter(|&j| j != i).map(|j| m[(i, j)]).sum();
    }
    l
}

/// Weighted squared error `Σ m_ij (2a_ij/m_ij - q_i + q_j)^2` over ordered
/// pairs with `m_ij > 0`.
///
/// Its minimizers solve `Lq = 2s`, which is a rescaling of the normative
/// system `Lq = s`; use it to compare candidate ratings, not as an absolute
/// optimality certificate for the least squares rating.
pub fn objective_value(problem: &RankingProblem, q: &[f64]) -> Result<f64> {
    let n = problem.len();
    if q.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: q.len(),
        });
    }
    let a = problem.results();
    let m = problem.matches();
    let mut total = 0.0;
    for i in 0..n {
        for j in 0..n {
            let mij = m[(i, j)];
            if i != j && mij > 0.0 {
                let h = 2.0 * a[(i, j)] / mij;
                let r = h - q[i] + q[j];
                total += mij * r * r;
            }
        }
    }
    Ok(total)
}
