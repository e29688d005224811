//! CSV input dialects, CSV/JSON output.
//!
//! Input dialects, identified by their header line:
//!
//! | dialect    | header                           |
//! |------------|----------------------------------|
//! | rounds     | `round,object_i,object_j,result` |
//! | aggregated | `object_i,object_j,a_ij,m_ij`    |
//! | digraph    | `source,target`                  |

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::digraph::Digraph;
use crate::error::{Error, Result};
use crate::graph::{BalancedMultigraph, GraphDiagnostics};
use crate::model::{RankingProblem, RatingVector, RoundMatrix};
use crate::solvers::{ranking_from_ratings, IterationTrace};

pub const ROUNDS_HEADER: [&str; 4] = ["round", "object_i", "object_j", "result"];
pub const AGGREGATED_HEADER: [&str; 4] = ["object_i", "object_j", "a_ij", "m_ij"];
pub const DIGRAPH_HEADER: [&str; 2] = ["source", "target"];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InputFormat {
    Rounds,
    Aggregated,
    Digraph,
}

impl InputFormat {
    pub fn header(self) -> &'static [&'static str] {
        match self {
            InputFormat::Rounds => &ROUNDS_HEADER,
            InputFormat::Aggregated => &AGGREGATED_HEADER,
            InputFormat::Digraph => &DIGRAPH_HEADER,
        }
    }

    /// Recognises the dialect from the header line.
    pub fn detect(text: &str) -> Option<Self> {
        let first = text.lines().find(|l| !l.trim().is_empty())?;
        let fields: Vec<&str> = first.split(',').map(str::trim).collect();
        [
            InputFormat::Rounds,
            InputFormat::Aggregated,
            InputFormat::Digraph,
        ]
        .into_iter()
        .find(|f| f.header() == fields.as_slice())
    }
}

/// Per-round comparisons with the object labels they refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundsInput {
    pub objects: Vec<String>,
    pub round_labels: Vec<String>,
    pub rounds: Vec<RoundMatrix>,
}

impl RoundsInput {
    pub fn aggregate(&self) -> Result<RankingProblem> {
        crate::model::aggregate(&self.rounds)?.with_objects(self.objects.clone())
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(text.as_bytes())
}

fn check_header(rdr: &mut csv::Reader<&[u8]>, format: InputFormat) -> Result<()> {
    let header = rdr.headers().map_err(|e| csv_error(&e))?;
    let fields: Vec<&str> = header.iter().collect();
    if fields != format.header() {
        return Err(Error::parse(
            1,
            format!(
                "expected header `{}`, found `{}`",
                format.header().join(","),
                fields.join(",")
            ),
        ));
    }
    Ok(())
}

fn csv_error(e: &csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    Error::parse(line, e.to_string())
}

fn records<'r, 't>(
    rdr: &'r mut csv::Reader<&'t [u8]>,
) -> impl Iterator<Item = Result<(u64, csv::StringRecord)>> + use<'r, 't> {
    rdr.records().map(|r| {
        let record = r.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        Ok((line, record))
    })
}

fn number(line: u64, field: &str, what: &str) -> Result<f64> {
    let x: f64 = field
        .parse()
        .map_err(|_| Error::parse(line, format!("{what} `{field}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::parse(line, format!("{what} must be finite")));
    }
    Ok(x)
}

fn intern(labels: &mut Vec<String>, index: &mut HashMap<String, usize>, label: &str) -> usize {
    *index.entry(label.to_string()).or_insert_with(|| {
        labels.push(label.to_string());
        labels.len() - 1
    })
}

fn label(line: u64, field: &str, what: &str) -> Result<String> {
    if field.is_empty() {
        Err(Error::parse(line, format!("empty {what}")))
    } else {
        Ok(field.to_string())
    }
}

/// Parses the per-round dialect. `r_ji = 1 - r_ij` is filled in; objects and
/// rounds are numbered by first appearance.
pub fn parse_rounds_csv(text: &str) -> Result<RoundsInput> {
    let mut rdr = reader(text);
    check_header(&mut rdr, InputFormat::Rounds)?;

    let mut objects = Vec::new();
    let mut object_index = HashMap::new();
    let mut round_labels = Vec::new();
    let mut round_index = HashMap::new();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();

    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let round = label(line, &rec[0], "round")?;
        let oi = label(line, &rec[1], "object_i")?;
        let oj = label(line, &rec[2], "object_j")?;
        if oi == oj {
            return Err(Error::parse(
                line,
                format!("object `{oi}` compared with itself"),
            ));
        }
        let r = number(line, &rec[3], "result")?;
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::parse(line, format!("result {r} outside [0, 1]")));
        }
        let p = intern(&mut round_labels, &mut round_index, &round);
        let i = intern(&mut objects, &mut object_index, &oi);
        let j = intern(&mut objects, &mut object_index, &oj);
        if !seen.insert((p, i.min(j), i.max(j))) {
            return Err(Error::parse(
                line,
                format!("pair ({oi}, {oj}) appears twice in round `{round}`"),
            ));
        }
        entries.push((p, i, j, r));
    }
    if objects.is_empty() {
        return Err(Error::EmptyProblem);
    }

    let n = objects.len();
    let mut rounds = vec![RoundMatrix::new(n); round_labels.len()];
    for (p, i, j, r) in entries {
        rounds[p].insert(i, j, r)?;
    }
    Ok(RoundsInput {
        objects,
        round_labels,
        rounds,
    })
}

/// Parses the aggregated dialect. Each unordered pair may appear once;
/// the reverse orientation and unlisted pairs are completed.
pub fn parse_aggregated_csv(text: &str) -> Result<RankingProblem> {
    let mut rdr = reader(text);
    check_header(&mut rdr, InputFormat::Aggregated)?;

    let mut objects = Vec::new();
    let mut index = HashMap::new();
    let mut seen = HashSet::new();
    let mut entries = Vec::new();
    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let oi = label(line, &rec[0], "object_i")?;
        let oj = label(line, &rec[1], "object_j")?;
        if oi == oj {
            return Err(Error::parse(
                line,
                format!("object `{oi}` compared with itself"),
            ));
        }
        let a = number(line, &rec[2], "a_ij")?;
        let m = number(line, &rec[3], "m_ij")?;
        if m < 0.0 {
            return Err(Error::parse(line, format!("m_ij = {m} is negative")));
        }
        if a.abs() > m {
            return Err(Error::parse(
                line,
                format!("|a_ij| = {} exceeds m_ij = {m}", a.abs()),
            ));
        }
        let i = intern(&mut objects, &mut index, &oi);
        let j = intern(&mut objects, &mut index, &oj);
        if !seen.insert((i.min(j), i.max(j))) {
            return Err(Error::parse(
                line,
                format!("pair ({oi}, {oj}) listed twice"),
            ));
        }
        entries.push((i, j, a, m));
    }
    if objects.is_empty() {
        return Err(Error::EmptyProblem);
    }

    let n = objects.len();
    let mut a = DMatrix::zeros(n, n);
    let mut m = DMatrix::zeros(n, n);
    for (i, j, aij, mij) in entries {
        a[(i, j)] = aij;
        a[(j, i)] = -aij;
        m[(i, j)] = mij;
        m[(j, i)] = mij;
    }
    RankingProblem::checked(objects, a, m)
}

/// Parses the digraph dialect: one `source,target` edge per line.
pub fn parse_digraph_csv(text: &str) -> Result<Digraph> {
    let mut rdr = reader(text);
    check_header(&mut rdr, InputFormat::Digraph)?;
    let mut nodes = Vec::new();
    let mut index = HashMap::new();
    let mut edges = Vec::new();
    let mut seen = HashSet::new();
    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let from = label(line, &rec[0], "source")?;
        let to = label(line, &rec[1], "target")?;
        if from == to {
            return Err(Error::parse(line, format!("self-loop at `{from}`")));
        }
        let i = intern(&mut nodes, &mut index, &from);
        let j = intern(&mut nodes, &mut index, &to);
        if !seen.insert((i, j)) {
            return Err(Error::parse(line, format!("duplicate edge {from} -> {to}")));
        }
        edges.push((i, j));
    }
    if nodes.is_empty() {
        return Err(Error::EmptyProblem);
    }
    Digraph::new(nodes, edges)
}

/// Serializes a problem in the aggregated dialect, one line per compared pair.
pub fn write_aggregated_csv(problem: &RankingProblem) -> String {
    let mut out = AGGREGATED_HEADER.join(",");
    out.push('\n');
    let (a, m) = (problem.results(), problem.matches());
    let labels = problem.objects();
    for i in 0..problem.len() {
        for j in (i + 1)..problem.len() {
            if m[(i, j)] != 0.0 || a[(i, j)] != 0.0 {
                // `+ 0.0` turns -0 into 0.
                let _ = writeln!(
                    out,
                    "{},{},{},{}",
                    labels[i],
                    labels[j],
                    a[(i, j)] + 0.0,
                    m[(i, j)]
                );
            }
        }
    }
    out
}

/// One row per recorded iterate: `step,<object...>,delta`. Values are
/// written in shortest round-trip form, so the table reproduces the trace exactly.
pub fn write_trace_csv(trace: &IterationTrace) -> String {
    let mut out = String::from("step");
    for label in &trace.objects {
        out.push(',');
        out.push_str(label);
    }
    out.push_str(",delta\n");
    for (k, (q, delta)) in trace.iterates.iter().zip(&trace.step_deltas).enumerate() {
        let _ = write!(out, "{k}");
        for v in q {
            let _ = write!(out, ",{v:?}");
        }
        let _ = writeln!(out, ",{delta:?}");
    }
    out
}

/// Reads a trace table written by [`write_trace_csv`] back into
/// `(iterates, deltas)`.
pub fn read_trace_csv(text: &str) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let mut rdr = reader(text);
    let width = rdr.headers().map_err(|e| csv_error(&e))?.len();
    if width < 2 {
        return Err(Error::parse(1, "trace header needs step and delta columns"));
    }
    let mut iterates = Vec::new();
    let mut deltas = Vec::new();
    for item in records(&mut rdr) {
        let (line, rec) = item?;
        let values: Vec<f64> = rec
            .iter()
            .skip(1)
            .map(|f| number(line, f, "value"))
            .collect::<Result<_>>()?;
        let (q, delta) = values.split_at(width - 2);
        iterates.push(q.to_vec());
        deltas.push(delta[0]);
    }
    Ok((iterates, deltas))
}

/// Rounds to 12 significant digits for stable, diffable output.
pub fn round_sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankingDoc {
    pub order: String,
    pub groups: Vec<Vec<String>>,
    pub tie_tolerance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsDoc {
    pub connected: bool,
    pub components: Vec<Vec<String>>,
    pub degrees: Vec<f64>,
    pub max_degree: f64,
    pub bipartite: bool,
    pub bipartition: Option<[Vec<String>; 2]>,
    pub is_regular: bool,
    pub is_regular_bipartite: bool,
    pub mu1_estimate: f64,
    pub loops: Vec<f64>,
}

impl DiagnosticsDoc {
    pub fn new(objects: &[String], d: &GraphDiagnostics, balanced: &BalancedMultigraph) -> Self {
        let names = |idx: &[usize]| idx.iter().map(|&i| objects[i].clone()).collect::<Vec<_>>();
        Self {
            connected: d.is_connected(),
            components: d.components.iter().map(|c| names(c)).collect(),
            degrees: d.degrees.iter().copied().map(round_sig12).collect(),
            max_degree: round_sig12(d.max_degree),
            bipartite: d.bipartition.is_some(),
            bipartition: d.bipartition.as_ref().map(|(l, r)| [names(l), names(r)]),
            is_regular: d.is_regular,
            is_regular_bipartite: d.is_regular_bipartite,
            mu1_estimate: round_sig12(d.mu1_estimate),
            loops: balanced.loops.iter().copied().map(round_sig12).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceSummary {
    pub steps: usize,
    pub converged_at: Option<usize>,
    pub ranking_stable_at: Option<usize>,
    pub final_delta: f64,
}

impl From<&IterationTrace> for TraceSummary {
    fn from(t: &IterationTrace) -> Self {
        Self {
            steps: t.steps(),
            converged_at: t.converged_at,
            ranking_stable_at: t.ranking_stable_at,
            final_delta: t.step_deltas.last().copied().unwrap_or(0.0),
        }
    }
}

/// JSON result of one rating run. Field order is fixed; floats carry 12
/// significant digits.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultDocument {
    pub objects: Vec<String>,
    pub method: String,
    pub parameters: BTreeMap<String, f64>,
    pub ratings: Vec<f64>,
    pub ranking: RankingDoc,
    pub diagnostics: Option<DiagnosticsDoc>,
    pub trace: Option<TraceSummary>,
}

impl ResultDocument {
    pub fn new(ratings: &RatingVector, tie_tol: f64) -> Self {
        let ranking = ranking_from_ratings(ratings, tie_tol);
        Self {
            objects: ratings.objects.clone(),
            method: ratings.method.as_str().to_string(),
            parameters: ratings
                .parameters
                .iter()
                .map(|(k, &v)| (k.clone(), round_sig12(v)))
                .collect(),
            ratings: ratings.values.iter().copied().map(round_sig12).collect(),
            ranking: RankingDoc {
                order: ranking.to_string(),
                groups: ranking.labelled_groups(),
                tie_tolerance: ranking.tie_tolerance,
            },
            diagnostics: None,
            trace: None,
        }
    }

    pub fn with_diagnostics(mut self, diagnostics: DiagnosticsDoc) -> Self {
        self.diagnostics = Some(diagnostics);
        self
    }

    pub fn with_trace(mut self, trace: &IterationTrace) -> Self {
        self.trace = Some(trace.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}
