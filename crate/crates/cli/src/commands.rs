use std::fmt::Write as _;
use std::fs;
use std::io::Read;
use std::path::Path;

use lsrank::io::{
    parse_aggregated_csv, parse_digraph_csv, parse_rounds_csv, write_aggregated_csv,
    write_trace_csv, DiagnosticsDoc, InputFormat, ResultDocument,
};
use lsrank::{
    analyze, balanced_multigraph, digraph_to_ranking_problem_with, generalized_row_sum, grs_series,
    least_squares_direct, least_squares_iterative, positional_power, positional_power_with_decay,
    ranking_from_ratings, scores, Digraph, Error, MutualEdges, RankingProblem, RatingVector,
};
use serde::Serialize;

use crate::args::{Command, GrsArgs, InputArgs, SolveMethod};

/// Failure of a subcommand, already classified by exit code.
#[derive(Debug)]
pub enum Failure {
    /// Unreadable or invalid input data, or a rejected parameter.
    Data(String),
    /// The comparison graph does not admit the requested method.
    Structural(String),
    /// Anything else: non-convergence, I/O on output files, numerical breakdown.
    Other(String),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Data(_) => 2,
            Failure::Structural(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            Failure::Data(m) | Failure::Structural(m) | Failure::Other(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let message = e.to_string();
        match e {
            _ if e.is_structural() => Failure::Structural(message),
            Error::MaxIterationsExceeded { .. } | Error::Numerical(_) => Failure::Other(message),
            _ => Failure::Data(message),
        }
    }
}

type Outcome = Result<String, Failure>;

/// Parsed input: a digraph keeps its edge structure for positional power.
enum Input {
    Problem(RankingProblem),
    Digraph(Digraph, RankingProblem),
}

impl Input {
    fn into_problem(self) -> RankingProblem {
        match self {
            Input::Problem(p) | Input::Digraph(_, p) => p,
        }
    }
}

fn read_text(path: Option<&Path>) -> Result<String, Failure> {
    match path {
        Some(p) => fs::read_to_string(p)
            .map_err(|e| Failure::Data(format!("cannot read {}: {e}", p.display()))),
        None => {
            let mut text = String::new();
            std::io::stdin()
                .read_to_string(&mut text)
                .map_err(|e| Failure::Data(format!("cannot read standard input: {e}")))?;
            Ok(text)
        }
    }
}

fn resolve_format(args: &InputArgs, text: &str) -> Result<InputFormat, Failure> {
    let detected = InputFormat::detect(text);
    match (args.format.map(InputFormat::from), detected) {
        (Some(asked), Some(found)) if asked != found => Err(Failure::Data(format!(
            "--format {} conflicts with the input header `{}`",
            format_name(asked),
            found.header().join(",")
        ))),
        (Some(asked), _) => Ok(asked),
        (None, Some(found)) => Ok(found),
        (None, None) => Err(Failure::Data(
            "line 1: unrecognised header; expected one of `round,object_i,object_j,result`, \
             `object_i,object_j,a_ij,m_ij` or `source,target`"
                .into(),
        )),
    }
}

fn format_name(f: InputFormat) -> &'static str {
    match f {
        InputFormat::Rounds => "rounds",
        InputFormat::Aggregated => "aggregated",
        InputFormat::Digraph => "digraph",
    }
}

fn load(args: &InputArgs) -> Result<Input, Failure> {
    let text = read_text(args.file.as_deref())?;
    let input = match resolve_format(args, &text)? {
        InputFormat::Rounds => Input::Problem(parse_rounds_csv(&text)?.aggregate()?),
        InputFormat::Aggregated => Input::Problem(parse_aggregated_csv(&text)?),
        InputFormat::Digraph => {
            let g = parse_digraph_csv(&text)?;
            let mutual = if args.mutual_two_matches {
                MutualEdges::TwoMatches
            } else {
                MutualEdges::OneMatch
            };
            let p = digraph_to_ranking_problem_with(&g, mutual);
            Input::Digraph(g, p)
        }
    };
    check_tie_tol(args.tie_tol)?;
    Ok(input)
}

fn load_digraph(args: &InputArgs) -> Result<Digraph, Failure> {
    match load(args)? {
        Input::Digraph(g, _) => Ok(g),
        Input::Problem(_) => Err(needs_digraph()),
    }
}

fn needs_digraph() -> Failure {
    Failure::Data("this command needs digraph input (header `source,target`)".into())
}

fn check_tie_tol(tie_tol: f64) -> Result<(), Failure> {
    if tie_tol >= 0.0 && tie_tol.is_finite() {
        Ok(())
    } else {
        Err(Failure::Data(format!(
            "--tie-tol must be nonnegative, got {tie_tol}"
        )))
    }
}

fn with_rounds(problem: RankingProblem, grs: &GrsArgs) -> Result<RankingProblem, Failure> {
    match grs.rounds {
        Some(0) => Err(Failure::Data("--rounds must be at least 1".into())),
        Some(m) => Ok(problem.with_rounds(m)),
        None => Ok(problem),
    }
}

/// `1 / (2 m (n - 1))`, small enough that indirect comparisons only refine
/// the scores. Zero when there is nothing to compare.
fn default_epsilon(problem: &RankingProblem) -> f64 {
    let m = problem.round_count();
    let n = problem.len() as f64;
    if m > 0.0 && n > 1.0 {
        1.0 / (2.0 * m * (n - 1.0))
    } else {
        0.0
    }
}

fn diagnostics(problem: &RankingProblem) -> DiagnosticsDoc {
    DiagnosticsDoc::new(
        problem.objects(),
        &analyze(problem),
        &balanced_multigraph(problem),
    )
}

fn document(ratings: &RatingVector, problem: &RankingProblem, tie_tol: f64) -> String {
    let mut json = ResultDocument::new(ratings, tie_tol)
        .with_diagnostics(diagnostics(problem))
        .to_json();
    json.push('\n');
    json
}

pub fn run(command: Command) -> Outcome {
    match command {
        Command::Solve { input, method, grs } => solve(&input, method, &grs),
        Command::Iterate {
            input,
            tol,
            max_iter,
            trace,
            fallback_direct,
        } => iterate(&input, tol, max_iter, trace.as_deref(), fallback_direct),
        Command::Diagnose { input } => diagnose(&input),
        Command::Grs { input, grs, series } => run_grs(&input, &grs, series),
        Command::PositionalPower {
            input,
            tol,
            max_iter,
            decay,
        } => run_positional_power(&input, tol, max_iter, decay),
        Command::ConvertDigraph { input } => match load(&input)? {
            Input::Digraph(_, problem) => Ok(write_aggregated_csv(&problem)),
            Input::Problem(_) => Err(needs_digraph()),
        },
        Command::Compare { input, grs } => compare(&input, &grs),
    }
}

fn solve(args: &InputArgs, method: SolveMethod, grs: &GrsArgs) -> Outcome {
    let problem = with_rounds(load(args)?.into_problem(), grs)?;
    let ratings = match method {
        SolveMethod::Score => scores(&problem),
        SolveMethod::Ls => least_squares_direct(&problem)?,
        SolveMethod::Grs => {
            let epsilon = grs.epsilon.unwrap_or_else(|| default_epsilon(&problem));
            generalized_row_sum(&problem, epsilon)?
        }
    };
    Ok(document(&ratings, &problem, args.tie_tol))
}

fn iterate(
    args: &InputArgs,
    tol: f64,
    max_iter: usize,
    trace_path: Option<&Path>,
    fallback_direct: bool,
) -> Outcome {
    let problem = load(args)?.into_problem();
    let write_trace = |csv: String| -> Result<(), Failure> {
        if let Some(path) = trace_path {
            fs::write(path, csv)
                .map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))?;
        }
        Ok(())
    };
    match least_squares_iterative(&problem, tol, max_iter) {
        Ok((ratings, trace)) => {
            write_trace(write_trace_csv(&trace))?;
            let mut json = ResultDocument::new(&ratings, args.tie_tol)
                .with_diagnostics(diagnostics(&problem))
                .with_trace(&trace)
                .to_json();
            json.push('\n');
            Ok(json)
        }
        Err(Error::RegularBipartiteGraph) if fallback_direct => {
            eprintln!("warning: regular bipartite comparison graph; solving directly");
            let ratings = least_squares_direct(&problem)?;
            Ok(document(&ratings, &problem, args.tie_tol))
        }
        Err(Error::MaxIterationsExceeded {
            iterations,
            last_delta,
            trace: Some(trace),
        }) => {
            write_trace(write_trace_csv(&trace))?;
            Err(Error::MaxIterationsExceeded {
                iterations,
                last_delta,
                trace: None,
            }
            .into())
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Serialize)]
struct DiagnoseOutput {
    objects: Vec<String>,
    #[serde(flatten)]
    diagnostics: DiagnosticsDoc,
}

fn diagnose(args: &InputArgs) -> Outcome {
    let problem = load(args)?.into_problem();
    let out = DiagnoseOutput {
        objects: problem.objects().to_vec(),
        diagnostics: diagnostics(&problem),
    };
    let mut json = serde_json::to_string_pretty(&out).expect("diagnostics serialize");
    json.push('\n');
    Ok(json)
}

fn run_grs(args: &InputArgs, grs: &GrsArgs, series: Option<usize>) -> Outcome {
    let problem = with_rounds(load(args)?.into_problem(), grs)?;
    let epsilon = grs.epsilon.unwrap_or_else(|| default_epsilon(&problem));
    let ratings = match series {
        Some(k_max) => grs_series(&problem, epsilon, k_max)?,
        None => generalized_row_sum(&problem, epsilon)?,
    };
    Ok(document(&ratings, &problem, args.tie_tol))
}

fn run_positional_power(
    args: &InputArgs,
    tol: f64,
    max_iter: usize,
    decay: Option<f64>,
) -> Outcome {
    let g = load_digraph(args)?;
    let ratings = match decay {
        Some(a) => positional_power_with_decay(&g, a, tol, max_iter)?,
        None => positional_power(&g, tol, max_iter)?,
    };
    let mut json = ResultDocument::new(&ratings, args.tie_tol).to_json();
    json.push('\n');
    Ok(json)
}

/// Positional power is only defined for digraph input; least squares may be
/// undefined on the graph. Missing columns are shown as `-`.
fn compare(args: &InputArgs, grs: &GrsArgs) -> Outcome {
    let input = load(args)?;
    let digraph = match &input {
        Input::Digraph(g, _) => Some(g.clone()),
        Input::Problem(_) => None,
    };
    let problem = with_rounds(input.into_problem(), grs)?;
    let epsilon = grs.epsilon.unwrap_or_else(|| default_epsilon(&problem));

    let mut columns: Vec<(String, Result<RatingVector, String>)> = vec![
        ("score".into(), Ok(scores(&problem))),
        (
            format!("grs(eps={epsilon:.4})"),
            Ok(generalized_row_sum(&problem, epsilon)?),
        ),
    ];
    let ls = least_squares_direct(&problem).map_err(|e| match Failure::from(e) {
        Failure::Structural(m) => Ok(m),
        other => Err(other),
    });
    columns.push((
        "least-squares".into(),
        match ls {
            Ok(q) => Ok(q),
            Err(Ok(reason)) => Err(reason),
            Err(Err(failure)) => return Err(failure),
        },
    ));
    if let Some(g) = digraph {
        columns.push((
            "positional-power".into(),
            Ok(positional_power(&g, 1e-10, 10_000)?),
        ));
    }

    let label_width = problem
        .objects()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0)
        .max(6);
    let col_width = columns
        .iter()
        .map(|(h, _)| h.len())
        .max()
        .unwrap_or(0)
        .max(14);
    let mut out = String::new();
    let _ = write!(out, "{:<label_width$}", "object");
    for (header, _) in &columns {
        let _ = write!(out, "  {header:>col_width$}");
    }
    out.push('\n');
    for (i, label) in problem.objects().iter().enumerate() {
        let _ = write!(out, "{label:<label_width$}");
        for (_, column) in &columns {
            match column {
                Ok(r) => {
                    let _ = write!(out, "  {:>col_width$.6}", r.values[i] + 0.0);
                }
                Err(_) => {
                    let _ = write!(out, "  {:>col_width$}", "-");
                }
            }
        }
        out.push('\n');
    }
    out.push('\n');
    let name_width = columns.iter().map(|(h, _)| h.len()).max().unwrap_or(0);
    for (header, column) in &columns {
        let line = match column {
            Ok(r) => ranking_from_ratings(r, args.tie_tol).to_string(),
            Err(reason) => format!("unavailable: {reason}"),
        };
        let _ = writeln!(out, "{header:<name_width$}  {line}");
    }
    Ok(out)
}
