//! Degree-sweep benchmark: seeded random nets, per-method timing and length,
//! relative error against a reference, CSV output and per-degree means.
//!
//! Nets are `degree` points drawn uniformly from the unit square `[0, 1)²`
//! by ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64(seed)`); each
//! coordinate is `(next_u64() >> 11) * 2⁻⁵³`, x before y, point by point.

use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{Point, RectilinearTree};
use crate::pipeline::{self, PipelineConfig};
use crate::solvers::{solve_rsmt, ExternalSolver, SolverSpec};

/// `degree` uniform points in the unit square, fully determined by `(degree, seed)`.
pub fn generate_net(degree: usize, seed: u64) -> Result<Vec<Point>> {
    if degree < 1 {
        return Err(Error::InvalidDegree);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..degree)
        .map(|_| {
            let x: f64 = rng.random();
            let y: f64 = rng.random();
            Point::new(x, y)
        })
        .collect())
}

/// Percentage excess of `length` over `reference`.
pub fn relative_error(length: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0) {
        return Err(Error::NonPositiveReference(reference));
    }
    Ok(100.0 * (length - reference) / reference)
}

#[derive(Debug, Clone, PartialEq)]
pub enum MethodKind {
    /// A solver applied to the whole net.
    Whole(SolverSpec),
    Pipeline(PipelineConfig),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Method {
    pub label: String,
    pub kind: MethodKind,
}

/// Label grammar accepted by [`Method::parse`].
pub const METHOD_SYNTAX: &str =
    "rmst | i1s | exact | external:<command> | bvh+<solver>[@<block size>]";

fn parse_solver(s: &str) -> Option<SolverSpec> {
    match s {
        "rmst" => Some(SolverSpec::Rmst),
        "i1s" => Some(SolverSpec::IteratedOneSteiner),
        "exact" => Some(SolverSpec::exact()),
        _ => {
            let cmd = s.strip_prefix("external:")?;
            let cmd = cmd.trim_matches('"');
            ExternalSolver::from_command_line(cmd).ok().map(SolverSpec::External)
        }
    }
}

impl Method {
    pub fn whole(solver: SolverSpec) -> Self {
        Self {
            label: solver.label(),
            kind: MethodKind::Whole(solver),
        }
    }

    pub fn pipeline(config: PipelineConfig) -> Self {
        Self {
            label: format!("bvh+{}@{}", config.solver.label(), config.block_size),
            kind: MethodKind::Pipeline(config),
        }
    }

    /// Parses a method label; see [`METHOD_SYNTAX`]. The label is kept verbatim.
    pub fn parse(label: &str) -> Result<Self> {
        let unknown = || Error::UnknownMethod {
            label: label.to_string(),
            valid: METHOD_SYNTAX.to_string(),
        };
        let kind = match label.strip_prefix("bvh+") {
            None => MethodKind::Whole(parse_solver(label).ok_or_else(unknown)?),
            Some(rest) => {
                let (solver, block) = match rest.rsplit_once('@') {
                    Some((s, b)) => (s, Some(b.parse::<usize>().map_err(|_| unknown())?)),
                    None => (rest, None),
                };
                let solver = parse_solver(solver).ok_or_else(unknown)?;
                let block = block.unwrap_or_else(|| solver.default_block_size());
                if block < 1 {
                    return Err(unknown());
                }
                MethodKind::Pipeline(PipelineConfig::new(solver, block))
            }
        };
        Ok(Self {
            label: label.to_string(),
            kind,
        })
    }

    pub fn run(&self, points: &[Point]) -> Result<RectilinearTree> {
        match &self.kind {
            MethodKind::Whole(spec) => solve_rsmt(spec, points),
            MethodKind::Pipeline(cfg) => pipeline::run(points, cfg).map(|(t, _)| t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Reference {
    Method(String),
    /// Shortest length among the methods on each instance.
    Best,
}

impl Reference {
    pub fn parse(s: &str) -> Self {
        if s == "best" {
            Reference::Best
        } else {
            Reference::Method(s.to_string())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteConfig {
    pub degrees: Vec<usize>,
    /// Seeds `0..seeds` are run for every degree.
    pub seeds: u64,
    pub methods: Vec<Method>,
    pub reference: Reference,
}

/// `start, start + step, ...` up to and including `end`.
pub fn degree_range(start: usize, end: usize, step: usize) -> Vec<usize> {
    if step == 0 {
        return if start <= end { vec![start] } else { Vec::new() };
    }
    (start..=end).step_by(step).collect()
}

impl SuiteConfig {
    /// Degrees 50 to 1000 in steps of 50, ten nets each.
    pub fn full_sweep(methods: Vec<Method>) -> Self {
        Self {
            degrees: degree_range(50, 1000, 50),
            seeds: 10,
            methods,
            reference: Reference::Best,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.methods.is_empty() {
            return Err(Error::Config("at least one method is required".into()));
        }
        if let Reference::Method(label) = &self.reference {
            if !self.methods.iter().any(|m| &m.label == label) {
                return Err(Error::Config(format!(
                    "reference `{label}` is not among the methods"
                )));
            }
        }
        if self.degrees.iter().any(|&d| d < 1) {
            return Err(Error::InvalidDegree);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub degree: usize,
    pub seed: u64,
    pub method: String,
    pub wall_time: Duration,
    /// `None` when the method failed.
    pub length: Option<f64>,
    /// `None` without a usable reference on this instance.
    pub relative_error_pct: Option<f64>,
    pub error: Option<String>,
}

/// Means over seeds for one `(degree, method)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DegreeAggregate {
    pub degree: usize,
    pub method: String,
    pub runs: usize,
    pub failures: usize,
    pub mean_time: f64,
    pub mean_length: Option<f64>,
    pub mean_relative_error_pct: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SuiteResult {
    pub records: Vec<BenchRecord>,
    pub methods: Vec<String>,
}

pub const CSV_HEADER: &str = "degree,seed,method,wall_time_s,length,rel_error_pct";

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

impl SuiteResult {
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        s.push_str(CSV_HEADER);
        s.push('\n');
        let opt = |v: Option<f64>, prec: usize| v.map_or(String::new(), |v| format!("{v:.prec$}"));
        for r in &self.records {
            let _ = writeln!(
                s,
                "{},{},{},{:.6},{},{}",
                r.degree,
                r.seed,
                csv_field(&r.method),
                r.wall_time.as_secs_f64(),
                opt(r.length, 12),
                opt(r.relative_error_pct, 6),
            );
        }
        s
    }

    pub fn aggregates(&self) -> Vec<DegreeAggregate> {
        let mut degrees: Vec<usize> = self.records.iter().map(|r| r.degree).collect();
        degrees.dedup();
        let mut out = Vec::new();
        for d in degrees {
            for m in &self.methods {
                let rows: Vec<&BenchRecord> = self
                    .records
                    .iter()
                    .filter(|r| r.degree == d && &r.method == m)
                    .collect();
                if rows.is_empty() {
                    continue;
                }
                out.push(DegreeAggregate {
                    degree: d,
                    method: m.clone(),
                    runs: rows.len(),
                    failures: rows.iter().filter(|r| r.length.is_none()).count(),
                    mean_time: mean(rows.iter().map(|r| r.wall_time.as_secs_f64())).unwrap_or(0.0),
                    mean_length: mean(rows.iter().filter_map(|r| r.length)),
                    mean_relative_error_pct: mean(rows.iter().filter_map(|r| r.relative_error_pct)),
                });
            }
        }
        out
    }

    /// Two tables, one row per degree: mean seconds, then mean length with
    /// mean relative error in parentheses.
    pub fn table(&self) -> String {
        let aggs = self.aggregates();
        let mut degrees: Vec<usize> = aggs.iter().map(|a| a.degree).collect();
        degrees.dedup();
        let width = self.methods.iter().map(String::len).max().unwrap_or(0).max(18);
        let mut s = String::new();
        let header = |s: &mut String, title: &str| {
            let _ = write!(s, "{title:>8}");
            for m in &self.methods {
                let _ = write!(s, " | {m:>width$}");
            }
            s.push('\n');
        };
        let cell = |d: usize, m: &str| aggs.iter().find(|a| a.degree == d && a.method == m);

        header(&mut s, "time(s)");
        for &d in &degrees {
            let _ = write!(s, "{d:>8}");
            for m in &self.methods {
                let v = cell(d, m).map_or("-".to_string(), |a| format!("{:.4}", a.mean_time));
                let _ = write!(s, " | {v:>width$}");
            }
            s.push('\n');
        }
        s.push('\n');
        header(&mut s, "length");
        for &d in &degrees {
            let _ = write!(s, "{d:>8}");
            for m in &self.methods {
                let v = match cell(d, m) {
                    Some(DegreeAggregate {
                        mean_length: Some(len),
                        mean_relative_error_pct,
                        ..
                    }) => match mean_relative_error_pct {
                        Some(e) => format!("{len:.2} ({e:.2})"),
                        None => format!("{len:.2}"),
                    },
                    _ => "failed".to_string(),
                };
                let _ = write!(s, " | {v:>width$}");
            }
            s.push('\n');
        }
        s
    }

    /// Adjacent degree pairs where `method`'s mean length decreases, out of
    /// all adjacent pairs.
    pub fn trend_inversions(&self, method: &str) -> (usize, usize) {
        let lengths: Vec<f64> = self
            .aggregates()
            .into_iter()
            .filter(|a| a.method == method)
            .filter_map(|a| a.mean_length)
            .collect();
        let pairs = lengths.len().saturating_sub(1);
        let inversions = lengths.windows(2).filter(|w| w[1] < w[0]).count();
        (inversions, pairs)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BenchRecord> {
        self.records.iter().filter(|r| r.error.is_some())
    }
}

/// Runs every `(degree, seed, method)` sequentially. Method failures become
/// failed rows; they do not abort the suite.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteResult> {
    config.validate()?;
    let mut result = SuiteResult {
        records: Vec::new(),
        methods: config.methods.iter().map(|m| m.label.clone()).collect(),
    };
    for &degree in &config.degrees {
        for seed in 0..config.seeds {
            let net = generate_net(degree, seed)?;
            let first = result.records.len();
            for method in &config.methods {
                let start = Instant::now();
                let outcome = method.run(&net);
                let wall_time = start.elapsed();
                let (length, error) = match outcome {
                    Ok(t) => (Some(t.length), None),
                    Err(e) => (None, Some(e.to_string())),
                };
                result.records.push(BenchRecord {
                    degree,
                    seed,
                    method: method.label.clone(),
                    wall_time,
                    length,
                    relative_error_pct: None,
                    error,
                });
            }
            let rows = &mut result.records[first..];
            let reference = match &config.reference {
                Reference::Best => rows
                    .iter()
                    .filter_map(|r| r.length)
                    .min_by(f64::total_cmp),
                Reference::Method(label) => rows
                    .iter()
                    .find(|r| &r.method == label)
                    .and_then(|r| r.length),
            };
            if let Some(reference) = reference.filter(|&r| r > 0.0) {
                for r in rows.iter_mut() {
                    r.relative_error_pct = r.length.map(|l| relative_error(l, reference)).transpose()?;
                }
            }
        }
    }
    Ok(result)
}
