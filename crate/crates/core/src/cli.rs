//! The `rsmt` command line: `solve`, `partition`, `bench` and `wire`.

use std::ffi::OsString;
use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::abvh::Abvh;
use crate::bench::{self, degree_range, Method, Reference, SuiteConfig};
use crate::error::{Error, Result};
use crate::geometry::dedup_stable;
use crate::io;
use crate::pipeline::{self, PipelineConfig};
use crate::solvers::{solve_rsmt, ExternalSolver, SolverSpec, DEFAULT_EXACT_CAP};
use crate::svg;

#[derive(Debug, Parser)]
#[command(name = "rsmt", version, about = "Rectilinear Steiner trees for large nets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a net and write its tree.
    Solve(SolveArgs),
    /// Build the block partition only and report it.
    Partition(PartitionArgs),
    /// Run a degree sweep and write CSV.
    Bench(BenchArgs),
    /// Act as an external solver: read a request on stdin, reply on stdout.
    Wire(WireArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverKind {
    Rmst,
    I1s,
    Exact,
    External,
}

#[derive(Debug, Args)]
pub struct SolverArgs {
    #[arg(long, value_enum, default_value = "i1s")]
    pub solver: SolverKind,
    /// Command line of the external solver (with `--solver external`).
    #[arg(long)]
    pub external: Option<String>,
    /// External solver timeout in seconds.
    #[arg(long, default_value_t = 60.0)]
    pub timeout: f64,
    #[arg(long, default_value_t = DEFAULT_EXACT_CAP)]
    pub exact_cap: usize,
}

impl SolverArgs {
    pub fn spec(&self) -> Result<SolverSpec> {
        Ok(match self.solver {
            SolverKind::Rmst => SolverSpec::Rmst,
            SolverKind::I1s => SolverSpec::IteratedOneSteiner,
            SolverKind::Exact => SolverSpec::Exact { cap: self.exact_cap },
            SolverKind::External => {
                let line = self
                    .external
                    .as_deref()
                    .ok_or_else(|| Error::Config("--solver external needs --external <command>".into()))?;
                if !(self.timeout > 0.0 && self.timeout.is_finite()) {
                    return Err(Error::Config("--timeout must be positive".into()));
                }
                SolverSpec::External(
                    ExternalSolver::from_command_line(line)?
                        .with_timeout(Duration::from_secs_f64(self.timeout)),
                )
            }
        })
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Net file.
    pub input: PathBuf,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Maximum points per block (default depends on the solver).
    #[arg(long)]
    pub block_size: Option<usize>,
    /// Solve the whole net as one block.
    #[arg(long)]
    pub no_partition: bool,
    /// Fail instead of re-solving a block with the RMST when the external solver errors.
    #[arg(long)]
    pub no_fallback: bool,
    /// Solve blocks one at a time.
    #[arg(long)]
    pub sequential: bool,
    /// Tree file to write.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    pub input: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub block_size: usize,
    /// Text listing of leaves and segments.
    #[arg(long)]
    pub dump: Option<PathBuf>,
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// `start..end:step`, `start..end`, a single degree, or a comma list.
    #[arg(long, default_value = "50..1000:50")]
    pub degrees: String,
    /// Nets per degree (seeds 0..k).
    #[arg(long, default_value_t = 10)]
    pub seeds: u64,
    /// Comma-separated method labels.
    #[arg(long, value_delimiter = ',', default_value = "rmst,bvh+i1s@30")]
    pub methods: Vec<String>,
    /// A method label, or `best`.
    #[arg(long, default_value = "best")]
    pub reference: String,
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WireArgs {
    #[command(flatten)]
    pub solver: SolverArgs,
}

/// Parses a degree list: `a..b:step`, `a..b`, `a`, `a,b,c`, or empty.
pub fn parse_degrees(s: &str) -> Result<Vec<usize>> {
    let s = s.trim();
    if s.is_empty() {
        return Ok(Vec::new());
    }
    let bad = || Error::Config(format!("invalid degree list `{s}`"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| bad());
    if let Some((start, rest)) = s.split_once("..") {
        let (end, step) = match rest.split_once(':') {
            Some((e, st)) => (num(e)?, num(st)?),
            None => (num(rest)?, 1),
        };
        if step == 0 {
            return Err(bad());
        }
        return Ok(degree_range(num(start)?, end, step));
    }
    s.split(',').map(num).collect()
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn cmd_solve(args: &SolveArgs, out: &mut dyn Write) -> Result<()> {
    let points = io::read_net(&args.input)?;
    let spec = args.solver.spec()?;
    let distinct = dedup_stable(&points).len();
    let block_size = if args.no_partition {
        distinct.max(1)
    } else {
        args.block_size.unwrap_or_else(|| spec.default_block_size())
    };
    if block_size < 1 {
        return Err(Error::InvalidBlockSize);
    }
    let start = Instant::now();
    let (tree, blocks, solution) = if block_size >= distinct {
        // One block: the configured solver on the whole net.
        let tree = solve_rsmt(&spec, &points)?;
        let solution = match &args.svg {
            Some(_) => Some(pipeline::run_detailed(&points, &PipelineConfig::new(spec.clone(), block_size))?),
            None => None,
        };
        (tree, 1, solution)
    } else {
        let config = PipelineConfig {
            block_size,
            solver: spec,
            fallback_on_external_error: !args.no_fallback,
            parallel_blocks: !args.sequential,
        };
        let solution = pipeline::run_detailed(&points, &config)?;
        (solution.tree.clone(), solution.report.blocks, Some(solution))
    };
    let elapsed = start.elapsed();

    if let Some(path) = &args.output {
        io::write_tree(path, &tree)?;
    }
    if let (Some(path), Some(solution)) = (&args.svg, &solution) {
        write_file(path, &svg::solution_svg(solution))?;
    }
    writeln!(
        out,
        "n={} blocks={} length={} time={:.6}",
        distinct,
        blocks,
        tree.length,
        elapsed.as_secs_f64()
    )
    .map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn cmd_partition(args: &PartitionArgs, out: &mut dyn Write) -> Result<()> {
    let points = io::read_net(&args.input)?;
    let abvh = Abvh::build(&points, args.block_size)?;
    let stats = abvh.stats();
    if let Some(path) = &args.dump {
        write_file(path, &abvh.dump())?;
    }
    if let Some(path) = &args.svg {
        write_file(path, &svg::partition_svg(&abvh))?;
    }
    writeln!(
        out,
        "leaves={} segments={} height={}",
        stats.leaves, stats.interior_segments, stats.height
    )
    .map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn cmd_bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let methods = args
        .methods
        .iter()
        .map(|m| Method::parse(m.trim()))
        .collect::<Result<Vec<_>>>()?;
    let config = SuiteConfig {
        degrees: parse_degrees(&args.degrees)?,
        seeds: args.seeds,
        methods,
        reference: Reference::parse(&args.reference),
    };
    let result = bench::run_suite(&config)?;
    for f in result.failures() {
        let _ = writeln!(
            err,
            "warning: {} failed on degree {} seed {}: {}",
            f.method,
            f.degree,
            f.seed,
            f.error.as_deref().unwrap_or("unknown error")
        );
    }
    if let Some(path) = &args.csv {
        write_file(path, &result.to_csv())?;
    }
    write!(out, "{}", result.table()).map_err(|e| Error::io("<stdout>", e))?;
    Ok(())
}

fn cmd_wire(args: &WireArgs, input: &mut dyn Read, out: &mut dyn Write) -> Result<()> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<stdin>", e))?;
    let points = io::parse_net(&text, "<stdin>")?;
    let tree = solve_rsmt(&args.solver.spec()?, &points)?;
    out.write_all(io::format_edges(&tree.edges).as_bytes())
        .map_err(|e| Error::io("<stdout>", e))
}

/// Runs the CLI on `args` (including the program name) and returns the exit
/// status. Data goes to `out`, diagnostics to `err`.
pub fn run<I, T>(args: I, input: &mut dyn Read, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, out),
        Command::Partition(a) => cmd_partition(a, out),
        Command::Bench(a) => cmd_bench(a, out, err),
        Command::Wire(a) => cmd_wire(a, input, out),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            1
        }
    }
}
