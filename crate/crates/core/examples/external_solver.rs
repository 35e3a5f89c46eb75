//! Plug a subprocess in as the block solver.
//!
//! The child reads a net on stdin and writes an edge list on stdout. Here
//! the `rsmt wire` subcommand plays that role; build it first with
//! `cargo build --bin rsmt`.

use std::path::PathBuf;
use std::time::Duration;

use rsmt_abvh::bench::generate_net;
use rsmt_abvh::pipeline::{self, PipelineConfig};
use rsmt_abvh::solvers::{ExternalSolver, SolverSpec};

fn main() -> rsmt_abvh::Result<()> {
    let exe = std::env::current_exe().expect("current exe");
    // target/<profile>/examples/external_solver -> target/<profile>/rsmt
    let bin: PathBuf = exe.parent().and_then(|p| p.parent()).expect("target dir").join("rsmt");
    if !bin.exists() {
        eprintln!("{} not found; run `cargo build --bin rsmt` first", bin.display());
        std::process::exit(1);
    }

    let solver = ExternalSolver::new(bin.to_string_lossy())
        .arg("wire")
        .arg("--solver")
        .arg("i1s")
        .with_timeout(Duration::from_secs(10));
    println!("external solver: {}", solver.command_line());

    let net = generate_net(1500, 3)?;
    let mut config = PipelineConfig::new(SolverSpec::External(solver), 50);
    config.fallback_on_external_error = false;
    let (tree, report) = pipeline::run(&net, &config)?;

    let (local, _) = pipeline::run(&net, &PipelineConfig::new(SolverSpec::IteratedOneSteiner, 50))?;
    println!("{} blocks solved out of process in {:?}", report.blocks, report.solve_time);
    println!("length {:.6}, in-process {:.6}", tree.length, local.length);
    Ok(())
}
