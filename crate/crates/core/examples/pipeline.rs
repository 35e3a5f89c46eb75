//! Solve a large net block by block and stitch the pieces together.

use rsmt_abvh::bench::generate_net;
use rsmt_abvh::pipeline::{self, PipelineConfig};
use rsmt_abvh::solvers::{rmst, SolverSpec};
use rsmt_abvh::validate_tree;

fn main() -> rsmt_abvh::Result<()> {
    let n: usize = std::env::args().nth(1).map_or(5000, |a| a.parse().expect("a number"));
    let net = generate_net(n, 7)?;

    let config = PipelineConfig::new(SolverSpec::IteratedOneSteiner, 30);
    let (tree, report) = pipeline::run(&net, &config)?;
    assert!(validate_tree(&tree, &net).is_ok());

    let mst = rmst(&net).length;
    println!("{n} points in {} blocks", report.blocks);
    println!(
        "build {:?}, solve {:?}, stitch {:?}",
        report.build_time, report.solve_time, report.stitch_time
    );
    println!(
        "length {:.4} ({} connectors, {:.4}), rmst {mst:.4}, {:+.2}%",
        tree.length,
        report.connectors,
        report.connector_length,
        100.0 * (tree.length - mst) / mst
    );
    if report.dense_fallback {
        println!("block graph was disconnected; stitched over all block pairs");
    }
    Ok(())
}
