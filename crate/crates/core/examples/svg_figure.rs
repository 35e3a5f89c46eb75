//! Write SVG figures of a partition and of a stitched solution.
//!
//! ```text
//! cargo run --example svg_figure -- out/
//! ```

use std::fs;
use std::path::PathBuf;

use rsmt_abvh::bench::generate_net;
use rsmt_abvh::pipeline::{run_detailed, PipelineConfig};
use rsmt_abvh::solvers::SolverSpec;
use rsmt_abvh::svg::{partition_svg, solution_svg};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| ".".into()));
    fs::create_dir_all(&dir)?;

    let net = generate_net(300, 5)?;
    let solution = run_detailed(&net, &PipelineConfig::new(SolverSpec::IteratedOneSteiner, 20))?;

    let part = dir.join("partition.svg");
    let sol = dir.join("solution.svg");
    fs::write(&part, partition_svg(&solution.abvh))?;
    fs::write(&sol, solution_svg(&solution))?;
    println!("wrote {} and {}", part.display(), sol.display());
    Ok(())
}
