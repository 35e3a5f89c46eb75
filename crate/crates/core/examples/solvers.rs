//! Compare the block solvers on small nets.

use rsmt_abvh::bench::generate_net;
use rsmt_abvh::half_perimeter;
use rsmt_abvh::solvers::{solve_rsmt, SolverSpec};

fn main() -> rsmt_abvh::Result<()> {
    let solvers = [SolverSpec::Rmst, SolverSpec::IteratedOneSteiner, SolverSpec::exact()];
    println!("{:>3} {:>10} {:>10} {:>10} {:>10}", "n", "hpwl", "rmst", "i1s", "exact");
    for n in 3..=7 {
        let net = generate_net(n, n as u64)?;
        let mut row = format!("{n:>3} {:>10.4}", half_perimeter(&net)?);
        for spec in &solvers {
            let tree = solve_rsmt(spec, &net)?;
            row += &format!(" {:>10.4}", tree.length);
        }
        println!("{row}");
    }

    // Three terminals: the optimum meets at the coordinate-wise median, so
    // its length is exactly the half perimeter.
    let net = generate_net(3, 42)?;
    let tree = solve_rsmt(&SolverSpec::exact(), &net)?;
    println!(
        "3 terminals: length {:.6}, hpwl {:.6}, {} non-terminal vertices (junction and bends)",
        tree.length,
        half_perimeter(&net)?,
        tree.steiner.len()
    );
    Ok(())
}
