//! Build a block partition over a random net and inspect it.
//!
//! ```text
//! cargo run --example partition -- [points] [block size]
//! ```

use rsmt_abvh::bench::generate_net;
use rsmt_abvh::Abvh;

fn main() -> rsmt_abvh::Result<()> {
    let mut args = std::env::args().skip(1).map(|a| a.parse::<usize>().expect("a number"));
    let n = args.next().unwrap_or(2000);
    let b = args.next().unwrap_or(50);

    let points = generate_net(n, 1)?;
    let tree = Abvh::build(&points, b)?;
    let stats = tree.stats();
    println!(
        "{n} points, B={b}: {} blocks, {} interior segments, height {}",
        stats.leaves, stats.interior_segments, stats.height
    );

    // Each interior segment is one shared boundary between two blocks.
    let neighbors = tree.neighbors();
    let degree = 2.0 * neighbors.pairs.len() as f64 / stats.leaves as f64;
    println!("{} adjacent block pairs, mean block degree {degree:.2}", neighbors.pairs.len());

    for block in 0..stats.leaves.min(3) {
        let r = tree.leaf_region(block);
        println!(
            "block {block}: [{:.3}, {:.3}] x [{:.3}, {:.3}], {} points",
            r.lo.x,
            r.hi.x,
            r.lo.y,
            r.hi.y,
            tree.leaf_points(block).len()
        );
    }

    let problems = tree.check_invariants();
    println!("invariants: {}", if problems.is_empty() { "ok" } else { &problems[0] });
    Ok(())
}
