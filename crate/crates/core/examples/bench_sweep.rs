//! A small degree sweep, printed as a table and as CSV.

use rsmt_abvh::bench::{degree_range, run_suite, Method, Reference, SuiteConfig};

fn main() -> rsmt_abvh::Result<()> {
    let methods = ["rmst", "bvh+i1s@30", "bvh+i1s@50", "bvh+rmst@100"]
        .iter()
        .map(|m| Method::parse(m))
        .collect::<rsmt_abvh::Result<Vec<_>>>()?;
    let config = SuiteConfig {
        degrees: degree_range(100, 400, 100),
        seeds: 3,
        methods,
        reference: Reference::Best,
    };
    let result = run_suite(&config)?;
    print!("{}", result.table());
    println!();
    print!("{}", result.to_csv());
    Ok(())
}
