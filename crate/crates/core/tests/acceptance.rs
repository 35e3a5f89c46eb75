//! Exit criteria for the library, one line per criterion:
//!
//! ```text
//! cargo test -p rsmt-abvh --test acceptance
//! ```

use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rsmt_abvh::abvh::{brute_force_adjacency, check_tiling, Abvh};
use rsmt_abvh::bench::{generate_net, run_suite, Method, Reference, SuiteConfig};
use rsmt_abvh::geometry::{approx_eq, approx_le, half_perimeter};
use rsmt_abvh::pipeline::{self, PipelineConfig};
use rsmt_abvh::solvers::{
    exact_rsmt, external_solve, iterated_one_steiner, rmst, solve_rsmt, ExternalSolver, SolverSpec,
};
use rsmt_abvh::{cli, Error};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

/// Seeded instances shared by criteria 1 and 2.
fn partition_instances() -> Vec<(usize, usize, u64)> {
    let mut v = Vec::new();
    for &n in &[10usize, 100, 1000, 5000] {
        for &b in &[1usize, 5, 10, 50] {
            for seed in 0..7u64 {
                v.push((n, b, 1000 * n as u64 + 10 * b as u64 + seed));
            }
        }
    }
    v
}

fn ac1_adjacency_oracle() -> Outcome {
    let instances = partition_instances();
    ensure!(instances.len() >= 100, "only {} instances", instances.len());
    let mut pairs = 0;
    for &(n, b, seed) in &instances {
        let pts = generate_net(n, seed).map_err(|e| e.to_string())?;
        let t = Abvh::build(&pts, b).map_err(|e| e.to_string())?;
        let got = t.neighbors().pair_set();
        let want: BTreeSet<_> = brute_force_adjacency(&t.leaf_regions()).into_iter().collect();
        ensure!(got == want, "N={n} B={b} seed={seed}: {} vs {} pairs", got.len(), want.len());
        pairs += got.len();
    }
    Ok(format!("{} instances, {pairs} adjacent pairs", instances.len()))
}

fn ac2_tiling() -> Outcome {
    let instances = partition_instances();
    let mut leaves = 0;
    for &(n, b, seed) in &instances {
        let pts = generate_net(n, seed).map_err(|e| e.to_string())?;
        let t = Abvh::build(&pts, b).map_err(|e| e.to_string())?;
        let regions: Vec<_> = t.leaf_regions().into_iter().map(|(_, r)| r).collect();
        let tiling = check_tiling(&t.root_region(), &regions);
        ensure!(tiling.is_empty(), "N={n} B={b} seed={seed}: {}", tiling[0]);
        // Includes every segment lying on the boundary of both its sides.
        let problems = t.check_invariants();
        ensure!(problems.is_empty(), "N={n} B={b} seed={seed}: {}", problems[0]);
        leaves += t.leaf_count();
    }
    Ok(format!("{} instances, {leaves} leaves", instances.len()))
}

fn ac3_exact_chain() -> Outcome {
    let mut checked = 0;
    let mut three = 0;
    for i in 0..200u64 {
        let n = 2 + (i % 6) as usize;
        let net = generate_net(n, 50_000 + i).map_err(|e| e.to_string())?;
        let exact = exact_rsmt(&net, 7).map_err(|e| e.to_string())?.length;
        let i1s = iterated_one_steiner(&net).length;
        let mst = rmst(&net).length;
        let hp = half_perimeter(&net).map_err(|e| e.to_string())?;
        ensure!(approx_le(exact, i1s), "instance {i}: exact {exact} > i1s {i1s}");
        ensure!(approx_le(i1s, mst), "instance {i}: i1s {i1s} > rmst {mst}");
        ensure!(approx_le(mst, 1.5 * exact), "instance {i}: rmst {mst} > 1.5 x exact {exact}");
        for (name, len) in [("exact", exact), ("i1s", i1s), ("rmst", mst)] {
            ensure!(approx_le(hp, len), "instance {i}: {name} {len} below half perimeter {hp}");
        }
        if n == 3 {
            ensure!(approx_eq(exact, hp), "instance {i}: 3-terminal exact {exact} != hp {hp}");
            three += 1;
        }
        checked += 1;
    }
    Ok(format!("{checked} instances ({three} with 3 terminals)"))
}

fn ac4_degenerate_partition() -> Outcome {
    let solvers = [SolverSpec::exact(), SolverSpec::Rmst, SolverSpec::IteratedOneSteiner];
    let mut runs = 0;
    for i in 0..50u64 {
        for spec in &solvers {
            // The exact solver only accepts nets up to its cap.
            let n = match spec {
                SolverSpec::Exact { cap } => 1 + (i as usize % cap),
                _ => 1 + (i as usize * 7) % 40,
            };
            let net = generate_net(n, 70_000 + i).map_err(|e| e.to_string())?;
            let whole = solve_rsmt(spec, &net).map_err(|e| e.to_string())?.length;
            let (tree, report) =
                pipeline::run(&net, &PipelineConfig::new(spec.clone(), 64)).map_err(|e| e.to_string())?;
            ensure!(report.blocks == 1, "{} blocks for n={n}", report.blocks);
            ensure!(
                approx_eq(tree.length, whole),
                "{} n={n}: pipeline {} vs whole {whole}",
                spec.label(),
                tree.length
            );
            runs += 1;
        }
    }
    Ok(format!("{runs} runs over 3 solvers"))
}

fn ac5_steinerization_gain() -> Outcome {
    let config = SuiteConfig {
        degrees: (50..=300).step_by(50).collect(),
        seeds: 10,
        methods: vec![
            Method::whole(SolverSpec::Rmst),
            Method::pipeline(PipelineConfig::new(SolverSpec::IteratedOneSteiner, 30)),
        ],
        reference: Reference::Method("rmst".into()),
    };
    let result = run_suite(&config).map_err(|e| e.to_string())?;
    let (rmst_label, bvh_label) = (&config.methods[0].label, &config.methods[1].label);
    let aggs = result.aggregates();
    let mut summary = Vec::new();
    for d in &config.degrees {
        let mean = |label: &str| {
            aggs.iter()
                .find(|a| a.degree == *d && a.method == label)
                .and_then(|a| a.mean_length)
        };
        let (r, b) = (mean(rmst_label).ok_or("rmst missing")?, mean(bvh_label).ok_or("bvh missing")?);
        ensure!(b <= r, "degree {d}: pipeline mean {b} > rmst mean {r}");
        summary.push(format!("{d}:{:.2}%", 100.0 * (b - r) / r));
    }
    let mut lower = 0;
    let mut total = 0;
    for pair in result.records.chunks(2) {
        let (r, b) = (pair[0].length.ok_or("failed run")?, pair[1].length.ok_or("failed run")?);
        total += 1;
        if b < r {
            lower += 1;
        }
    }
    ensure!(lower * 5 >= total * 4, "strictly lower on only {lower}/{total} instances");
    Ok(format!("strictly lower on {lower}/{total}; mean change {}", summary.join(" ")))
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort();
    v[v.len() / 2]
}

fn ac6_scaling() -> Outcome {
    let sizes = [100_000usize, 200_000, 400_000];
    let mut times = Vec::new();
    for &n in &sizes {
        let pts = generate_net(n, 9).map_err(|e| e.to_string())?;
        // Warm-up run, then median of five.
        let _ = Abvh::build(&pts, 50).map_err(|e| e.to_string())?;
        let runs = (0..5)
            .map(|_| {
                let start = Instant::now();
                let t = Abvh::build(&pts, 50).expect("build");
                let el = start.elapsed();
                std::hint::black_box(t.leaf_count());
                el
            })
            .collect();
        times.push(median(runs));
    }
    let ratios: Vec<f64> = times.windows(2).map(|w| w[1].as_secs_f64() / w[0].as_secs_f64()).collect();
    for (i, r) in ratios.iter().enumerate() {
        ensure!(*r <= 3.0, "time({})/time({}) = {r:.2}", sizes[i + 1], sizes[i]);
    }
    Ok(format!(
        "medians {:?}, ratios {}",
        times,
        ratios.iter().map(|r| format!("{r:.2}")).collect::<Vec<_>>().join(", ")
    ))
}

fn strip_timing(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(3);
            f.join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

fn run_bench_cli(csv: &Path) -> Result<(), String> {
    let args = [
        "rsmt",
        "bench",
        "--degrees",
        "50..100:50",
        "--seeds",
        "3",
        "--methods",
        "rmst,bvh+i1s@30,bvh+exact@7",
        "--reference",
        "best",
        "--csv",
        csv.to_str().unwrap(),
    ];
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = cli::run(args, &mut std::io::empty(), &mut out, &mut err);
    ensure!(code == 0, "bench exited {code}: {}", String::from_utf8_lossy(&err));
    Ok(())
}

fn ac7_determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (a, b) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
    run_bench_cli(&a)?;
    run_bench_cli(&b)?;
    let (ca, cb) = (
        fs::read_to_string(&a).map_err(|e| e.to_string())?,
        fs::read_to_string(&b).map_err(|e| e.to_string())?,
    );
    ensure!(ca.lines().count() == 1 + 2 * 3 * 3, "unexpected row count {}", ca.lines().count());
    ensure!(strip_timing(&ca) == strip_timing(&cb), "CSV differs outside timing columns");

    let mut nets = 0;
    for (n, seed) in [(300usize, 1u64), (1000, 2), (777, 3)] {
        let net = generate_net(n, seed).map_err(|e| e.to_string())?;
        let cfg = PipelineConfig::new(SolverSpec::IteratedOneSteiner, 30);
        let (par, _) = pipeline::run(&net, &cfg).map_err(|e| e.to_string())?;
        let (seq, _) = pipeline::run(&net, &cfg.clone().sequential()).map_err(|e| e.to_string())?;
        ensure!(
            par.length.to_bits() == seq.length.to_bits(),
            "n={n}: parallel {} vs sequential {}",
            par.length,
            seq.length
        );
        nets += 1;
    }
    Ok(format!("CSV stable across runs; {nets} nets bit-identical parallel vs sequential"))
}

fn write_script(dir: &Path, name: &str, body: &str) -> String {
    use std::os::unix::fs::PermissionsExt;
    let path = dir.join(name);
    fs::write(&path, format!("#!/bin/sh\n{body}\n")).expect("write script");
    fs::set_permissions(&path, fs::Permissions::from_mode(0o755)).expect("chmod");
    path.to_str().unwrap().to_string()
}

fn ac8_external_adapter() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let stub = write_script(
        dir.path(),
        "rmst-stub",
        &format!("exec '{}' wire --solver rmst", env!("CARGO_BIN_EXE_rsmt")),
    );
    let solver = ExternalSolver::new(stub).with_timeout(Duration::from_secs(30));
    for i in 0..20u64 {
        let net = generate_net(5 + 7 * i as usize, 90_000 + i).map_err(|e| e.to_string())?;
        let remote = external_solve(&solver, &net).map_err(|e| e.to_string())?;
        let local = rmst(&net);
        ensure!(
            approx_eq(remote.length, local.length),
            "net {i}: external {} vs local {}",
            remote.length,
            local.length
        );
    }

    let net = generate_net(10, 1).map_err(|e| e.to_string())?;
    let slow = ExternalSolver::new(write_script(dir.path(), "slow", "sleep 5"))
        .with_timeout(Duration::from_millis(300));
    let started = Instant::now();
    match external_solve(&slow, &net) {
        Err(Error::ExternalTimeout { .. }) => {}
        other => return Err(format!("timeout path returned {other:?}")),
    }
    ensure!(started.elapsed() < Duration::from_secs(4), "timeout not enforced");

    let garbage = ExternalSolver::new(write_script(dir.path(), "garbage", "cat >/dev/null; echo banana"));
    match external_solve(&garbage, &net) {
        Err(Error::External { reason, .. }) if reason.contains("malformed") => {}
        other => return Err(format!("malformed path returned {other:?}")),
    }

    let failing = ExternalSolver::new(write_script(dir.path(), "failing", "cat >/dev/null; echo boom >&2; exit 3"));
    match external_solve(&failing, &net) {
        Err(Error::External { reason, .. }) if reason.contains("exit") => {}
        other => return Err(format!("nonzero-exit path returned {other:?}")),
    }

    // A syntactically valid tree that skips most terminals.
    let partial = ExternalSolver::new(write_script(
        dir.path(),
        "partial",
        "cat >/dev/null; echo 1; echo '0 0 0 1'",
    ));
    match external_solve(&partial, &net) {
        Err(Error::External { reason, .. }) if reason.contains("invalid") => {}
        other => return Err(format!("incomplete-tree path returned {other:?}")),
    }
    Ok("20 nets match local rmst; timeout, malformed, nonzero-exit and incomplete replies rejected".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("AC1 adjacency oracle equivalence", ac1_adjacency_oracle),
        ("AC2 tiling invariant", ac2_tiling),
        ("AC3 exact-solver oracle chain", ac3_exact_chain),
        ("AC4 degenerate-partition identity", ac4_degenerate_partition),
        ("AC5 steinerization gain", ac5_steinerization_gain),
        ("AC6 construction scaling", ac6_scaling),
        ("AC7 determinism", ac7_determinism),
        ("AC8 external adapter round-trip", ac8_external_adapter),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS  {name} [{secs:.1}s] {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL  {name} [{secs:.1}s] {why}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
