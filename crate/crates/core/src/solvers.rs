//! Per-block RSMT solvers.
//!
//! Every solver canonicalises its input first (lexicographic order, exact
//! duplicates dropped), so the same point set yields the same tree whatever
//! order it arrives in. MST edges are embedded as L-paths with the corner at
//! `(first.x, second.y)`, where `first` is the vertex already in the tree.

use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::thread;
use std::time::Duration;

use wait_timeout::ChildExt;

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::geometry::{
    canonical_points, half_perimeter, hanan_grid, l1, l_path, validate_tree, Point, RectilinearTree,
};
use crate::io;

pub const DEFAULT_EXACT_CAP: usize = 7;
pub const DEFAULT_EXTERNAL_TIMEOUT: Duration = Duration::from_secs(60);

/// Which solver handles a block, plus its knobs.
#[derive(Debug, Clone, PartialEq)]
pub enum SolverSpec {
    /// Exhaustive Hanan-grid search; refuses more than `cap` terminals.
    Exact { cap: usize },
    /// Rectilinear minimum spanning tree.
    Rmst,
    /// Iterated 1-Steiner heuristic.
    IteratedOneSteiner,
    External(ExternalSolver),
}

impl SolverSpec {
    pub fn exact() -> Self {
        SolverSpec::Exact {
            cap: DEFAULT_EXACT_CAP,
        }
    }

    /// Short label: `exact`, `rmst`, `i1s` or `external:<program>`.
    pub fn label(&self) -> String {
        match self {
            SolverSpec::Exact { .. } => "exact".into(),
            SolverSpec::Rmst => "rmst".into(),
            SolverSpec::IteratedOneSteiner => "i1s".into(),
            SolverSpec::External(e) => format!("external:{}", e.command_line()),
        }
    }

    /// Block size used when none is given.
    pub fn default_block_size(&self) -> usize {
        match self {
            SolverSpec::Exact { cap } => *cap,
            SolverSpec::Rmst => 100,
            SolverSpec::IteratedOneSteiner | SolverSpec::External(_) => 50,
        }
    }
}

/// An RSMT solver executable speaking the line protocol:
///
/// ```text
/// request (stdin):  n              reply (stdout): m
///                   x y   (n lines)                x1 y1 x2 y2   (m lines)
/// ```
///
/// Floats are written with 17 significant digits. A nonzero exit status
/// means the solver failed.
#[derive(Debug, Clone, PartialEq)]
pub struct ExternalSolver {
    pub program: String,
    pub args: Vec<String>,
    pub timeout: Duration,
}

impl ExternalSolver {
    pub fn new(program: impl Into<String>) -> Self {
        Self {
            program: program.into(),
            args: Vec::new(),
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        }
    }

    /// Splits a command line on whitespace: program followed by arguments.
    pub fn from_command_line(line: &str) -> Result<Self> {
        let mut words = line.split_whitespace().map(str::to_owned);
        let program = words
            .next()
            .ok_or_else(|| Error::Config("empty external solver command".into()))?;
        Ok(Self {
            program,
            args: words.collect(),
            timeout: DEFAULT_EXTERNAL_TIMEOUT,
        })
    }

    pub fn arg(mut self, arg: impl Into<String>) -> Self {
        self.args.push(arg.into());
        self
    }

    pub fn with_timeout(mut self, timeout: Duration) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn command_line(&self) -> String {
        std::iter::once(self.program.as_str())
            .chain(self.args.iter().map(String::as_str))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Solves one RSMT instance with the solver named by `spec`.
pub fn solve_rsmt(spec: &SolverSpec, points: &[Point]) -> Result<RectilinearTree> {
    match spec {
        SolverSpec::Exact { cap } => exact_rsmt(points, *cap),
        SolverSpec::Rmst => Ok(rmst(points)),
        SolverSpec::IteratedOneSteiner => Ok(iterated_one_steiner(points)),
        SolverSpec::External(ext) => {
            let pts = canonical_points(points);
            if pts.len() <= 1 {
                return Ok(RectilinearTree::from_edges(pts, Vec::new()));
            }
            external_solve(ext, &pts)
        }
    }
}

/// Prim over the complete L1 graph in O(n²). Returns `(parent, child)` links
/// in attachment order, starting from vertex 0. Ties prefer the lower vertex
/// index, then the lower parent index.
pub(crate) fn prim_links(points: &[Point]) -> Vec<(usize, usize)> {
    let n = points.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut links = Vec::with_capacity(n - 1);
    in_tree[0] = true;
    for v in 1..n {
        dist[v] = l1(points[0], points[v]);
    }
    for _ in 1..n {
        let mut next = usize::MAX;
        let mut best = f64::INFINITY;
        for v in 0..n {
            if !in_tree[v] && (dist[v] < best || next == usize::MAX) {
                best = dist[v];
                next = v;
            }
        }
        in_tree[next] = true;
        links.push((parent[next], next));
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let d = l1(points[next], points[v]);
            if d < dist[v] || (d == dist[v] && next < parent[v]) {
                dist[v] = d;
                parent[v] = next;
            }
        }
    }
    links
}

/// Realises MST links over `vertices` as a tree spanning `terminals`.
fn tree_from_links(terminals: Vec<Point>, vertices: &[Point], links: &[(usize, usize)]) -> RectilinearTree {
    let edges = links
        .iter()
        .flat_map(|&(u, v)| l_path(vertices[u], vertices[v]))
        .collect();
    RectilinearTree::from_edges(terminals, edges)
}

/// Rectilinear minimum spanning tree.
pub fn rmst(points: &[Point]) -> RectilinearTree {
    let pts = canonical_points(points);
    let links = prim_links(&pts);
    tree_from_links(pts.clone(), &pts, &links)
}

/// Weight of the L1 MST.
pub fn mst_length(points: &[Point]) -> f64 {
    prim_links(points)
        .iter()
        .map(|&(u, v)| l1(points[u], points[v]))
        .sum()
}

/// Prim on a dense distance matrix restricted to the vertex subset `verts`.
fn mst_weight_indexed(dist: &[f64], stride: usize, verts: &[usize], key: &mut [f64]) -> f64 {
    let n = verts.len();
    if n < 2 {
        return 0.0;
    }
    let key = &mut key[..n];
    let first = verts[0] * stride;
    for (k, &v) in key.iter_mut().zip(verts) {
        *k = dist[first + v];
    }
    key[0] = f64::NEG_INFINITY; // marks "in tree"
    let mut total = 0.0;
    for _ in 1..n {
        let mut best = f64::INFINITY;
        let mut next = 0;
        for (i, &k) in key.iter().enumerate() {
            if k != f64::NEG_INFINITY && k < best {
                best = k;
                next = i;
            }
        }
        total += best;
        key[next] = f64::NEG_INFINITY;
        let row = verts[next] * stride;
        for (k, &v) in key.iter_mut().zip(verts) {
            if *k != f64::NEG_INFINITY {
                let d = dist[row + v];
                if d < *k {
                    *k = d;
                }
            }
        }
    }
    total
}

/// Optimal RSMT by exhaustive search: the minimum, over subsets of at most
/// `n - 2` Hanan-grid candidates, of the L1 MST of terminals ∪ subset.
///
/// Candidates exclude the terminals and the four corners of the bounding
/// box (a corner can never carry a Steiner point of degree three). The
/// search stops early once it reaches the half-perimeter lower bound.
pub fn exact_rsmt(points: &[Point], cap: usize) -> Result<RectilinearTree> {
    let terms = canonical_points(points);
    if terms.is_empty() {
        return Err(Error::EmptyInput);
    }
    if terms.len() > cap {
        return Err(Error::ExactCapExceeded {
            cap,
            n: terms.len(),
        });
    }
    if terms.len() <= 2 {
        let links = prim_links(&terms);
        return Ok(tree_from_links(terms.clone(), &terms, &links));
    }

    let hp = half_perimeter(&terms)?;
    let bb = crate::geometry::RegionBox::bounding(&terms)?;
    let is_corner = |p: &Point| {
        (p.x == bb.lo.x || p.x == bb.hi.x) && (p.y == bb.lo.y || p.y == bb.hi.y)
    };
    let term_keys: std::collections::HashSet<_> = terms.iter().map(Point::key).collect();
    let candidates: Vec<Point> = hanan_grid(&terms)?
        .into_iter()
        .filter(|p| !term_keys.contains(&p.key()) && !is_corner(p))
        .collect();

    // All vertices: terminals first, then candidates.
    let all: Vec<Point> = terms.iter().chain(&candidates).copied().collect();
    let stride = all.len();
    let mut dist = vec![0.0; stride * stride];
    for (i, a) in all.iter().enumerate() {
        for (j, b) in all.iter().enumerate() {
            dist[i * stride + j] = l1(*a, *b);
        }
    }

    let n = terms.len();
    let mut verts: Vec<usize> = (0..n).collect();
    let mut key = vec![0.0; n + n];
    let mut best_len = mst_weight_indexed(&dist, stride, &verts, &mut key);
    let mut best_set: Vec<usize> = Vec::new();
    let bound_hit = |len: f64| len <= hp * (1.0 + 1e-12);

    let mut search = Search {
        dist: &dist,
        stride,
        n_terms: n,
        n_cands: candidates.len(),
        key: &mut key,
        best_len: &mut best_len,
        best_set: &mut best_set,
        done: false,
        bound_hit: &bound_hit,
    };
    if !bound_hit(*search.best_len) {
        for size in 1..=n - 2 {
            search.combinations(&mut verts, 0, size);
            if search.done {
                break;
            }
        }
    }

    let mut chosen: Vec<Point> = terms.clone();
    chosen.extend(best_set.iter().map(|&c| all[c]));
    let links = prim_links(&chosen);
    Ok(tree_from_links(terms, &chosen, &links))
}

struct Search<'a, F: Fn(f64) -> bool> {
    dist: &'a [f64],
    stride: usize,
    n_terms: usize,
    n_cands: usize,
    key: &'a mut [f64],
    best_len: &'a mut f64,
    best_set: &'a mut Vec<usize>,
    done: bool,
    bound_hit: &'a F,
}

impl<F: Fn(f64) -> bool> Search<'_, F> {
    /// Enumerates `remaining` more candidates with indices ≥ `from`.
    fn combinations(&mut self, verts: &mut Vec<usize>, from: usize, remaining: usize) {
        if self.done {
            return;
        }
        if remaining == 0 {
            let len = mst_weight_indexed(self.dist, self.stride, verts, self.key);
            if len < *self.best_len {
                *self.best_len = len;
                self.best_set.clear();
                self.best_set.extend_from_slice(&verts[self.n_terms..]);
                if (self.bound_hit)(len) {
                    self.done = true;
                }
            }
            return;
        }
        if from + remaining > self.n_cands {
            return;
        }
        for c in from..=self.n_cands - remaining {
            verts.push(self.n_terms + c);
            self.combinations(verts, c + 1, remaining - 1);
            verts.pop();
            if self.done {
                return;
            }
        }
    }
}

/// MST weight of `verts ∪ {extra}` given the MST edges of `verts` sorted by
/// weight: the new MST uses only old tree edges and edges at `extra`. Under
/// L1 only the nearest vertex in each of the eight octants around `extra`
/// needs an edge.
fn mst_weight_with(verts: &[Point], tree: &[(f64, usize, usize)], extra: Point, scratch: &mut Vec<(f64, usize, usize)>) -> f64 {
    let n = verts.len();
    let mut nearest = [(f64::INFINITY, usize::MAX); 8];
    for (i, v) in verts.iter().enumerate() {
        let (dx, dy) = (v.x - extra.x, v.y - extra.y);
        let octant = 4 * (dx >= 0.0) as usize + 2 * (dy >= 0.0) as usize + (dy.abs() > dx.abs()) as usize;
        let d = l1(extra, *v);
        if d < nearest[octant].0 {
            nearest[octant] = (d, i);
        }
    }
    scratch.clear();
    scratch.extend(nearest.iter().filter(|e| e.1 != usize::MAX).map(|&(d, i)| (d, n, i)));
    scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut sets = DisjointSets::new(n + 1);
    let (mut i, mut j) = (0, 0);
    let mut total = 0.0;
    let mut taken = 0;
    while taken < n {
        let e = if j >= scratch.len() || (i < tree.len() && tree[i].0 <= scratch[j].0) {
            i += 1;
            tree[i - 1]
        } else {
            j += 1;
            scratch[j - 1]
        };
        if sets.union(e.1, e.2) {
            total += e.0;
            taken += 1;
        }
    }
    total
}

fn sorted_mst_edges(verts: &[Point]) -> Vec<(f64, usize, usize)> {
    let mut edges: Vec<_> = prim_links(verts)
        .into_iter()
        .map(|(u, v)| (l1(verts[u], verts[v]), u, v))
        .collect();
    edges.sort_by(|a, b| a.0.total_cmp(&b.0));
    edges
}

/// Iterated 1-Steiner: greedily adds the Hanan-grid point that shrinks the
/// MST the most until no point saves more than 1e-12, then drops added
/// points of tree degree ≤ 2 in one pass and rebuilds.
pub fn iterated_one_steiner(points: &[Point]) -> RectilinearTree {
    let terms = canonical_points(points);
    if terms.len() <= 2 {
        let links = prim_links(&terms);
        return tree_from_links(terms.clone(), &terms, &links);
    }
    let term_keys: std::collections::HashSet<_> = terms.iter().map(Point::key).collect();
    let candidates: Vec<Point> = hanan_grid(&terms)
        .expect("nonempty")
        .into_iter()
        .filter(|p| !term_keys.contains(&p.key()))
        .collect();
    let mut used = vec![false; candidates.len()];
    let mut verts = terms.clone();
    let mut scratch = Vec::with_capacity(verts.len() + 1);

    loop {
        let tree = sorted_mst_edges(&verts);
        let base: f64 = tree.iter().map(|e| e.0).sum();
        let mut best_gain = 1e-12;
        let mut best = None;
        for (i, c) in candidates.iter().enumerate() {
            if used[i] {
                continue;
            }
            let gain = base - mst_weight_with(&verts, &tree, *c, &mut scratch);
            if gain > best_gain {
                best_gain = gain;
                best = Some(i);
            }
        }
        let Some(i) = best else { break };
        used[i] = true;
        verts.push(candidates[i]);
    }

    // Degree cleanup over the added points.
    let links = prim_links(&verts);
    let mut degree = vec![0usize; verts.len()];
    for &(u, v) in &links {
        degree[u] += 1;
        degree[v] += 1;
    }
    let n = terms.len();
    let kept: Vec<Point> = verts
        .iter()
        .enumerate()
        .filter(|&(i, _)| i < n || degree[i] > 2)
        .map(|(_, &p)| p)
        .collect();
    let links = prim_links(&kept);
    tree_from_links(terms, &kept, &links)
}

/// Runs an external solver on `points` and validates its reply.
pub fn external_solve(solver: &ExternalSolver, points: &[Point]) -> Result<RectilinearTree> {
    let command = solver.command_line();
    let fail = |reason: String| Error::External {
        command: command.clone(),
        reason,
    };

    let mut child = Command::new(&solver.program)
        .args(&solver.args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .map_err(|e| fail(format!("cannot start: {e}")))?;

    let request = io::format_points(points);
    let mut stdin = child.stdin.take().expect("piped stdin");
    let writer = thread::spawn(move || {
        // The solver may exit without reading; a broken pipe is not our error.
        let _ = stdin.write_all(request.as_bytes());
    });
    let mut stdout = child.stdout.take().expect("piped stdout");
    let out_reader = thread::spawn(move || {
        let mut s = String::new();
        stdout.read_to_string(&mut s).map(|_| s)
    });
    let mut stderr = child.stderr.take().expect("piped stderr");
    let err_reader = thread::spawn(move || {
        let mut s = String::new();
        let _ = stderr.read_to_string(&mut s);
        s
    });

    let status = match child.wait_timeout(solver.timeout) {
        Ok(Some(status)) => status,
        Ok(None) => {
            let _ = child.kill();
            let _ = child.wait();
            let _ = writer.join();
            return Err(Error::ExternalTimeout {
                command,
                seconds: solver.timeout.as_secs_f64(),
            });
        }
        Err(e) => {
            let _ = child.kill();
            return Err(fail(format!("wait failed: {e}")));
        }
    };
    let _ = writer.join();
    let stdout = out_reader
        .join()
        .expect("stdout reader panicked")
        .map_err(|e| fail(format!("reading stdout: {e}")))?;
    let stderr = err_reader.join().expect("stderr reader panicked");

    if !status.success() {
        let code = status
            .code()
            .map_or_else(|| "signal".to_string(), |c| c.to_string());
        return Err(fail(format!("exit status {code}: {}", stderr.trim())));
    }

    let edges = io::parse_edges(&stdout, "reply").map_err(|e| fail(format!("malformed reply: {e}")))?;
    let tree = RectilinearTree::from_edges(points.to_vec(), edges);
    let report = validate_tree(&tree, points);
    if !report.is_ok() {
        return Err(fail(format!("invalid tree: {report}")));
    }
    Ok(tree)
}
