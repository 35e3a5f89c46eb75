//! Divide-and-conquer RSMT: partition the net with an [`Abvh`], solve every
//! block independently, then join the block subtrees with a Prim MST over the
//! block adjacency graph, each block treated as one node and block distances
//! measured as the closest L1 vertex pair.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::abvh::{Abvh, BlockId, Neighbors};
use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::geometry::{dedup_stable, l1, l_path, Point, RectEdge, RectilinearTree};
use crate::solvers::{rmst, solve_rsmt, SolverSpec};

/// Environment variable capping the block-solving worker pool.
pub const WORKERS_ENV: &str = "RSMT_WORKERS";

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Maximum number of points per block.
    pub block_size: usize,
    pub solver: SolverSpec,
    /// Solve a block with the RMST when the external solver fails on it.
    pub fallback_on_external_error: bool,
    pub parallel_blocks: bool,
}

impl PipelineConfig {
    pub fn new(solver: SolverSpec, block_size: usize) -> Self {
        Self {
            block_size,
            solver,
            fallback_on_external_error: true,
            parallel_blocks: true,
        }
    }

    pub fn sequential(mut self) -> Self {
        self.parallel_blocks = false;
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct PipelineReport {
    /// Distinct input points.
    pub points: usize,
    pub blocks: usize,
    pub segments: usize,
    pub interior_segments: usize,
    pub build_time: Duration,
    pub solve_time: Duration,
    pub stitch_time: Duration,
    /// Subtree length per block, indexed by block id.
    pub block_lengths: Vec<f64>,
    /// Block-to-block connections (`blocks - 1`).
    pub connectors: usize,
    pub connector_length: f64,
    pub final_length: f64,
    /// The neighbor-restricted block graph was disconnected and all block
    /// pairs were used instead.
    pub dense_fallback: bool,
    /// Blocks re-solved with the RMST after an external solver error.
    pub solver_fallbacks: usize,
}

impl PipelineReport {
    pub fn total_time(&self) -> Duration {
        self.build_time + self.solve_time + self.stitch_time
    }
}

/// Candidate connection between two blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockEdge {
    pub a: BlockId,
    pub b: BlockId,
    pub distance: f64,
    /// Vertex of block `a` realising `distance`.
    pub pa: Point,
    /// Vertex of block `b` realising `distance`.
    pub pb: Point,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct BlockGraph {
    pub blocks: usize,
    pub edges: Vec<BlockEdge>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Stitching {
    pub connectors: Vec<RectEdge>,
    /// Blocks in the order Prim attached them; starts with block 0.
    pub order: Vec<BlockId>,
    /// Indices into the graph's edges, one per attached block after the first.
    pub chosen: Vec<usize>,
    /// Sum of the chosen block distances.
    pub weight: f64,
}

fn lex(a: Point, b: Point, c: Point, d: Point) -> Ordering {
    a.lex_cmp(&c).then_with(|| b.lex_cmp(&d))
}

/// Closest vertex pair (terminals and Steiner points) between two trees under
/// L1. Ties go to the lexicographically smallest `(pa, pb)`.
pub fn inter_block_distance(a: &RectilinearTree, b: &RectilinearTree) -> Result<(f64, Point, Point)> {
    if a.vertex_count() == 0 || b.vertex_count() == 0 {
        return Err(Error::EmptyTree);
    }
    let mut best: Option<(f64, Point, Point)> = None;
    for u in a.vertices() {
        for v in b.vertices() {
            let d = l1(u, v);
            let better = match best {
                None => true,
                Some((bd, bu, bv)) => d < bd || (d == bd && lex(u, v, bu, bv) == Ordering::Less),
            };
            if better {
                best = Some((d, u, v));
            }
        }
    }
    Ok(best.expect("both trees have vertices"))
}

fn block_edge(trees: &[RectilinearTree], a: BlockId, b: BlockId) -> Result<BlockEdge> {
    let (distance, pa, pb) = inter_block_distance(&trees[a], &trees[b])?;
    Ok(BlockEdge {
        a,
        b,
        distance,
        pa,
        pb,
    })
}

/// Block graph with one edge per pair of segment-neighbors.
pub fn neighbor_graph(trees: &[RectilinearTree], neighbors: &Neighbors) -> Result<BlockGraph> {
    let mut pairs: Vec<(BlockId, BlockId)> = neighbors.pairs.iter().map(|p| (p.a, p.b)).collect();
    pairs.dedup();
    let edges = pairs
        .into_iter()
        .map(|(a, b)| block_edge(trees, a, b))
        .collect::<Result<_>>()?;
    Ok(BlockGraph {
        blocks: trees.len(),
        edges,
    })
}

/// Block graph over every pair of blocks.
pub fn dense_graph(trees: &[RectilinearTree]) -> Result<BlockGraph> {
    let mut edges = Vec::with_capacity(trees.len() * trees.len().saturating_sub(1) / 2);
    for a in 0..trees.len() {
        for b in a + 1..trees.len() {
            edges.push(block_edge(trees, a, b)?);
        }
    }
    Ok(BlockGraph {
        blocks: trees.len(),
        edges,
    })
}

fn component_count(graph: &BlockGraph) -> usize {
    let mut sets = DisjointSets::new(graph.blocks);
    for e in &graph.edges {
        sets.union(e.a, e.b);
    }
    sets.sets()
}

#[derive(Debug, PartialEq)]
struct HeapKey(f64, BlockId, BlockId, usize);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .total_cmp(&other.0)
            .then_with(|| (self.1, self.2, self.3).cmp(&(other.1, other.2, other.3)))
    }
}

/// Prim MST over the block graph from block 0, realising each chosen block
/// edge as an L-path from the vertex already in the tree.
pub fn stitch(blocks: &[RectilinearTree], graph: &BlockGraph) -> Result<Stitching> {
    let n = blocks.len().max(graph.blocks);
    let mut out = Stitching::default();
    if n == 0 {
        return Ok(out);
    }
    let mut adjacency: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, e) in graph.edges.iter().enumerate() {
        adjacency[e.a].push(i);
        adjacency[e.b].push(i);
    }
    let mut attached = vec![false; n];
    let mut heap = BinaryHeap::new();
    let attach = |block: BlockId, heap: &mut BinaryHeap<Reverse<HeapKey>>, attached: &mut [bool]| {
        attached[block] = true;
        for &i in &adjacency[block] {
            let e = &graph.edges[i];
            let other = if e.a == block { e.b } else { e.a };
            if !attached[other] {
                heap.push(Reverse(HeapKey(e.distance, e.a.min(e.b), e.a.max(e.b), i)));
            }
        }
    };
    attach(0, &mut heap, &mut attached);
    out.order.push(0);
    while let Some(Reverse(HeapKey(_, _, _, i))) = heap.pop() {
        let e = &graph.edges[i];
        let (from, to, new_block) = match (attached[e.a], attached[e.b]) {
            (true, false) => (e.pa, e.pb, e.b),
            (false, true) => (e.pb, e.pa, e.a),
            _ => continue,
        };
        out.connectors.extend(l_path(from, to));
        out.weight += e.distance;
        out.chosen.push(i);
        out.order.push(new_block);
        attach(new_block, &mut heap, &mut attached);
    }
    if out.order.len() < n {
        return Err(Error::DisconnectedBlockGraph {
            components: component_count(&BlockGraph {
                blocks: n,
                edges: graph.edges.clone(),
            }),
        });
    }
    Ok(out)
}

fn solve_block(config: &PipelineConfig, points: &[Point]) -> Result<(RectilinearTree, bool)> {
    match solve_rsmt(&config.solver, points) {
        Ok(t) => Ok((t, false)),
        Err(e @ (Error::External { .. } | Error::ExternalTimeout { .. })) => {
            if config.fallback_on_external_error {
                Ok((rmst(points), true))
            } else {
                Err(e)
            }
        }
        Err(e) => Err(e),
    }
}

fn worker_limit() -> Option<usize> {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
}

fn solve_blocks(abvh: &Abvh, config: &PipelineConfig) -> Result<Vec<(RectilinearTree, bool)>> {
    let blocks: Vec<&[Point]> = (0..abvh.leaf_count()).map(|b| abvh.leaf_points(b)).collect();
    if !config.parallel_blocks || blocks.len() < 2 {
        return blocks.iter().map(|pts| solve_block(config, pts)).collect();
    }
    let work = || -> Result<Vec<_>> {
        blocks
            .par_iter()
            .map(|pts| solve_block(config, pts))
            .collect()
    };
    match worker_limit() {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// Everything a run produces, for callers that need the intermediate pieces.
#[derive(Debug, Clone)]
pub struct Solution {
    pub tree: RectilinearTree,
    pub report: PipelineReport,
    pub abvh: Abvh,
    /// Subtree per block, indexed by block id.
    pub block_trees: Vec<RectilinearTree>,
    pub stitching: Stitching,
}

/// Runs the full divide-and-conquer procedure on `points`.
pub fn run(points: &[Point], config: &PipelineConfig) -> Result<(RectilinearTree, PipelineReport)> {
    run_detailed(points, config).map(|s| (s.tree, s.report))
}

/// As [`run`], keeping the hierarchy, block subtrees and connectors.
pub fn run_detailed(points: &[Point], config: &PipelineConfig) -> Result<Solution> {
    if config.block_size < 1 {
        return Err(Error::InvalidBlockSize);
    }
    let terminals = dedup_stable(points);
    if terminals.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut report = PipelineReport {
        points: terminals.len(),
        ..Default::default()
    };

    let t0 = Instant::now();
    let abvh = Abvh::build(&terminals, config.block_size)?;
    let stats = abvh.stats();
    report.build_time = t0.elapsed();
    report.blocks = stats.leaves;
    report.segments = stats.segments;
    report.interior_segments = stats.interior_segments;

    let t1 = Instant::now();
    let solved = solve_blocks(&abvh, config)?;
    report.solve_time = t1.elapsed();
    report.solver_fallbacks = solved.iter().filter(|(_, fell_back)| *fell_back).count();
    let block_trees: Vec<RectilinearTree> = solved.into_iter().map(|(t, _)| t).collect();
    report.block_lengths = block_trees.iter().map(|t| t.length).collect();

    let t2 = Instant::now();
    let neighbors = abvh.neighbors();
    let graph = if neighbors.connected {
        neighbor_graph(&block_trees, &neighbors)?
    } else {
        report.dense_fallback = true;
        dense_graph(&block_trees)?
    };
    let stitching = stitch(&block_trees, &graph)?;
    report.stitch_time = t2.elapsed();
    report.connectors = stitching.chosen.len();
    report.connector_length = stitching.weight;

    let mut edges: Vec<RectEdge> = block_trees.iter().flat_map(|t| t.edges.iter().copied()).collect();
    edges.extend(stitching.connectors.iter().copied());
    let tree = RectilinearTree::from_edges(terminals, edges);
    report.final_length = tree.length;
    Ok(Solution {
        tree,
        report,
        abvh,
        block_trees,
        stitching,
    })
}
