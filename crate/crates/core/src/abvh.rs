//! Segment-augmented bounding volume hierarchy.
//!
//! Every node owns a contiguous index range of one shared point sequence and
//! a region; the regions of the leaves tile the bounding box of the input.
//! While the hierarchy is built top-down, each node on the recursion frontier
//! carries the list of boundary segments that surround it. A segment is a
//! maximal interval of region boundary with exactly one block on either
//! side, identified by its `back` and `front` references. When construction
//! finishes, segments are held only by leaves and by the [`NodeId::NIL`]
//! sentinel (the outside of the root region), so leaf adjacency can be read
//! straight off the segment set.
//!
//! Segment lists are intrusive doubly-linked lists: each segment carries one
//! pair of `prev`/`next` anchors per side, so insertion and removal in either
//! neighbor's list is O(1).

use std::collections::BTreeSet;
use std::fmt::{self, Write as _};
use std::ops::Range;

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};
use crate::geometry::{Axis, Point, RegionBox};

/// Index of a leaf block, assigned left-to-right in depth-first order.
pub type BlockId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(u32);

impl NodeId {
    /// The virtual node standing for everything outside the root region.
    pub const NIL: NodeId = NodeId(0);

    pub fn is_nil(self) -> bool {
        self == Self::NIL
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_nil() {
            f.write_str("NIL")
        } else {
            write!(f, "#{}", self.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SegmentId(u32);

impl SegmentId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Side slot of a segment: `BACK` and `FRONT`.
const BACK: usize = 0;
const FRONT: usize = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    /// Lies on a line `y = coord`, spans an x-interval.
    Horizontal,
    /// Lies on a line `x = coord`, spans a y-interval.
    Vertical,
}

impl Orientation {
    /// The axis whose coordinate is constant along the segment.
    pub fn fixed_axis(self) -> Axis {
        match self {
            Orientation::Horizontal => Axis::Y,
            Orientation::Vertical => Axis::X,
        }
    }

    /// Orientation of a cut line `axis = c`.
    pub fn of_cut(axis: Axis) -> Self {
        match axis {
            Axis::X => Orientation::Vertical,
            Axis::Y => Orientation::Horizontal,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
struct Link {
    prev: Option<SegmentId>,
    next: Option<SegmentId>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub orientation: Orientation,
    /// The constant coordinate.
    pub coord: f64,
    /// Closed interval `[a, b]` along the varying axis, `a < b`.
    pub span: (f64, f64),
    pub back: NodeId,
    pub front: NodeId,
    links: [Link; 2],
}

impl Segment {
    pub fn len(&self) -> f64 {
        self.span.1 - self.span.0
    }

    fn side(&self, slot: usize) -> NodeId {
        if slot == BACK {
            self.back
        } else {
            self.front
        }
    }

    fn set_side(&mut self, slot: usize, node: NodeId) {
        if slot == BACK {
            self.back = node;
        } else {
            self.front = node;
        }
    }

    fn slot_of(&self, node: NodeId) -> usize {
        if self.back == node {
            BACK
        } else {
            debug_assert_eq!(self.front, node, "segment does not reference node");
            FRONT
        }
    }

    /// `true` if the segment lies on the boundary of `region`.
    pub fn on_boundary_of(&self, region: &RegionBox) -> bool {
        let fixed = self.orientation.fixed_axis();
        let along = fixed.other();
        (self.coord == region.lo_on(fixed) || self.coord == region.hi_on(fixed))
            && region.lo_on(along) <= self.span.0
            && self.span.1 <= region.hi_on(along)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub region: RegionBox,
    /// Half-open index interval into [`Abvh::points`].
    pub range: Range<usize>,
    pub children: Option<(NodeId, NodeId)>,
    pub block: Option<BlockId>,
    pub depth: usize,
    head: Option<SegmentId>,
    seg_count: usize,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_none()
    }

    pub fn len(&self) -> usize {
        self.range.len()
    }

    pub fn segment_count(&self) -> usize {
        self.seg_count
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AbvhStats {
    pub leaves: usize,
    /// All stored segments, including those facing NIL.
    pub segments: usize,
    /// Segments with a leaf on both sides.
    pub interior_segments: usize,
    /// Edges on the longest root-to-leaf path; a single leaf has height 0.
    pub height: usize,
}

#[derive(Debug, Clone)]
pub struct Abvh {
    points: Vec<Point>,
    nodes: Vec<Node>,
    segments: Vec<Segment>,
    leaves: Vec<NodeId>,
    block_size: usize,
    height: usize,
}

/// One block adjacency: the two leaves on either side of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct Adjacency {
    pub a: BlockId,
    pub b: BlockId,
    pub orientation: Orientation,
    pub coord: f64,
    pub span: (f64, f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Neighbors {
    /// Sorted by `(a, b)` with `a < b`.
    pub pairs: Vec<Adjacency>,
    /// Whether the block graph induced by `pairs` is connected.
    pub connected: bool,
}

impl Neighbors {
    pub fn pair_set(&self) -> BTreeSet<(BlockId, BlockId)> {
        self.pairs.iter().map(|p| (p.a, p.b)).collect()
    }
}

fn midpoint(a: f64, b: f64) -> f64 {
    (a + (b - a) * 0.5).clamp(a, b)
}

impl Abvh {
    /// Builds the hierarchy over `points`, splitting until every leaf holds at
    /// most `block_size` points.
    pub fn build(points: &[Point], block_size: usize) -> Result<Self> {
        Self::build_owned(points.to_vec(), block_size)
    }

    /// As [`Abvh::build`], reordering `points` in place as the shared sequence.
    pub fn build_owned(points: Vec<Point>, block_size: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptyInput);
        }
        if block_size < 1 {
            return Err(Error::InvalidBlockSize);
        }
        if let Some(p) = points.iter().find(|p| !p.is_finite()) {
            return Err(Error::NonFinite { x: p.x, y: p.y });
        }
        let region = RegionBox::bounding(&points)?;
        let n = points.len();
        // Rough capacity: ~2N/B nodes and a few segments per leaf.
        let leaves_est = n.div_ceil(block_size).max(1);
        let mut tree = Abvh {
            points,
            nodes: Vec::with_capacity(2 * leaves_est + 2),
            segments: Vec::with_capacity(4 * leaves_est + 4),
            leaves: Vec::with_capacity(leaves_est),
            block_size,
            height: 0,
        };
        let nil = tree.push_node(region, 0..0, 0);
        debug_assert!(nil.is_nil());
        let root = tree.push_node(region, 0..n, 0);

        // Root box edges: back = NIL, front = root.
        let (lo, hi) = (region.lo, region.hi);
        let outer = [
            (Orientation::Horizontal, lo.y, (lo.x, hi.x)),
            (Orientation::Horizontal, hi.y, (lo.x, hi.x)),
            (Orientation::Vertical, lo.x, (lo.y, hi.y)),
            (Orientation::Vertical, hi.x, (lo.y, hi.y)),
        ];
        for (orientation, coord, span) in outer {
            tree.add_segment(orientation, coord, span, NodeId::NIL, root);
        }

        tree.build_subtree(root);
        Ok(tree)
    }

    fn push_node(&mut self, region: RegionBox, range: Range<usize>, depth: usize) -> NodeId {
        let id = NodeId(u32::try_from(self.nodes.len()).expect("node count overflow"));
        self.nodes.push(Node {
            region,
            range,
            children: None,
            block: None,
            depth,
            head: None,
            seg_count: 0,
        });
        id
    }

    fn build_subtree(&mut self, root: NodeId) {
        let mut stack = vec![root];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id.index()];
            if node.len() <= self.block_size {
                let block = self.leaves.len();
                self.height = self.height.max(node.depth);
                self.nodes[id.index()].block = Some(block);
                self.leaves.push(id);
                continue;
            }
            let (left, right) = self.split_node(id);
            // Right pushed first so the left subtree is numbered first.
            stack.push(right);
            stack.push(left);
        }
    }

    /// Splits an overfull node at the median of its region's longer axis and
    /// hands its segments down to the children.
    fn split_node(&mut self, id: NodeId) -> (NodeId, NodeId) {
        let node = &self.nodes[id.index()];
        let region = node.region;
        let range = node.range.clone();
        let depth = node.depth;
        let axis = if region.width() >= region.height() {
            Axis::X
        } else {
            Axis::Y
        };

        let slice = &mut self.points[range.clone()];
        slice.sort_by(|p, q| p.coord(axis).total_cmp(&q.coord(axis)));
        let k = slice.len().div_ceil(2);
        let c = midpoint(slice[k - 1].coord(axis), slice[k].coord(axis));

        let (left_region, right_region) = region.cut(axis, c);
        let mid = range.start + k;
        let left = self.push_node(left_region, range.start..mid, depth + 1);
        let right = self.push_node(right_region, mid..range.end, depth + 1);
        self.nodes[id.index()].children = Some((left, right));

        self.update_segments(id, axis, c, left, right);

        let along = axis.other();
        let span = (region.lo_on(along), region.hi_on(along));
        if span.0 < span.1 {
            self.add_segment(Orientation::of_cut(axis), c, span, left, right);
        }
        (left, right)
    }

    /// Moves every segment of `parent` onto `left`/`right` for a cut `axis = c`.
    fn update_segments(&mut self, parent: NodeId, axis: Axis, c: f64, left: NodeId, right: NodeId) {
        let lo = self.nodes[parent.index()].region.lo_on(axis);
        let mut cursor = self.nodes[parent.index()].head;
        while let Some(sid) = cursor {
            let seg = &self.segments[sid.index()];
            let slot = seg.slot_of(parent);
            cursor = seg.links[slot].next;

            if seg.orientation.fixed_axis() == axis {
                // Parallel to the cut: lies on the parent's low or high boundary.
                let target = if seg.coord == lo { left } else { right };
                self.reattach(sid, slot, target);
                continue;
            }

            let (a, b) = seg.span;
            if b <= c {
                self.reattach(sid, slot, left);
            } else if a >= c {
                self.reattach(sid, slot, right);
            } else {
                // Crosses the cut: E becomes E' = [a, c] on the left, and a new
                // E'' = [c, b] goes to the right. The opposite neighbor swaps E
                // for both pieces.
                let opposite = seg.side(1 - slot);
                let (orientation, coord) = (seg.orientation, seg.coord);
                self.unlink(opposite, sid);
                self.segments[sid.index()].span = (a, c);
                self.reattach(sid, slot, left);
                self.push_front(opposite, sid, 1 - slot);

                let (back, front) = if slot == BACK {
                    (right, opposite)
                } else {
                    (opposite, right)
                };
                self.add_segment(orientation, coord, (c, b), back, front);
            }
        }
        let p = &mut self.nodes[parent.index()];
        p.head = None;
        p.seg_count = 0;
    }

    fn add_segment(
        &mut self,
        orientation: Orientation,
        coord: f64,
        span: (f64, f64),
        back: NodeId,
        front: NodeId,
    ) -> Option<SegmentId> {
        if !(span.0 < span.1) {
            return None;
        }
        let sid = SegmentId(u32::try_from(self.segments.len()).expect("segment count overflow"));
        self.segments.push(Segment {
            orientation,
            coord,
            span,
            back,
            front,
            links: [Link::default(); 2],
        });
        self.push_front(back, sid, BACK);
        self.push_front(front, sid, FRONT);
        Some(sid)
    }

    /// Points side `slot` of `sid` at `target` and links it into `target`'s list.
    /// The old owner's list is being discarded, so no unlink is needed there.
    fn reattach(&mut self, sid: SegmentId, slot: usize, target: NodeId) {
        self.segments[sid.index()].set_side(slot, target);
        self.push_front(target, sid, slot);
    }

    fn push_front(&mut self, node: NodeId, sid: SegmentId, slot: usize) {
        let head = self.nodes[node.index()].head;
        self.segments[sid.index()].links[slot] = Link {
            prev: None,
            next: head,
        };
        if let Some(h) = head {
            let hs = self.segments[h.index()].slot_of(node);
            self.segments[h.index()].links[hs].prev = Some(sid);
        }
        let n = &mut self.nodes[node.index()];
        n.head = Some(sid);
        n.seg_count += 1;
    }

    /// O(1) removal of `sid` from `node`'s list.
    fn unlink(&mut self, node: NodeId, sid: SegmentId) {
        let slot = self.segments[sid.index()].slot_of(node);
        let Link { prev, next } = self.segments[sid.index()].links[slot];
        match prev {
            Some(p) => {
                let ps = self.segments[p.index()].slot_of(node);
                self.segments[p.index()].links[ps].next = next;
            }
            None => self.nodes[node.index()].head = next,
        }
        if let Some(nx) = next {
            let ns = self.segments[nx.index()].slot_of(node);
            self.segments[nx.index()].links[ns].prev = prev;
        }
        self.segments[sid.index()].links[slot] = Link::default();
        self.nodes[node.index()].seg_count -= 1;
    }

    /// The shared point sequence, reordered so every node's range is contiguous.
    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn root(&self) -> NodeId {
        NodeId(1)
    }

    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Node data. `NIL` yields a placeholder with an empty range and the root region.
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.index()]
    }

    /// Every real node (NIL excluded), in creation order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, &Node)> {
        self.nodes
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, n)| (NodeId(i as u32), n))
    }

    /// Leaves indexed by block id.
    pub fn leaves(&self) -> &[NodeId] {
        &self.leaves
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves.len()
    }

    pub fn leaf_region(&self, block: BlockId) -> RegionBox {
        self.node(self.leaves[block]).region
    }

    pub fn leaf_points(&self, block: BlockId) -> &[Point] {
        &self.points[self.node(self.leaves[block]).range.clone()]
    }

    pub fn root_region(&self) -> RegionBox {
        self.node(self.root()).region
    }

    pub fn segment(&self, id: SegmentId) -> &Segment {
        &self.segments[id.index()]
    }

    pub fn all_segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Walks `node`'s segment list.
    pub fn segments_of(&self, node: NodeId) -> SegmentIter<'_> {
        SegmentIter {
            tree: self,
            node,
            cursor: self.nodes[node.index()].head,
        }
    }

    pub fn stats(&self) -> AbvhStats {
        let interior = self
            .segments
            .iter()
            .filter(|s| !s.back.is_nil() && !s.front.is_nil())
            .count();
        AbvhStats {
            leaves: self.leaves.len(),
            segments: self.segments.len(),
            interior_segments: interior,
            height: self.height,
        }
    }

    fn block_of(&self, id: NodeId) -> Option<BlockId> {
        if id.is_nil() {
            None
        } else {
            self.nodes[id.index()].block
        }
    }

    /// Block adjacency read from the segment set: one entry per segment with a
    /// leaf on both sides.
    pub fn neighbors(&self) -> Neighbors {
        let mut pairs: Vec<Adjacency> = self
            .segments
            .iter()
            .filter_map(|s| {
                let (x, y) = (self.block_of(s.back)?, self.block_of(s.front)?);
                Some(Adjacency {
                    a: x.min(y),
                    b: x.max(y),
                    orientation: s.orientation,
                    coord: s.coord,
                    span: s.span,
                })
            })
            .collect();
        pairs.sort_by(|p, q| (p.a, p.b).cmp(&(q.a, q.b)));
        let mut sets = DisjointSets::new(self.leaves.len());
        for p in &pairs {
            sets.union(p.a, p.b);
        }
        Neighbors {
            pairs,
            connected: sets.sets() <= 1,
        }
    }

    /// Text listing of leaves and segments, one record per line.
    ///
    /// ```text
    /// leaf <block> <lo.x> <lo.y> <hi.x> <hi.y> points=<n>
    /// segment <H|V> <coord> <a> <b> back=<block|NIL> front=<block|NIL>
    /// ```
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (block, &id) in self.leaves.iter().enumerate() {
            let n = self.node(id);
            let _ = writeln!(
                out,
                "leaf {block} {} {} {} {} points={}",
                n.region.lo.x,
                n.region.lo.y,
                n.region.hi.x,
                n.region.hi.y,
                n.len()
            );
        }
        let side = |id: NodeId| match self.block_of(id) {
            Some(b) => b.to_string(),
            None => "NIL".to_string(),
        };
        for s in &self.segments {
            let o = match s.orientation {
                Orientation::Horizontal => 'H',
                Orientation::Vertical => 'V',
            };
            let _ = writeln!(
                out,
                "segment {o} {} {} {} back={} front={}",
                s.coord,
                s.span.0,
                s.span.1,
                side(s.back),
                side(s.front)
            );
        }
        out
    }

    /// Checks the structural invariants; returns a description of each failure.
    ///
    /// Covered: leaf sizes, child ranges and regions, points inside their leaf
    /// region, leaf tiling (pairwise interiors disjoint and total area equal to
    /// the root area within 1e-6 relative), segment length, segments on the
    /// boundary of both sides, only leaves and NIL holding segments, and every
    /// segment registered in exactly the two lists it references.
    pub fn check_invariants(&self) -> Vec<String> {
        let mut problems = Vec::new();
        for (id, node) in self.nodes() {
            if node.range.is_empty() {
                problems.push(format!("node {id} has an empty range"));
            }
            match node.children {
                None => {
                    if node.len() > self.block_size {
                        problems.push(format!("leaf {id} holds {} points", node.len()));
                    }
                }
                Some((l, r)) => {
                    let (ln, rn) = (self.node(l), self.node(r));
                    if ln.range.start != node.range.start
                        || ln.range.end != rn.range.start
                        || rn.range.end != node.range.end
                    {
                        problems.push(format!("children of {id} do not partition its range"));
                    }
                    let area = ln.region.area() + rn.region.area();
                    if (area - node.region.area()).abs() > 1e-9 * node.region.area().max(1e-300)
                        && node.region.area() > 0.0
                    {
                        problems.push(format!("children of {id} do not partition its region"));
                    }
                    if node.seg_count != 0 || node.head.is_some() {
                        problems.push(format!("internal node {id} still holds segments"));
                    }
                }
            }
        }

        for (block, &id) in self.leaves.iter().enumerate() {
            let region = self.node(id).region;
            if let Some(p) = self.leaf_points(block).iter().find(|p| !region.contains(p)) {
                problems.push(format!("point {p} lies outside block {block}"));
            }
        }

        let regions: Vec<RegionBox> = self.leaves.iter().map(|&l| self.node(l).region).collect();
        problems.extend(check_tiling(&self.root_region(), &regions));

        let mut registered = vec![0usize; self.segments.len()];
        for idx in 0..self.nodes.len() {
            let id = NodeId(idx as u32);
            let mut count = 0;
            for sid in self.segments_of(id) {
                count += 1;
                registered[sid.index()] += 1;
                let s = self.segment(sid);
                if s.back != id && s.front != id {
                    problems.push(format!("{id} lists segment {} that does not reference it", sid.index()));
                }
            }
            if count != self.nodes[idx].seg_count {
                problems.push(format!("{id} segment count {} != list length {count}", self.nodes[idx].seg_count));
            }
        }
        let root_region = self.root_region();
        for (i, s) in self.segments.iter().enumerate() {
            if !(s.span.0 < s.span.1) {
                problems.push(format!("segment {i} has non-positive length"));
            }
            if registered[i] != 2 {
                problems.push(format!("segment {i} registered {} times", registered[i]));
            }
            if s.back == s.front {
                problems.push(format!("segment {i} has the same node on both sides"));
            }
            for side in [s.back, s.front] {
                let region = if side.is_nil() {
                    root_region
                } else {
                    if !self.node(side).is_leaf() {
                        problems.push(format!("segment {i} references internal node {side}"));
                    }
                    self.node(side).region
                };
                if !s.on_boundary_of(&region) {
                    problems.push(format!("segment {i} is not on the boundary of {side}"));
                }
            }
        }
        problems
    }
}

/// Checks that `regions` tile `root`: pairwise-disjoint interiors and total
/// area equal to the root area within 1e-6 relative. O(L²).
pub fn check_tiling(root: &RegionBox, regions: &[RegionBox]) -> Vec<String> {
    let mut problems = Vec::new();
    let total: f64 = regions.iter().map(RegionBox::area).sum();
    let root_area = root.area();
    if (total - root_area).abs() > 1e-6 * root_area.abs().max(f64::MIN_POSITIVE) && total != root_area {
        problems.push(format!("leaf area {total} differs from root area {root_area}"));
    }
    for (i, a) in regions.iter().enumerate() {
        if a.lo.x < root.lo.x || a.lo.y < root.lo.y || a.hi.x > root.hi.x || a.hi.y > root.hi.y {
            problems.push(format!("region {i} leaves the root region"));
        }
        for (j, b) in regions.iter().enumerate().skip(i + 1) {
            if a.overlap_area(b) > 0.0 {
                problems.push(format!("regions {i} and {j} overlap"));
            }
        }
    }
    problems
}

pub struct SegmentIter<'a> {
    tree: &'a Abvh,
    node: NodeId,
    cursor: Option<SegmentId>,
}

impl Iterator for SegmentIter<'_> {
    type Item = SegmentId;

    fn next(&mut self) -> Option<SegmentId> {
        let sid = self.cursor?;
        let s = self.tree.segment(sid);
        self.cursor = s.links[s.slot_of(self.node)].next;
        Some(sid)
    }
}

fn overlap_len(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    a1.min(b1) - a0.max(b0)
}

/// Adjacency by direct comparison of every pair of regions: two blocks are
/// adjacent when their boundaries share an interval of positive length.
/// Corner contact does not count.
pub fn brute_force_adjacency(leaves: &[(BlockId, RegionBox)]) -> Vec<(BlockId, BlockId)> {
    let mut out = Vec::new();
    for (i, (ba, ra)) in leaves.iter().enumerate() {
        for (bb, rb) in &leaves[i + 1..] {
            let x_touch = ra.hi.x == rb.lo.x || rb.hi.x == ra.lo.x;
            let y_touch = ra.hi.y == rb.lo.y || rb.hi.y == ra.lo.y;
            let shares_vertical = x_touch && overlap_len(ra.lo.y, ra.hi.y, rb.lo.y, rb.hi.y) > 0.0;
            let shares_horizontal = y_touch && overlap_len(ra.lo.x, ra.hi.x, rb.lo.x, rb.hi.x) > 0.0;
            if shares_vertical || shares_horizontal {
                out.push(((*ba).min(*bb), (*ba).max(*bb)));
            }
        }
    }
    out.sort_unstable();
    out
}

impl Abvh {
    /// `(block, region)` for every leaf, the input shape of [`brute_force_adjacency`].
    pub fn leaf_regions(&self) -> Vec<(BlockId, RegionBox)> {
        (0..self.leaves.len()).map(|b| (b, self.leaf_region(b))).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn p(x: f64, y: f64) -> Point {
        Point::new(x, y)
    }

    fn random_points(n: usize, seed: u64) -> Vec<Point> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| p(rng.random(), rng.random())).collect()
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(Abvh::build(&[], 4), Err(Error::EmptyInput)));
        assert!(matches!(Abvh::build(&[p(0.0, 0.0)], 0), Err(Error::InvalidBlockSize)));
        assert!(matches!(
            Abvh::build(&[p(f64::NAN, 0.0)], 1),
            Err(Error::NonFinite { .. })
        ));
    }

    #[test]
    fn single_point_is_one_leaf() {
        let t = Abvh::build(&[p(0.25, 0.75)], 1).unwrap();
        let s = t.stats();
        assert_eq!(s.leaves, 1);
        assert_eq!(s.interior_segments, 0);
        assert_eq!(s.height, 0);
        // The root box is a single point: its edges have zero length and are not stored.
        assert_eq!(s.segments, 0);
        assert!(t.neighbors().pairs.is_empty());
        assert!(t.neighbors().connected);
        assert!(t.check_invariants().is_empty());
    }

    #[test]
    fn outer_segments_face_nil() {
        let t = Abvh::build(&[p(0.0, 0.0), p(2.0, 1.0)], 4).unwrap();
        assert_eq!(t.stats().segments, 4);
        for s in t.all_segments() {
            assert!(s.back.is_nil());
            assert_eq!(s.front, t.root());
        }
        assert_eq!(t.segments_of(NodeId::NIL).count(), 4);
        assert_eq!(t.segments_of(t.root()).count(), 4);
    }

    #[test]
    fn four_corners_split_once_on_x() {
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0), p(1.0, 1.0)];
        let t = Abvh::build(&pts, 2).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.leaf_region(0), RegionBox::new(p(0.0, 0.0), p(0.5, 1.0)));
        assert_eq!(t.leaf_region(1), RegionBox::new(p(0.5, 0.0), p(1.0, 1.0)));
        assert!(t.leaf_points(0).iter().all(|q| q.x == 0.0));
        assert!(t.leaf_points(1).iter().all(|q| q.x == 1.0));

        let nb = t.neighbors();
        assert_eq!(nb.pairs.len(), 1);
        let adj = &nb.pairs[0];
        assert_eq!((adj.a, adj.b), (0, 1));
        assert_eq!(adj.orientation, Orientation::Vertical);
        assert_eq!(adj.coord, 0.5);
        assert_eq!(adj.span, (0.0, 1.0));
        assert_eq!(nb.pair_set(), brute_force_adjacency(&t.leaf_regions()).into_iter().collect());
        assert!(t.check_invariants().is_empty());
    }

    #[test]
    fn four_corners_dump_golden() {
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0), p(1.0, 1.0)];
        let t = Abvh::build(&pts, 2).unwrap();
        let expected = "\
leaf 0 0 0 0.5 1 points=2
leaf 1 0.5 0 1 1 points=2
segment H 0 0 0.5 back=NIL front=0
segment H 1 0 0.5 back=NIL front=0
segment V 0 0 1 back=NIL front=0
segment V 1 0 1 back=NIL front=1
segment H 1 0.5 1 back=NIL front=1
segment H 0 0.5 1 back=NIL front=1
segment V 0.5 0 1 back=0 front=1
";
        assert_eq!(t.dump(), expected);
    }

    #[test]
    fn crossing_segment_split_updates_opposite_neighbor() {
        // First cut on x at 0.5, then each half (0.5 x 1) is cut on y. The root
        // bottom and top edges were already split by the first cut; the second
        // level cuts split the vertical middle segment S into two pieces, one
        // per cut, and the opposite side's list must follow.
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0), p(1.0, 1.0)];
        let t = Abvh::build(&pts, 1).unwrap();
        assert_eq!(t.leaf_count(), 4);
        assert!(t.check_invariants().is_empty(), "{:?}", t.check_invariants());
        let got = t.neighbors().pair_set();
        let want: BTreeSet<_> = brute_force_adjacency(&t.leaf_regions()).into_iter().collect();
        assert_eq!(got, want);
        assert_eq!(got.len(), 4);
        // NIL keeps eight pieces of the outer boundary and never splits.
        assert_eq!(t.segments_of(NodeId::NIL).count(), 8);
    }

    #[test]
    fn fig3b_cases_on_hand_built_configuration() {
        // P = [0,1]x[0,1] with a left neighbor (P3) sharing P's whole left edge.
        // Build with 8 points so the root cuts at x then each half cuts on y.
        let pts = [
            p(0.0, 0.0),
            p(0.1, 0.9),
            p(0.2, 0.2),
            p(0.3, 0.7),
            p(0.6, 0.1),
            p(0.7, 0.8),
            p(0.8, 0.3),
            p(1.0, 1.0),
        ];
        let t = Abvh::build(&pts, 2).unwrap();
        assert!(t.check_invariants().is_empty(), "{:?}", t.check_invariants());
        for s in t.all_segments() {
            for side in [s.back, s.front] {
                assert!(side.is_nil() || t.node(side).is_leaf());
            }
        }
        let got = t.neighbors().pair_set();
        let want: BTreeSet<_> = brute_force_adjacency(&t.leaf_regions()).into_iter().collect();
        assert_eq!(got, want);
    }

    #[test]
    fn identical_x_splits_on_y() {
        let pts: Vec<Point> = (0..6).map(|i| p(3.0, i as f64)).collect();
        let t = Abvh::build(&pts, 3).unwrap();
        assert_eq!(t.leaf_count(), 2);
        assert_eq!(t.leaf_region(0).hi.y, 2.5);
        assert_eq!(t.leaf_region(1).lo.y, 2.5);
        assert!(t.check_invariants().is_empty());
    }

    #[test]
    fn duplicate_median_coordinates_still_tile() {
        let pts = [
            p(0.0, 0.0),
            p(0.5, 0.2),
            p(0.5, 0.4),
            p(0.5, 0.6),
            p(0.5, 0.8),
            p(1.0, 1.0),
        ];
        let t = Abvh::build(&pts, 3).unwrap();
        assert_eq!(t.leaf_region(0).hi.x, 0.5);
        assert_eq!(t.leaf_points(0).len(), 3);
        assert_eq!(t.leaf_points(1).len(), 3);
        assert!(t.check_invariants().is_empty(), "{:?}", t.check_invariants());
    }

    #[test]
    fn segment_touching_cut_at_endpoint_is_not_split() {
        // Left half cut at y first, then the right half is cut at the same y:
        // the right half's left boundary pieces end exactly at the cut.
        let pts = [p(0.0, 0.0), p(0.0, 1.0), p(1.0, 0.0), p(1.0, 1.0)];
        let t = Abvh::build(&pts, 1).unwrap();
        for s in t.all_segments() {
            assert!(s.span.0 < s.span.1);
        }
        // The middle line x = 0.5 is in exactly two pieces.
        let mid: Vec<_> = t
            .all_segments()
            .iter()
            .filter(|s| s.orientation == Orientation::Vertical && s.coord == 0.5)
            .collect();
        assert_eq!(mid.len(), 2);
    }

    #[test]
    fn thousand_points_make_32_leaves() {
        let pts = random_points(1000, 7);
        let t = Abvh::build(&pts, 50).unwrap();
        assert_eq!(t.leaf_count(), 32);
        assert_eq!(t.stats().height, 5);
        for b in 0..t.leaf_count() {
            assert!(t.leaf_points(b).len() <= 50);
        }
        assert!(t.check_invariants().is_empty());
        let nb = t.neighbors();
        assert!(nb.connected);
        let want: BTreeSet<_> = brute_force_adjacency(&t.leaf_regions()).into_iter().collect();
        assert_eq!(nb.pair_set(), want);
    }

    #[test]
    fn brute_force_examples() {
        let a = RegionBox::new(p(0.0, 0.0), p(1.0, 1.0));
        let b = RegionBox::new(p(1.0, 0.0), p(2.0, 1.0));
        let corner = RegionBox::new(p(1.0, 1.0), p(2.0, 2.0));
        assert_eq!(brute_force_adjacency(&[(0, a), (1, b)]), vec![(0, 1)]);
        assert!(brute_force_adjacency(&[(0, a), (1, corner)]).is_empty());
    }

    #[test]
    fn far_blocks_are_not_neighbors() {
        // A 3x3-ish arrangement: opposite corner blocks share nothing.
        let mut pts = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                pts.push(p(i as f64, j as f64));
            }
        }
        let t = Abvh::build(&pts, 1).unwrap();
        let nb = t.neighbors().pair_set();
        let first = t.leaf_points(0)[0];
        let last = t.leaf_points(t.leaf_count() - 1)[0];
        assert_eq!((first.x, first.y), (0.0, 0.0));
        assert_eq!((last.x, last.y), (3.0, 3.0));
        assert!(!nb.contains(&(0, t.leaf_count() - 1)));
    }

    #[test]
    fn points_multiset_preserved() {
        let pts = random_points(777, 3);
        let t = Abvh::build(&pts, 10).unwrap();
        let mut a: Vec<_> = pts.iter().map(Point::key).collect();
        let mut b: Vec<_> = (0..t.leaf_count())
            .flat_map(|blk| t.leaf_points(blk).iter().map(Point::key))
            .collect();
        a.sort_unstable();
        b.sort_unstable();
        assert_eq!(a, b);
    }

    #[test]
    fn unlink_keeps_lists_consistent() {
        let pts = random_points(200, 11);
        let mut t = Abvh::build(&pts, 5).unwrap();
        let leaf = t.leaves()[3];
        let sids: Vec<_> = t.segments_of(leaf).collect();
        let middle = sids[sids.len() / 2];
        t.unlink(leaf, middle);
        let after: Vec<_> = t.segments_of(leaf).collect();
        assert_eq!(after.len(), sids.len() - 1);
        assert!(!after.contains(&middle));
        assert_eq!(t.node(leaf).segment_count(), after.len());
    }
}
