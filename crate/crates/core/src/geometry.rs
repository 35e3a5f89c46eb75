//! Planar primitives: points, axis-aligned regions, the L1 metric, the Hanan
//! grid and rectilinear trees.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::dsu::DisjointSets;
use crate::error::{Error, Result};

/// Relative tolerance used for every length comparison in the crate.
pub const LENGTH_RTOL: f64 = 1e-9;

/// `true` when `a` and `b` agree within [`LENGTH_RTOL`] relative to the larger magnitude.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= LENGTH_RTOL * a.abs().max(b.abs()).max(1.0)
}

/// `a <= b` up to [`LENGTH_RTOL`].
pub fn approx_le(a: f64, b: f64) -> bool {
    a <= b || approx_eq(a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn try_new(x: f64, y: f64) -> Result<Self> {
        if x.is_finite() && y.is_finite() {
            Ok(Self { x, y })
        } else {
            Err(Error::NonFinite { x, y })
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn coord(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
        }
    }

    /// Lexicographic (x, then y) total order.
    pub fn lex_cmp(&self, other: &Point) -> Ordering {
        self.x
            .total_cmp(&other.x)
            .then_with(|| self.y.total_cmp(&other.y))
    }

    /// Hashable identity for exact coincidence; `-0.0` and `0.0` collapse.
    pub fn key(&self) -> (u64, u64) {
        ((self.x + 0.0).to_bits(), (self.y + 0.0).to_bits())
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Coordinate axis. A cut "on X" is a vertical line `x = c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Axis {
    X,
    Y,
}

impl Axis {
    pub fn other(self) -> Axis {
        match self {
            Axis::X => Axis::Y,
            Axis::Y => Axis::X,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegionBox {
    pub lo: Point,
    pub hi: Point,
}

impl RegionBox {
    pub fn new(lo: Point, hi: Point) -> Self {
        debug_assert!(lo.x <= hi.x && lo.y <= hi.y, "inverted region");
        Self { lo, hi }
    }

    /// Tight bounding box of a nonempty point set.
    pub fn bounding(points: &[Point]) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptyInput)?;
        let (mut lo, mut hi) = (*first, *first);
        for p in &points[1..] {
            lo.x = lo.x.min(p.x);
            lo.y = lo.y.min(p.y);
            hi.x = hi.x.max(p.x);
            hi.y = hi.y.max(p.y);
        }
        Ok(Self { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi.x - self.lo.x
    }

    pub fn height(&self) -> f64 {
        self.hi.y - self.lo.y
    }

    pub fn extent(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.width(),
            Axis::Y => self.height(),
        }
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn lo_on(&self, axis: Axis) -> f64 {
        self.lo.coord(axis)
    }

    pub fn hi_on(&self, axis: Axis) -> f64 {
        self.hi.coord(axis)
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.lo.x <= p.x && p.x <= self.hi.x && self.lo.y <= p.y && p.y <= self.hi.y
    }

    /// Splits at `c` along `axis` into the lower and upper halves.
    pub fn cut(&self, axis: Axis, c: f64) -> (RegionBox, RegionBox) {
        let (mut left, mut right) = (*self, *self);
        match axis {
            Axis::X => {
                left.hi.x = c;
                right.lo.x = c;
            }
            Axis::Y => {
                left.hi.y = c;
                right.lo.y = c;
            }
        }
        (left, right)
    }

    /// Area of the intersection of the two closed boxes.
    pub fn overlap_area(&self, other: &RegionBox) -> f64 {
        let w = self.hi.x.min(other.hi.x) - self.lo.x.max(other.lo.x);
        let h = self.hi.y.min(other.hi.y) - self.lo.y.max(other.lo.y);
        if w > 0.0 && h > 0.0 {
            w * h
        } else {
            0.0
        }
    }
}

/// Manhattan distance.
pub fn l1(p: Point, q: Point) -> f64 {
    (p.x - q.x).abs() + (p.y - q.y).abs()
}

/// Half perimeter of the bounding box: a lower bound on any rectilinear tree
/// spanning `points`.
pub fn half_perimeter(points: &[Point]) -> Result<f64> {
    let bb = RegionBox::bounding(points)?;
    Ok(bb.width() + bb.height())
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.map(|c| c + 0.0).collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Cartesian product of the distinct x and y coordinates, in lexicographic order.
pub fn hanan_grid(points: &[Point]) -> Result<Vec<Point>> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let xs = distinct_sorted(points.iter().map(|p| p.x));
    let ys = distinct_sorted(points.iter().map(|p| p.y));
    Ok(xs
        .iter()
        .flat_map(|&x| ys.iter().map(move |&y| Point::new(x, y)))
        .collect())
}

/// Sorts lexicographically and drops exact duplicates.
pub fn canonical_points(points: &[Point]) -> Vec<Point> {
    let mut v = points.to_vec();
    v.sort_by(Point::lex_cmp);
    v.dedup_by(|a, b| a.key() == b.key());
    v
}

/// Removes exact duplicates, keeping first occurrences in input order.
pub fn dedup_stable(points: &[Point]) -> Vec<Point> {
    let mut seen = std::collections::HashSet::with_capacity(points.len());
    points.iter().copied().filter(|p| seen.insert(p.key())).collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RectEdge {
    pub a: Point,
    pub b: Point,
}

impl RectEdge {
    pub fn new(a: Point, b: Point) -> Self {
        Self { a, b }
    }

    pub fn is_axis_aligned(&self) -> bool {
        self.a.x == self.b.x || self.a.y == self.b.y
    }

    pub fn length(&self) -> f64 {
        l1(self.a, self.b)
    }
}

/// Rectilinear embedding of the connection `first -> second`: up to two edges
/// meeting at the corner `(first.x, second.y)`.
pub fn l_path(first: Point, second: Point) -> Vec<RectEdge> {
    let corner = Point::new(first.x, second.y);
    let mut out = Vec::with_capacity(2);
    if corner.key() != first.key() {
        out.push(RectEdge::new(first, corner));
    }
    if corner.key() != second.key() {
        out.push(RectEdge::new(corner, second));
    }
    out
}

/// Terminals, Steiner vertices and axis-aligned edges. Vertices connect only
/// at exactly coincident endpoints.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RectilinearTree {
    pub terminals: Vec<Point>,
    pub steiner: Vec<Point>,
    pub edges: Vec<RectEdge>,
    pub length: f64,
}

impl RectilinearTree {
    /// Builds a tree from its edges. Steiner vertices are the edge endpoints
    /// that are not terminals; the length is recomputed.
    pub fn from_edges(terminals: Vec<Point>, edges: Vec<RectEdge>) -> Self {
        let term_keys: std::collections::HashSet<_> = terminals.iter().map(Point::key).collect();
        let mut steiner = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for e in &edges {
            for p in [e.a, e.b] {
                if !term_keys.contains(&p.key()) && seen.insert(p.key()) {
                    steiner.push(p);
                }
            }
        }
        steiner.sort_by(Point::lex_cmp);
        let length = tree_length(&edges);
        Self {
            terminals,
            steiner,
            edges,
            length,
        }
    }

    /// Every vertex: terminals followed by Steiner points.
    pub fn vertices(&self) -> impl Iterator<Item = Point> + '_ {
        self.terminals.iter().chain(self.steiner.iter()).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.terminals.len() + self.steiner.len()
    }
}

/// Sum of L1 edge lengths. Overlapping edges each count.
pub fn tree_length(edges: &[RectEdge]) -> f64 {
    edges.iter().map(RectEdge::length).sum()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    NotAxisAligned { edge: usize },
    ZeroLengthEdge { edge: usize },
    NonFinite { edge: usize },
    Disconnected { components: usize },
    MissingTerminal(Point),
    DanglingSteiner(Point),
    LengthMismatch { stored: f64, computed: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NotAxisAligned { edge } => write!(f, "edge {edge} is not axis-aligned"),
            Violation::ZeroLengthEdge { edge } => write!(f, "edge {edge} has zero length"),
            Violation::NonFinite { edge } => write!(f, "edge {edge} has a non-finite endpoint"),
            Violation::Disconnected { components } => {
                write!(f, "endpoint graph has {components} components")
            }
            Violation::MissingTerminal(p) => write!(f, "terminal {p} is not spanned"),
            Violation::DanglingSteiner(p) => write!(f, "steiner point {p} touches no edge"),
            Violation::LengthMismatch { stored, computed } => {
                write!(f, "stored length {stored} differs from edge sum {computed}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks `tree` against the rectilinear tree invariants and that it spans `terminals`.
pub fn validate_tree(tree: &RectilinearTree, terminals: &[Point]) -> ValidationReport {
    let mut violations = Vec::new();

    let mut ids: HashMap<(u64, u64), usize> = HashMap::new();
    let mut id_of = |p: Point| {
        let n = ids.len();
        *ids.entry(p.key()).or_insert(n)
    };
    let mut pairs = Vec::with_capacity(tree.edges.len());
    for (i, e) in tree.edges.iter().enumerate() {
        if !(e.a.is_finite() && e.b.is_finite()) {
            violations.push(Violation::NonFinite { edge: i });
            continue;
        }
        if !e.is_axis_aligned() {
            violations.push(Violation::NotAxisAligned { edge: i });
        }
        if e.a.key() == e.b.key() {
            violations.push(Violation::ZeroLengthEdge { edge: i });
        }
        pairs.push((id_of(e.a), id_of(e.b)));
    }

    if !ids.is_empty() {
        let mut sets = DisjointSets::new(ids.len());
        for (a, b) in pairs {
            sets.union(a, b);
        }
        if sets.sets() > 1 {
            violations.push(Violation::Disconnected {
                components: sets.sets(),
            });
        }
    }

    let distinct_terminals: BTreeSet<(u64, u64)> = terminals.iter().map(Point::key).collect();
    if ids.is_empty() {
        // No edges: only a single distinct terminal can be spanned.
        if distinct_terminals.len() > 1 {
            for p in terminals.iter().skip(1) {
                if p.key() != terminals[0].key() {
                    violations.push(Violation::MissingTerminal(*p));
                }
            }
        }
    } else {
        let mut reported = BTreeSet::new();
        for p in terminals {
            if !ids.contains_key(&p.key()) && reported.insert(p.key()) {
                violations.push(Violation::MissingTerminal(*p));
            }
        }
    }

    for s in &tree.steiner {
        if !ids.contains_key(&s.key()) {
            violations.push(Violation::DanglingSteiner(*s));
        }
    }

    let computed = tree_length(&tree.edges);
    if !approx_eq(tree.length, computed) || !tree.length.is_finite() {
        violations.push(Violation::LengthMismatch {
            stored: tree.length,
            computed,
        });
    }

    ValidationReport { violations }
}
