//! Static SVG 1.1 figures: a partition view (leaf regions and segments) and
//! a solution view (block regions, block subtrees, connectors, terminals).

use std::fmt::Write as _;

use crate::abvh::Abvh;
use crate::geometry::{Point, RectEdge, RegionBox};
use crate::pipeline::Solution;

const SIZE: f64 = 800.0;
const MARGIN: f64 = 20.0;

/// Maps world coordinates onto the canvas, y pointing up.
struct Canvas {
    bounds: RegionBox,
    scale: f64,
    body: String,
}

impl Canvas {
    fn new(bounds: RegionBox) -> Self {
        let span = bounds.width().max(bounds.height());
        let scale = if span > 0.0 { (SIZE - 2.0 * MARGIN) / span } else { 1.0 };
        Self {
            bounds,
            scale,
            body: String::new(),
        }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        (
            MARGIN + (p.x - self.bounds.lo.x) * self.scale,
            SIZE - MARGIN - (p.y - self.bounds.lo.y) * self.scale,
        )
    }

    fn rect(&mut self, r: &RegionBox, style: &str) {
        let (x0, y1) = self.map(r.lo);
        let (x1, y0) = self.map(r.hi);
        let _ = writeln!(
            self.body,
            r#"<rect x="{x0:.3}" y="{y0:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
            x1 - x0,
            y1 - y0
        );
    }

    fn line(&mut self, a: Point, b: Point, style: &str) {
        let (x1, y1) = self.map(a);
        let (x2, y2) = self.map(b);
        let _ = writeln!(
            self.body,
            r#"<line x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"#
        );
    }

    fn dot(&mut self, p: Point, r: f64, style: &str) {
        let (cx, cy) = self.map(p);
        let _ = writeln!(self.body, r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r}" {style}/>"#);
    }

    fn group(&mut self, id: &str, f: impl FnOnce(&mut Self)) {
        let _ = writeln!(self.body, r#"<g id="{id}">"#);
        f(self);
        self.body.push_str("</g>\n");
    }

    fn finish(self) -> String {
        format!(
            concat!(
                r#"<?xml version="1.0" encoding="UTF-8"?>"#,
                "\n",
                r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{s}" height="{s}" viewBox="0 0 {s} {s}">"#,
                "\n",
                r#"<rect width="100%" height="100%" fill="white"/>"#,
                "\n{body}</svg>\n"
            ),
            s = SIZE,
            body = self.body
        )
    }
}

fn segment_ends(s: &crate::abvh::Segment) -> (Point, Point) {
    match s.orientation {
        crate::abvh::Orientation::Horizontal => {
            (Point::new(s.span.0, s.coord), Point::new(s.span.1, s.coord))
        }
        crate::abvh::Orientation::Vertical => {
            (Point::new(s.coord, s.span.0), Point::new(s.coord, s.span.1))
        }
    }
}

/// Leaf regions, interior segments (blue), outer segments (black) and points.
pub fn partition_svg(abvh: &Abvh) -> String {
    let mut c = Canvas::new(abvh.root_region());
    c.group("blocks", |c| {
        for b in 0..abvh.leaf_count() {
            c.rect(&abvh.leaf_region(b), r##"fill="#f4f4f4" stroke="none""##);
        }
    });
    c.group("segments", |c| {
        for s in abvh.all_segments() {
            let (a, b) = segment_ends(s);
            let style = if s.back.is_nil() || s.front.is_nil() {
                r#"stroke="black" stroke-width="2""#
            } else {
                r#"stroke="steelblue" stroke-width="1.5""#
            };
            c.line(a, b, style);
        }
    });
    c.group("points", |c| {
        for p in abvh.points() {
            c.dot(*p, 2.0, r#"fill="black""#);
        }
    });
    c.finish()
}

/// Block regions (dashed), block subtrees (black), connectors (red) and terminals.
pub fn solution_svg(solution: &Solution) -> String {
    let mut c = Canvas::new(solution.abvh.root_region());
    c.group("blocks", |c| {
        for b in 0..solution.abvh.leaf_count() {
            c.rect(
                &solution.abvh.leaf_region(b),
                r##"fill="none" stroke="#999999" stroke-dasharray="4 3""##,
            );
        }
    });
    c.group("subtrees", |c| {
        for t in &solution.block_trees {
            for e in &t.edges {
                c.line(e.a, e.b, r#"stroke="black" stroke-width="1.2""#);
            }
        }
    });
    c.group("connectors", |c| {
        for RectEdge { a, b } in &solution.stitching.connectors {
            c.line(*a, *b, r#"stroke="crimson" stroke-width="2""#);
        }
    });
    c.group("terminals", |c| {
        for p in &solution.tree.terminals {
            c.dot(*p, 2.5, r#"fill="black""#);
        }
    });
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::{run_detailed, PipelineConfig};
    use crate::solvers::SolverSpec;

    #[test]
    fn partition_figure_has_one_rect_per_leaf() {
        let pts = [
            Point::new(0.0, 0.0),
            Point::new(0.0, 1.0),
            Point::new(1.0, 0.0),
            Point::new(1.0, 1.0),
        ];
        let t = Abvh::build(&pts, 2).unwrap();
        let svg = partition_svg(&t);
        assert!(svg.starts_with("<?xml"));
        assert!(svg.contains(r#"version="1.1""#));
        // Background plus two leaves.
        assert_eq!(svg.matches("<rect").count(), 3);
        assert_eq!(svg.matches("steelblue").count(), 1);
        assert_eq!(svg.matches("<circle").count(), 4);
        assert!(svg.trim_end().ends_with("</svg>"));
    }

    #[test]
    fn solution_figure_separates_layers() {
        let pts: Vec<Point> = (0..12)
            .map(|i| Point::new((i % 4) as f64, (i / 4) as f64 * 0.7))
            .collect();
        let sol = run_detailed(&pts, &PipelineConfig::new(SolverSpec::Rmst, 3)).unwrap();
        let svg = solution_svg(&sol);
        for id in ["blocks", "subtrees", "connectors", "terminals"] {
            assert!(svg.contains(&format!(r#"<g id="{id}">"#)));
        }
        assert_eq!(svg.matches("crimson").count(), sol.stitching.connectors.len());
    }

    #[test]
    fn degenerate_bounds_do_not_divide_by_zero() {
        let t = Abvh::build(&[Point::new(0.5, 0.5)], 1).unwrap();
        assert!(!partition_svg(&t).contains("NaN"));
    }
}
