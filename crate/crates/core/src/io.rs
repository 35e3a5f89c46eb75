//! Text formats: nets (`n` then `x y` lines, `#` comments) and edge lists
//! (`m` then `x1 y1 x2 y2` lines). The edge-list format is shared by tree
//! files and external solver replies.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::{Point, RectEdge, RectilinearTree};

/// Formats a float with 17 significant digits; parses back bit-exactly.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_err(source: &str, line: usize, reason: impl std::fmt::Display) -> Error {
    Error::Parse {
        path: source.to_string(),
        reason: format!("line {line}: {reason}"),
    }
}

/// Non-blank lines that are not `#` comments, with 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

fn parse_floats<const N: usize>(source: &str, line: usize, text: &str) -> Result<[f64; N]> {
    let mut out = [0.0; N];
    let mut fields = text.split_whitespace();
    for slot in &mut out {
        let field = fields
            .next()
            .ok_or_else(|| parse_err(source, line, format!("expected {N} numbers")))?;
        let v: f64 = field
            .parse()
            .map_err(|_| parse_err(source, line, format!("`{field}` is not a number")))?;
        if !v.is_finite() {
            return Err(parse_err(source, line, format!("`{field}` is not finite")));
        }
        *slot = v;
    }
    if fields.next().is_some() {
        return Err(parse_err(source, line, format!("expected {N} numbers")));
    }
    Ok(out)
}

fn parse_counted<const N: usize>(text: &str, source: &str) -> Result<Vec<[f64; N]>> {
    let mut lines = content_lines(text);
    let (line, header) = lines
        .next()
        .ok_or_else(|| parse_err(source, 1, "missing count line"))?;
    let count: usize = header
        .parse()
        .map_err(|_| parse_err(source, line, format!("`{header}` is not a count")))?;
    let mut rows = Vec::with_capacity(count);
    for (line, l) in lines {
        if rows.len() == count {
            return Err(parse_err(source, line, format!("more than {count} records")));
        }
        rows.push(parse_floats::<N>(source, line, l)?);
    }
    if rows.len() != count {
        return Err(Error::Parse {
            path: source.to_string(),
            reason: format!("expected {count} records, found {}", rows.len()),
        });
    }
    Ok(rows)
}

/// Parses net text. `source` names the input in errors.
pub fn parse_net(text: &str, source: &str) -> Result<Vec<Point>> {
    Ok(parse_counted::<2>(text, source)?
        .into_iter()
        .map(|[x, y]| Point::new(x, y))
        .collect())
}

/// Parses an edge list, rejecting edges that are not axis-aligned.
pub fn parse_edges(text: &str, source: &str) -> Result<Vec<RectEdge>> {
    let rows = parse_counted::<4>(text, source)?;
    let mut edges = Vec::with_capacity(rows.len());
    for (i, [x1, y1, x2, y2]) in rows.into_iter().enumerate() {
        let e = RectEdge::new(Point::new(x1, y1), Point::new(x2, y2));
        if !e.is_axis_aligned() {
            return Err(Error::Parse {
                path: source.to_string(),
                reason: format!("edge {} is not axis-aligned", i + 1),
            });
        }
        edges.push(e);
    }
    Ok(edges)
}

/// Net text; also the external solver request.
pub fn format_points(points: &[Point]) -> String {
    let mut s = String::with_capacity(points.len() * 48 + 8);
    let _ = writeln!(s, "{}", points.len());
    for p in points {
        let _ = writeln!(s, "{} {}", fmt_f64(p.x), fmt_f64(p.y));
    }
    s
}

/// Edge-list text; also the external solver reply.
pub fn format_edges(edges: &[RectEdge]) -> String {
    let mut s = String::with_capacity(edges.len() * 96 + 8);
    let _ = writeln!(s, "{}", edges.len());
    for e in edges {
        let _ = writeln!(
            s,
            "{} {} {} {}",
            fmt_f64(e.a.x),
            fmt_f64(e.a.y),
            fmt_f64(e.b.x),
            fmt_f64(e.b.y)
        );
    }
    s
}

pub fn read_net(path: &Path) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_net(&text, &path.display().to_string())
}

pub fn write_net(path: &Path, points: &[Point]) -> Result<()> {
    fs::write(path, format_points(points)).map_err(|e| Error::io(path, e))
}

pub fn read_tree(path: &Path, terminals: &[Point]) -> Result<RectilinearTree> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let edges = parse_edges(&text, &path.display().to_string())?;
    Ok(RectilinearTree::from_edges(terminals.to_vec(), edges))
}

pub fn write_tree(path: &Path, tree: &RectilinearTree) -> Result<()> {
    fs::write(path, format_edges(&tree.edges)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn net_with_comments() {
        let text = "# a net\n3\n0 0\n# mid\n1.5 2\n-1 1e-3\n";
        let pts = parse_net(text, "t").unwrap();
        assert_eq!(pts, vec![Point::new(0.0, 0.0), Point::new(1.5, 2.0), Point::new(-1.0, 1e-3)]);
    }

    #[test]
    fn net_errors() {
        assert!(parse_net("", "t").is_err());
        assert!(parse_net("2\n0 0\n", "t").is_err());
        assert!(parse_net("1\n0 0\n1 1\n", "t").is_err());
        assert!(parse_net("1\n0 x\n", "t").is_err());
        assert!(parse_net("1\n0 inf\n", "t").is_err());
        assert!(parse_net("1\n0 0 0\n", "t").is_err());
        let err = parse_net("two\n", "nets/a.net").unwrap_err().to_string();
        assert!(err.contains("nets/a.net"), "{err}");
    }

    #[test]
    fn edges_reject_diagonals() {
        assert!(parse_edges("1\n0 0 1 1\n", "t").is_err());
        let e = parse_edges("2\n0 0 1 0\n1 0 1 2\n", "t").unwrap();
        assert_eq!(e.len(), 2);
    }

    #[test]
    fn at_least_nine_significant_digits() {
        let s = fmt_f64(0.5);
        let mantissa = s.split('e').next().unwrap().replace(['.', '-'], "");
        assert!(mantissa.len() >= 9, "{s}");
    }

    proptest! {
        #[test]
        fn points_round_trip_bit_exact(v in prop::collection::vec((-1e6..1e6f64, -1e6..1e6f64), 0..20)) {
            let pts: Vec<Point> = v.into_iter().map(|(x, y)| Point::new(x, y)).collect();
            let back = parse_net(&format_points(&pts), "t").unwrap();
            prop_assert_eq!(pts, back);
        }
    }
}
