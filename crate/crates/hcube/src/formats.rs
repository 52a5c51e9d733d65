//! Text formats for point sets (`"N n"` header) and polytopes (`"q n"`
//! header). One point per line as space-separated base-10 integers; blank
//! lines are ignored.

use std::collections::BTreeSet;

use hcube_core::toric::{LatticePolytope, ToricError};
use hcube_core::{GridParams, PointSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("empty file")]
    Empty,
    #[error("line {line}: {msg}")]
    Line { line: usize, msg: String },
    #[error("line {line}: duplicate point")]
    Duplicate { line: usize },
    #[error(transparent)]
    Polytope(#[from] ToricError),
}

fn line_err(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Line {
        line,
        msg: msg.into(),
    }
}

fn numbered(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_header(line: usize, s: &str) -> Result<(u32, u32), FormatError> {
    let parts: Vec<&str> = s.split_whitespace().collect();
    if parts.len() != 2 {
        return Err(line_err(line, "header must be two integers"));
    }
    let a = parts[0]
        .parse()
        .map_err(|_| line_err(line, "bad header integer"))?;
    let b = parts[1]
        .parse()
        .map_err(|_| line_err(line, "bad header integer"))?;
    Ok((a, b))
}

fn parse_row<T: std::str::FromStr>(line: usize, s: &str, dim: u32) -> Result<Vec<T>, FormatError> {
    let row: Vec<T> = s
        .split_whitespace()
        .map(|t| {
            t.parse()
                .map_err(|_| line_err(line, format!("bad integer {t:?}")))
        })
        .collect::<Result<_, _>>()?;
    if row.len() != dim as usize {
        return Err(line_err(
            line,
            format!("expected {dim} coordinates, got {}", row.len()),
        ));
    }
    Ok(row)
}

pub fn parse_point_set(text: &str) -> Result<PointSet, FormatError> {
    let mut lines = numbered(text);
    let (hl, header) = lines.next().ok_or(FormatError::Empty)?;
    let (base, dim) = parse_header(hl, header)?;
    let grid = GridParams::new(base, dim).map_err(|e| line_err(hl, e.to_string()))?;
    grid.require_materializable()
        .map_err(|e| line_err(hl, e.to_string()))?;
    let mut set = PointSet::empty(grid);
    for (ln, l) in lines {
        let row: Vec<u32> = parse_row(ln, l, dim)?;
        let idx = grid
            .index_of(&row)
            .map_err(|e| line_err(ln, e.to_string()))?;
        if !set.insert(idx) {
            return Err(FormatError::Duplicate { line: ln });
        }
    }
    Ok(set)
}

/// Points in lexicographic coordinate order.
pub fn write_point_set(set: &PointSet) -> String {
    let grid = set.grid();
    let mut out = format!("{} {}\n", grid.base(), grid.dim());
    for (p, _) in set.lex_sorted() {
        let row: Vec<String> = p.iter().map(u32::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_polytope(text: &str) -> Result<(u32, LatticePolytope), FormatError> {
    let mut lines = numbered(text);
    let (hl, header) = lines.next().ok_or(FormatError::Empty)?;
    let (q, dim) = parse_header(hl, header)?;
    let mut seen = BTreeSet::new();
    let mut vertices = Vec::new();
    for (ln, l) in lines {
        let row: Vec<i64> = parse_row(ln, l, dim)?;
        if !seen.insert(row.clone()) {
            return Err(FormatError::Duplicate { line: ln });
        }
        vertices.push(row);
    }
    if vertices.is_empty() {
        return Err(line_err(hl, "polytope needs at least one vertex"));
    }
    Ok((q, LatticePolytope::new(vertices)?))
}

pub fn write_polytope(q: u32, polytope: &LatticePolytope) -> String {
    let mut out = format!("{} {}\n", q, polytope.dim());
    for v in polytope.vertices() {
        let row: Vec<String> = v.iter().map(i64::to_string).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_set_round_trip() {
        let text = "3 2\n0 0\n2 1\n1 2\n";
        let s = parse_point_set(text).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(write_point_set(&s), "3 2\n0 0\n1 2\n2 1\n");
        assert_eq!(parse_point_set(&write_point_set(&s)).unwrap(), s);
    }

    #[test]
    fn point_set_errors() {
        assert_eq!(parse_point_set(""), Err(FormatError::Empty));
        assert_eq!(
            parse_point_set("2 2\n0 1\n0 1\n"),
            Err(FormatError::Duplicate { line: 3 })
        );
        assert!(matches!(
            parse_point_set("2 2\n0 2\n"),
            Err(FormatError::Line { line: 2, .. })
        ));
        assert!(matches!(
            parse_point_set("2 2\n0\n"),
            Err(FormatError::Line { line: 2, .. })
        ));
        assert!(matches!(
            parse_point_set("2\n"),
            Err(FormatError::Line { line: 1, .. })
        ));
        assert!(matches!(
            parse_point_set("1 2\n"),
            Err(FormatError::Line { line: 1, .. })
        ));
        assert!(matches!(
            parse_point_set("2 2\n0 x\n"),
            Err(FormatError::Line { line: 2, .. })
        ));
    }

    #[test]
    fn polytope_round_trip() {
        let (q, p) = parse_polytope("5 1\n0\n2\n").unwrap();
        assert_eq!(q, 5);
        assert_eq!(p.lattice_points().len(), 3);
        assert_eq!(write_polytope(q, &p), "5 1\n0\n2\n");
        assert!(parse_polytope("5 1\n").is_err());
        assert!(parse_polytope("5 1\n0\n0\n").is_err());
    }
}
