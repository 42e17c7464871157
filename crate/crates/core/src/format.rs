//! Line-oriented surface files.
//!
//! ```text
//! FIELD -2 0 1 ; 1 2
//! POLYGON
//! 0 , 0
//! 1 , 0
//! 1 + r , r
//! END
//! GLUE 0.0 <-> 1.2
//! MARK 0
//! CYCLE w
//! 0.0 : 1
//! END
//! ```
//!
//! `FIELD` lists the minimal polynomial from the constant term up, then the
//! root interval. Coordinates are element literals. `MARK` names regular
//! vertex classes to mark. Cycle rows give an oriented edge and its weight.
//! Blank lines and `#` comments are ignored.

use std::fmt::Write as _;

use thiserror::Error;

use crate::numfield::{format_rational, parse_rational, Field, FieldError, PlanarVector};
use crate::surface::{build_surface, EdgeRef, Polygon, RelativeCycle, SurfaceError, TranslationSurface};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error(transparent)]
    Surface(#[from] SurfaceError),
    #[error("no cycle named {0:?}")]
    UnknownCycle(String),
}

#[derive(Clone, Debug)]
pub struct SurfaceFile {
    pub surface: TranslationSurface,
    pub cycles: Vec<(String, RelativeCycle)>,
}

impl SurfaceFile {
    pub fn cycle(&self, name: &str) -> Result<&RelativeCycle, FormatError> {
        self.cycles.iter().find(|(n, _)| n == name).map(|(_, w)| w).ok_or_else(|| FormatError::UnknownCycle(name.to_string()))
    }
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn parse_edge(s: &str, line: usize) -> Result<EdgeRef, FormatError> {
    let (p, e) = s.trim().split_once('.').ok_or_else(|| syntax(line, format!("bad edge reference {s:?}")))?;
    let p = p.trim().parse().map_err(|_| syntax(line, format!("bad polygon index in {s:?}")))?;
    let e = e.trim().parse().map_err(|_| syntax(line, format!("bad edge index in {s:?}")))?;
    Ok(EdgeRef::new(p, e))
}

pub fn parse_surface(text: &str) -> Result<SurfaceFile, FormatError> {
    enum Block {
        None,
        Polygon(Vec<PlanarVector>),
        Cycle(String, Vec<(EdgeRef, i64)>),
    }
    let mut field: Option<Field> = None;
    let mut polygons = Vec::new();
    let mut glue = Vec::new();
    let mut marks = Vec::new();
    let mut raw_cycles: Vec<(String, Vec<(EdgeRef, i64)>)> = Vec::new();
    let mut block = Block::None;
    for (idx, raw) in text.lines().enumerate() {
        let ln = idx + 1;
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let (head, rest) = match line.split_once(char::is_whitespace) {
            Some((h, r)) => (h, r.trim()),
            None => (line, ""),
        };
        match &mut block {
            Block::Polygon(verts) => {
                if line == "END" {
                    polygons.push(Polygon::new(std::mem::take(verts)));
                    block = Block::None;
                    continue;
                }
                let f = field.as_ref().ok_or_else(|| syntax(ln, "POLYGON before FIELD"))?;
                let (x, y) = line.split_once(',').ok_or_else(|| syntax(ln, "vertex must be `x , y`"))?;
                verts.push(PlanarVector::new(f.parse(x)?, f.parse(y)?));
                continue;
            }
            Block::Cycle(name, rows) => {
                if line == "END" {
                    raw_cycles.push((std::mem::take(name), std::mem::take(rows)));
                    block = Block::None;
                    continue;
                }
                let (e, w) = line.split_once(':').ok_or_else(|| syntax(ln, "cycle row must be `p.e : weight`"))?;
                let w: i64 = w.trim().parse().map_err(|_| syntax(ln, "bad weight"))?;
                rows.push((parse_edge(e, ln)?, w));
                continue;
            }
            Block::None => {}
        }
        match head {
            "FIELD" => {
                let (poly, iv) = rest.split_once(';').ok_or_else(|| syntax(ln, "FIELD needs `coeffs ; lo hi`"))?;
                let coeffs: Result<Vec<i64>, _> = poly.split_whitespace().map(str::parse).collect();
                let coeffs = coeffs.map_err(|_| syntax(ln, "bad polynomial coefficient"))?;
                let ends: Vec<&str> = iv.split_whitespace().collect();
                if ends.len() != 2 {
                    return Err(syntax(ln, "root interval needs two rationals"));
                }
                let lo = parse_rational(ends[0]).ok_or_else(|| syntax(ln, "bad interval endpoint"))?;
                let hi = parse_rational(ends[1]).ok_or_else(|| syntax(ln, "bad interval endpoint"))?;
                field = Some(Field::new(&coeffs, (lo, hi))?);
            }
            "POLYGON" => block = Block::Polygon(Vec::new()),
            "GLUE" => {
                let (a, b) = rest.split_once("<->").ok_or_else(|| syntax(ln, "GLUE needs `p.e <-> q.f`"))?;
                glue.push((parse_edge(a, ln)?, parse_edge(b, ln)?));
            }
            "MARK" => {
                for t in rest.split_whitespace() {
                    marks.push(t.parse().map_err(|_| syntax(ln, "bad vertex class id"))?);
                }
            }
            "CYCLE" => {
                if rest.is_empty() {
                    return Err(syntax(ln, "CYCLE needs a name"));
                }
                block = Block::Cycle(rest.to_string(), Vec::new());
            }
            other => return Err(syntax(ln, format!("unknown directive {other:?}"))),
        }
    }
    if !matches!(block, Block::None) {
        return Err(syntax(text.lines().count(), "unterminated block"));
    }
    let surface = build_surface(polygons, &glue, &marks)?;
    let mut cycles = Vec::new();
    for (name, rows) in raw_cycles {
        for (e, _) in &rows {
            if e.polygon >= surface.polygons().len() || e.edge >= surface.polygon(e.polygon).len() {
                return Err(FormatError::Surface(SurfaceError::BadGluing(format!("cycle {name} uses unknown edge {e}"))));
            }
        }
        cycles.push((name, surface.cycle_from_edges(&rows)));
    }
    Ok(SurfaceFile { surface, cycles })
}

/// Canonical text: parse followed by serialize reproduces it byte for byte.
pub fn serialize_surface(surface: &TranslationSurface, cycles: &[(String, RelativeCycle)]) -> String {
    let mut out = String::new();
    let f = surface.field();
    let poly: Vec<String> = f.min_poly().iter().map(|c| c.to_string()).collect();
    let (lo, hi) = f.root_interval();
    writeln!(out, "FIELD {} ; {} {}", poly.join(" "), format_rational(lo), format_rational(hi)).unwrap();
    for p in surface.polygons() {
        out.push_str("POLYGON\n");
        for v in p.vertices() {
            writeln!(out, "{} , {}", v.x, v.y).unwrap();
        }
        out.push_str("END\n");
    }
    for (a, b) in surface.gluing_pairs() {
        writeln!(out, "GLUE {a} <-> {b}").unwrap();
    }
    let marks = surface.extra_marks();
    if !marks.is_empty() {
        let ids: Vec<String> = marks.iter().map(|m| m.to_string()).collect();
        writeln!(out, "MARK {}", ids.join(" ")).unwrap();
    }
    for (name, w) in cycles {
        writeln!(out, "CYCLE {name}").unwrap();
        for (&c, &a) in w.weights() {
            writeln!(out, "{} : {}", surface.canonical_edge(c), a).unwrap();
        }
        out.push_str("END\n");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const TORUS: &str = "\
# unit square torus
FIELD 0 1 ; 0 0
POLYGON
0 , 0
1 , 0
1 , 1
0 , 1
END
GLUE 0.0 <-> 0.2
GLUE 0.1 <-> 0.3
MARK 0
CYCLE h
0.2 : -1
END
";

    #[test]
    fn parse_and_round_trip() {
        let sf = parse_surface(TORUS).unwrap();
        assert_eq!(sf.surface.genus(), 1);
        let w = sf.cycle("h").unwrap();
        assert_eq!(sf.surface.holonomy(w), PlanarVector::from_ints(sf.surface.field(), 1, 0));
        let text = serialize_surface(&sf.surface, &sf.cycles);
        let again = parse_surface(&text).unwrap();
        assert_eq!(serialize_surface(&again.surface, &again.cycles), text);
        assert!(sf.cycle("nope").is_err());
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let bad = TORUS.replace("GLUE 0.1 <-> 0.3", "GLUE 0.1 -- 0.3");
        match parse_surface(&bad) {
            Err(FormatError::Syntax { line, .. }) => assert_eq!(line, 10),
            other => panic!("unexpected {other:?}"),
        }
        let dangling = TORUS.replace("GLUE 0.1 <-> 0.3\n", "");
        assert!(matches!(parse_surface(&dangling), Err(FormatError::Surface(SurfaceError::DanglingEdge(_)))));
    }
}
