//! Plain SVG: polygon outlines and trajectory pieces colored by level.

use std::fmt::Write as _;

use flatcover::surface::TranslationSurface;

pub struct Piece {
    pub from: (f64, f64),
    pub to: (f64, f64),
    pub level: i64,
}

fn ramp(level: i64, lo: i64, hi: i64) -> String {
    let t = if hi > lo { (level - lo) as f64 / (hi - lo) as f64 } else { 0.5 };
    // blue through green to red
    let r = (255.0 * t).round() as u8;
    let g = (255.0 * (1.0 - (2.0 * t - 1.0).abs())).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}{g:02x}{b:02x}")
}

pub fn render(surface: &TranslationSurface, pieces: &[Piece]) -> String {
    let polys: Vec<Vec<(f64, f64)>> =
        surface.polygons().iter().map(|p| p.vertices().iter().map(|v| v.to_f64()).collect()).collect();
    let pts = polys.iter().flatten();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for &(x, y) in pts {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    let pad = 0.05 * (x1 - x0).max(y1 - y0);
    let scale = 600.0 / ((x1 - x0).max(y1 - y0) + 2.0 * pad);
    let map = |(x, y): (f64, f64)| ((x - x0 + pad) * scale, (y1 - y + pad) * scale);
    let w = (x1 - x0 + 2.0 * pad) * scale;
    let h = (y1 - y0 + 2.0 * pad) * scale;

    let mut s = String::new();
    writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w:.1}" height="{h:.1}" viewBox="0 0 {w:.1} {h:.1}">"#).unwrap();
    for (i, poly) in polys.iter().enumerate() {
        let coords: Vec<String> = poly.iter().map(|&p| map(p)).map(|(x, y)| format!("{x:.3},{y:.3}")).collect();
        writeln!(s, r##"<polygon points="{}" fill="#f4f4f4" stroke="#333" stroke-width="1"/>"##, coords.join(" ")).unwrap();
        let n = poly.len() as f64;
        let c = poly.iter().fold((0.0, 0.0), |a, p| (a.0 + p.0 / n, a.1 + p.1 / n));
        let (cx, cy) = map(c);
        writeln!(s, r##"<text x="{cx:.3}" y="{cy:.3}" font-size="12" fill="#999">{i}</text>"##).unwrap();
    }
    let lo = pieces.iter().map(|p| p.level).min().unwrap_or(0);
    let hi = pieces.iter().map(|p| p.level).max().unwrap_or(0);
    for p in pieces {
        let (ax, ay) = map(p.from);
        let (bx, by) = map(p.to);
        writeln!(
            s,
            r#"<line x1="{ax:.3}" y1="{ay:.3}" x2="{bx:.3}" y2="{by:.3}" stroke="{}" stroke-width="1.2"/>"#,
            ramp(p.level, lo, hi)
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
