use std::fmt::Write;

use super::polygon::NewtonPolygon;
use crate::equation::NormalizedEquation;
use crate::series::rat::{fmt_rat, to_f64};

const UNIT: f64 = 60.0;
const MARGIN: f64 = 50.0;

/// Static SVG of the polygon: shaded `N₀`, labeled vertices, `Λ₀` points in
/// black and `Λ₁` points in red with an arrow of length `d` down to the boundary.
pub fn render_svg(norm: &NormalizedEquation, poly: &NewtonPolygon) -> String {
    let m = poly.m();
    let max_a = norm
        .lambda_all
        .iter()
        .map(|q| q.alpha)
        .chain(poly.vertices.iter().map(|v| v.1))
        .max()
        .unwrap_or(0);
    let (w_units, h_units) = ((m + 1) as f64, (max_a + 1) as f64);
    let width = w_units * UNIT + 2.0 * MARGIN;
    let height = h_units * UNIT + 2.0 * MARGIN;
    let px = |j: f64| MARGIN + j * UNIT;
    let py = |a: f64| height - MARGIN - a * UNIT;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(
        s,
        r#"<defs><marker id="arr" markerWidth="8" markerHeight="8" refX="4" refY="4" orient="auto"><path d="M0,0 L8,4 L0,8 z" fill="crimson"/></marker></defs>"#
    );

    // N₀ clipped to the viewport
    let mut pts = vec![(0.0, 0.0), (m as f64, 0.0)];
    pts.extend(poly.vertices.iter().skip(1).map(|&(j, a)| (j as f64, a as f64)));
    let last = *poly.vertices.last().expect("nonempty");
    pts.push((0.0, last.1 as f64));
    let path: Vec<String> = pts.iter().map(|&(j, a)| format!("{:.1},{:.1}", px(j), py(a))).collect();
    let _ = writeln!(
        s,
        r#"<polygon points="{}" fill="steelblue" fill-opacity="0.25" stroke="steelblue" stroke-width="2"/>"#,
        path.join(" ")
    );

    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(0.0),
        py(0.0),
        px(w_units),
        py(0.0)
    );
    let _ = writeln!(
        s,
        r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        px(0.0),
        py(0.0),
        px(0.0),
        py(h_units)
    );
    let _ = writeln!(s, r#"<text x="{}" y="{}">j</text>"#, px(w_units) + 6.0, py(0.0) + 4.0);
    let _ = writeln!(s, r#"<text x="{}" y="{}">α</text>"#, px(0.0) - 4.0, py(h_units) - 8.0);
    for j in 0..=m {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="middle">{j}</text>"#, px(j as f64), py(0.0) + 16.0);
    }
    for a in 0..=max_a {
        let _ = writeln!(s, r#"<text x="{}" y="{}" text-anchor="end">{a}</text>"#, px(0.0) - 6.0, py(a as f64) + 4.0);
    }

    for &(j, a) in &poly.vertices {
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="5" fill="steelblue"/><text x="{}" y="{}">({j},{a})</text>"#,
            px(j as f64),
            py(a as f64),
            px(j as f64) + 7.0,
            py(a as f64) - 7.0
        );
    }
    for q in &norm.lambda0 {
        let _ = writeln!(
            s,
            r#"<circle cx="{}" cy="{}" r="3" fill="black"/>"#,
            px(q.j as f64),
            py(q.alpha as f64)
        );
    }
    for q in &norm.lambda1 {
        let (x, y) = (px(q.j as f64), py(q.alpha as f64));
        let _ = writeln!(s, r#"<circle cx="{x}" cy="{y}" r="4" fill="crimson"/>"#);
        if let Ok(d) = poly.distance_d(*q) {
            let df = to_f64(&d);
            if df > 0.0 {
                let _ = writeln!(
                    s,
                    r#"<line x1="{x}" y1="{y}" x2="{x}" y2="{}" stroke="crimson" stroke-dasharray="4,3" marker-end="url(#arr)"/><text x="{}" y="{}" fill="crimson">d={}</text>"#,
                    py(q.alpha as f64 - df) - 4.0,
                    x + 6.0,
                    y + UNIT * df / 2.0,
                    fmt_rat(&d)
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}
