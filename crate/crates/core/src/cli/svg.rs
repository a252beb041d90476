//! Static SVG picture of a report: the curve as a point cloud from sign
//! changes on a grid, and one labeled rectangle per singularity.

use std::fmt::Write;

use super::report::{parse_box, Report};
use crate::interval::{Box2, CompiledPoly};
use crate::topology::SingularityKind;

const SIZE: f64 = 600.0;
const GRID: usize = 300;

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

pub fn label(kind: SingularityKind, branches: u32) -> String {
    let k = match kind {
        SingularityKind::Node => "node",
        SingularityKind::OrdinaryCusp => "cusp",
    };
    format!("{k}/{branches}")
}

/// Renders `f = 0` over `viewport` with the report's singularity boxes.
pub fn emit_svg(report: &Report, f: &CompiledPoly, viewport: &Box2<f64>) -> String {
    let [(x0, x1), (y0, y1)] = viewport.to_f64_bounds();
    let (w, h) = (x1 - x0, y1 - y0);
    let px = |x: f64| (x - x0) / w * SIZE;
    let py = |y: f64| SIZE - (y - y0) / h * SIZE;
    let eval = f.instance::<f64>(53);
    let at = |i: usize, j: usize| {
        let x = x0 + w * i as f64 / GRID as f64;
        let y = y0 + h * j as f64 / GRID as f64;
        sign(eval.at_point(&[x, y]).mid())
    };
    let signs: Vec<Vec<i8>> = (0..=GRID).map(|i| (0..=GRID).map(|j| at(i, j)).collect()).collect();

    let mut out = String::new();
    let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#);
    let _ = writeln!(out, r#"<g class="curve" fill="black">"#);
    for i in 0..GRID {
        for j in 0..GRID {
            let s = signs[i][j];
            if s == 0 || s != signs[i + 1][j] || s != signs[i][j + 1] {
                let cx = px(x0 + w * (i as f64 + 0.5) / GRID as f64);
                let cy = py(y0 + h * (j as f64 + 0.5) / GRID as f64);
                let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="0.8"/>"#);
            }
        }
    }
    let _ = writeln!(out, "</g>");
    for s in &report.singularities {
        let Some(b) = parse_box(&s.bbox) else { continue };
        let [(bx0, bx1), (by0, by1)] = b.to_f64_bounds();
        if ![bx0, bx1, by0, by1].iter().all(|v| v.is_finite()) {
            continue;
        }
        // boxes are often far below a pixel; draw at least a few
        let (cx, cy) = (px((bx0 + bx1) / 2.0), py((by0 + by1) / 2.0));
        let rw = (px(bx1) - px(bx0)).max(6.0);
        let rh = (py(by0) - py(by1)).max(6.0);
        let color = match s.kind {
            SingularityKind::Node => "blue",
            SingularityKind::OrdinaryCusp => "red",
        };
        let _ = writeln!(
            out,
            r#"<rect class="singularity" x="{:.2}" y="{:.2}" width="{rw:.2}" height="{rh:.2}" fill="none" stroke="{color}"/>"#,
            cx - rw / 2.0,
            cy - rh / 2.0
        );
        let _ = writeln!(out, r#"<text x="{:.2}" y="{:.2}" fill="{color}" font-size="12">{}</text>"#, cx + rw / 2.0 + 2.0, cy - rh / 2.0 - 2.0, label(s.kind, s.branches));
    }
    out.push_str("</svg>\n");
    out
}
