//! Minimal SVG export for polygons and ellipses.

use std::fmt::Write;

use super::ellipse::Ellipse;
use super::polygon::ConvexPolygon;
use crate::Point;

/// One drawable item.
pub enum Shape<'a> {
    Polygon(&'a ConvexPolygon, &'a str),
    Ellipse(&'a Ellipse, &'a str),
    Points(&'a [Point], &'a str),
}

/// Render shapes into a standalone SVG document (y axis pointing up).
pub fn to_svg(shapes: &[Shape<'_>], size_px: f64) -> String {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    let mut grow = |p: Point| {
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    };
    for s in shapes {
        match s {
            Shape::Polygon(p, _) => p.vertices().iter().for_each(|v| grow(*v)),
            Shape::Ellipse(e, _) => (0..64).for_each(|k| grow(e.point_at(k as f64 / 64.0 * std::f64::consts::TAU))),
            Shape::Points(ps, _) => ps.iter().for_each(|v| grow(*v)),
        }
    }
    if !lo.x.is_finite() {
        lo = Point::new(-1.0, -1.0);
        hi = Point::new(1.0, 1.0);
    }
    let span = (hi - lo).max().max(1e-12);
    let pad = 0.05 * span;
    let scale = size_px / (span + 2.0 * pad);
    let tx = |p: Point| ((p.x - lo.x + pad) * scale, (hi.y - p.y + pad) * scale);
    let stroke = 1.0;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{0:.0}" height="{0:.0}" viewBox="0 0 {0:.3} {0:.3}">"#,
        size_px
    );
    for s in shapes {
        match s {
            Shape::Polygon(p, color) => {
                let pts: Vec<String> = p
                    .vertices()
                    .iter()
                    .map(|v| {
                        let (x, y) = tx(*v);
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"  <polygon points="{}" fill="none" stroke="{color}" stroke-width="{stroke}"/>"#,
                    pts.join(" ")
                );
            }
            Shape::Ellipse(e, color) => {
                let pts: Vec<String> = (0..128)
                    .map(|k| {
                        let (x, y) = tx(e.point_at(k as f64 / 128.0 * std::f64::consts::TAU));
                        format!("{x:.3},{y:.3}")
                    })
                    .collect();
                let _ = writeln!(
                    out,
                    r#"  <polygon points="{}" fill="none" stroke="{color}" stroke-dasharray="4 2" stroke-width="{stroke}"/>"#,
                    pts.join(" ")
                );
            }
            Shape::Points(ps, color) => {
                for p in ps.iter() {
                    let (x, y) = tx(*p);
                    let _ = writeln!(out, r#"  <circle cx="{x:.3}" cy="{y:.3}" r="1.5" fill="{color}"/>"#);
                }
            }
        }
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polygon() {
        let sq = ConvexPolygon::from_box(Point::new(0.0, 0.0), Point::new(1.0, 1.0));
        let s = to_svg(&[Shape::Polygon(&sq, "black")], 200.0);
        assert!(s.starts_with("<svg"));
        assert!(s.contains("<polygon"));
        assert!(s.trim_end().ends_with("</svg>"));
    }
}
