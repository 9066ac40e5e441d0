//! Static SVG scatter plots of circle-valued coordinates.

use std::f64::consts::{PI, TAU};
use std::fmt::Write;

const SIZE: f64 = 600.0;
const MARGIN: f64 = 20.0;

/// Hue wheel: `−π` and `π` map to the same color.
fn cyclic_color(angle: f64) -> String {
    let h = ((angle + PI) / TAU).rem_euclid(1.0) * 6.0;
    let x = 1.0 - ((h % 2.0) - 1.0).abs();
    let (r, g, b) = match h as u32 {
        0 => (1.0, x, 0.0),
        1 => (x, 1.0, 0.0),
        2 => (0.0, 1.0, x),
        3 => (0.0, x, 1.0),
        4 => (x, 0.0, 1.0),
        _ => (1.0, 0.0, x),
    };
    let c = |v: f64| (v * 215.0 + 20.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", c(r), c(g), c(b))
}

/// Scatter of `xy` colored by angle (gray where uncovered) with the
/// landmarks drawn as dark rings.
pub fn scatter(xy: &[(f64, f64)], angles: &[Option<f64>], landmarks: &[usize], title: &str) -> String {
    let (mut xmin, mut xmax, mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in xy {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let span = (xmax - xmin).max(ymax - ymin).max(1e-12);
    let inner = SIZE - 2.0 * MARGIN;
    let project = |(x, y): (f64, f64)| {
        (
            MARGIN + (x - xmin) / span * inner,
            SIZE - MARGIN - (y - ymin) / span * inner,
        )
    };

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(out, "<title>{}</title>", escape(title));
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    for (p, a) in xy.iter().zip(angles) {
        let (cx, cy) = project(*p);
        let fill = a.map(cyclic_color).unwrap_or_else(|| "#b0b0b0".into());
        let _ = writeln!(out, r#"<circle cx="{cx:.2}" cy="{cy:.2}" r="3" fill="{fill}"/>"#);
    }
    for &l in landmarks {
        if let Some(&p) = xy.get(l) {
            let (cx, cy) = project(p);
            let _ = writeln!(
                out,
                r##"<circle cx="{cx:.2}" cy="{cy:.2}" r="6" fill="none" stroke="#202020" stroke-width="1.5"/>"##
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
