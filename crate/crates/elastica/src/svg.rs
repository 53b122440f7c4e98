//! Overlay plots of curve snapshots, coloured violet (early) to red (late).

use std::fmt::Write as _;

use elastica_core::{DiscreteCurve, Vec2};

const WIDTH: f64 = 800.0;
const MARGIN: f64 = 0.05;

/// Fully saturated HSV colour as `#rrggbb`, hue in degrees.
fn hue_to_hex(hue: f64) -> String {
    let v = 0.85;
    let h = (hue.rem_euclid(360.0)) / 60.0;
    let x = v * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (v, x, 0.0),
        1 => (x, v, 0.0),
        2 => (0.0, v, x),
        3 => (0.0, x, v),
        4 => (x, 0.0, v),
        _ => (v, 0.0, x),
    };
    let byte = |c: f64| (c * 255.0).round() as u8;
    format!("#{:02x}{:02x}{:02x}", byte(r), byte(g), byte(b))
}

/// Render every `stride`-th curve, starting with the first.
pub fn render(curves: &[&DiscreteCurve], stride: usize) -> String {
    let stride = stride.max(1);
    let shown: Vec<&DiscreteCurve> = curves.iter().step_by(stride).copied().collect();

    let (mut lo, mut hi) = (
        Vec2::new(f64::INFINITY, f64::INFINITY),
        Vec2::new(f64::NEG_INFINITY, f64::NEG_INFINITY),
    );
    for p in shown.iter().flat_map(|c| c.points()) {
        lo = Vec2::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Vec2::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    if shown.is_empty() {
        lo = Vec2::ZERO;
        hi = Vec2::new(1.0, 1.0);
    }
    let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-12);
    let pad = MARGIN * span;
    let (x0, y0) = (lo.x - pad, -(hi.y + pad));
    let (w, h) = (hi.x - lo.x + 2.0 * pad, hi.y - lo.y + 2.0 * pad);
    let height = (WIDTH * h / w).round().max(1.0);
    let stroke = span / 400.0;

    let mut s = String::new();
    writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="{x0:.6} {y0:.6} {w:.6} {h:.6}">"#
    )
    .unwrap();
    writeln!(
        s,
        r#"<rect x="{x0:.6}" y="{y0:.6}" width="{w:.6}" height="{h:.6}" fill="white"/>"#
    )
    .unwrap();
    let last = shown.len().saturating_sub(1).max(1) as f64;
    for (k, c) in shown.iter().enumerate() {
        let hue = 270.0 * (1.0 - k as f64 / last);
        let pts: Vec<String> = c
            .points()
            .iter()
            .map(|p| format!("{:.6},{:.6}", p.x, -p.y))
            .collect();
        writeln!(
            s,
            r#"<polyline fill="none" stroke="{}" stroke-width="{stroke:.6}" points="{}"/>"#,
            hue_to_hex(hue),
            pts.join(" ")
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}

/// Split `curves` into three consecutive, nearly equal parts and render each.
pub fn render_phases(curves: &[&DiscreteCurve], stride: usize) -> [String; 3] {
    let n = curves.len();
    let cut = |k: usize| (k * n).div_ceil(3);
    [0, 1, 2].map(|k| render(&curves[cut(k)..cut(k + 1)], stride))
}
