//! SVG drawings of solved states.

use std::f64::consts::PI;
use std::fmt::Write as _;

use crate::contour::{Boundary, ContourError, VortexContourCoeffs};
use crate::io::StateFile;

const CANVAS: f64 = 640.0;

/// Stroke colour for position `t ∈ [0, 1]` in the Ω ordering: black at the
/// smallest Ω, red at the largest.
pub fn ramp(t: f64) -> String {
    let r = (255.0 * t.clamp(0.0, 1.0)).round() as u8;
    format!("#{r:02x}0000")
}

fn closed_path(coeffs: &VortexContourCoeffs, boundary: Boundary, samples: usize, scale: f64) -> String {
    let mut d = String::new();
    for j in 0..samples {
        let z = coeffs.point(boundary, 2.0 * PI * j as f64 / samples as f64);
        let (x, y) = (CANVAS / 2.0 + scale * z.re, CANVAS / 2.0 - scale * z.im);
        let _ = write!(d, "{}{x:.3},{y:.3} ", if j == 0 { "M" } else { "L" });
    }
    d.push('Z');
    d
}

/// Both boundaries of every state, resampled at `samples` points per curve
/// and drawn in Ω order on a square canvas.
pub fn render_svg(states: &[StateFile], samples: usize) -> Result<String, ContourError> {
    let samples = samples.max(8);
    let mut items: Vec<(f64, VortexContourCoeffs)> =
        states.iter().map(|s| Ok((s.omega, s.coeffs()?))).collect::<Result<_, ContourError>>()?;
    items.sort_by(|a, b| a.0.total_cmp(&b.0));

    let extent = items
        .iter()
        .flat_map(|(_, c)| (0..samples).map(move |j| c.point(Boundary::Outer, 2.0 * PI * j as f64 / samples as f64).norm()))
        .fold(1.0f64, f64::max);
    let scale = 0.42 * CANVAS / extent;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{CANVAS}" height="{CANVAS}" viewBox="0 0 {CANVAS} {CANVAS}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let n = items.len();
    for (i, (omega, c)) in items.iter().enumerate() {
        let colour = ramp(if n > 1 { i as f64 / (n - 1) as f64 } else { 0.0 });
        let _ = writeln!(svg, r#"<g stroke="{colour}" fill="none" stroke-width="1.2"><title>Ω = {omega}</title>"#);
        for boundary in [Boundary::Outer, Boundary::Inner] {
            let _ = writeln!(svg, r#"<path class="{boundary}" d="{}"/>"#, closed_path(c, boundary, samples, scale));
        }
        let _ = writeln!(svg, "</g>");
    }
    if let (Some(first), Some(last)) = (items.first(), items.last()) {
        let (b, m) = (first.1.b, first.1.fold);
        let _ = writeln!(
            svg,
            r#"<text x="12" y="22" font-family="sans-serif" font-size="14">b = {b}, m = {m}</text>"#
        );
        let legend = if n > 1 {
            format!("Ω = {} (black) to {} (red), {n} states", first.0, last.0)
        } else {
            format!("Ω = {}", first.0)
        };
        let _ = writeln!(
            svg,
            r#"<text x="12" y="42" font-family="sans-serif" font-size="14">{legend}</text>"#
        );
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}
