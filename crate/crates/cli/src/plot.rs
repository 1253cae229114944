//! Minimal static SVG plots of snapshots.

use std::fmt::Write as _;

use degensemi_core::grid::TensorGrid;

const WIDTH: f64 = 480.0;
const HEIGHT: f64 = 320.0;
const PAD: f64 = 40.0;

fn range(v: &[f64]) -> (f64, f64) {
    let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi - lo < 1e-12 {
        (lo - 0.5, hi + 0.5)
    } else {
        (lo, hi)
    }
}

fn open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\">\n\
         <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{PAD}\" y=\"20\" font-family=\"sans-serif\" font-size=\"13\">{title}</text>\n"
    )
}

/// Polyline of `u` against `x` with the value range printed on the axis.
pub fn line(x: &[f64], u: &[f64], title: &str) -> String {
    let (x0, x1) = range(x);
    let (u0, u1) = range(u);
    let sx = |v: f64| PAD + (v - x0) / (x1 - x0) * (WIDTH - 2.0 * PAD);
    let sy = |v: f64| HEIGHT - PAD - (v - u0) / (u1 - u0) * (HEIGHT - 2.0 * PAD);
    let mut svg = open(title);
    let _ = writeln!(
        svg,
        "<rect x=\"{PAD}\" y=\"{PAD}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"#888\"/>",
        WIDTH - 2.0 * PAD,
        HEIGHT - 2.0 * PAD
    );
    let points: Vec<String> = x.iter().zip(u).map(|(&a, &b)| format!("{:.2},{:.2}", sx(a), sy(b))).collect();
    let _ = writeln!(svg, "<polyline fill=\"none\" stroke=\"#1f4e9c\" stroke-width=\"1.5\" points=\"{}\"/>", points.join(" "));
    let _ = writeln!(
        svg,
        "<text x=\"4\" y=\"{}\" font-size=\"10\">{u1:.3}</text><text x=\"4\" y=\"{}\" font-size=\"10\">{u0:.3}</text>",
        PAD + 4.0,
        HEIGHT - PAD
    );
    svg.push_str("</svg>\n");
    svg
}

/// Cells coloured from blue (minimum) to red (maximum); first axis vertical.
pub fn heatmap(grid: &TensorGrid, u: &[f64], title: &str) -> String {
    let (lo, hi) = range(u);
    let (ex, ey) = (grid.axis(1).edge(), grid.axis(0).edge());
    let sx = |v: f64| PAD + v / ex * (WIDTH - 2.0 * PAD);
    let sy = |v: f64| HEIGHT - PAD - v / ey * (HEIGHT - 2.0 * PAD);
    let mut svg = open(title);
    let (xs, ys) = (grid.axis(1).nodes(), grid.axis(0).nodes());
    // Each node owns the cell between the midpoints to its neighbours.
    let cell = |nodes: &[f64], j: usize| {
        let a = if j == 0 { nodes[0] } else { 0.5 * (nodes[j - 1] + nodes[j]) };
        let b = if j + 1 == nodes.len() { nodes[j] } else { 0.5 * (nodes[j] + nodes[j + 1]) };
        (a, b)
    };
    for (i, _) in ys.iter().enumerate() {
        let (ya, yb) = cell(ys, i);
        for (j, _) in xs.iter().enumerate() {
            let (xa, xb) = cell(xs, j);
            let s = (u[grid.flat(&[i, j])] - lo) / (hi - lo);
            let (r, b) = ((255.0 * s).round() as u8, (255.0 * (1.0 - s)).round() as u8);
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"rgb({r},64,{b})\"/>",
                sx(xa),
                sy(yb),
                sx(xb) - sx(xa),
                sy(ya) - sy(yb)
            );
        }
    }
    let _ = writeln!(svg, "<text x=\"{PAD}\" y=\"{}\" font-size=\"10\">range [{lo:.3}, {hi:.3}]</text>", HEIGHT - 12.0);
    svg.push_str("</svg>\n");
    svg
}
