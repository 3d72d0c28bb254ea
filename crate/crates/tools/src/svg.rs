//! Minimal standalone SVG line chart of median time against dof.

use std::fmt::Write as _;

use crate::bench::BenchResult;
use crate::format::fmt_g;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 80.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_Y: f64 = 40.0;
const COLORS: [&str; 10] = [
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22",
    "#17becf",
];

/// One polyline per (quantity, method) series.
pub fn line_chart(results: &[BenchResult]) -> String {
    let mut sorted = results.to_vec();
    sorted.sort_by_key(|r| (r.quantity, r.method, r.dof));
    let x_max = sorted.iter().map(|r| r.dof).max().unwrap_or(1) as f64;
    let x_min = sorted.iter().map(|r| r.dof).min().unwrap_or(0) as f64;
    let y_max = sorted.iter().map(|r| r.median_ns).fold(0.0, f64::max).max(1.0);
    let x_span = (x_max - x_min).max(1.0);
    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - 2.0 * MARGIN_Y;
    let px = |dof: f64| MARGIN_LEFT + (dof - x_min) / x_span * plot_w;
    let py = |ns: f64| HEIGHT - MARGIN_Y - ns / y_max * plot_h;

    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" font-family="sans-serif" font-size="12">"#
    )
    .unwrap();
    writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#).unwrap();
    let (x0, y0, x1, y1) = (MARGIN_LEFT, HEIGHT - MARGIN_Y, WIDTH - MARGIN_RIGHT, MARGIN_Y);
    writeln!(
        svg,
        r#"<path d="M{x0},{y1} L{x0},{y0} L{x1},{y0}" stroke="black" fill="none"/>"#
    )
    .unwrap();
    for i in 0..=4 {
        let frac = i as f64 / 4.0;
        let (dof, ns) = (x_min + frac * x_span, frac * y_max);
        let (tx, ty) = (px(dof), py(ns));
        writeln!(
            svg,
            r#"<text x="{tx}" y="{}" text-anchor="middle">{}</text>"#,
            y0 + 16.0,
            fmt_g(dof.round())
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#,
            x0 - 6.0,
            ty + 4.0,
            fmt_g((ns * 10.0).round() / 10.0)
        )
        .unwrap();
    }
    writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">dof</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 6.0
    )
    .unwrap();
    writeln!(
        svg,
        r#"<text x="14" y="{}" transform="rotate(-90 14 {})" text-anchor="middle">median ns</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();

    for (k, series) in sorted
        .chunk_by(|a, b| (a.quantity, a.method) == (b.quantity, b.method))
        .enumerate()
    {
        let color = COLORS[k % COLORS.len()];
        let points: Vec<String> = series
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.dof as f64), py(r.median_ns)))
            .collect();
        writeln!(
            svg,
            r#"<polyline points="{}" stroke="{color}" stroke-width="2" fill="none"/>"#,
            points.join(" ")
        )
        .unwrap();
        let ly = MARGIN_Y + 18.0 * k as f64;
        writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            x1 + 12.0,
            x1 + 32.0
        )
        .unwrap();
        writeln!(
            svg,
            r#"<text x="{}" y="{}">{}/{}</text>"#,
            x1 + 38.0,
            ly + 4.0,
            series[0].quantity,
            series[0].method
        )
        .unwrap();
    }
    svg.push_str("</svg>\n");
    svg
}
