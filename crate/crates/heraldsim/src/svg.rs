//! Native SVG figures: tile heatmaps and the feasibility contour.

use std::fmt::Write as _;

use heraldsim_core::TileStatus;

use crate::tables::TileRow;

const INSIGNIFICANT_FILL: &str = "#ffffff";
const UNCERTIFIABLE_FILL: &str = "#d9d9d9";
const GRID_STROKE: &str = "#9a9a9a";

/// Quantity shown by a heatmap.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    /// Best certified success probability, log color scale.
    Probability,
    /// `⟨m|ρ|m⟩` at the best squeezing, linear color scale.
    Fidelity,
}

impl Metric {
    fn label(self) -> &'static str {
        match self {
            Metric::Probability => "log10 success probability",
            Metric::Fidelity => "fidelity",
        }
    }

    fn value(self, row: &TileRow) -> Option<f64> {
        match self {
            Metric::Probability => row.best_probability.filter(|p| *p > 0.0).map(f64::log10),
            Metric::Fidelity => row.fidelity,
        }
    }
}

const VIRIDIS: [(f64, f64, f64); 5] = [
    (68.0, 1.0, 84.0),
    (59.0, 82.0, 139.0),
    (33.0, 145.0, 140.0),
    (94.0, 201.0, 98.0),
    (253.0, 231.0, 37.0),
];

fn color(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let pos = t * (VIRIDIS.len() - 1) as f64;
    let i = (pos.floor() as usize).min(VIRIDIS.len() - 2);
    let f = pos - i as f64;
    let (a, b) = (VIRIDIS[i], VIRIDIS[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn distinct_sorted(values: impl Iterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Positions of at most `max` evenly spread labels among `count` ticks.
fn label_stride(count: usize, max: usize) -> usize {
    count.div_ceil(max).max(1)
}

/// Heatmap of one metric with heralding loss across and characterization
/// loss upward. Insignificant tiles are white, uncertifiable tiles grey.
pub fn heatmap_svg(rows: &[TileRow], metric: Metric, title: &str) -> String {
    let xs = distinct_sorted(rows.iter().map(|r| r.loss1));
    let ys = distinct_sorted(rows.iter().map(|r| r.loss2));
    let values: Vec<f64> = rows.iter().filter_map(|r| metric.value(r)).collect();
    let (lo, hi) = match metric {
        Metric::Probability => {
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (-5.0, if hi.is_finite() { hi.max(-4.0).ceil() } else { 0.0 })
        }
        Metric::Fidelity => (0.0, 1.0),
    };

    let (left, top, plot_w, plot_h) = (70.0, 40.0, 480.0, 480.0);
    let cell_w = plot_w / xs.len().max(1) as f64;
    let cell_h = plot_h / ys.len().max(1) as f64;
    let width = left + plot_w + 150.0;
    let height = top + plot_h + 60.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"##,
        left + plot_w / 2.0,
        escape(title)
    );

    for row in rows {
        let (Some(ix), Some(iy)) = (
            xs.iter().position(|&v| v == row.loss1),
            ys.iter().position(|&v| v == row.loss2),
        ) else {
            continue;
        };
        let fill = match (row.status, metric.value(row)) {
            (TileStatus::Insignificant, _) => INSIGNIFICANT_FILL.to_string(),
            (TileStatus::Certified, Some(v)) => color((v - lo) / (hi - lo)),
            _ => UNCERTIFIABLE_FILL.to_string(),
        };
        let x = left + ix as f64 * cell_w;
        let y = top + plot_h - (iy + 1) as f64 * cell_h;
        let _ = writeln!(
            s,
            r##"<rect x="{x:.2}" y="{y:.2}" width="{cell_w:.2}" height="{cell_h:.2}" fill="{fill}" stroke="{GRID_STROKE}" stroke-width="0.5"><title>loss1={} loss2={} {}</title></rect>"##,
            row.loss1,
            row.loss2,
            row.status.as_str()
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );

    let stride = label_stride(xs.len(), 10);
    for (i, v) in xs.iter().enumerate().filter(|(i, _)| i % stride == 0) {
        let x = left + (i as f64 + 0.5) * cell_w;
        let _ = writeln!(
            s,
            r##"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"##,
            top + plot_h + 16.0,
            fmt_tick(*v)
        );
    }
    let stride = label_stride(ys.len(), 12);
    for (i, v) in ys.iter().enumerate().filter(|(i, _)| i % stride == 0) {
        let y = top + plot_h - (i as f64 + 0.5) * cell_h + 4.0;
        let _ = writeln!(
            s,
            r##"<text x="{}" y="{y:.2}" text-anchor="end">{}</text>"##,
            left - 6.0,
            fmt_tick(*v)
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle">heralding loss</text>"##,
        left + plot_w / 2.0,
        top + plot_h + 40.0
    );
    let _ = writeln!(
        s,
        r##"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">characterization loss</text>"##,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );

    // color bar
    let (bar_x, bar_w, bar_h) = (left + plot_w + 30.0, 18.0, 300.0);
    let steps = 50;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let y = top + bar_h - (k + 1) as f64 * bar_h / steps as f64;
        let _ = writeln!(
            s,
            r##"<rect x="{bar_x}" y="{y:.2}" width="{bar_w}" height="{:.2}" fill="{}"/>"##,
            bar_h / steps as f64 + 0.5,
            color(t)
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{bar_x}" y="{top}" width="{bar_w}" height="{bar_h}" fill="none" stroke="#000000"/>"##
    );
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}">{}</text>"##,
        bar_x + bar_w + 4.0,
        top + 4.0,
        fmt_tick(hi)
    );
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}">{}</text>"##,
        bar_x + bar_w + 4.0,
        top + bar_h + 4.0,
        fmt_tick(lo)
    );
    let _ = writeln!(
        s,
        r##"<text x="{bar_x}" y="{}" font-size="10">{}</text>"##,
        top + bar_h + 22.0,
        metric.label()
    );
    for (k, (fill, label)) in [(UNCERTIFIABLE_FILL, "uncertifiable"), (INSIGNIFICANT_FILL, "P < 1e-5")]
        .iter()
        .enumerate()
    {
        let y = top + bar_h + 40.0 + k as f64 * 22.0;
        let _ = writeln!(
            s,
            r##"<rect x="{bar_x}" y="{y}" width="{bar_w}" height="14" fill="{fill}" stroke="{GRID_STROKE}"/><text x="{}" y="{}">{label}</text>"##,
            bar_x + bar_w + 4.0,
            y + 11.0
        );
    }
    s.push_str("</svg>\n");
    s
}

fn fmt_tick(v: f64) -> String {
    let r = (v * 1e6).round() / 1e6;
    format!("{r}")
}

/// Line chart of the maximal tolerable characterization loss against
/// heralding loss. Columns without a feasible tile break the line.
pub fn contour_svg(boundary: &[(f64, Option<f64>)], title: &str) -> String {
    let (left, top, plot_w, plot_h) = (70.0, 40.0, 480.0, 320.0);
    let width = left + plot_w + 30.0;
    let height = top + plot_h + 60.0;
    let x_max = boundary.iter().map(|b| b.0).fold(0.0, f64::max).max(1e-3);
    let y_max = boundary.iter().filter_map(|b| b.1).fold(0.0, f64::max).max(1e-3) * 1.1;
    let px = |x: f64| left + x / x_max * plot_w;
    let py = |y: f64| top + plot_h - y / y_max * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"##
    );
    let _ = writeln!(s, r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(
        s,
        r##"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"##,
        left + plot_w / 2.0,
        escape(title)
    );
    let _ = writeln!(
        s,
        r##"<rect x="{left}" y="{top}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );
    for k in 0..=5 {
        let (xv, yv) = (x_max * k as f64 / 5.0, y_max * k as f64 / 5.0);
        let _ = writeln!(
            s,
            r##"<text x="{:.2}" y="{}" text-anchor="middle">{}</text><text x="{}" y="{:.2}" text-anchor="end">{}</text>"##,
            px(xv),
            top + plot_h + 16.0,
            fmt_tick(xv),
            left - 6.0,
            py(yv) + 4.0,
            fmt_tick(yv)
        );
    }
    let _ = writeln!(
        s,
        r##"<text x="{}" y="{}" text-anchor="middle">heralding loss</text>"##,
        left + plot_w / 2.0,
        top + plot_h + 40.0
    );
    let _ = writeln!(
        s,
        r##"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">max characterization loss</text>"##,
        top + plot_h / 2.0,
        top + plot_h / 2.0
    );

    let mut segments: Vec<Vec<(f64, f64)>> = vec![Vec::new()];
    for &(x, y) in boundary {
        match y {
            Some(y) => segments.last_mut().map(|seg| seg.push((px(x), py(y)))).unwrap_or(()),
            None => segments.push(Vec::new()),
        }
    }
    for seg in segments.iter().filter(|seg| !seg.is_empty()) {
        let points: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
        let _ = writeln!(
            s,
            r##"<polyline points="{}" fill="none" stroke="#21918c" stroke-width="2"/>"##,
            points.join(" ")
        );
        for (x, y) in seg {
            let _ = writeln!(s, r##"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="#21918c"/>"##);
        }
    }
    s.push_str("</svg>\n");
    s
}
