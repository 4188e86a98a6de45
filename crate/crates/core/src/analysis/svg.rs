//! Minimal standalone SVG charts for the analysis outputs.

use std::fmt::Write;

use super::changes::ChangeStats;
use super::metrics::{MetricKind, MetricPrior, MetricReport};

const FONT: &str = "font-family=\"sans-serif\" font-size=\"11\"";

fn open(width: f64, height: f64) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" \
         viewBox=\"0 0 {width} {height}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    )
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Bar chart of `counts` with one label per bar.
pub fn histogram_svg(title: &str, labels: &[String], counts: &[u64]) -> String {
    let (w, h, pad) = (640.0, 320.0, 40.0);
    let mut s = open(w, h);
    let max = counts.iter().copied().max().unwrap_or(0).max(1) as f64;
    let bar = (w - 2.0 * pad) / counts.len().max(1) as f64;
    let _ = writeln!(s, "<text x=\"{}\" y=\"20\" {FONT} text-anchor=\"middle\">{}</text>", w / 2.0, escape(title));
    let _ = writeln!(
        s,
        "<line x1=\"{pad}\" y1=\"{0}\" x2=\"{1}\" y2=\"{0}\" stroke=\"black\"/>",
        h - pad,
        w - pad
    );
    let every = (counts.len() / 10).max(1);
    for (i, &c) in counts.iter().enumerate() {
        let bh = (h - 2.0 * pad) * c as f64 / max;
        let x = pad + i as f64 * bar;
        let _ = writeln!(
            s,
            "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{bh:.2}\" fill=\"steelblue\"><title>{}: {c}</title></rect>",
            h - pad - bh,
            (bar - 1.0).max(0.5),
            escape(&labels[i])
        );
        if i % every == 0 {
            let _ = writeln!(
                s,
                "<text x=\"{:.2}\" y=\"{}\" {FONT} text-anchor=\"middle\">{}</text>",
                x + bar / 2.0,
                h - pad + 14.0,
                escape(&labels[i])
            );
        }
    }
    let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" {FONT}>{}</text>", 4.0, pad, max as u64);
    s.push_str("</svg>\n");
    s
}

/// Grey-scale heatmap of a square count matrix, `matrix[row][col]`, rows
/// drawn top to bottom.
pub fn heatmap_svg(title: &str, matrix: &[Vec<u64>]) -> String {
    let n = matrix.len().max(1);
    let cell = 12.0;
    let pad = 40.0;
    let side = cell * n as f64;
    let mut s = open(side + 2.0 * pad, side + 2.0 * pad);
    let max = matrix.iter().flatten().copied().max().unwrap_or(0).max(1) as f64;
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"20\" {FONT} text-anchor=\"middle\">{}</text>",
        pad + side / 2.0,
        escape(title)
    );
    for (i, row) in matrix.iter().enumerate() {
        for (j, &c) in row.iter().enumerate() {
            if c == 0 {
                continue;
            }
            // Log scale keeps the diagonal from washing out everything else.
            let shade = 255.0 * (1.0 - (1.0 + c as f64).ln() / (1.0 + max).ln());
            let g = shade.round() as u8;
            let _ = writeln!(
                s,
                "<rect x=\"{:.1}\" y=\"{:.1}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({g},{g},{g})\"><title>{i}-&gt;{j}: {c}</title></rect>",
                pad + j as f64 * cell,
                pad + i as f64 * cell
            );
        }
    }
    let _ = writeln!(
        s,
        "<rect x=\"{pad}\" y=\"{pad}\" width=\"{side}\" height=\"{side}\" fill=\"none\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" {FONT} text-anchor=\"middle\">next</text>",
        pad + side / 2.0,
        side + pad + 16.0
    );
    let _ = writeln!(s, "<text x=\"4\" y=\"{}\" {FONT}>prev</text>", pad + side / 2.0);
    s.push_str("</svg>\n");
    s
}

pub fn change_histogram_svg(stats: &ChangeStats) -> String {
    let e = stats.endowment as i64;
    let labels: Vec<String> = (-e..=e).map(|d| d.to_string()).collect();
    histogram_svg("Change in contribution", &labels, &stats.delta_histogram)
}

pub fn abs_change_histogram_svg(stats: &ChangeStats) -> String {
    let labels: Vec<String> = (0..stats.abs_histogram.len()).map(|d| d.to_string()).collect();
    histogram_svg("Absolute change in contribution", &labels, &stats.abs_histogram)
}

pub fn pairwise_heatmap_svg(stats: &ChangeStats) -> String {
    heatmap_svg("Pairwise changes", &stats.pairwise)
}

/// Metrics down the rows, priors across the columns, one line plot over
/// rounds per cell. Infinite values are left out and flagged in the cell.
pub fn metric_grid_svg(report: &MetricReport) -> String {
    let (cw, ch, pad) = (240.0, 170.0, 30.0);
    let metrics = MetricKind::TABLE;
    let priors = MetricPrior::ALL;
    let width = pad + cw * priors.len() as f64;
    let height = pad + ch * metrics.len() as f64;
    let mut s = open(width, height);
    for (c, prior) in priors.iter().enumerate() {
        let _ = writeln!(
            s,
            "<text x=\"{:.1}\" y=\"18\" {FONT} text-anchor=\"middle\">{prior}</text>",
            pad + cw * (c as f64 + 0.5)
        );
    }
    for (r, metric) in metrics.iter().enumerate() {
        let y0 = pad + ch * r as f64;
        let _ = writeln!(
            s,
            "<text x=\"12\" y=\"{:.1}\" {FONT} transform=\"rotate(-90 12 {:.1})\" text-anchor=\"middle\">{metric}</text>",
            y0 + ch / 2.0,
            y0 + ch / 2.0
        );
        for (c, prior) in priors.iter().enumerate() {
            let x0 = pad + cw * c as f64;
            let (px, py, pw, ph) = (x0 + 30.0, y0 + 10.0, cw - 45.0, ch - 35.0);
            let _ = writeln!(
                s,
                "<rect x=\"{px:.1}\" y=\"{py:.1}\" width=\"{pw:.1}\" height=\"{ph:.1}\" fill=\"none\" stroke=\"#888\"/>"
            );
            let series = report.series(*prior, *metric);
            let finite: Vec<(u32, f64)> = series.iter().copied().filter(|(_, v)| v.is_finite()).collect();
            if finite.len() < series.len() {
                let _ = writeln!(
                    s,
                    "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} fill=\"firebrick\">inf in {} rounds</text>",
                    px + 4.0,
                    py + 12.0,
                    series.len() - finite.len()
                );
            }
            if finite.is_empty() {
                continue;
            }
            let (t_min, t_max) = (finite[0].0 as f64, finite[finite.len() - 1].0 as f64);
            let v_max = finite.iter().map(|p| p.1).fold(0.0, f64::max);
            let v_top = if v_max > 0.0 { v_max } else { 1.0 };
            let span = (t_max - t_min).max(1.0);
            let points: Vec<String> = finite
                .iter()
                .map(|&(t, v)| {
                    format!(
                        "{:.2},{:.2}",
                        px + pw * (t as f64 - t_min) / span,
                        py + ph - ph * v / v_top
                    )
                })
                .collect();
            let _ = writeln!(
                s,
                "<polyline points=\"{}\" fill=\"none\" stroke=\"steelblue\" stroke-width=\"1.5\"/>",
                points.join(" ")
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} text-anchor=\"end\">{:.3}</text>",
                px - 2.0,
                py + 8.0,
                v_top
            );
            let _ = writeln!(
                s,
                "<text x=\"{:.1}\" y=\"{:.1}\" {FONT} text-anchor=\"middle\">round {}-{}</text>",
                px + pw / 2.0,
                py + ph + 14.0,
                t_min,
                t_max
            );
        }
    }
    s.push_str("</svg>\n");
    s
}
