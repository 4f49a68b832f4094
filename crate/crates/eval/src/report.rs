//! Report artifacts: per-sample CSV, summary JSON, and standalone SVG
//! charts. Everything is rendered with fixed formatting so re-running on
//! the same report produces byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::Result;
use crate::harness::EvalReport;

/// Write `results.csv`, `summary.json`, `dr_bars.svg`, `dr_box.svg`.
pub fn emit_report(report: &EvalReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("results.csv"), render_csv(report))?;
    std::fs::write(dir.join("summary.json"), render_summary(report)?)?;
    std::fs::write(dir.join("dr_bars.svg"), render_bar_chart(report))?;
    std::fs::write(dir.join("dr_box.svg"), render_box_plot(report))?;
    Ok(())
}

pub fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("method,image_id,attack,iteration,r,detected,psnr_after_attack\n");
    for row in &report.rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{:.9},{},{:.6}",
            row.method, row.image_id, row.attack, row.iteration, row.r, row.detected, row.psnr_after_attack
        );
    }
    out
}

pub fn render_summary(report: &EvalReport) -> Result<String> {
    #[derive(serde::Serialize)]
    struct Summary<'a> {
        config: &'a crate::harness::EvalConfig,
        method_means: &'a [crate::harness::MethodMean],
        cells: &'a [crate::harness::CellSummary],
        fpr: &'a [crate::harness::FprCell],
        comparisons: &'a [crate::harness::MethodComparison],
    }
    let summary = Summary {
        config: &report.config,
        method_means: &report.method_means,
        cells: &report.cells,
        fpr: &report.fpr,
        comparisons: &report.comparisons,
    };
    Ok(serde_json::to_string_pretty(&summary).expect("serializable") + "\n")
}

const CHART_W: f64 = 720.0;
const CHART_H: f64 = 360.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 6] = ["#4878d0", "#ee854a", "#6acc64", "#d65f5f", "#956cb4", "#8c613c"];

fn svg_open(title: &str) -> String {
    format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{CHART_W}\" height=\"{CHART_H}\" \
         viewBox=\"0 0 {CHART_W} {CHART_H}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n\
         <text x=\"{:.2}\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\" text-anchor=\"middle\">{title}</text>\n",
        CHART_W / 2.0
    )
}

fn axis_lines(out: &mut String) {
    let x0 = MARGIN;
    let y0 = CHART_H - MARGIN;
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{:.2}\" y2=\"{y0:.2}\" stroke=\"black\"/>",
        CHART_W - MARGIN
    );
    let _ = writeln!(
        out,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{MARGIN:.2}\" stroke=\"black\"/>"
    );
    for tick in 0..=5 {
        let frac = tick as f64 / 5.0;
        let y = y0 - frac * (CHART_H - 2.0 * MARGIN);
        let _ = writeln!(
            out,
            "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"10\" text-anchor=\"end\">{:.1}</text>",
            x0 - 6.0,
            y + 3.0,
            frac
        );
        let _ = writeln!(
            out,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"black\"/>",
            x0 - 4.0
        );
    }
}

/// Grouped bars: detection rate per (attack, method).
pub fn render_bar_chart(report: &EvalReport) -> String {
    let mut out = svg_open("Detection rate by attack and method");
    axis_lines(&mut out);
    let methods: Vec<&str> = report.method_means.iter().map(|m| m.method.as_str()).collect();
    let attacks: Vec<&str> = {
        let mut seen = Vec::new();
        for c in &report.cells {
            if !seen.contains(&c.attack.as_str()) {
                seen.push(c.attack.as_str());
            }
        }
        seen
    };
    let y0 = CHART_H - MARGIN;
    let plot_h = CHART_H - 2.0 * MARGIN;
    let plot_w = CHART_W - 2.0 * MARGIN;
    if !attacks.is_empty() && !methods.is_empty() {
        let group_w = plot_w / attacks.len() as f64;
        let bar_w = (group_w * 0.8) / methods.len() as f64;
        for (ai, attack) in attacks.iter().enumerate() {
            for (mi, method) in methods.iter().enumerate() {
                let dr = report
                    .cells
                    .iter()
                    .find(|c| c.attack == *attack && c.method == *method)
                    .map(|c| c.detection_rate)
                    .unwrap_or(0.0);
                let x = MARGIN + ai as f64 * group_w + group_w * 0.1 + mi as f64 * bar_w;
                let h = dr * plot_h;
                let _ = writeln!(
                    out,
                    "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{h:.2}\" fill=\"{}\"/>",
                    y0 - h,
                    bar_w * 0.9,
                    PALETTE[mi % PALETTE.len()]
                );
            }
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{attack}</text>",
                MARGIN + (ai as f64 + 0.5) * group_w,
                y0 + 16.0
            );
        }
        for (mi, method) in methods.iter().enumerate() {
            let x = MARGIN + 10.0 + mi as f64 * 90.0;
            let _ = writeln!(
                out,
                "<rect x=\"{x:.2}\" y=\"{:.2}\" width=\"10\" height=\"10\" fill=\"{}\"/>",
                MARGIN - 14.0,
                PALETTE[mi % PALETTE.len()]
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\">{method}</text>",
                x + 14.0,
                MARGIN - 5.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Box plots of per-image detection rates per method (attacks pooled).
pub fn render_box_plot(report: &EvalReport) -> String {
    let mut out = svg_open("Per-image detection rate distribution");
    axis_lines(&mut out);
    let methods: Vec<&str> = report.method_means.iter().map(|m| m.method.as_str()).collect();
    let y0 = CHART_H - MARGIN;
    let plot_h = CHART_H - 2.0 * MARGIN;
    let plot_w = CHART_W - 2.0 * MARGIN;
    if !methods.is_empty() {
        let slot_w = plot_w / methods.len() as f64;
        for (mi, method) in methods.iter().enumerate() {
            // Per-image rates pooled over attacks.
            let mut rates: Vec<f64> = Vec::new();
            let mut images: Vec<&str> = Vec::new();
            for row in &report.rows {
                if row.method == *method && !images.contains(&row.image_id.as_str()) {
                    images.push(row.image_id.as_str());
                }
            }
            for img in images {
                let samples: Vec<bool> = report
                    .rows
                    .iter()
                    .filter(|r| r.method == *method && r.image_id == img)
                    .map(|r| r.detected)
                    .collect();
                if !samples.is_empty() {
                    rates.push(
                        samples.iter().filter(|&&d| d).count() as f64 / samples.len() as f64,
                    );
                }
            }
            if rates.is_empty() {
                continue;
            }
            rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let quantile = |q: f64| -> f64 {
                let pos = q * (rates.len() - 1) as f64;
                let lo = pos.floor() as usize;
                let hi = pos.ceil() as usize;
                rates[lo] + (rates[hi] - rates[lo]) * (pos - lo as f64)
            };
            let (q1, q2, q3) = (quantile(0.25), quantile(0.5), quantile(0.75));
            let (lo, hi) = (rates[0], rates[rates.len() - 1]);
            let cx = MARGIN + (mi as f64 + 0.5) * slot_w;
            let bw = slot_w * 0.3;
            let y = |v: f64| y0 - v * plot_h;
            let color = PALETTE[mi % PALETTE.len()];
            let _ = writeln!(
                out,
                "<line x1=\"{cx:.2}\" y1=\"{:.2}\" x2=\"{cx:.2}\" y2=\"{:.2}\" stroke=\"black\"/>",
                y(lo),
                y(hi)
            );
            let _ = writeln!(
                out,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{color}\" fill-opacity=\"0.5\" stroke=\"black\"/>",
                cx - bw / 2.0,
                y(q3),
                bw,
                (y(q1) - y(q3)).max(0.5)
            );
            let _ = writeln!(
                out,
                "<line x1=\"{:.2}\" y1=\"{:.2}\" x2=\"{:.2}\" y2=\"{:.2}\" stroke=\"black\" stroke-width=\"2\"/>",
                cx - bw / 2.0,
                y(q2),
                cx + bw / 2.0,
                y(q2)
            );
            let _ = writeln!(
                out,
                "<text x=\"{cx:.2}\" y=\"{:.2}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{method}</text>",
                y0 + 16.0
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
