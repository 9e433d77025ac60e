//! Output writers: the per-trial CSV, the aggregated JSON summary, and the
//! convergence-time SVG scatter.

use crate::fmt::{fmt_opt_real, fmt_real};
use crate::CliError;
use serde::Serialize;
use std::io::Write;
use std::path::Path;

/// One CSV row per trial; the column set and order are fixed.
#[derive(Debug, Clone)]
pub struct ResultRow {
    pub n: usize,
    pub trial: usize,
    pub seed: u64,
    pub converged: bool,
    pub convergence_parallel_time: Option<f64>,
    pub output_value: Option<f64>,
    pub error: Option<f64>,
    pub restarts: u64,
    pub clk_max: u32,
    pub gr_max: u32,
    pub time_max: u32,
    pub epoch_max: u32,
    pub sum_max: u32,
    pub role_count_a: usize,
}

pub const RESULT_HEADER: &str = "n,trial,seed,converged,convergence_parallel_time,output_value,error,restarts,clk_max,gr_max,time_max,epoch_max,sum_max,role_count_A";

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.n,
            self.trial,
            self.seed,
            self.converged,
            fmt_opt_real(self.convergence_parallel_time),
            fmt_opt_real(self.output_value),
            fmt_opt_real(self.error),
            self.restarts,
            self.clk_max,
            self.gr_max,
            self.time_max,
            self.epoch_max,
            self.sum_max,
            self.role_count_a,
        )
    }
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    let mut file = std::fs::File::create(path)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    file.write_all(text.as_bytes())
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))
}

/// Rows must already be sorted by (n, trial); writes header + one line per
/// row, LF endings, UTF-8.
pub fn result_csv(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(RESULT_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&row.to_csv_line());
        out.push('\n');
    }
    out
}

/// Serializes any summary through a sorted-key JSON value, so that
/// parse -> emit round-trips byte-identically.
pub fn to_canonical_json<T: Serialize>(value: &T) -> String {
    let v = serde_json::to_value(value).expect("summary serializes");
    let mut s = serde_json::to_string_pretty(&v).expect("json prints");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupSummary {
    pub n: usize,
    pub trials: usize,
    pub converged: usize,
    pub convergence_fraction: f64,
    pub median_parallel_time: Option<f64>,
    pub mean_parallel_time: Option<f64>,
    pub max_error: Option<f64>,
    pub mean_error: Option<f64>,
    pub max_restarts: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExperimentSummary {
    pub command: String,
    pub variant: String,
    pub profile: String,
    pub cte: u32,
    pub epoch_multiplier: u32,
    pub seed: u64,
    pub trials_per_n: usize,
    pub groups: Vec<GroupSummary>,
}

pub fn summarize_groups(rows: &[ResultRow]) -> Vec<GroupSummary> {
    let mut groups: Vec<GroupSummary> = Vec::new();
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| r.n == n).collect();
        let mut times: Vec<f64> = group
            .iter()
            .filter_map(|r| r.convergence_parallel_time)
            .collect();
        times.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = if times.is_empty() {
            None
        } else {
            Some(times[times.len() / 2])
        };
        let mean = if times.is_empty() {
            None
        } else {
            Some(times.iter().sum::<f64>() / times.len() as f64)
        };
        let errors: Vec<f64> = group.iter().filter_map(|r| r.error).collect();
        let max_error = errors.iter().cloned().fold(None, |m: Option<f64>, e| {
            Some(m.map_or(e, |m| m.max(e)))
        });
        let mean_error = if errors.is_empty() {
            None
        } else {
            Some(errors.iter().sum::<f64>() / errors.len() as f64)
        };
        let converged = group.iter().filter(|r| r.converged).count();
        groups.push(GroupSummary {
            n,
            trials: group.len(),
            converged,
            convergence_fraction: converged as f64 / group.len() as f64,
            median_parallel_time: median,
            mean_parallel_time: mean,
            max_error,
            mean_error,
            max_restarts: group.iter().map(|r| r.restarts).max().unwrap_or(0),
        });
    }
    groups
}

/// Minimal self-contained scatter: x = log10(n), y = convergence parallel
/// time, one circle per converged trial.
pub fn scatter_svg(rows: &[ResultRow]) -> String {
    let converged: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.converged)
        .filter_map(|r| r.convergence_parallel_time.map(|t| ((r.n as f64).log10(), t)))
        .collect();
    let (width, height) = (760.0, 520.0);
    let (left, right, top, bottom) = (80.0, 30.0, 30.0, 60.0);
    let plot_w = width - left - right;
    let plot_h = height - top - bottom;

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let mut y_max = 0.0f64;
    for &(x, y) in &converged {
        x_min = x_min.min(x);
        x_max = x_max.max(x);
        y_max = y_max.max(y);
    }
    if converged.is_empty() {
        x_min = 1.0;
        x_max = 2.0;
        y_max = 1.0;
    }
    if (x_max - x_min).abs() < 1e-9 {
        x_min -= 0.5;
        x_max += 0.5;
    }
    y_max *= 1.05;

    let sx = |x: f64| left + (x - x_min) / (x_max - x_min) * plot_w;
    let sy = |y: f64| top + (1.0 - y / y_max) * plot_h;

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width}\" height=\"{height}\" viewBox=\"0 0 {width} {height}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h,
        left + plot_w,
        top + plot_h
    ));
    svg.push_str(&format!(
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{}\" stroke=\"black\"/>\n",
        top + plot_h
    ));
    // x ticks at the distinct population sizes present
    let mut ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
    ns.sort_unstable();
    ns.dedup();
    for n in ns {
        let x = sx((n as f64).log10());
        let y0 = top + plot_h;
        svg.push_str(&format!(
            "<line x1=\"{x:.1}\" y1=\"{y0}\" x2=\"{x:.1}\" y2=\"{}\" stroke=\"black\"/>\n",
            y0 + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{x:.1}\" y=\"{}\" text-anchor=\"middle\" font-size=\"12\">{n}</text>\n",
            y0 + 20.0
        ));
    }
    for i in 0..=5 {
        let y_val = y_max * i as f64 / 5.0;
        let y = sy(y_val);
        svg.push_str(&format!(
            "<line x1=\"{}\" y1=\"{y:.1}\" x2=\"{left}\" y2=\"{y:.1}\" stroke=\"black\"/>\n",
            left - 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{}\" y=\"{:.1}\" text-anchor=\"end\" font-size=\"12\">{}</text>\n",
            left - 9.0,
            y + 4.0,
            fmt_real(y_val)
        ));
    }
    svg.push_str(&format!(
        "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\">population size n (log scale)</text>\n",
        left + plot_w / 2.0,
        height - 15.0
    ));
    svg.push_str(&format!(
        "<text x=\"18\" y=\"{}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 18 {})\">convergence time (parallel)</text>\n",
        top + plot_h / 2.0,
        top + plot_h / 2.0
    ));
    for &(x, y) in &converged {
        svg.push_str(&format!(
            "<circle cx=\"{:.1}\" cy=\"{:.1}\" r=\"3\" fill=\"steelblue\" fill-opacity=\"0.7\"/>\n",
            sx(x),
            sy(y)
        ));
    }
    svg.push_str("</svg>\n");
    svg
}
