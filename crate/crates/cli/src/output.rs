//! Flat-file writers: CSV tables, the JSON report, and the gnuplot script.
//!
//! Every file embeds the config hash and the artifact version; floats print
//! as shortest round-trip decimals.

use std::fmt::Write as _;

use klab_core::config::{fmt_f64, ExperimentConfig};
use klab_core::counting::TwoTermReport;
use klab_core::spectral::SpectrumTable;
use serde_json::json;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// File header: hash, version, and the canonical config echoed line by line.
fn stamp(cfg: &ExperimentConfig) -> String {
    let mut out = format!("# config={} version={}\n", cfg.hash(), VERSION);
    for line in cfg.canonical_key_values().lines() {
        let _ = writeln!(out, "# {line}");
    }
    out
}

fn csv_quote(s: &str) -> String {
    if s.contains(',') || s.contains('"') {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub fn spectrum_csv(cfg: &ExperimentConfig, table: &SpectrumTable) -> String {
    let mut out = stamp(cfg);
    out.push_str("lambda,label,period_re,period_im,period_abs2\n");
    for item in &table.items {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(item.lambda),
            csv_quote(&item.label.display()),
            fmt_f64(item.period.re),
            fmt_f64(item.period.im),
            fmt_f64(item.period.norm_sqr()),
        );
    }
    out
}

pub fn counting_csv(cfg: &ExperimentConfig, report: &TwoTermReport) -> String {
    let mut out = stamp(cfg);
    out.push_str("lambda,N,main_term,q_term,residual\n");
    for i in 0..report.grid.len() {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            fmt_f64(report.grid[i]),
            fmt_f64(report.n_values[i]),
            fmt_f64(report.main_term[i]),
            fmt_f64(report.q_term[i]),
            fmt_f64(report.residuals[i]),
        );
    }
    out
}

pub fn report_json(cfg: &ExperimentConfig, report: &TwoTermReport) -> String {
    let windows: Vec<serde_json::Value> = report
        .windows
        .iter()
        .map(|w| {
            json!({
                "lo": w.lo,
                "hi": w.hi,
                "mean_abs_residual": w.mean_abs,
                "max_abs_residual": w.max_abs,
                "median_residual": w.median,
            })
        })
        .collect();
    let value = json!({
        "config": cfg.canonical_json(),
        "config_hash": cfg.hash(),
        "version": VERSION,
        "kernel": { "a": cfg.kernel_a },
        "fitted_c": report.fitted_c,
        "windows": windows,
        "warnings": report.warnings,
    });
    serde_json::to_string_pretty(&value).expect("report serializes")
}

/// Gnuplot script plotting N against the main term and the two-term
/// prediction from counting.csv.
pub fn figure_gnuplot(cfg: &ExperimentConfig) -> String {
    let mut out = stamp(cfg);
    // '#' lines and the non-numeric header row are skipped by gnuplot.
    out.push_str(
        "set datafile separator ','\n\
         set key left top\n\
         set xlabel 'lambda'\n\
         set ylabel 'N(lambda)'\n\
         set title 'Counting function vs two-term prediction'\n\
         plot 'counting.csv' using 1:2 with steps lw 2 title 'N', \\\n\
          'counting.csv' using 1:3 with lines title 'main term', \\\n\
          'counting.csv' using 1:($3+$4) with lines title 'two-term prediction'\n",
    );
    out
}
