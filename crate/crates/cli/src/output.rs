//! Stable CSV emission: fixed column orders, mandatory header row, LF line
//! endings, and numbers printed with 10 significant digits so identical runs
//! produce byte-identical files.

use anyhow::{Context, Result};
use std::io::Write;
use std::path::Path;
use tiercache_core::{OffloadReport, Placement, Popularity};

/// 10 significant digits, scientific, locale-independent.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    format!("{x:.9e}")
}

pub struct CsvFile {
    rows: Vec<String>,
}

impl CsvFile {
    pub fn new(header: &str) -> Self {
        CsvFile {
            rows: vec![header.to_string()],
        }
    }

    pub fn push(&mut self, fields: &[String]) {
        self.rows.push(fields.join(","));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)
            .with_context(|| format!("cannot create {}", path.display()))?;
        for row in &self.rows {
            writeln!(file, "{row}").with_context(|| format!("write to {}", path.display()))?;
        }
        Ok(())
    }

    pub fn row_count(&self) -> usize {
        self.rows.len().saturating_sub(1)
    }
}

pub const PLACEMENT_HEADER: &str = "scheme,content,q,p_ue,p_h,per_content_offload,total_offload";

/// One block of per-content rows for a placement (content ranks are
/// 1-based in the file).
pub fn push_placement_rows(
    csv: &mut CsvFile,
    scheme: &str,
    q: &Popularity,
    pl: &Placement,
    report: &OffloadReport,
) {
    for i in 0..pl.dim() {
        csv.push(&[
            scheme.to_string(),
            (i + 1).to_string(),
            fmt_num(q.as_slice()[i]),
            fmt_num(pl.p_ue()[i]),
            fmt_num(pl.p_h()[i]),
            fmt_num(report.per_content[i]),
            fmt_num(report.total),
        ]);
    }
}

pub const SIMULATE_HEADER: &str = "scheme,content,q,p_ue,p_h,analytic_offload,empirical_offload,total_analytic,total_empirical,ci_halfwidth,n_trials";

pub fn push_simulate_rows(
    csv: &mut CsvFile,
    scheme: &str,
    q: &Popularity,
    pl: &Placement,
    analytic: &OffloadReport,
    empirical: &OffloadReport,
) {
    let trials = empirical.n_trials.unwrap_or(0);
    let half = empirical.ci_halfwidth.unwrap_or(0.0);
    for i in 0..pl.dim() {
        csv.push(&[
            scheme.to_string(),
            (i + 1).to_string(),
            fmt_num(q.as_slice()[i]),
            fmt_num(pl.p_ue()[i]),
            fmt_num(pl.p_h()[i]),
            fmt_num(analytic.per_content[i]),
            fmt_num(empirical.per_content[i]),
            fmt_num(analytic.total),
            fmt_num(empirical.total),
            fmt_num(half),
            trials.to_string(),
        ]);
    }
}

pub const SWEEP_HEADER: &str = "parameter,value,scheme,total_offload_analytic,total_offload_empirical,ci_halfwidth,iterations,converged";

/// One sweep row; optional fields are left empty.
#[allow(clippy::too_many_arguments)]
pub fn push_sweep_row(
    csv: &mut CsvFile,
    parameter: &str,
    value: f64,
    scheme: &str,
    analytic: Option<f64>,
    empirical: Option<f64>,
    ci_halfwidth: Option<f64>,
    iterations: Option<usize>,
    converged: Option<bool>,
) {
    csv.push(&[
        parameter.to_string(),
        fmt_num(value),
        scheme.to_string(),
        analytic.map(fmt_num).unwrap_or_default(),
        empirical.map(fmt_num).unwrap_or_default(),
        ci_halfwidth.map(fmt_num).unwrap_or_default(),
        iterations.map(|n| n.to_string()).unwrap_or_default(),
        converged.map(|b| b.to_string()).unwrap_or_default(),
    ]);
}
