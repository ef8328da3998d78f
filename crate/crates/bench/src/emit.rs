//! CSV and JSON artifacts.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use isoframe::surrogate::ModelKind;
use serde::Serialize;

use crate::run::{shape_variance, ExperimentResult, LineSet, RmseRecord};
use crate::spec::{Domain, ExperimentSpec};
use crate::BenchError;

pub const RMSE_HEADER: &str = "domain,kind,p,repeat,rmse,log10_rmse,failure";

// 17 significant digits
fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// One row per record, failures with empty numeric fields.
pub fn rmse_csv(records: &[RmseRecord]) -> String {
    let mut out = String::from(RMSE_HEADER);
    out.push('\n');
    for r in records {
        let (rmse, log) = match r.rmse {
            Some(v) => (num(v), num(v.log10())),
            None => (String::new(), String::new()),
        };
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.domain,
            r.kind,
            r.p,
            r.repeat,
            rmse,
            log,
            r.failure.as_deref().unwrap_or("")
        );
    }
    out
}

/// Aggregate of one `(domain, kind, p)` cell over its repeats.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub domain: Domain,
    pub kind: ModelKind,
    pub p: usize,
    pub repeats: usize,
    pub failures: usize,
    /// Over successful repeats; `None` if every repeat failed.
    pub mean_rmse: Option<f64>,
    pub variance_rmse: Option<f64>,
    pub mean_log10_rmse: Option<f64>,
    /// Only with a shared test cloud.
    pub shape_variance: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub variance_convention: &'static str,
    pub cells: Vec<CellSummary>,
}

/// Groups consecutive records of the same cell; records must be in
/// canonical order.
pub fn summarize(records: &[RmseRecord]) -> Summary {
    let mut cells = Vec::new();
    for group in records.chunk_by(|a, b| (a.domain, a.kind, a.p) == (b.domain, b.kind, b.p)) {
        let ok: Vec<f64> = group.iter().filter_map(|r| r.rmse).collect();
        let failures = group.len() - ok.len();
        let (mean, var, log_mean) = if ok.is_empty() {
            (None, None, None)
        } else {
            let k = ok.len() as f64;
            let mean = ok.iter().sum::<f64>() / k;
            let var = ok.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / k;
            let log_mean = ok.iter().map(|v| v.log10()).sum::<f64>() / k;
            (Some(mean), Some(var), Some(log_mean))
        };
        let with_errors: Vec<&RmseRecord> = group.iter().filter(|r| r.errors.is_some()).collect();
        let shape = if with_errors.len() >= 2 { shape_variance(&with_errors).ok() } else { None };
        cells.push(CellSummary {
            domain: group[0].domain,
            kind: group[0].kind,
            p: group[0].p,
            repeats: group.len(),
            failures,
            mean_rmse: mean,
            variance_rmse: var,
            mean_log10_rmse: log_mean,
            shape_variance: shape,
        });
    }
    Summary { variance_convention: "population", cells }
}

/// Lines of one slice set, with a header.
pub fn lines_csv(sets: &[LineSet], line: usize) -> String {
    let mut out = String::from("domain,kind,p,t,truth,prediction\n");
    for s in sets {
        for q in &s.lines[line] {
            let _ = writeln!(out, "{},{},{},{},{},{}", s.domain, s.kind, s.p, num(q.t), num(q.truth), num(q.prediction));
        }
    }
    out
}

fn write(path: &Path, contents: &str) -> Result<(), BenchError> {
    fs::write(path, contents).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

fn create_dir(path: &Path) -> Result<(), BenchError> {
    fs::create_dir_all(path).map_err(|e| BenchError::Io(format!("{}: {e}", path.display())))
}

/// Writes `rmse.csv`, `summary.json` and `transforms/<domain>_p<p>_r<repeat>.json`.
pub fn emit(result: &ExperimentResult, spec: &ExperimentSpec, out_dir: &Path) -> Result<(), BenchError> {
    create_dir(out_dir)?;
    write(&out_dir.join("rmse.csv"), &rmse_csv(&result.records))?;
    let summary = serde_json::json!({
        "spec": spec,
        "summary": summarize(&result.records),
    });
    write(&out_dir.join("summary.json"), &serde_json::to_string_pretty(&summary).expect("summary serializes"))?;
    let tdir = out_dir.join("transforms");
    create_dir(&tdir)?;
    for ((domain, p, repeat), t) in &result.transforms {
        write(&tdir.join(format!("{domain}_p{p}_r{repeat}.json")), &t.to_json())?;
    }
    Ok(())
}

/// Writes `lines_<k>.csv` for every line.
pub fn emit_lines(sets: &[LineSet], out_dir: &Path) -> Result<(), BenchError> {
    create_dir(out_dir)?;
    let count = sets.first().map_or(0, |s| s.lines.len());
    for k in 0..count {
        write(&out_dir.join(format!("lines_{k}.csv")), &lines_csv(sets, k))?;
    }
    Ok(())
}
