//! Per-cell summaries: success rate, CPU time and executed actions over
//! successful runs.

use std::fmt::Write as _;

use mgp_core::agent::{Algorithm, RunStatus};

use crate::record::ExperimentRecord;

#[derive(Clone, Debug, PartialEq)]
pub struct CellKey {
    pub domain: String,
    pub problem: String,
    pub algorithm: Algorithm,
    pub w: f64,
    pub c: f64,
    pub g_r: u64,
}

impl CellKey {
    pub fn of(r: &ExperimentRecord) -> Self {
        CellKey {
            domain: r.domain.clone(),
            problem: r.problem.clone(),
            algorithm: r.algorithm,
            w: r.w,
            c: r.c,
            g_r: r.g_r,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CellSummary {
    pub key: CellKey,
    pub runs: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// `None` when no run succeeded.
    pub mean_cpu_ms: Option<f64>,
    pub median_cpu_ms: Option<f64>,
    pub mean_executed_actions: Option<f64>,
}

fn mean(xs: &[f64]) -> Option<f64> {
    (!xs.is_empty()).then(|| xs.iter().sum::<f64>() / xs.len() as f64)
}

fn median(xs: &[f64]) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    let mut v = xs.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        (v[n / 2 - 1] + v[n / 2]) / 2.0
    })
}

/// Groups records by (domain, problem, algorithm, w, c, g_r), in order of
/// first appearance.
pub fn aggregate(records: &[ExperimentRecord]) -> Vec<CellSummary> {
    let mut groups: Vec<(CellKey, Vec<&ExperimentRecord>)> = Vec::new();
    for r in records {
        let key = CellKey::of(r);
        match groups.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => groups.push((key, vec![r])),
        }
    }
    groups
        .into_iter()
        .map(|(key, runs)| {
            let ok: Vec<&&ExperimentRecord> = runs.iter().filter(|r| r.status == RunStatus::Success).collect();
            let cpu: Vec<f64> = ok.iter().map(|r| r.cpu_time_ms).collect();
            let len: Vec<f64> = ok.iter().map(|r| r.executed_actions as f64).collect();
            CellSummary {
                key,
                runs: runs.len(),
                successes: ok.len(),
                success_rate: ok.len() as f64 / runs.len() as f64,
                mean_cpu_ms: mean(&cpu),
                median_cpu_ms: median(&cpu),
                mean_executed_actions: mean(&len),
            }
        })
        .collect()
}

fn opt(v: Option<f64>, prec: usize) -> String {
    match v {
        Some(x) => format!("{x:.prec$}"),
        None => "-".to_string(),
    }
}

/// Fixed-width text table, one line per cell.
pub fn render_table(cells: &[CellSummary]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<12} {:<14} {:<9} {:>5} {:>5} {:>6} {:>5} {:>8} {:>12} {:>12} {:>10}",
        "domain", "problem", "alg", "w", "c", "g_r", "runs", "success", "mean_ms", "median_ms", "actions"
    );
    for s in cells {
        let _ = writeln!(
            out,
            "{:<12} {:<14} {:<9} {:>5} {:>5} {:>6} {:>5} {:>7.1}% {:>12} {:>12} {:>10}",
            s.key.domain,
            s.key.problem,
            s.key.algorithm.tag(),
            s.key.w,
            s.key.c,
            s.key.g_r,
            s.runs,
            100.0 * s.success_rate,
            opt(s.mean_cpu_ms, 2),
            opt(s.median_cpu_ms, 2),
            opt(s.mean_executed_actions, 1),
        );
    }
    out
}
