//! Report documents. Serialization is deterministic: struct fields keep
//! declaration order, maps are sorted, and floats use the shortest
//! round-trip representation. Non-finite values are written as `null`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use prodsys::inclusion::CheckReport;
use prodsys::{DyadicTime, C64};

pub const SCHEMA_VERSION: u32 = 1;

pub type Num = Option<f64>;

pub fn num(x: f64) -> Num {
    x.is_finite().then_some(x)
}

pub fn pair(z: C64) -> [Num; 2] {
    [num(z.re), num(z.im)]
}

pub fn time(t: DyadicTime) -> [u64; 2] {
    [t.numerator(), t.exponent() as u64]
}

#[derive(Debug, Clone, Serialize, Default)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub passed: bool,
    pub checks: Vec<CheckEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub fibers: Vec<FiberEntry>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub covariances: Vec<CovarianceEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub powers: Option<PowersEntry>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { schema_version: SCHEMA_VERSION, command: command.into(), ..Report::default() }
    }

    pub fn push(&mut self, entry: CheckEntry) {
        self.checks.push(entry);
    }

    pub fn finish(mut self) -> Self {
        self.passed = self.checks.iter().all(|c| c.passed);
        self
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckEntry {
    /// `module::operation` of the library check.
    pub id: String,
    pub subject: String,
    pub passed: bool,
    pub threshold: Num,
    pub residuals: BTreeMap<String, Num>,
    pub samples: usize,
    pub failures: Vec<String>,
}

impl CheckEntry {
    pub fn from_report(subject: &str, r: &CheckReport) -> Self {
        CheckEntry {
            id: r.check.into(),
            subject: subject.into(),
            passed: r.passed,
            threshold: num(r.threshold),
            residuals: r.residuals.iter().map(|(k, v)| (k.clone(), num(*v))).collect(),
            samples: r.samples,
            failures: r.failures.clone(),
        }
    }

    pub fn outcome(id: &str, subject: &str, passed: bool, failures: Vec<String>) -> Self {
        CheckEntry { id: id.into(), subject: subject.into(), passed, threshold: None, residuals: BTreeMap::new(), samples: 1, failures }
    }

    pub fn error(id: &str, subject: &str, err: impl std::fmt::Display) -> Self {
        Self::outcome(id, subject, false, vec![err.to_string()])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct FiberEntry {
    pub system: String,
    pub dims: Vec<([u64; 2], usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProbeEntry {
    pub t: [u64; 2],
    pub gamma: [Num; 2],
    pub levels: u32,
    pub residual_history: Vec<Num>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CovarianceEntry {
    pub left: String,
    pub right: String,
    pub gamma: Option<[Num; 2]>,
    pub spread: Num,
    pub probes: Vec<ProbeEntry>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexEntry {
    pub system: String,
    pub labels: Vec<String>,
    pub kernel: Vec<Vec<[Num; 2]>>,
    pub hermitian_residual: Num,
    pub cpd_min_eigenvalue: Num,
    /// Eigenvalues of the centered kernel at the first label, ascending.
    pub centered_spectrum: Vec<Num>,
    pub index_estimate: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prediction: Option<Prediction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub expected: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Prediction {
    pub index_left: usize,
    pub index_right: usize,
    pub p: Num,
    pub predicted: usize,
    pub matches: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowersEntry {
    pub times: Vec<PowersTime>,
    pub max_discrepancy: Num,
    pub threshold: Num,
}

#[derive(Debug, Clone, Serialize)]
pub struct PowersTime {
    pub t: [u64; 2],
    pub dim_tau: usize,
    pub dim_amalgam: usize,
    pub gram_discrepancy: Num,
    pub unitarity_residual: Num,
}

fn fmt_num(x: Num) -> String {
    match x {
        Some(0.0) => "0".into(),
        Some(v) if (1e-3..1e4).contains(&v.abs()) => format!("{v:.6}"),
        Some(v) => format!("{v:.3e}"),
        None => "-".into(),
    }
}

fn fmt_pair(z: &[Num; 2]) -> String {
    format!("({}, {})", fmt_num(z[0]), fmt_num(z[1]))
}

fn fmt_time(t: [u64; 2]) -> String {
    format!("{}/2^{}", t[0], t[1])
}

/// Left-aligned columns separated by two spaces.
fn table(out: &mut String, header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<String>| -> String {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:<w$}")).collect();
        parts.join("  ").trim_end().to_string()
    };
    let _ = writeln!(out, "{}", line(header.iter().map(|s| s.to_string()).collect()));
    let _ = writeln!(out, "{}", line(width.iter().map(|w| "-".repeat(*w)).collect()));
    for r in rows {
        let _ = writeln!(out, "{}", line(r.clone()));
    }
}

impl Report {
    pub fn to_table(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "prodsys {} (schema {}): {}", self.command, self.schema_version, if self.passed { "PASS" } else { "FAIL" });
        out.push('\n');
        let rows: Vec<Vec<String>> = self
            .checks
            .iter()
            .map(|c| {
                let residuals = c.residuals.iter().map(|(k, v)| format!("{k}={}", fmt_num(*v))).collect::<Vec<_>>().join(" ");
                vec![
                    if c.passed { "PASS" } else { "FAIL" }.into(),
                    c.id.clone(),
                    c.subject.clone(),
                    fmt_num(c.threshold),
                    residuals,
                    c.failures.first().cloned().unwrap_or_default(),
                ]
            })
            .collect();
        table(&mut out, &["status", "check", "subject", "threshold", "residuals", "first failure"], &rows);
        if !self.fibers.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .fibers
                .iter()
                .map(|f| vec![f.system.clone(), f.dims.iter().map(|(t, d)| format!("{}:{d}", fmt_time(*t))).collect::<Vec<_>>().join(" ")])
                .collect();
            table(&mut out, &["system", "fiber dimensions"], &rows);
        }
        if !self.covariances.is_empty() {
            out.push('\n');
            let rows: Vec<Vec<String>> = self
                .covariances
                .iter()
                .map(|c| {
                    let levels = c.probes.iter().map(|p| p.levels.to_string()).collect::<Vec<_>>().join(",");
                    vec![
                        c.left.clone(),
                        c.right.clone(),
                        c.gamma.as_ref().map(fmt_pair).unwrap_or_else(|| "-".into()),
                        fmt_num(c.spread),
                        levels,
                        c.error.clone().unwrap_or_default(),
                    ]
                })
                .collect();
            table(&mut out, &["u", "v", "gamma(u,v)", "spread", "levels", "error"], &rows);
        }
        if let Some(ix) = &self.index {
            out.push('\n');
            let _ = writeln!(out, "index over {} units of {}: {}", ix.labels.len(), ix.system, ix.index_estimate);
            let spectrum = ix.centered_spectrum.iter().map(|x| fmt_num(*x)).collect::<Vec<_>>().join(" ");
            let _ = writeln!(out, "centered spectrum: {spectrum}");
            let _ = writeln!(out, "cpd min eigenvalue: {}", fmt_num(ix.cpd_min_eigenvalue));
            if let Some(p) = &ix.prediction {
                let _ = writeln!(
                    out,
                    "prediction: {} + {} + [p > 0] = {} (p = {}), {}",
                    p.index_left,
                    p.index_right,
                    p.predicted,
                    fmt_num(p.p),
                    if p.matches { "match" } else { "MISMATCH" }
                );
            }
        }
        if let Some(pw) = &self.powers {
            out.push('\n');
            let rows: Vec<Vec<String>> = pw
                .times
                .iter()
                .map(|t| {
                    vec![
                        fmt_time(t.t),
                        t.dim_tau.to_string(),
                        t.dim_amalgam.to_string(),
                        fmt_num(t.gram_discrepancy),
                        fmt_num(t.unitarity_residual),
                    ]
                })
                .collect();
            table(&mut out, &["t", "dim tau", "dim G", "discrepancy", "unitarity"], &rows);
            let _ = writeln!(out, "max discrepancy {} (threshold {})", fmt_num(pw.max_discrepancy), fmt_num(pw.threshold));
        }
        out
    }
}
