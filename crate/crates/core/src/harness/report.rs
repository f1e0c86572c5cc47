use std::fs;
use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;

use super::SimConfig;

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub trait CsvRow: Serialize {
    const HEADER: &'static [&'static str];
    fn fields(&self) -> Vec<String>;
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskRow {
    pub n: usize,
    pub mu_1: f64,
    pub mu_2: Option<f64>,
    #[serde(rename = "R_hat")]
    pub r_hat: f64,
    pub se: f64,
    pub ratio_loglog: Option<f64>,
    pub ratio_log: Option<f64>,
    pub reps: usize,
    pub undefined_mle_count: usize,
    pub criterion: String,
    /// "cell" for one truth, "worst" for the maximum over the grid at this n.
    pub row_kind: &'static str,
}

impl CsvRow for RiskRow {
    const HEADER: &'static [&'static str] = &[
        "n",
        "mu_1",
        "mu_2",
        "R_hat",
        "se",
        "ratio_loglog",
        "ratio_log",
        "reps",
        "undefined_mle_count",
        "criterion",
        "row_kind",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.n.to_string(),
            fmt_f64(self.mu_1),
            opt(self.mu_2),
            fmt_f64(self.r_hat),
            fmt_f64(self.se),
            opt(self.ratio_loglog),
            opt(self.ratio_log),
            self.reps.to_string(),
            self.undefined_mle_count.to_string(),
            self.criterion.clone(),
            self.row_kind.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StoppingRow {
    pub criterion: String,
    pub rule: String,
    /// Absent for criteria whose rejection does not depend on a level.
    pub alpha: Option<f64>,
    pub horizon: usize,
    pub rejections: usize,
    pub reps: usize,
    pub freq: f64,
    pub se: f64,
}

impl CsvRow for StoppingRow {
    const HEADER: &'static [&'static str] =
        &["criterion", "rule", "alpha", "horizon", "rejections", "reps", "freq", "se"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.criterion.clone(),
            self.rule.clone(),
            opt(self.alpha),
            self.horizon.to_string(),
            self.rejections.to_string(),
            self.reps.to_string(),
            fmt_f64(self.freq),
            fmt_f64(self.se),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PowerRow {
    /// "cell" for one criterion, "paired" for a difference of two criteria on
    /// shared streams.
    pub row_kind: &'static str,
    pub criterion: String,
    pub n: usize,
    pub s: f64,
    pub mu_1: f64,
    pub mu_2: Option<f64>,
    /// n·d_SQ / log log n at the simulated truth.
    pub f_n: f64,
    pub alpha: f64,
    pub rejections: Option<usize>,
    pub reps: usize,
    pub freq: f64,
    pub se: f64,
}

impl CsvRow for PowerRow {
    const HEADER: &'static [&'static str] =
        &["row_kind", "criterion", "n", "s", "mu_1", "mu_2", "f_n", "alpha", "rejections", "reps", "freq", "se"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.row_kind.to_string(),
            self.criterion.clone(),
            self.n.to_string(),
            fmt_f64(self.s),
            fmt_f64(self.mu_1),
            opt(self.mu_2),
            fmt_f64(self.f_n),
            fmt_f64(self.alpha),
            self.rejections.map(|r| r.to_string()).unwrap_or_default(),
            self.reps.to_string(),
            fmt_f64(self.freq),
            fmt_f64(self.se),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConsistencyRow {
    pub criterion: String,
    pub n: usize,
    pub mu_1: f64,
    pub mu_2: Option<f64>,
    pub select0: f64,
    pub select1: f64,
    pub se: f64,
    pub reps: usize,
}

impl CsvRow for ConsistencyRow {
    const HEADER: &'static [&'static str] = &["criterion", "n", "mu_1", "mu_2", "select0", "select1", "se", "reps"];

    fn fields(&self) -> Vec<String> {
        vec![
            self.criterion.clone(),
            self.n.to_string(),
            fmt_f64(self.mu_1),
            opt(self.mu_2),
            fmt_f64(self.select0),
            fmt_f64(self.select1),
            fmt_f64(self.se),
            self.reps.to_string(),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecompositionRow {
    pub criterion: String,
    pub n: usize,
    pub mu_1: f64,
    pub mu_2: Option<f64>,
    /// Risk of the post-selection estimator.
    pub r_hat: f64,
    pub se_r: f64,
    /// Risk of always using the complex model's estimate.
    pub r_hat_complex: f64,
    pub se_complex: f64,
    pub p_select0: f64,
    pub se_p: f64,
    /// Squared distance from the truth to its projection on the simple model.
    pub dist2: f64,
    pub bound: f64,
    pub combined_se: f64,
    pub holds: bool,
    pub reps: usize,
}

impl CsvRow for DecompositionRow {
    const HEADER: &'static [&'static str] = &[
        "criterion",
        "n",
        "mu_1",
        "mu_2",
        "R_hat",
        "se_R",
        "R_hat_complex",
        "se_complex",
        "p_select0",
        "se_p",
        "dist2",
        "bound",
        "combined_se",
        "holds",
        "reps",
    ];

    fn fields(&self) -> Vec<String> {
        vec![
            self.criterion.clone(),
            self.n.to_string(),
            fmt_f64(self.mu_1),
            opt(self.mu_2),
            fmt_f64(self.r_hat),
            fmt_f64(self.se_r),
            fmt_f64(self.r_hat_complex),
            fmt_f64(self.se_complex),
            fmt_f64(self.p_select0),
            fmt_f64(self.se_p),
            fmt_f64(self.dist2),
            fmt_f64(self.bound),
            fmt_f64(self.combined_se),
            self.holds.to_string(),
            self.reps.to_string(),
        ]
    }
}

/// Rows of one simulation plus the wall time spent producing each.
#[derive(Debug, Clone, Serialize)]
pub struct Report<R> {
    pub rows: Vec<R>,
    /// Seconds; kept out of the CSV body so reruns compare byte for byte.
    pub row_elapsed: Vec<f64>,
}

impl<R> Default for Report<R> {
    fn default() -> Self {
        Self { rows: Vec::new(), row_elapsed: Vec::new() }
    }
}

impl<R> Report<R> {
    pub(crate) fn push(&mut self, row: R, elapsed: f64) {
        self.rows.push(row);
        self.row_elapsed.push(elapsed);
    }
}

impl<R: CsvRow> Report<R> {
    pub fn csv_body(&self) -> String {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(R::HEADER).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.fields()).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
    }
}

#[derive(Debug, Clone)]
pub enum SimReport {
    Risk(Report<RiskRow>),
    Stopping(Report<StoppingRow>),
    Power(Report<PowerRow>),
    Consistency(Report<ConsistencyRow>),
    Decomposition(Report<DecompositionRow>),
}

impl SimReport {
    /// Header line plus one line per row, without the manifest.
    pub fn csv_body(&self) -> String {
        match self {
            SimReport::Risk(r) => r.csv_body(),
            SimReport::Stopping(r) => r.csv_body(),
            SimReport::Power(r) => r.csv_body(),
            SimReport::Consistency(r) => r.csv_body(),
            SimReport::Decomposition(r) => r.csv_body(),
        }
    }

    /// CSV with a leading `# manifest: {...}` comment line.
    pub fn csv_with_manifest(&self, manifest: &serde_json::Value) -> String {
        format!("# manifest: {}\n{}", serde_json::to_string(manifest).expect("manifest serializes"), self.csv_body())
    }

    pub fn row_count(&self) -> usize {
        match self {
            SimReport::Risk(r) => r.rows.len(),
            SimReport::Stopping(r) => r.rows.len(),
            SimReport::Power(r) => r.rows.len(),
            SimReport::Consistency(r) => r.rows.len(),
            SimReport::Decomposition(r) => r.rows.len(),
        }
    }

    pub fn to_json(&self, manifest: &serde_json::Value, config: &SimConfig) -> serde_json::Value {
        let (rows, elapsed) = match self {
            SimReport::Risk(r) => (serde_json::to_value(&r.rows), &r.row_elapsed),
            SimReport::Stopping(r) => (serde_json::to_value(&r.rows), &r.row_elapsed),
            SimReport::Power(r) => (serde_json::to_value(&r.rows), &r.row_elapsed),
            SimReport::Consistency(r) => (serde_json::to_value(&r.rows), &r.row_elapsed),
            SimReport::Decomposition(r) => (serde_json::to_value(&r.rows), &r.row_elapsed),
        };
        serde_json::json!({
            "manifest": manifest,
            "config": config,
            "rows": rows.expect("rows serialize"),
            "row_elapsed_seconds": elapsed,
        })
    }
}

/// Writes `bytes` to a sibling temporary file and renames it over `path`, so
/// readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let name = path.file_name().ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = fs::remove_file(&tmp);
    }
    result
}
