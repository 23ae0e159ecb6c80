//! Machine-readable output: a versioned JSON schema for solve reports and
//! the dataset fingerprint. Timing lives in dedicated fields (`timing`,
//! `wall_time_s`) so consumers can compare reports net of clock noise.

use std::collections::BTreeMap;

use cptport_core::ReturnsMatrix;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DatasetInfo {
    pub n_samples: usize,
    pub n_assets: usize,
    pub content_hash: String,
    pub asset_names: Vec<String>,
}

impl DatasetInfo {
    pub fn new(returns: &ReturnsMatrix, asset_names: &[String]) -> Self {
        Self {
            n_samples: returns.n_samples(),
            n_assets: returns.n_assets(),
            content_hash: content_hash(returns),
            asset_names: asset_names.to_vec(),
        }
    }
}

/// FNV-1a over the shape and the raw bit patterns of the entries.
pub fn content_hash(returns: &ReturnsMatrix) -> String {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    let mut eat = |bytes: &[u8]| {
        for &b in bytes {
            hash ^= b as u64;
            hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
        }
    };
    eat(&(returns.n_samples() as u64).to_le_bytes());
    eat(&(returns.n_assets() as u64).to_le_bytes());
    for v in returns.values() {
        eat(&v.to_bits().to_le_bytes());
    }
    format!("{hash:016x}")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StartRecordJson {
    pub index: usize,
    pub start_weights: Vec<f64>,
    pub weights: Vec<f64>,
    pub utility: f64,
    pub iterations: usize,
    pub termination: String,
    pub utility_trace: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BestRecordJson {
    pub start_index: usize,
    pub weights: Vec<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridPointJson {
    pub weights: Vec<f64>,
    pub utility: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveReportJson {
    pub schema_version: u32,
    pub command: String,
    pub method: String,
    pub config: serde_json::Value,
    pub dataset: DatasetInfo,
    pub starts: Vec<StartRecordJson>,
    pub best: BestRecordJson,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_local_maxima: Option<Vec<GridPointJson>>,
    /// Phase name to seconds; excluded from reproducibility comparisons.
    pub timing: BTreeMap<String, f64>,
}

impl SolveReportJson {
    /// The best record must restate the maximum over the per-start records.
    pub fn check_best_consistency(&self) -> bool {
        self.starts
            .iter()
            .map(|s| s.utility)
            .fold(f64::NEG_INFINITY, f64::max)
            == self.best.utility
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluateJson {
    pub schema_version: u32,
    pub command: String,
    pub dataset: DatasetInfo,
    pub weights: Vec<f64>,
    pub utility: f64,
    pub n_pos: usize,
    pub n_neg: usize,
    pub pi_pos_sum: f64,
    pub pi_neg_sum: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportRowJson {
    pub method: String,
    pub start_policy: String,
    pub utility: f64,
    pub weights: Vec<f64>,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonJson {
    pub schema_version: u32,
    pub command: String,
    pub dataset: DatasetInfo,
    pub config: serde_json::Value,
    pub rows: Vec<ReportRowJson>,
    pub timing: BTreeMap<String, f64>,
}

/// Per-start utility trace as a two-column CSV, ready for plotting.
pub fn trace_csv(trace: &[f64]) -> String {
    let mut out = String::from("iteration,utility\n");
    for (i, u) in trace.iter().enumerate() {
        out.push_str(&format!("{i},{u}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_shape_and_content_sensitive() {
        let a = ReturnsMatrix::from_rows(&[vec![0.1, 0.2]]).unwrap();
        let b = ReturnsMatrix::from_rows(&[vec![0.1], vec![0.2]]).unwrap();
        let c = ReturnsMatrix::from_rows(&[vec![0.1, 0.2000000001]]).unwrap();
        assert_ne!(content_hash(&a), content_hash(&b));
        assert_ne!(content_hash(&a), content_hash(&c));
        assert_eq!(content_hash(&a), content_hash(&a.clone()));
    }

    #[test]
    fn trace_csv_shape() {
        let csv = trace_csv(&[0.0, 0.5]);
        assert_eq!(csv, "iteration,utility\n0,0\n1,0.5\n");
    }
}
