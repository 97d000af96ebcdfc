use std::str::FromStr;

use hdd_embed::density::{BandwidthSpec, SampleSet};
use hdd_embed::pipeline::{BasisSpec, EmbedderConfig, KdeOptions, NodeSource};
use hdd_embed::HddKind;
use ndarray::Array2;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

/// Either "auto" or an explicit positive value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AutoOrValue {
    Auto,
    Value(f64),
}

impl FromStr for AutoOrValue {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AutoOrValue::Auto);
        }
        let v: f64 = s.parse().map_err(|e| format!("{e}"))?;
        if !(v > 0.0) {
            return Err(format!("must be positive, got {v}"));
        }
        Ok(AutoOrValue::Value(v))
    }
}

impl AutoOrValue {
    pub fn spec_string(&self) -> String {
        match self {
            AutoOrValue::Auto => "auto".to_string(),
            AutoOrValue::Value(v) => format!("{v}"),
        }
    }
}

/// Either "auto" or a comma-separated list of positive per-dimension values.
#[derive(Debug, Clone, PartialEq)]
pub enum AutoOrVec {
    Auto,
    Values(Vec<f64>),
}

impl FromStr for AutoOrVec {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(AutoOrVec::Auto);
        }
        let vals: std::result::Result<Vec<f64>, _> =
            s.split(',').map(|p| p.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| format!("{e}"))?;
        if vals.is_empty() || vals.iter().any(|v| !(*v > 0.0)) {
            return Err("need positive comma-separated values".to_string());
        }
        Ok(AutoOrVec::Values(vals))
    }
}

impl AutoOrVec {
    pub fn to_bandwidth_spec(&self) -> BandwidthSpec {
        match self {
            AutoOrVec::Auto => BandwidthSpec::Auto,
            AutoOrVec::Values(v) => BandwidthSpec::Fixed(v.clone()),
        }
    }

    pub fn spec_string(&self) -> String {
        match self {
            AutoOrVec::Auto => "auto".to_string(),
            AutoOrVec::Values(v) => v
                .iter()
                .map(|x| format!("{x}"))
                .collect::<Vec<_>>()
                .join(","),
        }
    }
}

pub fn parse_divergence(s: &str) -> Result<HddKind> {
    match s {
        "js" => Ok(HddKind::JensenShannon),
        "hellinger" => Ok(HddKind::SquaredHellinger),
        "tv" => Ok(HddKind::TotalVariation),
        other => Err(CliError::Usage(format!(
            "unknown divergence `{other}` (expected js, hellinger, or tv)"
        ))),
    }
}

/// Comma-separated positive float list.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let vals: std::result::Result<Vec<f64>, _> =
        s.split(',').map(|p| p.trim().parse::<f64>()).collect();
    let vals = vals.map_err(|e| format!("{e}"))?;
    if vals.is_empty() {
        return Err("empty grid".to_string());
    }
    Ok(vals)
}

/// Environment variable consulted when --threads is absent.
pub const THREADS_ENV: &str = "HDD_THREADS";

/// Build the worker pool: explicit flag wins, then the environment variable,
/// then all cores.
pub fn thread_pool(threads: Option<usize>) -> Result<rayon::ThreadPool> {
    let n = match threads {
        Some(n) => n,
        None => std::env::var(THREADS_ENV)
            .ok()
            .and_then(|v| v.parse::<usize>().ok())
            .unwrap_or(0),
    };
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Embedding-stage flags shared by embed, gram-eval, and regress.
#[derive(Debug, Clone)]
pub struct EmbedStageArgs {
    pub num_lambdas: usize,
    pub basis_m: usize,
    pub num_nodes: usize,
    pub rks_dim: usize,
    pub kde_h: AutoOrVec,
    pub halton_nodes: bool,
    pub clip_floor: f64,
}

impl EmbedStageArgs {
    pub fn to_config(
        &self,
        kind: HddKind,
        dim: usize,
        sigma_k: f64,
        seed: u64,
    ) -> EmbedderConfig {
        let mut kde = KdeOptions::default();
        kde.bandwidths = self.kde_h.to_bandwidth_spec();
        kde.clip_floor = self.clip_floor;
        EmbedderConfig {
            kind,
            dim,
            num_lambdas: self.num_lambdas,
            basis: BasisSpec::Tensor { m: self.basis_m },
            num_nodes: self.num_nodes,
            node_source: if self.halton_nodes {
                NodeSource::Halton
            } else {
                NodeSource::Uniform
            },
            rks_dim: self.rks_dim,
            sigma_k,
            kde,
            seed,
        }
    }
}

/// Resolved embedding configuration as recorded in reports.
#[derive(Debug, Serialize)]
pub struct EmbedConfigReport {
    pub divergence: String,
    pub dim: usize,
    pub num_lambdas: usize,
    pub basis_m: usize,
    pub basis_size: usize,
    pub num_nodes: usize,
    pub halton_nodes: bool,
    pub rks_dim: usize,
    pub sigma_k: f64,
    pub sigma_k_spec: String,
    pub kde_h: String,
    pub clip_floor: f64,
    pub dataset_kind: String,
    pub num_distributions: usize,
    pub points_per_distribution: usize,
    pub dataset_seed: u64,
}

/// Apply a feature map to many vectors, in parallel, preserving order.
pub fn apply_rks_batch(map: &hdd_embed::RksMap, rows: &[Vec<f64>]) -> Result<Array2<f64>> {
    let applied: Vec<hdd_embed::Result<Vec<f64>>> =
        rows.par_iter().map(|r| map.apply(r)).collect();
    let mut flat = Vec::with_capacity(rows.len() * map.output_dim());
    for r in applied {
        flat.extend_from_slice(&r?);
    }
    Array2::from_shape_vec((rows.len(), map.output_dim()), flat)
        .map_err(|e| CliError::Usage(format!("feature assembly: {e}")))
}

/// Pairwise squared feature distances, exponentiated into a Gram matrix.
pub fn rbf_gram_from_rows(rows: &[Vec<f64>], sigma_k: f64) -> Array2<f64> {
    let n = rows.len();
    let mut g = Array2::zeros((n, n));
    let inv = 1.0 / (2.0 * sigma_k * sigma_k);
    for i in 0..n {
        g[(i, i)] = 1.0;
        for j in (i + 1)..n {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            let k = (-d2 * inv).exp();
            g[(i, j)] = k;
            g[(j, i)] = k;
        }
    }
    g
}

/// All sample sets must share the manifest dimension; returns it.
pub fn common_dim(samples: &[SampleSet]) -> Result<usize> {
    let dim = samples
        .first()
        .ok_or_else(|| CliError::Usage("empty dataset".to_string()))?
        .dim();
    if samples.iter().any(|s| s.dim() != dim) {
        return Err(CliError::Usage("samples disagree on dimension".to_string()));
    }
    Ok(dim)
}
