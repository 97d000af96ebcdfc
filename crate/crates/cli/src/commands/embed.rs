use std::path::PathBuf;

use hdd_embed::pipeline::{AStage, HddEmbedder};
use hdd_embed::HddKind;

use crate::commands::common::{
    apply_rks_batch, common_dim, thread_pool, AutoOrValue, EmbedConfigReport, EmbedStageArgs,
};
use crate::error::{CliError, Result};
use crate::io::write_matrix_csv;
use crate::manifest::RunManifest;
use crate::report::{MetricsReport, Timings};

#[derive(Debug)]
pub struct EmbedParams {
    pub manifest: PathBuf,
    pub divergence: HddKind,
    pub stage: EmbedStageArgs,
    pub sigma_k: AutoOrValue,
    pub seed: u64,
    pub out: PathBuf,
    pub report: Option<PathBuf>,
    pub threads: Option<usize>,
}

pub struct EmbedOutcome {
    pub features_path: PathBuf,
    pub report_path: PathBuf,
    pub sigma_k: f64,
}

/// Embed every distribution in a dataset and write the N x D feature matrix.
pub fn cmd_embed(p: &EmbedParams) -> Result<EmbedOutcome> {
    let pool = thread_pool(p.threads)?;
    let manifest = RunManifest::load(&p.manifest)?;
    let base = RunManifest::base_dir(&p.manifest);
    let samples = manifest.load_samples(&base)?;
    let dim = common_dim(&samples)?;

    let mut timings = Timings::default();
    let cfg = p.stage.to_config(p.divergence, dim, 1.0, p.seed);
    let stage = AStage::new(&cfg)?;

    let outcome = pool.install(|| -> Result<_> {
        // KDE at the shared nodes, then projections, as separate passes so
        // the stage costs are visible in the timings.
        let density_vals = timings.time("kde", || -> hdd_embed::Result<Vec<Vec<f64>>> {
            use rayon::prelude::*;
            samples
                .par_iter()
                .map(|s| stage.density_at_nodes(s))
                .collect()
        })?;
        let a_feats = timings.time("projection", || -> hdd_embed::Result<Vec<_>> {
            use rayon::prelude::*;
            density_vals
                .par_iter()
                .map(|v| stage.a_from_density(v))
                .collect()
        })?;
        let a_rows: Vec<Vec<f64>> = a_feats.iter().map(|a| a.values().to_vec()).collect();
        let sigma_k = match p.sigma_k {
            AutoOrValue::Value(v) => v,
            AutoOrValue::Auto => {
                hdd_embed::pipeline::median_pairwise_distance(&a_rows, 200)?
            }
        };
        let imag_zero = a_feats
            .iter()
            .all(|a| a.imaginary_block().iter().all(|&x| x == 0.0));
        let embedder = HddEmbedder::from_stage(stage.clone(), sigma_k)?;
        let z = timings.time("rks", || apply_rks_batch(embedder.rks(), &a_rows))?;
        Ok((z, sigma_k, imag_zero, a_feats.len()))
    })?;
    let (z, sigma_k, imag_zero, n_embedded) = outcome;

    let config = EmbedConfigReport {
        divergence: p.divergence.name().to_string(),
        dim,
        num_lambdas: p.stage.num_lambdas,
        basis_m: p.stage.basis_m,
        basis_size: stage_basis_size(&p.stage, dim),
        num_nodes: p.stage.num_nodes,
        halton_nodes: p.stage.halton_nodes,
        rks_dim: p.stage.rks_dim,
        sigma_k,
        sigma_k_spec: p.sigma_k.spec_string(),
        kde_h: p.stage.kde_h.spec_string(),
        clip_floor: p.stage.clip_floor,
        dataset_kind: manifest.kind.clone(),
        num_distributions: manifest.num_distributions,
        points_per_distribution: manifest.points_per_distribution,
        dataset_seed: manifest.seed,
    };
    let mut report = MetricsReport::new("embed", p.seed, &config)?;
    report.metric("num_embedded", n_embedded as f64);
    report.metric("feature_dim", p.stage.rks_dim as f64);
    report.metric("sigma_k", sigma_k);
    if p.divergence == HddKind::SquaredHellinger {
        report.note(
            "imaginary_blocks_zero",
            if imag_zero { "true" } else { "false" },
        );
    }

    let header = format!("# D={} config_hash={}", p.stage.rks_dim, report.config_hash);
    write_matrix_csv(&p.out, &z, Some(&header))?;

    let report_path = p
        .report
        .clone()
        .unwrap_or_else(|| sibling(&p.out, "report.json"));
    report.save(&report_path)?;
    timings.save(&sibling(&report_path, "timings.json"))?;

    Ok(EmbedOutcome {
        features_path: p.out.clone(),
        report_path,
        sigma_k,
    })
}

fn stage_basis_size(stage: &EmbedStageArgs, dim: usize) -> usize {
    stage.basis_m.pow(dim as u32)
}

fn sibling(path: &std::path::Path, name: &str) -> PathBuf {
    let stem = path
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("out")
        .to_string();
    path.with_file_name(format!("{stem}.{name}"))
}

pub fn embed_kind_name(kind: HddKind) -> &'static str {
    kind.name()
}
