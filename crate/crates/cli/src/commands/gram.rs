use std::path::PathBuf;

use hdd_embed::learning::gram_r2;
use hdd_embed::pipeline::{density_grid, hdd_from_grids, AStage, HddEmbedder, KdeOptions};
use hdd_embed::HddKind;
use ndarray::Array2;
use rayon::prelude::*;

use crate::commands::common::{
    apply_rks_batch, common_dim, rbf_gram_from_rows, thread_pool, AutoOrValue, EmbedConfigReport,
    EmbedStageArgs,
};
use crate::error::{CliError, Result};
use crate::io::write_matrix_csv;
use crate::manifest::RunManifest;
use crate::report::{report_paths, MetricsReport, Timings};

#[derive(Debug)]
pub struct GramEvalParams {
    pub manifest: PathBuf,
    pub divergence: HddKind,
    pub stage: EmbedStageArgs,
    pub sigma_k: AutoOrValue,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub threads: Option<usize>,
    /// Richardson tolerance for the reference quadrature.
    pub quad_tol: f64,
}

pub struct GramOutcome {
    pub r2_ent: f64,
    pub r2_pc: f64,
    pub r2_rks: f64,
    pub sigma_k: f64,
    pub reference: Array2<f64>,
    pub gram_ent: Array2<f64>,
    pub gram_pc: Array2<f64>,
    pub gram_rks: Array2<f64>,
}

/// Compare three estimators of the divergence kernel Gram matrix against
/// exact quadrature of the true densities: the split-sample entropy
/// estimator, the exact RBF on projection-coefficient distances, and the
/// random-feature dot products.
pub fn cmd_gram_eval(p: &GramEvalParams) -> Result<GramOutcome> {
    let pool = thread_pool(p.threads)?;
    let manifest = RunManifest::load(&p.manifest)?;
    let base = RunManifest::base_dir(&p.manifest);
    let samples = manifest.load_samples(&base)?;
    let pdfs = manifest.build_pdfs()?;
    let dim = common_dim(&samples)?;
    if dim != 2 {
        return Err(CliError::Usage(format!(
            "gram-eval expects two-dimensional data, got dim {dim}"
        )));
    }
    let n = samples.len();

    let mut timings = Timings::default();
    let cfg = p.stage.to_config(p.divergence, dim, 1.0, p.seed);
    let stage = AStage::new(&cfg)?;

    let out = pool.install(|| -> Result<GramOutcome> {
        // Projection features on full samples.
        let a_rows: Vec<Vec<f64>> = timings.time("a_features", || -> hdd_embed::Result<_> {
            let feats = stage.a_batch(&samples)?;
            Ok(feats.iter().map(|a| a.values().to_vec()).collect::<Vec<_>>())
        })?;
        let sigma_k = match p.sigma_k {
            AutoOrValue::Value(v) => v,
            AutoOrValue::Auto => hdd_embed::pipeline::median_pairwise_distance(&a_rows, 200)?,
        };

        // Reference Gram from tensor-grid quadrature of the true densities.
        let grids: Vec<Vec<f64>> = timings.time("density_grids", || -> hdd_embed::Result<_> {
            pdfs.par_iter()
                .map(|g| {
                    let f = |x: &[f64]| g.pdf(x);
                    density_grid(&f, 2)
                })
                .collect::<hdd_embed::Result<Vec<_>>>()
        })?;
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .collect();
        let kind = p.divergence;
        let tol = p.quad_tol;
        let d2_vals: Vec<hdd_embed::Result<f64>> = timings.time("reference_quadrature", || {
            pairs
                .par_iter()
                .map(|&(i, j)| hdd_from_grids(&grids[i], &grids[j], 2, kind, tol))
                .collect()
        });
        let mut reference = Array2::zeros((n, n));
        for (&(i, j), v) in pairs.iter().zip(d2_vals) {
            let k = (-v? / (2.0 * sigma_k * sigma_k)).exp();
            reference[(i, j)] = k;
            reference[(j, i)] = k;
        }
        drop(grids);

        // Entropy-estimator Gram.
        let kde = KdeOptions {
            bandwidths: p.stage.kde_h.to_bandwidth_spec(),
            clip_floor: p.stage.clip_floor,
            ..KdeOptions::default()
        };
        let ent_divergences = timings.time("entropy_gram", || {
            hdd_embed::pipeline::entropy_js_gram(&samples, &kde)
        })?;
        let mut gram_ent = Array2::zeros((n, n));
        for i in 0..n {
            for j in 0..n {
                gram_ent[(i, j)] =
                    (-ent_divergences[(i, j)] / (2.0 * sigma_k * sigma_k)).exp();
            }
        }

        // Exact RBF on projection-coefficient distances.
        let gram_pc = timings.time("pc_gram", || rbf_gram_from_rows(&a_rows, sigma_k));

        // Random-feature dot products.
        let embedder = HddEmbedder::from_stage(stage.clone(), sigma_k)?;
        let z = timings.time("rks", || apply_rks_batch(embedder.rks(), &a_rows))?;
        let gram_rks = timings.time("rks_gram", || z.dot(&z.t()));

        let r2_ent = gram_r2(&gram_ent, &reference)?;
        let r2_pc = gram_r2(&gram_pc, &reference)?;
        let r2_rks = gram_r2(&gram_rks, &reference)?;
        Ok(GramOutcome {
            r2_ent,
            r2_pc,
            r2_rks,
            sigma_k,
            reference,
            gram_ent,
            gram_pc,
            gram_rks,
        })
    })?;

    let config = EmbedConfigReport {
        divergence: p.divergence.name().to_string(),
        dim,
        num_lambdas: p.stage.num_lambdas,
        basis_m: p.stage.basis_m,
        basis_size: p.stage.basis_m.pow(dim as u32),
        num_nodes: p.stage.num_nodes,
        halton_nodes: p.stage.halton_nodes,
        rks_dim: p.stage.rks_dim,
        sigma_k: out.sigma_k,
        sigma_k_spec: p.sigma_k.spec_string(),
        kde_h: p.stage.kde_h.spec_string(),
        clip_floor: p.stage.clip_floor,
        dataset_kind: manifest.kind.clone(),
        num_distributions: manifest.num_distributions,
        points_per_distribution: manifest.points_per_distribution,
        dataset_seed: manifest.seed,
    };
    let mut report = MetricsReport::new("gram-eval", p.seed, &config)?;
    report.metric("r2_ent", out.r2_ent);
    report.metric("r2_pc", out.r2_pc);
    report.metric("r2_rks", out.r2_rks);
    report.metric("sigma_k", out.sigma_k);
    report.metric("num_distributions", n as f64);

    write_matrix_csv(&p.out_dir.join("gram_ent.csv"), &out.gram_ent, None)?;
    write_matrix_csv(&p.out_dir.join("gram_pc.csv"), &out.gram_pc, None)?;
    write_matrix_csv(&p.out_dir.join("gram_rks.csv"), &out.gram_rks, None)?;
    let (report_path, timings_path) = report_paths(&p.out_dir);
    report.save(&report_path)?;
    timings.save(&timings_path)?;
    Ok(out)
}
