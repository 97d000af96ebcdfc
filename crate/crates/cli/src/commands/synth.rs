use std::path::{Path, PathBuf};

use hdd_embed::datasets::{gen_gram_gmms, gen_mixture_count, GmmCovariance};
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::io::{write_matrix_csv, write_targets};
use crate::manifest::{GramGmmParams, RunManifest};
use crate::report::{MetricsReport, Timings};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DatasetKind {
    GramGmm,
    MixtureCount,
}

impl DatasetKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "gram-gmm" => Ok(DatasetKind::GramGmm),
            "mixture-count" => Ok(DatasetKind::MixtureCount),
            other => Err(CliError::Usage(format!(
                "unknown dataset kind `{other}` (expected gram-gmm or mixture-count)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DatasetKind::GramGmm => "gram-gmm",
            DatasetKind::MixtureCount => "mixture-count",
        }
    }
}

#[derive(Debug)]
pub struct SynthParams {
    pub kind: DatasetKind,
    pub num_distributions: usize,
    pub points: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct SynthConfigReport {
    kind: String,
    num_distributions: usize,
    points_per_distribution: usize,
    seed: u64,
}

pub struct SynthOutcome {
    pub manifest_path: PathBuf,
    pub manifest: RunManifest,
}

/// Generate a dataset and write one sample file per distribution, a targets
/// file, and a manifest describing all of it.
pub fn cmd_synth(p: &SynthParams) -> Result<SynthOutcome> {
    if p.num_distributions == 0 || p.points == 0 {
        return Err(CliError::Usage(
            "need at least one distribution and one point".to_string(),
        ));
    }
    let mut timings = Timings::default();
    let data = timings.time("generate", || match p.kind {
        DatasetKind::GramGmm => gen_gram_gmms(p.num_distributions, p.points, p.seed),
        DatasetKind::MixtureCount => gen_mixture_count(p.num_distributions, p.points, p.seed),
    })?;

    let mut sample_files = Vec::with_capacity(data.samples.len());
    timings.time("write_samples", || -> Result<()> {
        for (i, s) in data.samples.iter().enumerate() {
            let rel = format!("samples/dist_{i:05}.csv");
            write_matrix_csv(&p.out_dir.join(&rel), s.points(), None)?;
            sample_files.push(rel);
        }
        Ok(())
    })?;

    write_targets(&p.out_dir.join("targets.csv"), &data.targets)?;

    let gmm_params = data.pdfs.as_ref().map(|pdfs| {
        pdfs.iter()
            .map(|g| GramGmmParams {
                means: g.components().iter().map(|c| c.mean().to_vec()).collect(),
                sds: g
                    .components()
                    .iter()
                    .map(|c| match c.covariance() {
                        GmmCovariance::Diagonal(sds) => sds.clone(),
                        GmmCovariance::Full2(_) => unreachable!("gram-gmm is diagonal"),
                    })
                    .collect(),
            })
            .collect::<Vec<_>>()
    });

    let manifest = RunManifest {
        kind: p.kind.name().to_string(),
        num_distributions: p.num_distributions,
        points_per_distribution: p.points,
        dim: 2,
        seed: p.seed,
        sample_files,
        targets_file: "targets.csv".to_string(),
        gmm_params,
    };
    let manifest_path = p.out_dir.join("manifest.json");
    manifest.save(&manifest_path)?;

    let config = SynthConfigReport {
        kind: p.kind.name().to_string(),
        num_distributions: p.num_distributions,
        points_per_distribution: p.points,
        seed: p.seed,
    };
    let mut report = MetricsReport::new("synth", p.seed, &config)?;
    report.metric("num_distributions", p.num_distributions as f64);
    report.metric("points_per_distribution", p.points as f64);
    report.save(&p.out_dir.join("report.json"))?;
    timings.save(&p.out_dir.join("timings.json"))?;

    Ok(SynthOutcome { manifest_path, manifest })
}

/// Convenience for tests: synthesize into a directory and return the
/// manifest path.
pub fn synth_into(kind: DatasetKind, n: usize, points: usize, seed: u64, dir: &Path) -> Result<PathBuf> {
    let out = cmd_synth(&SynthParams {
        kind,
        num_distributions: n,
        points,
        seed,
        out_dir: dir.to_path_buf(),
    })?;
    Ok(out.manifest_path)
}
