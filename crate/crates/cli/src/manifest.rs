//! Dataset manifests: what was generated, where the files live, and enough
//! parameters to rebuild the true pdfs when the generator knows them.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use hdd_embed::density::SampleSet;
use hdd_embed::TruncatedGmm;

use crate::error::{CliError, Result};
use crate::io::{read_matrix_csv, read_targets};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramGmmParams {
    pub means: Vec<Vec<f64>>,
    pub sds: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub kind: String,
    pub num_distributions: usize,
    pub points_per_distribution: usize,
    pub dim: usize,
    pub seed: u64,
    pub sample_files: Vec<String>,
    pub targets_file: String,
    /// Present for gram-gmm datasets; lets commands rebuild the true pdfs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gmm_params: Option<Vec<GramGmmParams>>,
}

impl RunManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| CliError::Usage(format!("manifest serialization: {e}")))?;
        crate::io::write_atomic(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<RunManifest> {
        let text = fs::read_to_string(path).map_err(CliError::io(path))?;
        let m: RunManifest = serde_json::from_str(&text)
            .map_err(|e| CliError::Usage(format!("{}: bad manifest: {e}", path.display())))?;
        if m.sample_files.len() != m.num_distributions {
            return Err(CliError::Usage(format!(
                "{}: {} sample files for {} distributions",
                path.display(),
                m.sample_files.len(),
                m.num_distributions
            )));
        }
        Ok(m)
    }

    /// Directory the manifest's relative file names are resolved against.
    pub fn base_dir(path: &Path) -> PathBuf {
        path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf()
    }

    pub fn load_samples(&self, base: &Path) -> Result<Vec<SampleSet>> {
        let mut out = Vec::with_capacity(self.sample_files.len());
        for f in &self.sample_files {
            let m = read_matrix_csv(&base.join(f))?;
            if m.ncols() != self.dim {
                return Err(CliError::Usage(format!(
                    "{f}: {} columns, manifest says dim {}",
                    m.ncols(),
                    self.dim
                )));
            }
            out.push(SampleSet::new(m).map_err(CliError::from)?);
        }
        Ok(out)
    }

    pub fn load_targets(&self, base: &Path) -> Result<Vec<f64>> {
        let t = read_targets(&base.join(&self.targets_file))?;
        if t.len() != self.num_distributions {
            return Err(CliError::Usage(format!(
                "{}: {} targets for {} distributions",
                self.targets_file,
                t.len(),
                self.num_distributions
            )));
        }
        Ok(t)
    }

    /// Rebuild the true pdfs recorded for a gram-gmm dataset.
    pub fn build_pdfs(&self) -> Result<Vec<TruncatedGmm>> {
        let params = self.gmm_params.as_ref().ok_or_else(|| {
            CliError::Usage(
                "manifest has no gmm parameters; true pdfs are unavailable".to_string(),
            )
        })?;
        params
            .iter()
            .map(|p| {
                TruncatedGmm::new_diagonal(
                    p.means.clone(),
                    p.sds.clone(),
                    vec![0.0; self.dim],
                    vec![1.0; self.dim],
                )
                .map_err(CliError::from)
            })
            .collect()
    }
}
