//! The end-to-end embedder: sample set -> KDE -> projection coefficients of
//! the g-transformed density -> random Fourier features, plus the baseline
//! embeddings (L2, mean-map) and the reference kernel estimators used to
//! judge them (entropy-based Jensen-Shannon estimate and exact tensor-grid
//! quadrature of the divergence).
//!
//! An embedder freezes all randomness at construction: the lambda draws, the
//! integration nodes, and the frequency matrix all come from labeled streams
//! of the config seed, so a config determines the embedding map exactly.
//! Batches fan out across threads but every per-distribution computation is
//! a fixed sequential loop, which keeps outputs bit-identical regardless of
//! thread count or evaluation order.

use ndarray::Array2;
use rayon::prelude::*;

use crate::basis::{
    build_a_from_values, draw_integration_nodes, halton_nodes, make_sobolev_index_set,
    make_tensor_index_set, AFeatures, BasisMatrix, IndexSet, IntegrationNodes,
};
use crate::density::{
    kde_fit_with, BandwidthSpec, BoundaryMode, DensityEstimate, SampleSet, DEFAULT_CLIP_FLOOR,
};
use crate::divergence::{closed_form_kappa, HddKind, HddMeasure};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::quadrature::simpson_weights;
use crate::rks::{rks_draw, RksMap};
use crate::rng::derive_u64;

/// Basis construction choice for the projection stage.
#[derive(Debug, Clone, PartialEq)]
pub enum BasisSpec {
    /// m lowest-frequency real trig functions per dimension, |V| = m^dim.
    Tensor { m: usize },
    /// Sobolev ball: frequency vectors with sum |k_j|^(2s) <= t.
    Sobolev { s: f64, t: f64 },
}

/// Where integration nodes come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSource {
    /// Seeded iid uniform draws (the default).
    Uniform,
    /// Deterministic Halton sequence.
    Halton,
}

/// Density-estimation settings shared by the pipeline and the reference
/// estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeOptions {
    pub bandwidths: BandwidthSpec,
    pub boundary: BoundaryMode,
    pub clip_floor: f64,
    pub clip_ceiling: Option<f64>,
}

impl Default for KdeOptions {
    fn default() -> Self {
        KdeOptions {
            bandwidths: BandwidthSpec::Auto,
            boundary: BoundaryMode::Mirror,
            clip_floor: DEFAULT_CLIP_FLOOR,
            clip_ceiling: None,
        }
    }
}

impl KdeOptions {
    pub fn fit(&self, sample: &SampleSet) -> Result<DensityEstimate> {
        kde_fit_with(
            sample,
            &self.bandwidths,
            self.boundary,
            self.clip_floor,
            self.clip_ceiling,
        )
    }
}

/// Full configuration of an embedder.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbedderConfig {
    pub kind: HddKind,
    /// Dimension of the sample space.
    pub dim: usize,
    /// Number of lambda draws M.
    pub num_lambdas: usize,
    pub basis: BasisSpec,
    /// Number of Monte Carlo integration nodes.
    pub num_nodes: usize,
    pub node_source: NodeSource,
    /// Output dimension D of the random Fourier map (even).
    pub rks_dim: usize,
    /// Bandwidth of the outer RBF kernel.
    pub sigma_k: f64,
    pub kde: KdeOptions,
    pub seed: u64,
}

impl EmbedderConfig {
    /// Defaults: M = 5, tensor basis with 10 functions per dimension,
    /// 5000 integration nodes, D = 5000, mirror-corrected auto-bandwidth KDE.
    pub fn new(kind: HddKind, dim: usize) -> Self {
        EmbedderConfig {
            kind,
            dim,
            num_lambdas: 5,
            basis: BasisSpec::Tensor { m: 10 },
            num_nodes: 5000,
            node_source: NodeSource::Uniform,
            rks_dim: 5000,
            sigma_k: 1.0,
            kde: KdeOptions::default(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        fn bad(field: &'static str, reason: impl Into<String>) -> Error {
            Error::Config { field, reason: reason.into() }
        }
        if self.dim == 0 {
            return Err(bad("dim", "must be >= 1"));
        }
        if self.num_lambdas == 0 {
            return Err(bad("num_lambdas", "must be >= 1"));
        }
        match &self.basis {
            BasisSpec::Tensor { m } if *m == 0 => {
                return Err(bad("basis.m", "must be >= 1"));
            }
            BasisSpec::Sobolev { s, t } => {
                if !(*s > 0.0 && *s <= 1.0) {
                    return Err(bad("basis.s", format!("must be in (0, 1], got {s}")));
                }
                if !(*t > 0.0) {
                    return Err(bad("basis.t", format!("must be > 0, got {t}")));
                }
            }
            _ => {}
        }
        if self.num_nodes == 0 {
            return Err(bad("num_nodes", "must be >= 1"));
        }
        if self.rks_dim == 0 || self.rks_dim % 2 != 0 {
            return Err(bad("rks_dim", format!("must be even and positive, got {}", self.rks_dim)));
        }
        if !(self.sigma_k > 0.0) {
            return Err(bad("sigma_k", format!("must be > 0, got {}", self.sigma_k)));
        }
        if self.kde.clip_floor < 0.0 {
            return Err(bad("kde.clip_floor", "must be nonnegative"));
        }
        if let Some(c) = self.kde.clip_ceiling {
            if !(c > 0.0) || c < self.kde.clip_floor {
                return Err(bad("kde.clip_ceiling", "must be positive and >= clip_floor"));
            }
        }
        if let BandwidthSpec::Fixed(h) = &self.kde.bandwidths {
            if h.len() != self.dim || h.iter().any(|v| !(*v > 0.0)) {
                return Err(bad("kde.bandwidths", "need one positive bandwidth per dimension"));
            }
        }
        Ok(())
    }

    fn build_index_set(&self) -> Result<IndexSet> {
        match &self.basis {
            BasisSpec::Tensor { m } => make_tensor_index_set(self.dim, *m),
            BasisSpec::Sobolev { s, t } => make_sobolev_index_set(self.dim, *s, *t),
        }
    }
}

/// The sigma-free front of the pipeline: everything needed to turn a sample
/// set into projection-coefficient features. Splitting this from the RKS
/// stage lets the outer bandwidth be chosen from the features themselves.
#[derive(Debug, Clone)]
pub struct AStage {
    config: EmbedderConfig,
    measure: HddMeasure,
    lambdas: Vec<f64>,
    index_set: IndexSet,
    nodes: IntegrationNodes,
    phi: BasisMatrix,
}

impl AStage {
    pub fn new(config: &EmbedderConfig) -> Result<Self> {
        config.validate()?;
        let measure = HddMeasure::new(config.kind);
        let lambdas = measure.sample_lambdas(config.num_lambdas, config.seed)?;
        let index_set = config.build_index_set()?;
        let nodes = match config.node_source {
            NodeSource::Uniform => {
                draw_integration_nodes(config.dim, config.num_nodes, config.seed)?
            }
            NodeSource::Halton => halton_nodes(config.dim, config.num_nodes)?,
        };
        let phi = BasisMatrix::new(&index_set, &nodes)?;
        Ok(AStage { config: config.clone(), measure, lambdas, index_set, nodes, phi })
    }

    pub fn config(&self) -> &EmbedderConfig {
        &self.config
    }

    pub fn measure(&self) -> &HddMeasure {
        &self.measure
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn index_set(&self) -> &IndexSet {
        &self.index_set
    }

    pub fn nodes(&self) -> &IntegrationNodes {
        &self.nodes
    }

    /// Feature length 2 M |V| produced by this stage.
    pub fn feature_len(&self) -> usize {
        2 * self.lambdas.len() * self.index_set.len()
    }

    fn check_sample(&self, sample: &SampleSet) -> Result<()> {
        if sample.dim() != self.config.dim {
            return Err(Error::shape(format!(
                "sample dimension {} vs embedder dimension {}",
                sample.dim(),
                self.config.dim
            )));
        }
        Ok(())
    }

    /// KDE values of the sample at the shared integration nodes.
    pub fn density_at_nodes(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        self.check_sample(sample)?;
        let est = self.config.kde.fit(sample)?;
        est.eval(self.nodes.points())
    }

    /// Projection features from precomputed node values.
    pub fn a_from_density(&self, density_at_nodes: &[f64]) -> Result<AFeatures> {
        build_a_from_values(density_at_nodes, &self.measure, &self.lambdas, &self.phi)
    }

    pub fn a_features(&self, sample: &SampleSet) -> Result<AFeatures> {
        let vals = self.density_at_nodes(sample)?;
        self.a_from_density(&vals)
    }

    pub fn a_batch(&self, samples: &[SampleSet]) -> Result<Vec<AFeatures>> {
        collect_batch(samples.par_iter().map(|s| self.a_features(s)).collect())
    }
}

/// A frozen map from sample sets to R^D approximating the chosen
/// divergence-based RBF kernel.
#[derive(Debug, Clone)]
pub struct HddEmbedder {
    stage: AStage,
    rks: RksMap,
}

impl HddEmbedder {
    pub fn new(config: &EmbedderConfig) -> Result<Self> {
        let stage = AStage::new(config)?;
        HddEmbedder::from_stage(stage, config.sigma_k)
    }

    /// Attach the RKS stage to an existing front end, overriding the outer
    /// bandwidth (used when sigma_k is resolved from the features).
    pub fn from_stage(stage: AStage, sigma_k: f64) -> Result<Self> {
        if !(sigma_k > 0.0) {
            return Err(Error::Config { field: "sigma_k", reason: format!("must be > 0, got {sigma_k}") });
        }
        let rks = rks_draw(stage.feature_len(), stage.config.rks_dim, sigma_k, stage.config.seed)?;
        let mut stage = stage;
        stage.config.sigma_k = sigma_k;
        Ok(HddEmbedder { stage, rks })
    }

    pub fn config(&self) -> &EmbedderConfig {
        &self.stage.config
    }

    pub fn stage(&self) -> &AStage {
        &self.stage
    }

    pub fn rks(&self) -> &RksMap {
        &self.rks
    }

    /// Embed one sample set: KDE, projection, then random features.
    pub fn embed(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        let a = self.stage.a_features(sample)?;
        self.rks.apply(a.values())
    }

    pub fn embed_a(&self, a: &AFeatures) -> Result<Vec<f64>> {
        self.rks.apply(a.values())
    }

    /// Embed a batch; row i is exactly `embed(samples[i])`.
    pub fn embed_batch(&self, samples: &[SampleSet]) -> Result<Array2<f64>> {
        let rows = collect_batch(samples.par_iter().map(|s| self.embed(s)).collect())?;
        rows_to_matrix(rows, self.stage.config.rks_dim)
    }
}

fn collect_batch<T>(results: Vec<Result<T>>) -> Result<Vec<T>> {
    let mut out = Vec::with_capacity(results.len());
    for (index, r) in results.into_iter().enumerate() {
        match r {
            Ok(v) => out.push(v),
            Err(e) => return Err(Error::Batch { index, source: Box::new(e) }),
        }
    }
    Ok(out)
}

fn rows_to_matrix(rows: Vec<Vec<f64>>, width: usize) -> Result<Array2<f64>> {
    let n = rows.len();
    let mut flat = Vec::with_capacity(n * width);
    for r in rows {
        debug_assert_eq!(r.len(), width);
        flat.extend_from_slice(&r);
    }
    Array2::from_shape_vec((n, width), flat).map_err(|e| Error::shape(e.to_string()))
}

/// Kernel estimate between two embedded vectors: a plain dot product.
pub fn approx_kernel(z_p: &[f64], z_q: &[f64]) -> Result<f64> {
    if z_p.len() != z_q.len() {
        return Err(Error::shape(format!(
            "feature lengths {} vs {}",
            z_p.len(),
            z_q.len()
        )));
    }
    Ok(dot(z_p, z_q))
}

/// The L2 baseline: identical pipeline but projecting the density itself
/// (no g transform), so the features approximate exp(-|p - q|_2^2 / 2 sigma^2).
#[derive(Debug, Clone)]
pub struct L2Embedder {
    config: EmbedderConfig,
    nodes: IntegrationNodes,
    phi: BasisMatrix,
    rks: RksMap,
}

impl L2Embedder {
    pub fn new(config: &EmbedderConfig) -> Result<Self> {
        config.validate()?;
        let index_set = config.build_index_set()?;
        let nodes = match config.node_source {
            NodeSource::Uniform => {
                draw_integration_nodes(config.dim, config.num_nodes, config.seed)?
            }
            NodeSource::Halton => halton_nodes(config.dim, config.num_nodes)?,
        };
        let phi = BasisMatrix::new(&index_set, &nodes)?;
        let rks = rks_draw(index_set.len(), config.rks_dim, config.sigma_k, config.seed)?;
        Ok(L2Embedder { config: config.clone(), nodes, phi, rks })
    }

    /// Projection coefficients of the density estimate itself.
    pub fn coefficients(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        if sample.dim() != self.config.dim {
            return Err(Error::shape(format!(
                "sample dimension {} vs embedder dimension {}",
                sample.dim(),
                self.config.dim
            )));
        }
        let est = self.config.kde.fit(sample)?;
        let vals = est.eval(self.nodes.points())?;
        Ok(self.phi.project(&vals))
    }

    pub fn embed(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        let coeffs = self.coefficients(sample)?;
        self.rks.apply(&coeffs)
    }

    pub fn embed_coefficients(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        self.rks.apply(coeffs)
    }

    pub fn coefficient_batch(&self, samples: &[SampleSet]) -> Result<Vec<Vec<f64>>> {
        collect_batch(samples.par_iter().map(|s| self.coefficients(s)).collect())
    }

    pub fn embed_batch(&self, samples: &[SampleSet]) -> Result<Array2<f64>> {
        let rows = collect_batch(samples.par_iter().map(|s| self.embed(s)).collect())?;
        rows_to_matrix(rows, self.config.rks_dim)
    }
}

/// One-shot L2 embedding of a single sample under a config.
pub fn l2_embed(config: &EmbedderConfig, sample: &SampleSet) -> Result<Vec<f64>> {
    L2Embedder::new(config)?.embed(sample)
}

/// The mean-map baseline: inner random features on raw points, averaged over
/// the sample, then an outer RKS map so dot products approximate
/// exp(-MMD^2 / 2 sigma^2).
#[derive(Debug, Clone)]
pub struct MmdEmbedder {
    inner: RksMap,
    outer: RksMap,
    dim: usize,
}

impl MmdEmbedder {
    pub fn new(
        dim: usize,
        d_inner: usize,
        sigma_inner: f64,
        d_out: usize,
        sigma_k: f64,
        seed: u64,
    ) -> Result<Self> {
        let inner = rks_draw(dim, d_inner, sigma_inner, derive_u64(seed, "mmd.inner"))?;
        let outer = rks_draw(d_inner, d_out, sigma_k, derive_u64(seed, "mmd.outer"))?;
        Ok(MmdEmbedder { inner, outer, dim })
    }

    /// Empirical mean embedding (1/n) sum_i z(X_i) of the raw points.
    pub fn mean_embedding(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        if sample.dim() != self.dim {
            return Err(Error::shape(format!(
                "sample dimension {} vs embedder dimension {}",
                sample.dim(),
                self.dim
            )));
        }
        let n = sample.n();
        let mut acc = vec![0.0; self.inner.output_dim()];
        for row in sample.points().rows() {
            let z = self.inner.apply(row.as_slice().expect("contiguous"))?;
            for (a, b) in acc.iter_mut().zip(&z) {
                *a += b;
            }
        }
        for a in acc.iter_mut() {
            *a /= n as f64;
        }
        Ok(acc)
    }

    pub fn embed(&self, sample: &SampleSet) -> Result<Vec<f64>> {
        let mean = self.mean_embedding(sample)?;
        self.outer.apply(&mean)
    }

    pub fn mean_batch(&self, samples: &[SampleSet]) -> Result<Vec<Vec<f64>>> {
        collect_batch(samples.par_iter().map(|s| self.mean_embedding(s)).collect())
    }

    pub fn embed_batch(&self, samples: &[SampleSet]) -> Result<Array2<f64>> {
        let rows = collect_batch(samples.par_iter().map(|s| self.embed(s)).collect())?;
        rows_to_matrix(rows, self.outer.output_dim())
    }
}

/// One-shot mean-map embedding matching the config's outer settings.
pub fn mmd_embed(
    sigma_inner: f64,
    d_inner: usize,
    config: &EmbedderConfig,
    sample: &SampleSet,
) -> Result<Vec<f64>> {
    config.validate()?;
    MmdEmbedder::new(
        config.dim,
        d_inner,
        sigma_inner,
        config.rks_dim,
        config.sigma_k,
        config.seed,
    )?
    .embed(sample)
}

/// Split-sample entropy estimator of the Jensen-Shannon divergence between
/// two sample sets: plug-in log-density means over the first half of each
/// sample, densities fit on the second half to keep the means unbiased.
pub fn js_entropy_estimate(xi: &SampleSet, xj: &SampleSet, kde: &KdeOptions) -> Result<f64> {
    if xi.n() < 4 || xj.n() < 4 {
        return Err(Error::domain("entropy estimator needs n >= 4 in both samples"));
    }
    if xi.dim() != xj.dim() {
        return Err(Error::shape("sample dimensions differ".to_string()));
    }
    let (head_i, fit_i) = split_and_fit(xi, kde)?;
    let (head_j, fit_j) = split_and_fit(xj, kde)?;
    let pii = fit_i.eval(head_i.points())?;
    let pji = fit_j.eval(head_i.points())?;
    let pij = fit_i.eval(head_j.points())?;
    let pjj = fit_j.eval(head_j.points())?;
    Ok(entropy_combine(&pii, &pji, &pij, &pjj))
}

fn split_and_fit(x: &SampleSet, kde: &KdeOptions) -> Result<(SampleSet, DensityEstimate)> {
    let half = x.n().div_ceil(2);
    let head = x.slice_rows(0, half)?;
    let tail = x.slice_rows(half, x.n())?;
    let fit = kde.fit(&tail)?;
    Ok((head, fit))
}

fn entropy_combine(pii: &[f64], pji: &[f64], pij: &[f64], pjj: &[f64]) -> f64 {
    let mean_ln = |v: &[f64]| v.iter().map(|&p| p.ln()).sum::<f64>() / v.len() as f64;
    let mix_i: Vec<f64> = pii.iter().zip(pji).map(|(a, b)| 2.0 / (a + b)).collect();
    let mix_j: Vec<f64> = pij.iter().zip(pjj).map(|(a, b)| 2.0 / (a + b)).collect();
    0.5 * mean_ln(pii) + 0.5 * mean_ln(pjj) + 0.5 * mean_ln(&mix_i) + 0.5 * mean_ln(&mix_j)
}

/// Entropy-estimator Gram of pairwise Jensen-Shannon estimates, symmetric by
/// construction. Fits are done once per sample and shared across pairs.
pub fn entropy_js_gram(samples: &[SampleSet], kde: &KdeOptions) -> Result<Array2<f64>> {
    let n = samples.len();
    let parts: Vec<(SampleSet, DensityEstimate)> = collect_batch(
        samples.par_iter().map(|s| {
            if s.n() < 4 {
                return Err(Error::domain("entropy estimator needs n >= 4"));
            }
            split_and_fit(s, kde)
        }).collect(),
    )?;
    let self_evals: Vec<Vec<f64>> = collect_batch(
        parts
            .par_iter()
            .map(|(head, fit)| fit.eval(head.points()))
            .collect(),
    )?;
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i..n).map(move |j| (i, j)))
        .collect();
    let vals: Vec<f64> = collect_batch(
        pairs
            .par_iter()
            .map(|&(i, j)| {
                if i == j {
                    let pii = &self_evals[i];
                    return Ok(entropy_combine(pii, pii, pii, pii));
                }
                let (head_i, fit_i) = &parts[i];
                let (head_j, fit_j) = &parts[j];
                let pji = fit_j.eval(head_i.points())?;
                let pij = fit_i.eval(head_j.points())?;
                Ok(entropy_combine(&self_evals[i], &pji, &pij, &self_evals[j]))
            })
            .collect(),
    )?;
    let mut g = Array2::zeros((n, n));
    for (&(i, j), &v) in pairs.iter().zip(&vals) {
        g[(i, j)] = v;
        g[(j, i)] = v;
    }
    Ok(g)
}

const HDD_GRID_INTERVALS: usize = 1024;

/// Tabulate a density on the tensor Simpson grid with 1024 intervals per
/// dimension (1025 nodes), row-major for dim 2.
pub fn density_grid(f: &dyn Fn(&[f64]) -> f64, dim: usize) -> Result<Vec<f64>> {
    if !(1..=2).contains(&dim) {
        return Err(Error::domain("tensor quadrature supports dim 1 or 2"));
    }
    let n = HDD_GRID_INTERVALS;
    let mut out = Vec::with_capacity((n + 1).pow(dim as u32));
    match dim {
        1 => {
            for i in 0..=n {
                let v = f(&[i as f64 / n as f64]);
                if v < 0.0 || !v.is_finite() {
                    return Err(Error::domain(format!("density value {v} at grid node")));
                }
                out.push(v);
            }
        }
        _ => {
            for i in 0..=n {
                let x = i as f64 / n as f64;
                for j in 0..=n {
                    let v = f(&[x, j as f64 / n as f64]);
                    if v < 0.0 || !v.is_finite() {
                        return Err(Error::domain(format!("density value {v} at grid node")));
                    }
                    out.push(v);
                }
            }
        }
    }
    Ok(out)
}

/// Squared divergence between two densities tabulated by `density_grid`,
/// computed at both the 512- and 1024-interval Simpson resolutions; errors
/// when the Richardson discrepancy exceeds `tol`.
pub fn hdd_from_grids(
    p_grid: &[f64],
    q_grid: &[f64],
    dim: usize,
    kind: HddKind,
    tol: f64,
) -> Result<f64> {
    let n = HDD_GRID_INTERVALS;
    let expect = (n + 1).pow(dim as u32);
    if p_grid.len() != expect || q_grid.len() != expect {
        return Err(Error::shape(format!(
            "grids must hold {expect} values for dim {dim}"
        )));
    }
    let coarse = simpson_grid_sum(p_grid, q_grid, dim, kind, 2)?;
    let fine = simpson_grid_sum(p_grid, q_grid, dim, kind, 1)?;
    let residual = (fine - coarse).abs() / 15.0;
    if residual > tol {
        return Err(Error::Quadrature { residual, tol });
    }
    Ok(fine)
}

fn simpson_grid_sum(
    p_grid: &[f64],
    q_grid: &[f64],
    dim: usize,
    kind: HddKind,
    stride: usize,
) -> Result<f64> {
    let n = HDD_GRID_INTERVALS / stride;
    let w = simpson_weights(n, 1.0);
    let full = HDD_GRID_INTERVALS + 1;
    match dim {
        1 => {
            let mut acc = 0.0;
            for i in 0..=n {
                let idx = i * stride;
                acc += w[i] * closed_form_kappa(kind, p_grid[idx], q_grid[idx])?;
            }
            Ok(acc)
        }
        _ => {
            let mut acc = 0.0;
            for i in 0..=n {
                let row = i * stride * full;
                let mut inner = 0.0;
                for j in 0..=n {
                    let idx = row + j * stride;
                    inner += w[j] * closed_form_kappa(kind, p_grid[idx], q_grid[idx])?;
                }
                acc += w[i] * inner;
            }
            Ok(acc)
        }
    }
}

/// Ground-truth squared divergence between two evaluable densities on the
/// cube by deterministic tensor-grid quadrature (dim 1 or 2).
pub fn exact_hdd_quadrature(
    p: &dyn Fn(&[f64]) -> f64,
    q: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    kind: HddKind,
    tol: f64,
) -> Result<f64> {
    let pg = density_grid(p, dim)?;
    let qg = density_grid(q, dim)?;
    hdd_from_grids(&pg, &qg, dim, kind, tol)
}

/// The generalized RBF kernel exp(-d^2 / (2 sigma^2)) with d^2 from exact
/// quadrature; the reference value the embeddings approximate.
pub fn exact_kernel(
    p: &dyn Fn(&[f64]) -> f64,
    q: &dyn Fn(&[f64]) -> f64,
    dim: usize,
    kind: HddKind,
    tol: f64,
    sigma_k: f64,
) -> Result<f64> {
    let d2 = exact_hdd_quadrature(p, q, dim, kind, tol)?;
    Ok((-d2 / (2.0 * sigma_k * sigma_k)).exp())
}

/// Median of pairwise Euclidean distances between feature vectors, over the
/// first `cap` rows. The usual default for the outer kernel bandwidth.
pub fn median_pairwise_distance(rows: &[Vec<f64>], cap: usize) -> Result<f64> {
    let n = rows.len().min(cap);
    if n < 2 {
        return Err(Error::domain("median heuristic needs at least two vectors"));
    }
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            let d2: f64 = rows[i]
                .iter()
                .zip(&rows[j])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dists.push(d2.sqrt());
        }
    }
    dists.sort_by(f64::total_cmp);
    let mid = dists.len() / 2;
    let median = if dists.len() % 2 == 1 {
        dists[mid]
    } else {
        0.5 * (dists[mid - 1] + dists[mid])
    };
    if !(median > 0.0) {
        return Err(Error::Numerical(
            "median pairwise distance is zero; cannot set a bandwidth".to_string(),
        ));
    }
    Ok(median)
}

/// Median heuristic over raw points pooled evenly from the samples.
pub fn median_pooled_points(samples: &[SampleSet], cap_total: usize) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("need at least one sample"));
    }
    let per = cap_total.div_ceil(samples.len()).max(1);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for s in samples {
        for r in s.points().rows().into_iter().take(per) {
            rows.push(r.to_vec());
            if rows.len() >= cap_total {
                break;
            }
        }
        if rows.len() >= cap_total {
            break;
        }
    }
    median_pairwise_distance(&rows, rows.len())
}
