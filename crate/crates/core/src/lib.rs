//! Random-feature embeddings of sample sets for information-theoretic kernels.
//!
//! Sample sets drawn from unknown densities on the unit cube are mapped to
//! finite real vectors whose dot products approximate generalized RBF kernels
//! built on Jensen-Shannon, Hellinger, and total-variation distances. The
//! embedding works in three stages: a sampled integral representation turns
//! the pointwise divergence into squared differences of transformed densities,
//! orthonormal trigonometric projections reduce those functions to finite
//! coefficient vectors, and a random Fourier feature map turns Euclidean
//! distances between coefficient vectors into kernel dot products. Learning
//! then happens in the primal feature space with no N x N Gram matrix.

pub mod basis;
pub mod datasets;
pub mod density;
pub mod divergence;
pub mod error;
pub mod learning;
pub mod linalg;
pub mod pipeline;
pub mod quadrature;
pub mod rks;
pub mod rng;

pub use basis::{
    draw_integration_nodes, make_sobolev_index_set, make_tensor_index_set, AFeatures, BasisIndex,
    DimBasis, IndexSet, IntegrationNodes,
};
pub use datasets::{gen_gram_gmms, gen_mixture_count, LabeledDistributionSet, TruncatedGmm};
pub use density::{
    kde_fit, kde_fit_with, silverman_bandwidth, BandwidthSpec, BoundaryMode, DensityEstimate,
    SampleSet,
};
pub use divergence::{
    closed_form_kappa, g_lambda, kappa_mc, kappa_quadrature, sample_lambdas, total_mass,
    ComplexScalar, HddKind, HddMeasure,
};
pub use error::{Error, Result};
pub use learning::{
    gram_r2, model_select, r2_score, ridge_fit, ridge_predict, rmse, HyperCandidate, RidgeModel,
    RidgeSolver,
};
pub use pipeline::{
    approx_kernel, exact_hdd_quadrature, js_entropy_estimate, l2_embed, mmd_embed, AStage,
    BasisSpec, EmbedderConfig, HddEmbedder, KdeOptions, L2Embedder, MmdEmbedder, NodeSource,
};
pub use rks::{rks_draw, RksMap};
