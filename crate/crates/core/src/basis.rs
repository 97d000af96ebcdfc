//! Orthonormal trigonometric basis on the unit cube, index-set construction,
//! Monte Carlo projection, and assembly of the projection-coefficient
//! feature vector.
//!
//! The per-dimension basis is the real trigonometric family
//! 1, sqrt(2) cos(2 pi x), sqrt(2) sin(2 pi x), sqrt(2) cos(4 pi x), ...
//! which is orthonormal on [0, 1]; the cube basis is its tensor product.
//! Index sets come either from a tensor grid (m functions per dimension) or
//! from a Sobolev ball on the integer frequency vectors.
//!
//! Projection coefficients of a transformed density are estimated by plain
//! Monte Carlo on a shared set of uniform integration nodes. Sharing one node
//! set across all distributions, both complex parts, and all lambdas makes
//! integration noise cancel in feature differences and keeps embedded
//! distances symmetric.

use ndarray::Array2;
use rand::Rng;

use crate::density::DensityEstimate;
use crate::divergence::{g_lambda, HddMeasure};
use crate::error::{Error, Result};
use crate::linalg::dot_mean;
use crate::quadrature::adaptive_simpson;
use crate::rng::rng_for;

const SQRT_2: f64 = std::f64::consts::SQRT_2;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// One per-dimension factor of a tensor basis function.
///
/// `Cos(k)` and `Sin(k)` carry frequency k >= 1; the zero frequency is only
/// representable as `Const`, so a sine tag can never sit on frequency zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DimBasis {
    Const,
    Cos(u32),
    Sin(u32),
}

impl DimBasis {
    #[inline]
    fn eval(self, x: f64) -> f64 {
        match self {
            DimBasis::Const => 1.0,
            DimBasis::Cos(k) => SQRT_2 * (TWO_PI * k as f64 * x).cos(),
            DimBasis::Sin(k) => SQRT_2 * (TWO_PI * k as f64 * x).sin(),
        }
    }

    pub fn frequency(self) -> u32 {
        match self {
            DimBasis::Const => 0,
            DimBasis::Cos(k) | DimBasis::Sin(k) => k,
        }
    }
}

/// A tensor-product basis function, one factor per dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    dims: Vec<DimBasis>,
}

impl BasisIndex {
    pub fn new(dims: Vec<DimBasis>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::domain("basis index needs at least one dimension"));
        }
        if dims.iter().any(|d| matches!(d, DimBasis::Cos(0) | DimBasis::Sin(0))) {
            return Err(Error::domain("frequency zero must use the constant factor"));
        }
        Ok(BasisIndex { dims })
    }

    pub fn dims(&self) -> &[DimBasis] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }
}

/// Evaluate a tensor basis function at a point of the cube.
pub fn basis_eval(index: &BasisIndex, x: &[f64]) -> f64 {
    debug_assert_eq!(index.dims.len(), x.len());
    let mut prod = 1.0;
    for (d, &xi) in index.dims.iter().zip(x) {
        prod *= d.eval(xi);
    }
    prod
}

/// How an index set was constructed.
#[derive(Debug, Clone, PartialEq)]
pub enum IndexSetSpec {
    Tensor { per_dim: usize },
    Sobolev { s: f64, t: f64 },
}

/// An ordered, duplicate-free list of basis functions. The order is part of
/// the data: feature layouts depend on it.
#[derive(Debug, Clone)]
pub struct IndexSet {
    indices: Vec<BasisIndex>,
    spec: IndexSetSpec,
    dim: usize,
}

impl IndexSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn spec(&self) -> &IndexSetSpec {
        &self.spec
    }
}

/// The per-dimension list of the `m` lowest-frequency real trig functions.
fn per_dim_list(m: usize) -> Vec<DimBasis> {
    (0..m)
        .map(|j| {
            if j == 0 {
                DimBasis::Const
            } else if j % 2 == 1 {
                DimBasis::Cos((j as u32 + 1) / 2)
            } else {
                DimBasis::Sin(j as u32 / 2)
            }
        })
        .collect()
}

/// Tensor index set: m functions per dimension, |V| = m^dim.
///
/// Order is the odometer over per-dimension lists with the last dimension
/// varying fastest; the all-constant function always comes first.
pub fn make_tensor_index_set(dim: usize, m: usize) -> Result<IndexSet> {
    if dim == 0 || m == 0 {
        return Err(Error::domain("tensor index set needs dim >= 1 and m >= 1"));
    }
    let per_dim = per_dim_list(m);
    let mut indices = Vec::with_capacity(m.pow(dim as u32));
    let mut counters = vec![0usize; dim];
    loop {
        let dims: Vec<DimBasis> = counters.iter().map(|&c| per_dim[c]).collect();
        indices.push(BasisIndex { dims });
        let mut d = dim;
        loop {
            if d == 0 {
                return Ok(IndexSet {
                    indices,
                    spec: IndexSetSpec::Tensor { per_dim: m },
                    dim,
                });
            }
            d -= 1;
            counters[d] += 1;
            if counters[d] < m {
                break;
            }
            counters[d] = 0;
        }
    }
}

/// Sobolev-ball index set: all real basis functions whose integer frequency
/// vector k satisfies sum_j |k_j|^(2s) <= t. The constant function always
/// qualifies, so the set is never empty.
pub fn make_sobolev_index_set(dim: usize, s: f64, t: f64) -> Result<IndexSet> {
    if dim == 0 {
        return Err(Error::domain("sobolev index set needs dim >= 1"));
    }
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::domain(format!("sobolev s must be in (0, 1], got {s}")));
    }
    if !(t > 0.0) {
        return Err(Error::domain(format!("sobolev t must be > 0, got {t}")));
    }
    let kmax = t.powf(1.0 / (2.0 * s)).floor() as u32;
    let mut indices = Vec::new();
    let mut freq = vec![0u32; dim];
    enumerate_sobolev(&mut freq, 0, s, t, kmax, &mut indices);
    Ok(IndexSet {
        indices,
        spec: IndexSetSpec::Sobolev { s, t },
        dim,
    })
}

fn sobolev_norm(freq: &[u32], s: f64) -> f64 {
    freq.iter()
        .map(|&k| if k == 0 { 0.0 } else { (k as f64).powf(2.0 * s) })
        .sum()
}

fn enumerate_sobolev(
    freq: &mut Vec<u32>,
    d: usize,
    s: f64,
    t: f64,
    kmax: u32,
    out: &mut Vec<BasisIndex>,
) {
    if d == freq.len() {
        if sobolev_norm(freq, s) <= t {
            expand_real_forms(freq, 0, &mut Vec::new(), out);
        }
        return;
    }
    for k in 0..=kmax {
        freq[d] = k;
        enumerate_sobolev(freq, d + 1, s, t, kmax, out);
    }
    freq[d] = 0;
}

fn expand_real_forms(
    freq: &[u32],
    d: usize,
    acc: &mut Vec<DimBasis>,
    out: &mut Vec<BasisIndex>,
) {
    if d == freq.len() {
        out.push(BasisIndex { dims: acc.clone() });
        return;
    }
    if freq[d] == 0 {
        acc.push(DimBasis::Const);
        expand_real_forms(freq, d + 1, acc, out);
        acc.pop();
    } else {
        for form in [DimBasis::Cos(freq[d]), DimBasis::Sin(freq[d])] {
            acc.push(form);
            expand_real_forms(freq, d + 1, acc, out);
            acc.pop();
        }
    }
}

/// How integration nodes were generated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeSpec {
    UniformSeeded(u64),
    Halton,
}

/// Points in the cube used for Monte Carlo projection integrals.
#[derive(Debug, Clone)]
pub struct IntegrationNodes {
    points: Array2<f64>,
    spec: NodeSpec,
}

impl IntegrationNodes {
    pub fn len(&self) -> usize {
        self.points.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.points.nrows() == 0
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    pub fn spec(&self) -> NodeSpec {
        self.spec
    }
}

/// Draw `n_nodes` iid uniform nodes in [0, 1]^dim, deterministic in the seed.
pub fn draw_integration_nodes(dim: usize, n_nodes: usize, seed: u64) -> Result<IntegrationNodes> {
    if dim == 0 || n_nodes == 0 {
        return Err(Error::domain("integration nodes need dim >= 1 and n >= 1"));
    }
    let mut rng = rng_for(seed, "basis.nodes");
    let mut flat = Vec::with_capacity(dim * n_nodes);
    for _ in 0..n_nodes {
        for _ in 0..dim {
            flat.push(rng.random::<f64>());
        }
    }
    Ok(IntegrationNodes {
        points: Array2::from_shape_vec((n_nodes, dim), flat).expect("shape matches"),
        spec: NodeSpec::UniformSeeded(seed),
    })
}

/// Low-discrepancy Halton nodes (one prime base per dimension).
pub fn halton_nodes(dim: usize, n_nodes: usize) -> Result<IntegrationNodes> {
    const PRIMES: [u64; 8] = [2, 3, 5, 7, 11, 13, 17, 19];
    if dim == 0 || n_nodes == 0 {
        return Err(Error::domain("integration nodes need dim >= 1 and n >= 1"));
    }
    if dim > PRIMES.len() {
        return Err(Error::domain(format!(
            "halton nodes support at most {} dimensions",
            PRIMES.len()
        )));
    }
    let mut flat = Vec::with_capacity(dim * n_nodes);
    for i in 1..=n_nodes as u64 {
        for &base in PRIMES.iter().take(dim) {
            flat.push(radical_inverse(i, base));
        }
    }
    Ok(IntegrationNodes {
        points: Array2::from_shape_vec((n_nodes, dim), flat).expect("shape matches"),
        spec: NodeSpec::Halton,
    })
}

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 0.0;
    let mut denom = 1.0;
    while i > 0 {
        denom *= base as f64;
        inv += (i % base) as f64 / denom;
        i /= base;
    }
    inv
}

/// Monte Carlo projection coefficient: mean over nodes of phi(u) f(u).
pub fn project_mc(
    f_at_nodes: &[f64],
    index: &BasisIndex,
    nodes: &IntegrationNodes,
) -> Result<f64> {
    if f_at_nodes.len() != nodes.len() {
        return Err(Error::shape(format!(
            "{} function values for {} nodes",
            f_at_nodes.len(),
            nodes.len()
        )));
    }
    if index.dim() != nodes.dim() {
        return Err(Error::shape(format!(
            "index dimension {} vs node dimension {}",
            index.dim(),
            nodes.dim()
        )));
    }
    let phi = eval_basis_at_nodes(index, nodes);
    Ok(dot_mean(&phi, f_at_nodes))
}

fn eval_basis_at_nodes(index: &BasisIndex, nodes: &IntegrationNodes) -> Vec<f64> {
    nodes
        .points
        .rows()
        .into_iter()
        .map(|row| basis_eval(index, row.as_slice().expect("contiguous row")))
        .collect()
}

/// Quadrature projection coefficient for one-dimensional f; the
/// deterministic oracle against which Monte Carlo projections are judged.
pub fn project_quadrature(
    f: impl Fn(f64) -> f64,
    index: &BasisIndex,
    tol: f64,
) -> Result<f64> {
    if index.dim() != 1 {
        return Err(Error::domain(
            "quadrature projection supports one dimension".to_string(),
        ));
    }
    let d = index.dims[0];
    Ok(adaptive_simpson(|x| d.eval(x) * f(x), 0.0, 1.0, tol)?.value)
}

/// Basis functions evaluated on a node set, one row per basis function.
///
/// Precomputing this matrix once per embedder makes the per-distribution
/// projection a handful of dot products.
#[derive(Debug, Clone)]
pub struct BasisMatrix {
    phi: Array2<f64>,
}

impl BasisMatrix {
    pub fn new(v: &IndexSet, nodes: &IntegrationNodes) -> Result<Self> {
        if v.dim() != nodes.dim() {
            return Err(Error::shape(format!(
                "index set dimension {} vs node dimension {}",
                v.dim(),
                nodes.dim()
            )));
        }
        let mut phi = Array2::zeros((v.len(), nodes.len()));
        for (r, index) in v.indices().iter().enumerate() {
            let vals = eval_basis_at_nodes(index, nodes);
            phi.row_mut(r)
                .as_slice_mut()
                .expect("standard layout")
                .copy_from_slice(&vals);
        }
        Ok(BasisMatrix { phi })
    }

    pub fn num_functions(&self) -> usize {
        self.phi.nrows()
    }

    pub fn num_nodes(&self) -> usize {
        self.phi.ncols()
    }

    /// Monte Carlo projections of tabulated function values onto every
    /// basis function, in index-set order.
    pub fn project(&self, f_at_nodes: &[f64]) -> Vec<f64> {
        self.phi
            .rows()
            .into_iter()
            .map(|row| dot_mean(row.as_slice().expect("contiguous"), f_at_nodes))
            .collect()
    }
}

/// Projection-coefficient feature vector of length 2 M |V|: M real-part
/// blocks then M imaginary-part blocks, each |V| coefficients in index-set
/// order, all scaled by 1/sqrt(M).
#[derive(Debug, Clone, PartialEq)]
pub struct AFeatures {
    values: Vec<f64>,
    num_lambdas: usize,
    basis_size: usize,
}

impl AFeatures {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn num_lambdas(&self) -> usize {
        self.num_lambdas
    }

    pub fn basis_size(&self) -> usize {
        self.basis_size
    }

    /// The imaginary half of the layout (last M |V| entries).
    pub fn imaginary_block(&self) -> &[f64] {
        &self.values[self.num_lambdas * self.basis_size..]
    }

    pub fn squared_distance(&self, other: &AFeatures) -> Result<f64> {
        if self.values.len() != other.values.len() {
            return Err(Error::shape(format!(
                "feature lengths {} vs {}",
                self.values.len(),
                other.values.len()
            )));
        }
        let mut acc = 0.0;
        for (a, b) in self.values.iter().zip(&other.values) {
            let d = a - b;
            acc += d * d;
        }
        Ok(acc)
    }
}

/// Project the g-transformed values of a density, already evaluated at the
/// nodes, onto the index set.
pub fn build_a_from_values(
    density_at_nodes: &[f64],
    measure: &HddMeasure,
    lambdas: &[f64],
    phi: &BasisMatrix,
) -> Result<AFeatures> {
    if lambdas.is_empty() {
        return Err(Error::domain("build_a needs at least one lambda"));
    }
    if density_at_nodes.len() != phi.num_nodes() {
        return Err(Error::shape(format!(
            "{} density values for {} nodes",
            density_at_nodes.len(),
            phi.num_nodes()
        )));
    }
    let m = lambdas.len();
    let v = phi.num_functions();
    let z = measure.z();
    let scale = 1.0 / (m as f64).sqrt();
    let n = density_at_nodes.len();
    let mut values = vec![0.0; 2 * m * v];
    let mut re = vec![0.0; n];
    let mut im = vec![0.0; n];
    for (j, &lambda) in lambdas.iter().enumerate() {
        for (i, &p) in density_at_nodes.iter().enumerate() {
            let g = g_lambda(z, lambda, p)?;
            re[i] = g.re;
            im[i] = g.im;
        }
        let a_re = phi.project(&re);
        let a_im = phi.project(&im);
        for (k, &a) in a_re.iter().enumerate() {
            values[j * v + k] = a * scale;
        }
        for (k, &a) in a_im.iter().enumerate() {
            values[(m + j) * v + k] = a * scale;
        }
    }
    Ok(AFeatures {
        values,
        num_lambdas: m,
        basis_size: v,
    })
}

/// Full projection stage: evaluate the density estimate at the nodes once,
/// transform through g_lambda for every lambda, and project both parts.
pub fn build_a(
    est: &DensityEstimate,
    measure: &HddMeasure,
    lambdas: &[f64],
    v: &IndexSet,
    nodes: &IntegrationNodes,
) -> Result<AFeatures> {
    if est.dim() != nodes.dim() {
        return Err(Error::shape(format!(
            "estimate dimension {} vs node dimension {}",
            est.dim(),
            nodes.dim()
        )));
    }
    let phi = BasisMatrix::new(v, nodes)?;
    let vals = est.eval(nodes.points())?;
    build_a_from_values(&vals, measure, lambdas, &phi)
}
