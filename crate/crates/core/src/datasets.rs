//! Synthetic distribution generators: mixtures of truncated Gaussians with
//! evaluable pdfs, and the mixture-count regression dataset.
//!
//! Truncated sampling is by rejection, which is exact; acceptance rates are
//! high for the parameter ranges used here. Truncation normalizers come from
//! the error function for diagonal covariances and from two-dimensional
//! Simpson quadrature for full ones.

use ndarray::Array2;
use rand::Rng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::density::SampleSet;
use crate::error::{Error, Result};
use crate::rng::rng_for;

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Component covariance: axis-aligned or a full 2 x 2 matrix.
#[derive(Debug, Clone, PartialEq)]
pub enum GmmCovariance {
    /// Per-dimension standard deviations.
    Diagonal(Vec<f64>),
    /// Full symmetric positive definite 2 x 2 covariance.
    Full2([[f64; 2]; 2]),
}

/// One mixture component with its truncation normalizer.
#[derive(Debug, Clone)]
pub struct GmmComponent {
    mean: Vec<f64>,
    cov: GmmCovariance,
    box_mass: f64,
}

impl GmmComponent {
    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn covariance(&self) -> &GmmCovariance {
        &self.cov
    }

    pub fn box_mass(&self) -> f64 {
        self.box_mass
    }

    /// Untruncated Gaussian density at x.
    fn density(&self, x: &[f64]) -> f64 {
        match &self.cov {
            GmmCovariance::Diagonal(sds) => {
                let mut e = 0.0;
                let mut norm = 1.0;
                for ((xi, mi), si) in x.iter().zip(&self.mean).zip(sds) {
                    let u = (xi - mi) / si;
                    e += u * u;
                    norm *= si * TWO_PI.sqrt();
                }
                (-0.5 * e).exp() / norm
            }
            GmmCovariance::Full2(c) => {
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                let dx = x[0] - self.mean[0];
                let dy = x[1] - self.mean[1];
                let q = (c[1][1] * dx * dx - 2.0 * c[0][1] * dx * dy + c[0][0] * dy * dy) / det;
                (-0.5 * q).exp() / (TWO_PI * det.sqrt())
            }
        }
    }

    /// Lower Cholesky factor for sampling.
    fn chol(&self) -> Result<[[f64; 2]; 2]> {
        match &self.cov {
            GmmCovariance::Diagonal(sds) => {
                if sds.len() != 2 {
                    return Err(Error::domain("2x2 cholesky on non-2d component"));
                }
                Ok([[sds[0], 0.0], [0.0, sds[1]]])
            }
            GmmCovariance::Full2(c) => {
                let l11 = c[0][0].sqrt();
                let l21 = c[0][1] / l11;
                let rem = c[1][1] - l21 * l21;
                if !(rem > 0.0) {
                    return Err(Error::Numerical(
                        "covariance not positive definite".to_string(),
                    ));
                }
                Ok([[l11, 0.0], [l21, rem.sqrt()]])
            }
        }
    }
}

/// An equally weighted mixture of truncated Gaussians on a box, with an
/// evaluable pdf that accounts for each component's truncated mass.
#[derive(Debug, Clone)]
pub struct TruncatedGmm {
    components: Vec<GmmComponent>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl TruncatedGmm {
    /// Diagonal-covariance mixture; normalizers via the error function.
    pub fn new_diagonal(
        means: Vec<Vec<f64>>,
        sds: Vec<Vec<f64>>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        if means.is_empty() || means.len() != sds.len() {
            return Err(Error::domain("means and sds must be nonempty and equal length"));
        }
        let dim = lo.len();
        if hi.len() != dim || means.iter().any(|m| m.len() != dim) || sds.iter().any(|s| s.len() != dim)
        {
            return Err(Error::shape("inconsistent dimensions in mixture spec".to_string()));
        }
        if sds.iter().flatten().any(|&s| !(s > 0.0)) {
            return Err(Error::domain("standard deviations must be positive"));
        }
        let components = means
            .into_iter()
            .zip(sds)
            .map(|(mean, sd)| {
                let mut mass = 1.0;
                for d in 0..dim {
                    mass *= gauss_interval_mass(mean[d], sd[d], lo[d], hi[d]);
                }
                GmmComponent {
                    mean,
                    cov: GmmCovariance::Diagonal(sd),
                    box_mass: mass,
                }
            })
            .collect();
        Ok(TruncatedGmm { components, lo, hi })
    }

    /// Full-covariance two-dimensional mixture; normalizers by quadrature.
    pub fn new_full2(
        means: Vec<Vec<f64>>,
        covs: Vec<[[f64; 2]; 2]>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    ) -> Result<Self> {
        if means.is_empty() || means.len() != covs.len() {
            return Err(Error::domain("means and covariances must be nonempty and equal length"));
        }
        if lo.len() != 2 || hi.len() != 2 || means.iter().any(|m| m.len() != 2) {
            return Err(Error::shape("full-covariance mixtures are two-dimensional".to_string()));
        }
        let components = means
            .into_iter()
            .zip(covs)
            .map(|(mean, cov)| {
                let mut comp = GmmComponent {
                    mean,
                    cov: GmmCovariance::Full2(cov),
                    box_mass: 1.0,
                };
                comp.box_mass = box_mass_quadrature(&comp, &lo, &hi);
                comp
            })
            .collect();
        Ok(TruncatedGmm { components, lo, hi })
    }

    pub fn components(&self) -> &[GmmComponent] {
        &self.components
    }

    pub fn bounds(&self) -> (&[f64], &[f64]) {
        (&self.lo, &self.hi)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn in_box(&self, x: &[f64]) -> bool {
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .all(|(v, (l, h))| v >= l && v <= h)
    }

    /// Mixture pdf including per-component truncation normalizers; zero
    /// outside the box.
    pub fn pdf(&self, x: &[f64]) -> f64 {
        if !self.in_box(x) {
            return 0.0;
        }
        let k = self.components.len() as f64;
        self.components
            .iter()
            .map(|c| c.density(x) / c.box_mass)
            .sum::<f64>()
            / k
    }

    /// Draw n points by per-component rejection inside the box.
    pub fn sample(&self, n: usize, rng: &mut ChaCha12Rng) -> Result<Array2<f64>> {
        let dim = self.dim();
        let k = self.components.len();
        let chols: Vec<[[f64; 2]; 2]> = if dim == 2 {
            self.components.iter().map(|c| c.chol()).collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let mut flat = Vec::with_capacity(n * dim);
        let mut x = vec![0.0; dim];
        for _ in 0..n {
            let comp = rng.random_range(0..k);
            let mut tries = 0usize;
            loop {
                draw_component_point(&self.components[comp], chols.get(comp), rng, &mut x);
                if self.in_box(&x) {
                    break;
                }
                tries += 1;
                if tries > 1_000_000 {
                    return Err(Error::Numerical(
                        "rejection sampler acceptance rate vanished".to_string(),
                    ));
                }
            }
            flat.extend_from_slice(&x);
        }
        Ok(Array2::from_shape_vec((n, dim), flat).expect("shape matches"))
    }
}

fn draw_component_point(
    comp: &GmmComponent,
    chol: Option<&[[f64; 2]; 2]>,
    rng: &mut ChaCha12Rng,
    out: &mut [f64],
) {
    match &comp.cov {
        GmmCovariance::Diagonal(sds) => {
            for d in 0..out.len() {
                let z: f64 = StandardNormal.sample(rng);
                out[d] = comp.mean[d] + sds[d] * z;
            }
        }
        GmmCovariance::Full2(_) => {
            let l = chol.expect("cholesky precomputed for 2d");
            let z0: f64 = StandardNormal.sample(rng);
            let z1: f64 = StandardNormal.sample(rng);
            out[0] = comp.mean[0] + l[0][0] * z0;
            out[1] = comp.mean[1] + l[1][0] * z0 + l[1][1] * z1;
        }
    }
}

/// Gaussian mass of [lo, hi] via the error function.
fn gauss_interval_mass(mean: f64, sd: f64, lo: f64, hi: f64) -> f64 {
    let root2 = std::f64::consts::SQRT_2;
    0.5 * (libm::erf((hi - mean) / (sd * root2)) - libm::erf((lo - mean) / (sd * root2)))
}

/// Component mass inside the box by composite Simpson on a 256^2 grid.
fn box_mass_quadrature(comp: &GmmComponent, lo: &[f64], hi: &[f64]) -> f64 {
    use crate::quadrature::simpson_weights;
    let n = 256;
    let wx = simpson_weights(n, hi[0] - lo[0]);
    let wy = simpson_weights(n, hi[1] - lo[1]);
    let mut acc = 0.0;
    for i in 0..=n {
        let x = lo[0] + (hi[0] - lo[0]) * i as f64 / n as f64;
        let mut inner = 0.0;
        for j in 0..=n {
            let y = lo[1] + (hi[1] - lo[1]) * j as f64 / n as f64;
            inner += wy[j] * comp.density(&[x, y]);
        }
        acc += wx[i] * inner;
    }
    acc
}

/// A list of sample sets with learning targets and, when the generator knows
/// them, the true pdfs.
#[derive(Debug, Clone)]
pub struct LabeledDistributionSet {
    pub samples: Vec<SampleSet>,
    pub targets: Vec<f64>,
    pub pdfs: Option<Vec<TruncatedGmm>>,
}

/// Five-component truncated spherical mixtures on the unit square with
/// attached pdfs: means uniform in the square, per-dimension standard
/// deviations uniform in [0.05, 0.15].
pub fn gen_gram_gmms(n_dists: usize, n_points: usize, seed: u64) -> Result<LabeledDistributionSet> {
    if n_dists == 0 || n_points == 0 {
        return Err(Error::domain("need at least one distribution and one point"));
    }
    let mut samples = Vec::with_capacity(n_dists);
    let mut pdfs = Vec::with_capacity(n_dists);
    for i in 0..n_dists {
        let mut rng = rng_for(seed, &format!("gram-gmm/{i}"));
        let mut means = Vec::with_capacity(5);
        let mut sds = Vec::with_capacity(5);
        for _ in 0..5 {
            means.push(vec![rng.random::<f64>(), rng.random::<f64>()]);
            sds.push(vec![
                0.05 + 0.1 * rng.random::<f64>(),
                0.05 + 0.1 * rng.random::<f64>(),
            ]);
        }
        let gmm = TruncatedGmm::new_diagonal(means, sds, vec![0.0, 0.0], vec![1.0, 1.0])?;
        let pts = gmm.sample(n_points, &mut rng)?;
        samples.push(SampleSet::new(pts)?);
        pdfs.push(gmm);
    }
    Ok(LabeledDistributionSet {
        samples,
        targets: vec![5.0; n_dists],
        pdfs: Some(pdfs),
    })
}

/// Parameters of one mixture-count distribution.
#[derive(Debug, Clone)]
pub(crate) struct MixtureParams {
    pub(crate) means: Vec<[f64; 2]>,
    pub(crate) covs: Vec<[[f64; 2]; 2]>,
}

pub(crate) fn draw_mixture_params(rng: &mut ChaCha12Rng) -> (usize, MixtureParams) {
    let k = rng.random_range(1..=10usize);
    let mut means = Vec::with_capacity(k);
    let mut covs = Vec::with_capacity(k);
    for _ in 0..k {
        let mean = [
            -5.0 + 10.0 * rng.random::<f64>(),
            -5.0 + 10.0 * rng.random::<f64>(),
        ];
        let a_scale = 1.0 + 3.0 * rng.random::<f64>();
        let mut a = [[0.0f64; 2]; 2];
        for row in a.iter_mut() {
            for v in row.iter_mut() {
                *v = -1.0 + 2.0 * rng.random::<f64>();
            }
        }
        let b = [rng.random::<f64>(), rng.random::<f64>()];
        // a * A A^T + diag(B)
        let mut cov = [[0.0f64; 2]; 2];
        for r in 0..2 {
            for c in 0..2 {
                cov[r][c] = a_scale * (a[r][0] * a[c][0] + a[r][1] * a[c][1]);
            }
        }
        cov[0][0] += b[0];
        cov[1][1] += b[1];
        means.push(mean);
        covs.push(cov);
    }
    (k, MixtureParams { means, covs })
}

/// Mixture-count regression data: the target is the number of components,
/// uniform on 1..=10. Samples are truncated to [-10, 10]^2 by rejection and
/// mapped affinely onto the unit square.
pub fn gen_mixture_count(
    n_dists: usize,
    n_points: usize,
    seed: u64,
) -> Result<LabeledDistributionSet> {
    if n_dists == 0 || n_points == 0 {
        return Err(Error::domain("need at least one distribution and one point"));
    }
    let mut samples = Vec::with_capacity(n_dists);
    let mut targets = Vec::with_capacity(n_dists);
    for i in 0..n_dists {
        let mut rng = rng_for(seed, &format!("mixture-count/{i}"));
        let (k, params) = draw_mixture_params(&mut rng);
        let mut flat = Vec::with_capacity(n_points * 2);
        for _ in 0..n_points {
            let comp = rng.random_range(0..k);
            let cov = &params.covs[comp];
            let l11 = cov[0][0].sqrt();
            let l21 = cov[0][1] / l11;
            let l22 = (cov[1][1] - l21 * l21).sqrt();
            loop {
                let z0: f64 = StandardNormal.sample(&mut rng);
                let z1: f64 = StandardNormal.sample(&mut rng);
                let x = params.means[comp][0] + l11 * z0;
                let y = params.means[comp][1] + l21 * z0 + l22 * z1;
                if (-10.0..=10.0).contains(&x) && (-10.0..=10.0).contains(&y) {
                    flat.push((x + 10.0) / 20.0);
                    flat.push((y + 10.0) / 20.0);
                    break;
                }
            }
        }
        let pts = Array2::from_shape_vec((n_points, 2), flat).expect("shape matches");
        samples.push(SampleSet::new(pts)?);
        targets.push(k as f64);
    }
    Ok(LabeledDistributionSet {
        samples,
        targets,
        pdfs: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::simpson_weights;

    fn pdf_mass_on_unit_square(gmm: &TruncatedGmm) -> f64 {
        let n = 256;
        let w = simpson_weights(n, 1.0);
        let mut acc = 0.0;
        for i in 0..=n {
            let x = i as f64 / n as f64;
            let mut inner = 0.0;
            for j in 0..=n {
                let y = j as f64 / n as f64;
                inner += w[j] * gmm.pdf(&[x, y]);
            }
            acc += w[i] * inner;
        }
        acc
    }

    #[test]
    fn gram_gmms_shapes_and_support() {
        let d = gen_gram_gmms(4, 100, 3).unwrap();
        assert_eq!(d.samples.len(), 4);
        assert_eq!(d.targets, vec![5.0; 4]);
        for s in &d.samples {
            assert_eq!(s.n(), 100);
            assert_eq!(s.dim(), 2);
            assert!(s.points().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
        let pdfs = d.pdfs.as_ref().unwrap();
        assert_eq!(pdfs[0].components().len(), 5);
    }

    #[test]
    fn gram_gmm_pdf_mass_is_one() {
        let d = gen_gram_gmms(3, 1, 17).unwrap();
        for gmm in d.pdfs.as_ref().unwrap() {
            let mass = pdf_mass_on_unit_square(gmm);
            assert!((mass - 1.0).abs() <= 1e-3, "mass {mass}");
        }
    }

    #[test]
    fn generators_are_deterministic() {
        let a = gen_gram_gmms(3, 50, 9).unwrap();
        let b = gen_gram_gmms(3, 50, 9).unwrap();
        for (x, y) in a.samples.iter().zip(&b.samples) {
            assert_eq!(x.points(), y.points());
        }
        let c = gen_mixture_count(5, 40, 9).unwrap();
        let d = gen_mixture_count(5, 40, 9).unwrap();
        assert_eq!(c.targets, d.targets);
        for (x, y) in c.samples.iter().zip(&d.samples) {
            assert_eq!(x.points(), y.points());
        }
    }

    #[test]
    fn rejection_sampler_matches_quadrature_mean() {
        // One boundary-hugging component; empirical means of truncated draws
        // against quadrature means of the truncated pdf.
        let gmm = TruncatedGmm::new_diagonal(
            vec![vec![0.1, 0.8]],
            vec![vec![0.12, 0.1]],
            vec![0.0, 0.0],
            vec![1.0, 1.0],
        )
        .unwrap();
        let mut rng = rng_for(31, "datasets.rej");
        let n = 100_000;
        let pts = gmm.sample(n, &mut rng).unwrap();
        for d in 0..2 {
            let emp = pts.column(d).sum() / n as f64;
            let emp_sq = pts.column(d).iter().map(|v| v * v).sum::<f64>() / n as f64;
            let sd = (emp_sq - emp * emp).sqrt();
            // Quadrature mean of the truncated density.
            let m = 512;
            let w = simpson_weights(m, 1.0);
            let mut mean_q = 0.0;
            for i in 0..=m {
                let x = i as f64 / m as f64;
                let mut inner = 0.0;
                for j in 0..=m {
                    let y = j as f64 / m as f64;
                    let coord = if d == 0 { x } else { y };
                    inner += w[j] * coord * gmm.pdf(&[x, y]);
                }
                mean_q += w[i] * inner;
            }
            let se = sd / (n as f64).sqrt();
            assert!(
                (emp - mean_q).abs() <= 3.0 * se,
                "dim {d}: empirical {emp:.5}, quadrature {mean_q:.5}, se {se:.6}"
            );
        }
    }

    #[test]
    fn full_covariance_mass_is_one() {
        let gmm = TruncatedGmm::new_full2(
            vec![vec![0.0, 1.0]],
            vec![[[2.0, 0.7], [0.7, 1.5]]],
            vec![-10.0, -10.0],
            vec![10.0, 10.0],
        )
        .unwrap();
        // Nearly untruncated, so the quadrature normalizer is close to one.
        assert!((gmm.components()[0].box_mass() - 1.0).abs() < 1e-6);
        let v = gmm.pdf(&[0.0, 1.0]);
        assert!(v > 0.0);
        assert_eq!(gmm.pdf(&[11.0, 0.0]), 0.0);
    }

    #[test]
    fn mixture_count_targets_and_support() {
        let d = gen_mixture_count(30, 25, 5).unwrap();
        for &t in &d.targets {
            assert!(t >= 1.0 && t <= 10.0 && t.fract() == 0.0);
        }
        for s in &d.samples {
            assert!(s.points().iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn mixture_covariances_positive_definite() {
        let mut rng = rng_for(77, "datasets.pd");
        let mut min_eig = f64::INFINITY;
        let mut drawn = 0usize;
        while drawn < 10_000 {
            let (_, params) = draw_mixture_params(&mut rng);
            for c in &params.covs {
                let tr = c[0][0] + c[1][1];
                let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
                let eig = 0.5 * (tr - (tr * tr - 4.0 * det).sqrt());
                min_eig = min_eig.min(eig);
                drawn += 1;
            }
        }
        assert!(min_eig > 0.0, "min eigenvalue {min_eig}");
    }
}
