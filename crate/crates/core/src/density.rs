//! Gaussian kernel density estimation on the unit cube.
//!
//! Product Gaussian kernels with per-dimension bandwidths, optional mirror
//! reflection at the cube faces, and floor/ceiling clipping of the estimate.
//! Evaluation is the exact O(n * m * l) sum; no tree or FFT acceleration.
//!
//! Kernel contributions are accumulated in 64.64 fixed point, which makes an
//! evaluation an exact integer sum: the result is bit-identical under any
//! reordering of the sample rows, not just mathematically equal.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Default clipping floor for density estimates; protects downstream
/// logarithms without visibly biasing projection coefficients.
pub const DEFAULT_CLIP_FLOOR: f64 = 1e-12;

/// n points in [0, 1]^l drawn from one distribution.
#[derive(Debug, Clone)]
pub struct SampleSet {
    points: Array2<f64>,
}

impl SampleSet {
    /// Wrap an n x l matrix of points, validating the cube constraint.
    pub fn new(points: Array2<f64>) -> Result<Self> {
        let (n, l) = points.dim();
        if n == 0 || l == 0 {
            return Err(Error::domain(format!(
                "sample set must be nonempty, got shape {n} x {l}"
            )));
        }
        for row in points.rows() {
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::domain(format!(
                        "sample coordinate {v} outside [0, 1]"
                    )));
                }
            }
        }
        Ok(SampleSet { points })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::domain("sample set must be nonempty"));
        }
        let l = rows[0].len();
        if rows.iter().any(|r| r.len() != l) {
            return Err(Error::shape("ragged rows in sample set".to_string()));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        let n = flat.len() / l;
        let points = Array2::from_shape_vec((n, l), flat)
            .map_err(|e| Error::shape(e.to_string()))?;
        SampleSet::new(points)
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn points(&self) -> &Array2<f64> {
        &self.points
    }

    /// A new sample set holding rows `range` of this one.
    pub fn slice_rows(&self, start: usize, end: usize) -> Result<SampleSet> {
        if start >= end || end > self.n() {
            return Err(Error::domain(format!(
                "invalid row range {start}..{end} for n = {}",
                self.n()
            )));
        }
        Ok(SampleSet {
            points: self.points.slice(ndarray::s![start..end, ..]).to_owned(),
        })
    }
}

/// Boundary treatment for densities supported on the cube.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Plain kernel sum; mass leaks outside the cube near its faces.
    None,
    /// First reflection at each face, which restores boundary mass.
    Mirror,
}

/// Bandwidth specification for `kde_fit`.
#[derive(Debug, Clone, PartialEq)]
pub enum BandwidthSpec {
    /// Per-dimension Silverman rule from the sample itself.
    Auto,
    /// Explicit per-dimension bandwidths.
    Fixed(Vec<f64>),
}

/// An evaluable, clipped kernel density estimate.
#[derive(Debug, Clone)]
pub struct DensityEstimate {
    points: Array2<f64>,
    bandwidths: Vec<f64>,
    boundary: BoundaryMode,
    clip_floor: f64,
    clip_ceiling: Option<f64>,
}

/// Per-dimension Silverman bandwidths: sigma_j (4 / ((l + 2) n))^(1 / (l + 4)).
pub fn silverman_bandwidth(sample: &SampleSet) -> Result<Vec<f64>> {
    let n = sample.n();
    let l = sample.dim();
    if n < 2 {
        return Err(Error::domain("Silverman bandwidth needs n >= 2"));
    }
    let factor = (4.0 / ((l as f64 + 2.0) * n as f64)).powf(1.0 / (l as f64 + 4.0));
    let mut out = Vec::with_capacity(l);
    for d in 0..l {
        let col = sample.points.column(d);
        let mean = col.iter().sum::<f64>() / n as f64;
        let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if sd == 0.0 {
            return Err(Error::domain(format!(
                "zero variance in dimension {d}; cannot pick a bandwidth"
            )));
        }
        out.push(sd * factor);
    }
    Ok(out)
}

/// Fit with the default mirror boundary and clip floor.
pub fn kde_fit(sample: &SampleSet, bandwidths: &BandwidthSpec) -> Result<DensityEstimate> {
    kde_fit_with(
        sample,
        bandwidths,
        BoundaryMode::Mirror,
        DEFAULT_CLIP_FLOOR,
        None,
    )
}

/// Fit a Gaussian product-kernel KDE with explicit boundary and clipping.
pub fn kde_fit_with(
    sample: &SampleSet,
    bandwidths: &BandwidthSpec,
    boundary: BoundaryMode,
    clip_floor: f64,
    clip_ceiling: Option<f64>,
) -> Result<DensityEstimate> {
    let l = sample.dim();
    let bw = match bandwidths {
        BandwidthSpec::Auto => silverman_bandwidth(sample)?,
        BandwidthSpec::Fixed(h) => {
            if h.len() != l {
                return Err(Error::shape(format!(
                    "{} bandwidths for dimension {l}",
                    h.len()
                )));
            }
            if h.iter().any(|&v| !(v > 0.0)) {
                return Err(Error::domain("bandwidths must be strictly positive"));
            }
            h.clone()
        }
    };
    if clip_floor < 0.0 {
        return Err(Error::domain("clip floor must be nonnegative"));
    }
    if let Some(c) = clip_ceiling {
        if !(c > 0.0) || c < clip_floor {
            return Err(Error::domain("clip ceiling must be positive and >= floor"));
        }
    }
    // The fixed-point accumulator holds sums of per-point factors <= 3^l,
    // scaled by 2^64. Guard the (absurdly large) inputs that could overflow.
    if (sample.n() as f64) * 3f64.powi(l as i32) > 9.0e18 {
        return Err(Error::domain("sample too large for exact accumulation"));
    }
    Ok(DensityEstimate {
        points: sample.points.clone(),
        bandwidths: bw,
        boundary,
        clip_floor,
        clip_ceiling,
    })
}

impl DensityEstimate {
    pub fn dim(&self) -> usize {
        self.points.ncols()
    }

    pub fn n(&self) -> usize {
        self.points.nrows()
    }

    pub fn bandwidths(&self) -> &[f64] {
        &self.bandwidths
    }

    pub fn boundary(&self) -> BoundaryMode {
        self.boundary
    }

    pub fn clip_floor(&self) -> f64 {
        self.clip_floor
    }

    pub fn clip_ceiling(&self) -> Option<f64> {
        self.clip_ceiling
    }

    /// Evaluate the clipped estimate at each query row.
    pub fn eval(&self, queries: &Array2<f64>) -> Result<Vec<f64>> {
        let l = self.dim();
        if queries.ncols() != l {
            return Err(Error::shape(format!(
                "queries have dimension {}, estimate has {l}",
                queries.ncols()
            )));
        }
        for row in queries.rows() {
            for &v in row {
                if !(0.0..=1.0).contains(&v) {
                    return Err(Error::domain(format!("query coordinate {v} outside [0, 1]")));
                }
            }
        }
        let inv2: Vec<f64> = self.bandwidths.iter().map(|h| 0.5 / (h * h)).collect();
        let mut norm = 1.0 / self.n() as f64;
        for h in &self.bandwidths {
            norm /= h * (2.0 * std::f64::consts::PI).sqrt();
        }
        let pts = self
            .points
            .as_slice()
            .expect("points are standard layout");
        let mut out = Vec::with_capacity(queries.nrows());
        for q in queries.rows() {
            let q = q.as_slice().expect("row is contiguous");
            let raw = match self.boundary {
                BoundaryMode::None => eval_plain(pts, q, &inv2, l),
                BoundaryMode::Mirror => eval_mirror(pts, q, &inv2, l),
            };
            let mut v = raw * norm;
            if v < self.clip_floor {
                v = self.clip_floor;
            }
            if let Some(c) = self.clip_ceiling {
                if v > c {
                    v = c;
                }
            }
            out.push(v);
        }
        Ok(out)
    }
}

/// Convenience form of `DensityEstimate::eval`.
pub fn kde_eval(est: &DensityEstimate, queries: &Array2<f64>) -> Result<Vec<f64>> {
    est.eval(queries)
}

const FIXED_SCALE: f64 = 18446744073709551616.0; // 2^64

/// Order-invariant sum: quantize each term to 2^-64 and add exactly.
struct FixedAccumulator(u128);

impl FixedAccumulator {
    fn new() -> Self {
        FixedAccumulator(0)
    }

    #[inline]
    fn add(&mut self, v: f64) {
        self.0 += (v * FIXED_SCALE) as u128;
    }

    fn value(self) -> f64 {
        self.0 as f64 / FIXED_SCALE
    }
}

fn eval_plain(pts: &[f64], q: &[f64], inv2: &[f64], l: usize) -> f64 {
    let mut acc = FixedAccumulator::new();
    for p in pts.chunks_exact(l) {
        let mut e = 0.0;
        for d in 0..l {
            let u = q[d] - p[d];
            e += u * u * inv2[d];
        }
        acc.add((-e).exp());
    }
    acc.value()
}

fn eval_mirror(pts: &[f64], q: &[f64], inv2: &[f64], l: usize) -> f64 {
    // The image set of a point under one reflection at each face factorizes
    // across dimensions, so the mirrored product kernel is a product of
    // per-dimension three-term sums.
    let mut acc = FixedAccumulator::new();
    for p in pts.chunks_exact(l) {
        let mut prod = 1.0;
        for d in 0..l {
            let c = inv2[d];
            let u = q[d] - p[d];
            let r0 = q[d] + p[d];
            let r1 = q[d] + p[d] - 2.0;
            prod *= (-u * u * c).exp() + (-r0 * r0 * c).exp() + (-r1 * r1 * c).exp();
        }
        acc.add(prod);
    }
    acc.value()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use ndarray::arr2;
    use rand::Rng;

    fn single_point(x: f64) -> SampleSet {
        SampleSet::new(arr2(&[[x]])).unwrap()
    }

    #[test]
    fn single_point_gaussian_value() {
        let s = single_point(0.5);
        let est = kde_fit_with(&s, &BandwidthSpec::Fixed(vec![0.1]), BoundaryMode::None, 0.0, None)
            .unwrap();
        let v = est.eval(&arr2(&[[0.5]])).unwrap()[0];
        let expect = 1.0 / (0.1 * (2.0 * std::f64::consts::PI).sqrt());
        assert!((v - expect).abs() < 1e-12, "got {v}, want {expect}");
    }

    #[test]
    fn eval_invariant_under_row_permutation() {
        let mut rng = rng_for(5, "kde.perm");
        let n = 200;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let mut shuffled = rows.clone();
        shuffled.reverse();
        shuffled.swap(3, 77);
        let a = SampleSet::from_rows(rows).unwrap();
        let b = SampleSet::from_rows(shuffled).unwrap();
        let queries = arr2(&[[0.1, 0.9], [0.5, 0.5], [0.0, 1.0], [0.31, 0.62]]);
        for (bw, mode) in [
            (BandwidthSpec::Auto, BoundaryMode::Mirror),
            (BandwidthSpec::Fixed(vec![0.07, 0.11]), BoundaryMode::None),
        ] {
            let ea = kde_fit_with(&a, &bw, mode, DEFAULT_CLIP_FLOOR, None).unwrap();
            let eb = kde_fit_with(&b, &bw, mode, DEFAULT_CLIP_FLOOR, None).unwrap();
            let va = ea.eval(&queries).unwrap();
            let vb = eb.eval(&queries).unwrap();
            for (x, y) in va.iter().zip(&vb) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn mirror_mass_near_one() {
        let mut rng = rng_for(6, "kde.mass");
        let n = 1000;
        let rows: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random()]).collect();
        let s = SampleSet::from_rows(rows).unwrap();
        let est = kde_fit(&s, &BandwidthSpec::Auto).unwrap();
        // Monte Carlo mass oracle on independent uniform nodes.
        let mut qrng = rng_for(7, "kde.mass.nodes");
        let m = 20_000;
        let nodes: Vec<f64> = (0..m).map(|_| qrng.random()).collect();
        let q = Array2::from_shape_vec((m, 1), nodes).unwrap();
        let vals = est.eval(&q).unwrap();
        let mass = vals.iter().sum::<f64>() / m as f64;
        assert!((0.99..=1.01).contains(&mass), "mass {mass}");
    }

    #[test]
    fn mass_near_one_2d() {
        let mut rng = rng_for(61, "kde.mass2");
        let n = 800;
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| vec![rng.random(), 0.5 + 0.4 * (rng.random::<f64>() - 0.5)])
            .collect();
        let s = SampleSet::from_rows(rows).unwrap();
        let est = kde_fit(&s, &BandwidthSpec::Auto).unwrap();
        let mut qrng = rng_for(62, "kde.mass2.nodes");
        let m = 20_000;
        let flat: Vec<f64> = (0..2 * m).map(|_| qrng.random()).collect();
        let q = Array2::from_shape_vec((m, 2), flat).unwrap();
        let vals = est.eval(&q).unwrap();
        let mass = vals.iter().sum::<f64>() / m as f64;
        assert!((0.99..=1.01).contains(&mass), "mass {mass}");
    }

    #[test]
    fn clip_floor_applies_in_empty_region() {
        let s = single_point(0.1);
        let est = kde_fit_with(
            &s,
            &BandwidthSpec::Fixed(vec![0.01]),
            BoundaryMode::None,
            1e-12,
            None,
        )
        .unwrap();
        let v = est.eval(&arr2(&[[0.9]])).unwrap()[0];
        assert_eq!(v, 1e-12);
    }

    #[test]
    fn mirror_doubles_at_corner() {
        let s = single_point(0.0);
        let bw = BandwidthSpec::Fixed(vec![0.1]);
        let none = kde_fit_with(&s, &bw, BoundaryMode::None, 0.0, None).unwrap();
        let mirror = kde_fit_with(&s, &bw, BoundaryMode::Mirror, 0.0, None).unwrap();
        let q = arr2(&[[0.0]]);
        let v0 = none.eval(&q).unwrap()[0];
        let v1 = mirror.eval(&q).unwrap()[0];
        // The reflection at 0 lands on the point itself; the far face's image
        // is 20 bandwidths away and vanishes entirely.
        assert_eq!(v1, 2.0 * v0);
    }

    #[test]
    fn peak_is_at_sample_point() {
        let s = single_point(0.3);
        let est =
            kde_fit_with(&s, &BandwidthSpec::Fixed(vec![0.02]), BoundaryMode::None, 0.0, None)
                .unwrap();
        let at = est.eval(&arr2(&[[0.3]])).unwrap()[0];
        let far = est.eval(&arr2(&[[0.8]])).unwrap()[0];
        assert!(at > far);
    }

    #[test]
    fn rejects_queries_outside_cube() {
        let s = single_point(0.5);
        let est = kde_fit(&SampleSet::from_rows(vec![vec![0.4], vec![0.6]]).unwrap(), &BandwidthSpec::Auto)
            .unwrap();
        assert!(est.eval(&arr2(&[[1.5]])).is_err());
        drop(s);
    }

    #[test]
    fn silverman_formula() {
        // 100 points with sample standard deviation exactly 0.25.
        let mut rows = Vec::new();
        for i in 0..50 {
            let _ = i;
            rows.push(vec![0.25]);
            rows.push(vec![0.75]);
        }
        let s = SampleSet::from_rows(rows).unwrap();
        let sd = (50.0 * 2.0 * 0.25f64.powi(2) / 99.0).sqrt();
        let h = silverman_bandwidth(&s).unwrap()[0];
        let expect = sd * (4.0f64 / 300.0).powf(0.2);
        assert!((h - expect).abs() < 1e-15);
        assert!((expect - 0.1059).abs() < 1e-3, "sanity: {expect}");
    }

    #[test]
    fn silverman_scales_linearly_in_spread() {
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![0.25 + 0.005 * i as f64]).collect();
        let wide: Vec<Vec<f64>> = (0..40).map(|i| vec![0.25 + 0.01 * i as f64]).collect();
        let h1 = silverman_bandwidth(&SampleSet::from_rows(rows).unwrap()).unwrap()[0];
        let h2 = silverman_bandwidth(&SampleSet::from_rows(wide).unwrap()).unwrap()[0];
        assert!((h2 - 2.0 * h1).abs() < 1e-12 * h1.max(1.0));
    }

    #[test]
    fn silverman_rejects_degenerate() {
        let s = SampleSet::from_rows(vec![vec![0.5], vec![0.5], vec![0.5]]).unwrap();
        assert!(silverman_bandwidth(&s).is_err());
        let one = single_point(0.5);
        assert!(silverman_bandwidth(&one).is_err());
    }

    #[test]
    fn sample_set_validation() {
        assert!(SampleSet::from_rows(vec![vec![1.2]]).is_err());
        assert!(SampleSet::from_rows(vec![]).is_err());
        assert!(SampleSet::from_rows(vec![vec![0.1], vec![0.2, 0.3]]).is_err());
    }
}
