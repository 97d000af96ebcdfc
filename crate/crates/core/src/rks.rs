//! Random kitchen sink features for the Gaussian RBF kernel on finite
//! vectors: z(x) = sqrt(2/D) (sin(w_1 . x), cos(w_1 . x), ...) with the
//! frequencies w_r drawn iid from N(0, sigma^-2 I). Dot products of the
//! features approximate exp(-|x - y|^2 / (2 sigma^2)), and every feature
//! vector has exactly unit norm since each (sin, cos) pair contributes
//! sin^2 + cos^2 = 1.

use ndarray::Array2;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::rng::rng_for;

/// A frozen random Fourier feature map.
#[derive(Debug, Clone)]
pub struct RksMap {
    omega: Array2<f64>,
    sigma: f64,
}

/// Draw a feature map with `d_out / 2` frequency rows of dimension `dim`.
/// Entries are Gaussian with standard deviation 1 / sigma, deterministic in
/// the seed; the same seed with different bandwidths yields proportional
/// frequency matrices.
pub fn rks_draw(dim: usize, d_out: usize, sigma: f64, seed: u64) -> Result<RksMap> {
    if dim == 0 {
        return Err(Error::domain("rks map needs input dimension >= 1"));
    }
    if d_out == 0 || d_out % 2 != 0 {
        return Err(Error::domain(format!(
            "rks output dimension must be even and positive, got {d_out}"
        )));
    }
    if !(sigma > 0.0) {
        return Err(Error::domain(format!("rks bandwidth must be > 0, got {sigma}")));
    }
    let mut rng = rng_for(seed, "rks.omega");
    let inv = 1.0 / sigma;
    let rows = d_out / 2;
    let mut flat = Vec::with_capacity(rows * dim);
    for _ in 0..rows * dim {
        let n: f64 = StandardNormal.sample(&mut rng);
        flat.push(n * inv);
    }
    Ok(RksMap {
        omega: Array2::from_shape_vec((rows, dim), flat).expect("shape matches"),
        sigma,
    })
}

impl RksMap {
    pub fn input_dim(&self) -> usize {
        self.omega.ncols()
    }

    pub fn output_dim(&self) -> usize {
        2 * self.omega.nrows()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn omega(&self) -> &Array2<f64> {
        &self.omega
    }

    /// Interleaved (sin, cos) features scaled by sqrt(2 / D).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.input_dim() {
            return Err(Error::shape(format!(
                "input length {} for map of dimension {}",
                x.len(),
                self.input_dim()
            )));
        }
        let d_out = self.output_dim();
        let scale = (2.0 / d_out as f64).sqrt();
        let mut out = vec![0.0; d_out];
        for (r, row) in self.omega.rows().into_iter().enumerate() {
            let t = dot(row.as_slice().expect("contiguous"), x);
            out[2 * r] = scale * t.sin();
            out[2 * r + 1] = scale * t.cos();
        }
        Ok(out)
    }
}

/// Free-function form of `RksMap::apply`.
pub fn rks_apply(map: &RksMap, x: &[f64]) -> Result<Vec<f64>> {
    map.apply(x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::rng_for;
    use rand::Rng;

    fn norm(v: &[f64]) -> f64 {
        dot(v, v).sqrt()
    }

    #[test]
    fn same_seed_same_map() {
        let a = rks_draw(7, 64, 1.3, 5).unwrap();
        let b = rks_draw(7, 64, 1.3, 5).unwrap();
        assert_eq!(a.omega(), b.omega());
    }

    #[test]
    fn entry_scale_follows_bandwidth() {
        let map = rks_draw(100, 20_000, 2.0, 8).unwrap();
        let n = map.omega().len();
        let mean = map.omega().iter().sum::<f64>() / n as f64;
        let var = map.omega().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        assert!((sd - 0.5).abs() < 0.002, "sd {sd}");
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(rks_draw(0, 10, 1.0, 1).is_err());
        assert!(rks_draw(3, 7, 1.0, 1).is_err());
        assert!(rks_draw(3, 8, 0.0, 1).is_err());
        let map = rks_draw(3, 8, 1.0, 1).unwrap();
        assert!(map.apply(&[1.0, 2.0]).is_err());
    }

    #[test]
    fn unit_norm_identity() {
        let map = rks_draw(5, 256, 0.7, 2).unwrap();
        let mut rng = rng_for(3, "rks.unit");
        for _ in 0..10 {
            let x: Vec<f64> = (0..5).map(|_| rng.random::<f64>() * 4.0 - 2.0).collect();
            let z = map.apply(&x).unwrap();
            assert!((norm(&z) - 1.0).abs() < 1e-12);
            assert!((dot(&z, &z) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn gaussian_kernel_fidelity() {
        // Hoeffding-level agreement at D = 10^4 over 100 random pairs.
        let dim = 6;
        let map = rks_draw(dim, 10_000, 1.0, 77).unwrap();
        let mut rng = rng_for(78, "rks.fid");
        let mut worst = 0.0f64;
        for _ in 0..100 {
            let x: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.random::<f64>() * 1.2 - 0.6)
                .collect();
            let d2: f64 = x.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum();
            let zx = map.apply(&x).unwrap();
            let zy = map.apply(&y).unwrap();
            let approx = dot(&zx, &zy);
            let exact = (-0.5 * d2).exp();
            worst = worst.max((approx - exact).abs());
        }
        assert!(worst <= 0.05, "worst kernel error {worst}");
    }

    #[test]
    fn shift_invariance() {
        let dim = 4;
        let map = rks_draw(dim, 2048, 1.5, 10).unwrap();
        let x = [0.3, -0.1, 0.8, 0.2];
        let y = [0.1, 0.4, -0.2, 0.6];
        let c = [0.25, 0.25, 0.25, 0.25];
        let xs: Vec<f64> = x.iter().zip(&c).map(|(a, b)| a + b).collect();
        let ys: Vec<f64> = y.iter().zip(&c).map(|(a, b)| a + b).collect();
        let k0 = dot(&map.apply(&x).unwrap(), &map.apply(&y).unwrap());
        let k1 = dot(&map.apply(&xs).unwrap(), &map.apply(&ys).unwrap());
        assert!((k0 - k1).abs() <= 1e-9);
    }

    #[test]
    fn concentration_over_redraws() {
        let dim = 3;
        let x = [0.2, 0.5, -0.4];
        let y = [-0.1, 0.3, 0.3];
        let mut vals = Vec::new();
        for seed in 0..50 {
            let map = rks_draw(dim, 4096, 1.0, 1000 + seed).unwrap();
            vals.push(dot(&map.apply(&x).unwrap(), &map.apply(&y).unwrap()));
        }
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let sd = (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vals.len() - 1) as f64)
            .sqrt();
        assert!(sd <= 0.03, "sd over redraws {sd}");
    }
}
