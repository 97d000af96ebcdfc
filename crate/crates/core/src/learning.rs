//! Primal-space linear learning: closed-form ridge regression, validation
//! based hyperparameter selection, and evaluation metrics.
//!
//! Ridge minimizes (1/N) |y - X w - b|^2 + reg |w|^2. The averaged loss makes
//! the fit invariant to duplicating rows. The intercept is handled by
//! centering and is not penalized. The normal equations are solved in
//! whichever space is smaller: D x D when features are narrow, or the dual
//! N x N Gram form when (as in this crate) D far exceeds N; the push-through
//! identity makes the two routes the same minimizer.

use std::collections::HashMap;

use ndarray::{Array1, Array2};
use rand::seq::SliceRandom;

use crate::density::BandwidthSpec;
use crate::error::{Error, Result};
use crate::linalg::solve_spd;
use crate::rng::rng_for;

/// A fitted linear model.
#[derive(Debug, Clone)]
pub struct RidgeModel {
    pub weights: Vec<f64>,
    pub intercept: f64,
    pub reg: f64,
}

/// Centered normal-equation data for one feature matrix, reusable across
/// regularization values.
pub struct RidgeSolver<'a> {
    x: &'a Array2<f64>,
    col_means: Array1<f64>,
    /// Centered Gram matrix (dual route) or centered X^T X (primal route).
    gram: Array2<f64>,
    dual: bool,
}

impl<'a> RidgeSolver<'a> {
    pub fn new(features: &'a Array2<f64>) -> Result<Self> {
        let (n, d) = features.dim();
        if n == 0 || d == 0 {
            return Err(Error::domain("ridge needs a nonempty feature matrix"));
        }
        let col_means = features.mean_axis(ndarray::Axis(0)).expect("n >= 1");
        let dual = n <= d;
        let gram = if dual {
            // G_ij = (x_i - m) . (x_j - m) from the uncentered Gram.
            let mut g = features.dot(&features.t());
            let u: Vec<f64> = (0..n).map(|i| features.row(i).dot(&col_means)).collect();
            let mm = col_means.dot(&col_means);
            for i in 0..n {
                for j in 0..n {
                    g[(i, j)] += mm - u[i] - u[j];
                }
            }
            g
        } else {
            let mut g = features.t().dot(features);
            for a in 0..d {
                for b in 0..d {
                    g[(a, b)] -= n as f64 * col_means[a] * col_means[b];
                }
            }
            g
        };
        Ok(RidgeSolver { x: features, col_means, gram, dual })
    }

    pub fn fit(&self, targets: &[f64], reg: f64) -> Result<RidgeModel> {
        let (n, d) = self.x.dim();
        if targets.len() != n {
            return Err(Error::shape(format!(
                "{} targets for {n} rows",
                targets.len()
            )));
        }
        if reg < 0.0 {
            return Err(Error::domain("regularization must be nonnegative"));
        }
        let y_mean = targets.iter().sum::<f64>() / n as f64;
        let yc: Vec<f64> = targets.iter().map(|y| y - y_mean).collect();
        let weights = if self.dual {
            // (G + N reg I) alpha = y~, w = X~^T alpha.
            let mut a = self.gram.clone();
            for i in 0..n {
                a[(i, i)] += n as f64 * reg;
            }
            let alpha = solve_spd(&a, &yc).map_err(|e| ridge_singular(e, reg))?;
            let mut w = vec![0.0; d];
            for (i, &ai) in alpha.iter().enumerate() {
                for (wk, xk) in w.iter_mut().zip(self.x.row(i)) {
                    *wk += ai * xk;
                }
            }
            let alpha_sum: f64 = alpha.iter().sum();
            for (wk, mk) in w.iter_mut().zip(&self.col_means) {
                *wk -= alpha_sum * mk;
            }
            w
        } else {
            // (X~^T X~ / N + reg I) w = X~^T y~ / N.
            let mut a = self.gram.clone() / n as f64;
            for k in 0..d {
                a[(k, k)] += reg;
            }
            let mut b = vec![0.0; d];
            for (i, &yi) in yc.iter().enumerate() {
                for (bk, xk) in b.iter_mut().zip(self.x.row(i)) {
                    *bk += yi * xk;
                }
            }
            // Centered y has zero mean, so the mean term of X~ drops out.
            for bk in b.iter_mut() {
                *bk /= n as f64;
            }
            solve_spd(&a, &b).map_err(|e| ridge_singular(e, reg))?
        };
        let intercept = y_mean
            - self
                .col_means
                .iter()
                .zip(&weights)
                .map(|(m, w)| m * w)
                .sum::<f64>();
        Ok(RidgeModel { weights, intercept, reg })
    }
}

fn ridge_singular(e: Error, reg: f64) -> Error {
    match e {
        Error::Numerical(msg) => Error::Numerical(format!(
            "ridge normal equations singular at reg = {reg} ({msg}); use reg > 0"
        )),
        other => other,
    }
}

/// Closed-form centered ridge fit.
pub fn ridge_fit(features: &Array2<f64>, targets: &[f64], reg: f64) -> Result<RidgeModel> {
    RidgeSolver::new(features)?.fit(targets, reg)
}

pub fn ridge_predict(model: &RidgeModel, features: &Array2<f64>) -> Vec<f64> {
    features
        .rows()
        .into_iter()
        .map(|row| match row.as_slice() {
            Some(s) => crate::linalg::dot(s, &model.weights) + model.intercept,
            None => {
                row.iter().zip(&model.weights).map(|(a, b)| a * b).sum::<f64>() + model.intercept
            }
        })
        .collect()
}

/// One point of the hyperparameter grid searched by `model_select`.
#[derive(Debug, Clone, PartialEq)]
pub struct HyperCandidate {
    pub reg: f64,
    pub sigma_k: f64,
    pub kde_bandwidths: BandwidthSpec,
}

/// Outcome of validation selection.
#[derive(Debug, Clone)]
pub struct ModelSelection {
    pub best_index: usize,
    pub val_rmse: f64,
    pub val_indices: Vec<usize>,
    pub train_indices: Vec<usize>,
}

/// Pick the grid point minimizing validation RMSE on a deterministic split.
///
/// `features_for` must return the full feature matrix for a candidate; it is
/// treated as a pure function of (sigma_k, kde_bandwidths), and candidates
/// sharing those fields share one feature matrix and one Gram factorization.
/// Exact ties in RMSE break toward the larger regularization.
pub fn model_select<F>(
    targets: &[f64],
    grid: &[HyperCandidate],
    val_fraction: f64,
    seed: u64,
    mut features_for: F,
) -> Result<ModelSelection>
where
    F: FnMut(&HyperCandidate) -> Result<Array2<f64>>,
{
    if grid.is_empty() {
        return Err(Error::domain("hyperparameter grid is empty"));
    }
    if !(0.0 < val_fraction && val_fraction < 1.0) {
        return Err(Error::domain("validation fraction must be in (0, 1)"));
    }
    let n = targets.len();
    if n < 2 {
        return Err(Error::domain("selection needs at least two rows"));
    }
    let mut order: Vec<usize> = (0..n).collect();
    let mut rng = rng_for(seed, "select.split");
    order.shuffle(&mut rng);
    let n_val = ((n as f64 * val_fraction).floor() as usize).clamp(1, n - 1);
    let val_indices = order[..n_val].to_vec();
    let train_indices = order[n_val..].to_vec();
    let train_targets: Vec<f64> = train_indices.iter().map(|&i| targets[i]).collect();
    let val_targets: Vec<f64> = val_indices.iter().map(|&i| targets[i]).collect();

    // Group candidates that share a feature matrix.
    let mut groups: HashMap<(u64, String), Vec<usize>> = HashMap::new();
    for (idx, cand) in grid.iter().enumerate() {
        let key = (cand.sigma_k.to_bits(), format!("{:?}", cand.kde_bandwidths));
        groups.entry(key).or_default().push(idx);
    }
    let mut group_order: Vec<&Vec<usize>> = groups.values().collect();
    group_order.sort_by_key(|v| v[0]);

    let mut best: Option<(usize, f64)> = None;
    for members in group_order {
        let features = features_for(&grid[members[0]])?;
        if features.nrows() != n {
            return Err(Error::shape(format!(
                "feature matrix has {} rows for {n} targets",
                features.nrows()
            )));
        }
        let train_x = features.select(ndarray::Axis(0), &train_indices);
        let val_x = features.select(ndarray::Axis(0), &val_indices);
        let solver = RidgeSolver::new(&train_x)?;
        for &idx in members {
            let model = solver.fit(&train_targets, grid[idx].reg)?;
            let preds = ridge_predict(&model, &val_x);
            let err = rmse(&preds, &val_targets)?;
            let better = match best {
                None => true,
                Some((bi, be)) => {
                    err < be || (err == be && grid[idx].reg > grid[bi].reg)
                }
            };
            if better {
                best = Some((idx, err));
            }
        }
    }
    let (best_index, val_rmse) = best.expect("grid is nonempty");
    Ok(ModelSelection { best_index, val_rmse, val_indices, train_indices })
}

/// Root mean squared error.
pub fn rmse(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::shape(format!(
            "{} predictions for {} targets",
            pred.len(),
            truth.len()
        )));
    }
    let se: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok((se / pred.len() as f64).sqrt())
}

/// Coefficient of determination 1 - SS_res / SS_tot.
pub fn r2_score(pred: &[f64], truth: &[f64]) -> Result<f64> {
    if pred.len() != truth.len() || pred.is_empty() {
        return Err(Error::shape(format!(
            "{} predictions for {} targets",
            pred.len(),
            truth.len()
        )));
    }
    let mean = truth.iter().sum::<f64>() / truth.len() as f64;
    let ss_tot: f64 = truth.iter().map(|t| (t - mean) * (t - mean)).sum();
    if ss_tot == 0.0 {
        return Err(Error::domain(
            "constant truth vector: R^2 is undefined".to_string(),
        ));
    }
    let ss_res: f64 = pred.iter().zip(truth).map(|(p, t)| (p - t) * (p - t)).sum();
    Ok(1.0 - ss_res / ss_tot)
}

/// R^2 of an estimated Gram matrix against a reference, over all N^2
/// entries including the diagonal.
pub fn gram_r2(estimate: &Array2<f64>, reference: &Array2<f64>) -> Result<f64> {
    if estimate.dim() != reference.dim() {
        return Err(Error::shape(format!(
            "gram shapes {:?} vs {:?}",
            estimate.dim(),
            reference.dim()
        )));
    }
    let est: Vec<f64> = estimate.iter().copied().collect();
    let rf: Vec<f64> = reference.iter().copied().collect();
    r2_score(&est, &rf)
}
