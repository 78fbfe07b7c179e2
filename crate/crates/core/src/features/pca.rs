//! Standardization + PCA via covariance eigendecomposition.
//!
//! Only the six position-coordinate columns are z-scored; the remaining
//! eleven pass through with unit scale. Every column is centered. The output
//! dimension is the smallest one whose cumulative explained-variance ratio
//! reaches the target.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Indices of the position-coordinate features within the 17-vector.
pub const COORD_COLUMNS: [usize; 6] = [0, 1, 2, 3, 4, 5];

const N_FEATURES: usize = 17;
/// Slack for cumulative-ratio comparisons against the target.
const RATIO_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PcaModel {
    pub column_means: Vec<f64>,
    /// Standard deviation for coordinate columns, 1.0 elsewhere.
    pub column_scales: Vec<f64>,
    /// 17 x d, orthonormal columns; each column's largest-magnitude entry is
    /// positive so outputs are reproducible across runs.
    pub loadings: Vec<Vec<f64>>,
    pub explained_variance_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn output_dim(&self) -> usize {
        self.explained_variance_ratio.len()
    }

    fn loading_matrix(&self) -> DMatrix<f64> {
        let d = self.output_dim();
        DMatrix::from_fn(N_FEATURES, d, |i, j| self.loadings[i][j])
    }
}

pub fn fit_standardize_pca(features: &[Vec<f64>], variance_target: f64) -> Result<PcaModel> {
    let n = features.len();
    if n < N_FEATURES + 1 {
        return Err(Error::Pca(format!(
            "need at least {} rows to fit, got {n}",
            N_FEATURES + 1
        )));
    }
    if features.iter().any(|r| r.len() != N_FEATURES) {
        return Err(Error::Pca(format!("rows must have {N_FEATURES} columns")));
    }
    if !(0.0 < variance_target && variance_target <= 1.0) {
        return Err(Error::Pca(format!(
            "variance target must be in (0, 1], got {variance_target}"
        )));
    }

    let nf = n as f64;
    let mut column_means = vec![0.0; N_FEATURES];
    for row in features {
        for (m, v) in column_means.iter_mut().zip(row) {
            *m += v;
        }
    }
    for m in column_means.iter_mut() {
        *m /= nf;
    }

    let mut column_scales = vec![1.0; N_FEATURES];
    for &c in &COORD_COLUMNS {
        let constant = features.iter().all(|row| row[c] == features[0][c]);
        let var: f64 = features
            .iter()
            .map(|row| (row[c] - column_means[c]).powi(2))
            .sum::<f64>()
            / (nf - 1.0);
        if constant || var <= 0.0 {
            return Err(Error::Pca(format!(
                "coordinate column {c} has zero variance and cannot be standardized"
            )));
        }
        column_scales[c] = var.sqrt();
    }

    let z = standardized(features, &column_means, &column_scales);
    let cov = z.transpose() * &z / (nf - 1.0);
    let eigen = cov.symmetric_eigen();

    let mut order: Vec<usize> = (0..N_FEATURES).collect();
    order.sort_by(|&a, &b| eigen.eigenvalues[b].total_cmp(&eigen.eigenvalues[a]));
    let eigenvalues: Vec<f64> = order
        .iter()
        .map(|&i| eigen.eigenvalues[i].max(0.0))
        .collect();
    let total: f64 = eigenvalues.iter().sum();
    if total <= 0.0 {
        return Err(Error::Pca("covariance matrix has no variance".to_string()));
    }

    let ratios: Vec<f64> = eigenvalues.iter().map(|&l| l / total).collect();
    let mut cumulative = 0.0;
    let mut d = N_FEATURES;
    for (k, r) in ratios.iter().enumerate() {
        cumulative += r;
        if cumulative >= variance_target - RATIO_EPS {
            d = k + 1;
            break;
        }
    }

    let mut loadings = vec![vec![0.0; d]; N_FEATURES];
    for (j, &src) in order.iter().take(d).enumerate() {
        let col = eigen.eigenvectors.column(src);
        // sign convention: largest-magnitude entry positive
        let pivot = (0..N_FEATURES)
            .max_by(|&a, &b| col[a].abs().total_cmp(&col[b].abs()))
            .unwrap_or(0);
        let sign = if col[pivot] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..N_FEATURES {
            loadings[i][j] = sign * col[i];
        }
    }

    Ok(PcaModel {
        column_means,
        column_scales,
        loadings,
        explained_variance_ratio: ratios.into_iter().take(d).collect(),
    })
}

/// Standardize then project onto the retained components.
pub fn pca_transform(model: &PcaModel, features: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    if features.iter().any(|r| r.len() != N_FEATURES) {
        return Err(Error::Pca(format!(
            "rows must have {N_FEATURES} columns to transform"
        )));
    }
    let z = standardized(features, &model.column_means, &model.column_scales);
    let scores = z * model.loading_matrix();
    Ok(scores
        .row_iter()
        .map(|row| row.iter().copied().collect())
        .collect())
}

/// Map scores back into the original feature space (exact for data lying in
/// the retained subspace).
pub fn pca_inverse_transform(model: &PcaModel, scores: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = model.output_dim();
    let v = model.loading_matrix();
    scores
        .iter()
        .map(|s| {
            let s = DVector::from_iterator(d, s.iter().copied());
            let z = &v * s;
            (0..N_FEATURES)
                .map(|i| z[i] * model.column_scales[i] + model.column_means[i])
                .collect()
        })
        .collect()
}

fn standardized(features: &[Vec<f64>], means: &[f64], scales: &[f64]) -> DMatrix<f64> {
    DMatrix::from_fn(features.len(), N_FEATURES, |i, j| {
        (features[i][j] - means[j]) / scales[j]
    })
}
