//! Distributional linear baseline under the leave-one-team-out protocol:
//! ridge regression with an unpenalized intercept, ridge strength chosen by
//! an inner team-level cross-validation, Gaussian predictive with a fitted
//! homoscedastic variance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LAMBDA_GRID: [f64; 8] = [1e-8, 1e-6, 1e-4, 1e-2, 1e-1, 1.0, 10.0, 100.0];
const INNER_FOLDS: usize = 5;
const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineFold {
    pub fold_team: usize,
    /// Point predictions for the held-out rows, in input order.
    pub predictions: Vec<f64>,
    /// Shared Gaussian predictive standard deviation.
    pub predictive_sd: f64,
    pub rmse: f64,
    pub mae: f64,
    pub nll: f64,
    pub ridge_lambda: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CvMetrics {
    /// Metrics averaged over all team folds.
    pub rmse: f64,
    pub mae: f64,
    pub nll: f64,
    pub folds: Vec<BaselineFold>,
}

/// Fit on every team but `fold_team`, evaluate on `fold_team`.
pub fn baseline_fit_predict(
    x: &[Vec<f64>],
    y: &[f64],
    team_index: &[usize],
    fold_team: usize,
) -> Result<BaselineFold> {
    let n = y.len();
    if x.len() != n || team_index.len() != n {
        return Err(Error::Inference("inconsistent baseline shapes".to_string()));
    }
    let test_rows: Vec<usize> = (0..n).filter(|&i| team_index[i] == fold_team).collect();
    let train_rows: Vec<usize> = (0..n).filter(|&i| team_index[i] != fold_team).collect();
    if test_rows.is_empty() {
        return Err(Error::Inference(format!(
            "fold team {fold_team} has no rows"
        )));
    }
    if train_rows.is_empty() {
        return Err(Error::Inference("no training rows".to_string()));
    }

    let lambda = select_lambda(x, y, team_index, &train_rows)?;
    let weights = ridge_fit(x, y, &train_rows, lambda)?;

    // homoscedastic predictive variance from training residuals
    let var = train_rows
        .iter()
        .map(|&i| (y[i] - predict_row(&weights, &x[i])).powi(2))
        .sum::<f64>()
        / train_rows.len() as f64;
    let predictive_sd = var.max(1e-18).sqrt();

    let predictions: Vec<f64> = test_rows.iter().map(|&i| predict_row(&weights, &x[i])).collect();
    let mut se = 0.0;
    let mut ae = 0.0;
    let mut nll = 0.0;
    for (&i, pred) in test_rows.iter().zip(&predictions) {
        let r = y[i] - pred;
        se += r * r;
        ae += r.abs();
        nll += 0.5 * LN_2PI + predictive_sd.ln() + 0.5 * r * r / (predictive_sd * predictive_sd);
    }
    let count = test_rows.len() as f64;
    Ok(BaselineFold {
        fold_team,
        predictions,
        predictive_sd,
        rmse: (se / count).sqrt(),
        mae: ae / count,
        nll: nll / count,
        ridge_lambda: lambda,
    })
}

/// Run every team as the validation fold and average the metrics.
pub fn leave_one_team_out(x: &[Vec<f64>], y: &[f64], team_index: &[usize]) -> Result<CvMetrics> {
    let n_teams = team_index.iter().copied().max().map_or(0, |t| t + 1);
    if n_teams < 2 {
        return Err(Error::Inference(
            "leave-one-team-out needs at least 2 teams".to_string(),
        ));
    }
    let folds: Vec<BaselineFold> = (0..n_teams)
        .map(|t| baseline_fit_predict(x, y, team_index, t))
        .collect::<Result<_>>()?;
    let m = folds.len() as f64;
    Ok(CvMetrics {
        rmse: folds.iter().map(|f| f.rmse).sum::<f64>() / m,
        mae: folds.iter().map(|f| f.mae).sum::<f64>() / m,
        nll: folds.iter().map(|f| f.nll).sum::<f64>() / m,
        folds,
    })
}

/// Inner CV over training teams: teams are dealt round-robin into up to five
/// folds; the lambda with the lowest mean validation MSE wins, smaller
/// lambda on ties.
fn select_lambda(
    x: &[Vec<f64>],
    y: &[f64],
    team_index: &[usize],
    train_rows: &[usize],
) -> Result<f64> {
    let mut teams: Vec<usize> = train_rows.iter().map(|&i| team_index[i]).collect();
    teams.sort_unstable();
    teams.dedup();
    if teams.len() < 2 {
        return Ok(LAMBDA_GRID[0]);
    }
    let n_folds = teams.len().min(INNER_FOLDS);
    let fold_of_team = |team: usize| -> usize {
        teams.iter().position(|&t| t == team).expect("train team") % n_folds
    };

    let mut best = (f64::INFINITY, LAMBDA_GRID[0]);
    for &lambda in &LAMBDA_GRID {
        let mut se = 0.0;
        let mut count = 0usize;
        for fold in 0..n_folds {
            let inner_train: Vec<usize> = train_rows
                .iter()
                .copied()
                .filter(|&i| fold_of_team(team_index[i]) != fold)
                .collect();
            let inner_val: Vec<usize> = train_rows
                .iter()
                .copied()
                .filter(|&i| fold_of_team(team_index[i]) == fold)
                .collect();
            if inner_train.is_empty() || inner_val.is_empty() {
                continue;
            }
            let weights = ridge_fit(x, y, &inner_train, lambda)?;
            for &i in &inner_val {
                se += (y[i] - predict_row(&weights, &x[i])).powi(2);
                count += 1;
            }
        }
        if count == 0 {
            continue;
        }
        let mse = se / count as f64;
        if mse < best.0 {
            best = (mse, lambda);
        }
    }
    Ok(best.1)
}

/// Ridge solution [intercept, coefficients]; the intercept is unpenalized.
fn ridge_fit(x: &[Vec<f64>], y: &[f64], rows: &[usize], lambda: f64) -> Result<Vec<f64>> {
    let p = x.first().map_or(0, Vec::len) + 1;
    let mut xtx = DMatrix::<f64>::zeros(p, p);
    let mut xty = DVector::<f64>::zeros(p);
    for &i in rows {
        let mut row = Vec::with_capacity(p);
        row.push(1.0);
        row.extend_from_slice(&x[i]);
        for a in 0..p {
            xty[a] += row[a] * y[i];
            for b in 0..p {
                xtx[(a, b)] += row[a] * row[b];
            }
        }
    }
    for a in 1..p {
        xtx[(a, a)] += lambda;
    }
    let solved = xtx.lu().solve(&xty).ok_or_else(|| {
        Error::Inference("singular design after regularization".to_string())
    })?;
    Ok(solved.iter().copied().collect())
}

fn predict_row(weights: &[f64], x: &[f64]) -> f64 {
    weights[0] + weights[1..].iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
}
