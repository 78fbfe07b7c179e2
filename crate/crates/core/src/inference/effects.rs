//! Pairwise-effect summary: per-team posterior means of beta and the median
//! across teams.

use serde::{Deserialize, Serialize};

use super::model::ParamLayout;
use super::nuts::PosteriorSamples;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectRow {
    pub pair: String,
    /// E[beta_t] per team, in team order.
    pub team_means: Vec<f64>,
    /// Median of the per-team means.
    pub median: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EffectTable {
    pub rows: Vec<EffectRow>,
    /// Carried over from the convergence check; a non-converged fit must be
    /// surfaced prominently wherever the table is emitted.
    pub converged: bool,
}

impl EffectTable {
    /// Rows sorted by median effect, descending.
    pub fn sorted_descending(&self) -> Vec<EffectRow> {
        let mut rows = self.rows.clone();
        rows.sort_by(|a, b| b.median.total_cmp(&a.median));
        rows
    }
}

pub fn effect_table(
    samples: &PosteriorSamples,
    layout: &ParamLayout,
    pair_labels: &[String],
    converged: bool,
) -> Result<EffectTable> {
    if pair_labels.len() != layout.n_features {
        return Err(Error::Inference(format!(
            "{} pair labels for {} features",
            pair_labels.len(),
            layout.n_features
        )));
    }
    let rows = pair_labels
        .iter()
        .enumerate()
        .map(|(f, pair)| {
            let team_means: Vec<f64> = (0..layout.n_teams)
                .map(|t| samples.mean(layout.beta(t, f)))
                .collect();
            EffectRow {
                pair: pair.clone(),
                median: median(&team_means),
                team_means,
            }
        })
        .collect();
    Ok(EffectTable { rows, converged })
}

pub(crate) fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}
