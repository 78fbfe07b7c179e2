//! Split potential-scale-reduction diagnostic.

use serde::{Deserialize, Serialize};

use super::nuts::PosteriorSamples;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RhatReport {
    /// (parameter name, split R-hat), in parameter order.
    pub per_param: Vec<(String, f64)>,
    pub max_rhat: f64,
    /// true iff max R-hat is below the threshold it was judged against.
    pub converged: bool,
    pub threshold: f64,
}

/// Split R-hat for one parameter: each chain is halved and the classic
/// between/within variance ratio is computed over the half-chains. Zero
/// within-chain variance reports +inf.
pub fn split_rhat_value(chains: &[Vec<f64>]) -> f64 {
    let mut halves: Vec<&[f64]> = Vec::with_capacity(chains.len() * 2);
    for chain in chains {
        let n = chain.len();
        let half = n / 2;
        // odd length: middle draw dropped
        halves.push(&chain[..half]);
        halves.push(&chain[n - half..]);
    }
    let n = halves.iter().map(|h| h.len()).min().unwrap_or(0);
    if n < 2 {
        return f64::INFINITY;
    }
    let m = halves.len() as f64;
    let nf = n as f64;

    let means: Vec<f64> = halves
        .iter()
        .map(|h| h[..n].iter().sum::<f64>() / nf)
        .collect();
    let vars: Vec<f64> = halves
        .iter()
        .zip(&means)
        .map(|(h, mean)| h[..n].iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0))
        .collect();

    let w = vars.iter().sum::<f64>() / m;
    if w <= 0.0 {
        return f64::INFINITY;
    }
    let grand = means.iter().sum::<f64>() / m;
    let b = nf * means.iter().map(|mu| (mu - grand).powi(2)).sum::<f64>() / (m - 1.0);
    let var_plus = (nf - 1.0) / nf * w + b / nf;
    (var_plus / w).sqrt()
}

/// Per-parameter split R-hat over all sampled parameters.
pub fn split_rhat(samples: &PosteriorSamples, threshold: f64) -> Result<RhatReport> {
    if samples.n_chains() < 2 {
        return Err(Error::Inference(
            "split R-hat needs at least 2 chains".to_string(),
        ));
    }
    if samples.n_iterations() < 4 {
        return Err(Error::Inference(
            "split R-hat needs at least 4 iterations per chain".to_string(),
        ));
    }
    let mut per_param = Vec::with_capacity(samples.param_names.len());
    let mut max_rhat = f64::NEG_INFINITY;
    for (p, name) in samples.param_names.iter().enumerate() {
        let chains: Vec<Vec<f64>> = (0..samples.n_chains())
            .map(|c| samples.chain_series(c, p))
            .collect();
        let rhat = split_rhat_value(&chains);
        max_rhat = max_rhat.max(rhat);
        per_param.push((name.clone(), rhat));
    }
    Ok(RhatReport {
        per_param,
        max_rhat,
        converged: max_rhat < threshold,
        threshold,
    })
}
