//! The hierarchical linear regression target in unconstrained space.
//!
//! y_i ~ N(alpha_t(i) + x_i . beta_t(i), epsilon^2)
//! alpha_t ~ N(mu_alpha, alpha_sd^2)
//! beta_tf ~ N(mu_beta_f, sigma_beta^2)
//! mu_beta_f ~ N(0, mu_beta_sd^2)
//! sigma_beta ~ Half-Normal(sigma_beta_scale)
//! epsilon ~ Half-Normal(epsilon_scale)
//!
//! sigma_beta and epsilon are sampled on the log scale with the Jacobian
//! folded into the density; epsilon is one shared (homoscedastic) scale and
//! sigma_beta is a shared scalar unless per-feature mode is switched on.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

const LN_2PI: f64 = 1.8378770664093453;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HierarchicalModelSpec {
    pub n_teams: usize,
    pub n_features: usize,
    /// Prior mean of the team intercepts.
    pub mu_alpha: f64,
    pub alpha_sd: f64,
    pub mu_beta_sd: f64,
    pub sigma_beta_scale: f64,
    pub epsilon_scale: f64,
    pub sigma_beta_per_feature: bool,
}

impl HierarchicalModelSpec {
    pub fn new(n_teams: usize, n_features: usize, mu_alpha: f64) -> Self {
        Self {
            n_teams,
            n_features,
            mu_alpha,
            alpha_sd: 10.0,
            mu_beta_sd: 10.0,
            sigma_beta_scale: 10.0,
            epsilon_scale: 10.0,
            sigma_beta_per_feature: false,
        }
    }

    pub fn layout(&self) -> ParamLayout {
        ParamLayout::new(self)
    }

    pub fn check(&self) -> Result<()> {
        for (name, v) in [
            ("alpha_sd", self.alpha_sd),
            ("mu_beta_sd", self.mu_beta_sd),
            ("sigma_beta_scale", self.sigma_beta_scale),
            ("epsilon_scale", self.epsilon_scale),
        ] {
            if !(v > 0.0) {
                return Err(Error::Inference(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.n_teams == 0 || self.n_features == 0 {
            return Err(Error::Inference(
                "model needs at least one team and one feature".to_string(),
            ));
        }
        Ok(())
    }
}

/// Index map into the flat unconstrained parameter vector.
#[derive(Debug, Clone, Copy)]
pub struct ParamLayout {
    pub n_teams: usize,
    pub n_features: usize,
    pub n_sigma: usize,
    pub alpha_start: usize,
    pub beta_start: usize,
    pub mu_beta_start: usize,
    pub log_sigma_start: usize,
    pub log_epsilon: usize,
    pub dim: usize,
}

impl ParamLayout {
    fn new(spec: &HierarchicalModelSpec) -> Self {
        let (t, f) = (spec.n_teams, spec.n_features);
        let n_sigma = if spec.sigma_beta_per_feature { f } else { 1 };
        let alpha_start = 0;
        let beta_start = t;
        let mu_beta_start = t + t * f;
        let log_sigma_start = mu_beta_start + f;
        let log_epsilon = log_sigma_start + n_sigma;
        Self {
            n_teams: t,
            n_features: f,
            n_sigma,
            alpha_start,
            beta_start,
            mu_beta_start,
            log_sigma_start,
            log_epsilon,
            dim: log_epsilon + 1,
        }
    }

    pub fn alpha(&self, t: usize) -> usize {
        self.alpha_start + t
    }

    pub fn beta(&self, t: usize, f: usize) -> usize {
        self.beta_start + t * self.n_features + f
    }

    pub fn mu_beta(&self, f: usize) -> usize {
        self.mu_beta_start + f
    }

    pub fn log_sigma(&self, f: usize) -> usize {
        self.log_sigma_start + if self.n_sigma == 1 { 0 } else { f }
    }

    pub fn param_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim);
        for t in 0..self.n_teams {
            names.push(format!("alpha[{t}]"));
        }
        for t in 0..self.n_teams {
            for f in 0..self.n_features {
                names.push(format!("beta[{t}][{f}]"));
            }
        }
        for f in 0..self.n_features {
            names.push(format!("mu_beta[{f}]"));
        }
        if self.n_sigma == 1 {
            names.push("log_sigma_beta".to_string());
        } else {
            for f in 0..self.n_features {
                names.push(format!("log_sigma_beta[{f}]"));
            }
        }
        names.push("log_epsilon".to_string());
        names
    }
}

/// Design matrix, response, and team index per observation.
#[derive(Debug, Clone)]
pub struct ModelData {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<f64>,
    pub team_index: Vec<usize>,
}

impl ModelData {
    pub fn check(&self, spec: &HierarchicalModelSpec) -> Result<()> {
        let n = self.y.len();
        if self.x.len() != n || self.team_index.len() != n {
            return Err(Error::Inference(format!(
                "inconsistent data shapes: {} rows of x, {} of y, {} team indices",
                self.x.len(),
                n,
                self.team_index.len()
            )));
        }
        if self.x.iter().any(|r| r.len() != spec.n_features) {
            return Err(Error::Inference(format!(
                "x rows must have {} features",
                spec.n_features
            )));
        }
        if self.team_index.iter().any(|&t| t >= spec.n_teams) {
            return Err(Error::Inference("team index out of range".to_string()));
        }
        Ok(())
    }
}

/// Log posterior density and its exact gradient at an unconstrained point.
/// A non-finite density is signalled as -inf with a zero gradient, which
/// the sampler treats as a divergence.
pub fn log_posterior(
    spec: &HierarchicalModelSpec,
    data: &ModelData,
    params: &[f64],
) -> (f64, Vec<f64>) {
    let layout = spec.layout();
    debug_assert_eq!(params.len(), layout.dim);
    let mut grad = vec![0.0; layout.dim];
    let mut lp = 0.0;

    let log_eps = params[layout.log_epsilon];
    let eps = log_eps.exp();
    let eps2 = eps * eps;

    // likelihood
    let inv_eps2 = 1.0 / eps2;
    let mut sum_r2 = 0.0;
    for i in 0..data.y.len() {
        let t = data.team_index[i];
        let mut mu = params[layout.alpha(t)];
        let beta_row = layout.beta(t, 0);
        for (f, xv) in data.x[i].iter().enumerate() {
            mu += xv * params[beta_row + f];
        }
        let r = data.y[i] - mu;
        sum_r2 += r * r;
        let scaled = r * inv_eps2;
        grad[layout.alpha(t)] += scaled;
        for (f, xv) in data.x[i].iter().enumerate() {
            grad[beta_row + f] += scaled * xv;
        }
    }
    let n = data.y.len() as f64;
    lp += -0.5 * n * LN_2PI - n * log_eps - 0.5 * sum_r2 * inv_eps2;
    grad[layout.log_epsilon] += -n + sum_r2 * inv_eps2;

    // alpha prior
    let a_var = spec.alpha_sd * spec.alpha_sd;
    for t in 0..layout.n_teams {
        let d = params[layout.alpha(t)] - spec.mu_alpha;
        lp += -0.5 * LN_2PI - spec.alpha_sd.ln() - 0.5 * d * d / a_var;
        grad[layout.alpha(t)] -= d / a_var;
    }

    // beta prior given mu_beta and sigma_beta
    for f in 0..layout.n_features {
        let ls = params[layout.log_sigma(f)];
        let sigma = ls.exp();
        let s2 = sigma * sigma;
        let mu_b = params[layout.mu_beta(f)];
        for t in 0..layout.n_teams {
            let d = params[layout.beta(t, f)] - mu_b;
            lp += -0.5 * LN_2PI - ls - 0.5 * d * d / s2;
            grad[layout.beta(t, f)] -= d / s2;
            grad[layout.mu_beta(f)] += d / s2;
            grad[layout.log_sigma(f)] += -1.0 + d * d / s2;
        }
    }

    // mu_beta prior
    let mb_var = spec.mu_beta_sd * spec.mu_beta_sd;
    for f in 0..layout.n_features {
        let v = params[layout.mu_beta(f)];
        lp += -0.5 * LN_2PI - spec.mu_beta_sd.ln() - 0.5 * v * v / mb_var;
        grad[layout.mu_beta(f)] -= v / mb_var;
    }

    // Half-Normal priors on the log scale, Jacobian included
    let s_scale2 = spec.sigma_beta_scale * spec.sigma_beta_scale;
    for k in 0..layout.n_sigma {
        let ls = params[layout.log_sigma_start + k];
        let sigma2 = (2.0 * ls).exp();
        lp += half_normal_logpdf_const(spec.sigma_beta_scale) - 0.5 * sigma2 / s_scale2 + ls;
        grad[layout.log_sigma_start + k] += -sigma2 / s_scale2 + 1.0;
    }
    let e_scale2 = spec.epsilon_scale * spec.epsilon_scale;
    lp += half_normal_logpdf_const(spec.epsilon_scale) - 0.5 * eps2 / e_scale2 + log_eps;
    grad[layout.log_epsilon] += -eps2 / e_scale2 + 1.0;

    if !lp.is_finite() {
        return (f64::NEG_INFINITY, vec![0.0; layout.dim]);
    }
    (lp, grad)
}

fn half_normal_logpdf_const(scale: f64) -> f64 {
    // log( sqrt(2/pi) / scale )
    0.5 * (2.0 / std::f64::consts::PI).ln() - scale.ln()
}

/// The same posterior in the non-centered parameterization the sampler
/// runs on: the beta block holds standardized offsets z with
/// beta_tf = mu_beta_f + sigma_beta_f * z_tf. Algebraically equivalent to
/// [`log_posterior`] but without the hierarchical funnel, so chains mix.
pub(crate) fn log_posterior_noncentered(
    spec: &HierarchicalModelSpec,
    data: &ModelData,
    params: &[f64],
) -> (f64, Vec<f64>) {
    let layout = spec.layout();
    debug_assert_eq!(params.len(), layout.dim);
    let mut grad = vec![0.0; layout.dim];
    let mut lp = 0.0;

    let log_eps = params[layout.log_epsilon];
    let eps = log_eps.exp();
    let inv_eps2 = 1.0 / (eps * eps);

    let sigmas: Vec<f64> = (0..layout.n_features)
        .map(|f| params[layout.log_sigma(f)].exp())
        .collect();

    // likelihood with beta_tf = mu_f + sigma_f z_tf;
    // g[t][f] accumulates d lp / d beta_tf from the likelihood
    let mut g = vec![0.0; layout.n_teams * layout.n_features];
    let mut sum_r2 = 0.0;
    for i in 0..data.y.len() {
        let t = data.team_index[i];
        let mut mu = params[layout.alpha(t)];
        for (f, xv) in data.x[i].iter().enumerate() {
            let beta = params[layout.mu_beta(f)] + sigmas[f] * params[layout.beta(t, f)];
            mu += xv * beta;
        }
        let r = data.y[i] - mu;
        sum_r2 += r * r;
        let scaled = r * inv_eps2;
        grad[layout.alpha(t)] += scaled;
        for (f, xv) in data.x[i].iter().enumerate() {
            g[t * layout.n_features + f] += scaled * xv;
        }
    }
    let n = data.y.len() as f64;
    lp += -0.5 * n * LN_2PI - n * log_eps - 0.5 * sum_r2 * inv_eps2;
    grad[layout.log_epsilon] += -n + sum_r2 * inv_eps2;

    for t in 0..layout.n_teams {
        for f in 0..layout.n_features {
            let gtf = g[t * layout.n_features + f];
            let z = params[layout.beta(t, f)];
            grad[layout.beta(t, f)] += gtf * sigmas[f];
            grad[layout.mu_beta(f)] += gtf;
            grad[layout.log_sigma(f)] += gtf * sigmas[f] * z;
        }
    }

    // alpha prior
    let a_var = spec.alpha_sd * spec.alpha_sd;
    for t in 0..layout.n_teams {
        let d = params[layout.alpha(t)] - spec.mu_alpha;
        lp += -0.5 * LN_2PI - spec.alpha_sd.ln() - 0.5 * d * d / a_var;
        grad[layout.alpha(t)] -= d / a_var;
    }

    // standard-normal prior on the offsets
    for t in 0..layout.n_teams {
        for f in 0..layout.n_features {
            let z = params[layout.beta(t, f)];
            lp += -0.5 * LN_2PI - 0.5 * z * z;
            grad[layout.beta(t, f)] -= z;
        }
    }

    // mu_beta prior
    let mb_var = spec.mu_beta_sd * spec.mu_beta_sd;
    for f in 0..layout.n_features {
        let v = params[layout.mu_beta(f)];
        lp += -0.5 * LN_2PI - spec.mu_beta_sd.ln() - 0.5 * v * v / mb_var;
        grad[layout.mu_beta(f)] -= v / mb_var;
    }

    // Half-Normal priors on the log scale, Jacobian included
    let s_scale2 = spec.sigma_beta_scale * spec.sigma_beta_scale;
    for k in 0..layout.n_sigma {
        let ls = params[layout.log_sigma_start + k];
        let sigma2 = (2.0 * ls).exp();
        lp += half_normal_logpdf_const(spec.sigma_beta_scale) - 0.5 * sigma2 / s_scale2 + ls;
        grad[layout.log_sigma_start + k] += -sigma2 / s_scale2 + 1.0;
    }
    let e_scale2 = spec.epsilon_scale * spec.epsilon_scale;
    lp += half_normal_logpdf_const(spec.epsilon_scale) - 0.5 * eps * eps / e_scale2 + log_eps;
    grad[layout.log_epsilon] += -eps * eps / e_scale2 + 1.0;

    if !lp.is_finite() {
        return (f64::NEG_INFINITY, vec![0.0; layout.dim]);
    }
    (lp, grad)
}

/// Map a non-centered draw to the reported parameter blocks
/// (alpha, beta, mu_beta, log_sigma_beta, log_epsilon).
pub(crate) fn center_draw(layout: &ParamLayout, draw: &[f64]) -> Vec<f64> {
    let mut out = draw.to_vec();
    for f in 0..layout.n_features {
        let sigma = draw[layout.log_sigma(f)].exp();
        let mu = draw[layout.mu_beta(f)];
        for t in 0..layout.n_teams {
            out[layout.beta(t, f)] = mu + sigma * draw[layout.beta(t, f)];
        }
    }
    out
}
