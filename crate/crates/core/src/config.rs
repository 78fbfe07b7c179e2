//! Pipeline configuration.
//!
//! One flat JSON document drives every stage; stage-specific keys are
//! namespaced (`mcmc`, `synth`). Every field has a default and unknown keys
//! are rejected.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    /// Cumulative explained-variance fraction the PCA must retain.
    pub pca_variance_target: f64,
    /// Players with fewer shots than this are dropped before the EMD matrix.
    pub min_shots_per_player: usize,
    /// Exponent p of the p-Wasserstein distance; p = 1 is EMD.
    pub wasserstein_p: f64,
    /// Dendrogram cut for the shooting-style analysis.
    pub n_shot_clusters: usize,
    /// Fuzzy C-means cluster count for the role analysis.
    pub n_role_clusters: usize,
    /// Fuzzy C-means fuzzifier q (> 1).
    pub fuzzifier_q: f64,
    /// Relative objective-decrease tolerance for fuzzy C-means.
    pub fcm_tol: f64,
    pub fcm_max_iter: usize,
    pub kmeans_max_iter: usize,
    /// Lineups at or below this many minutes are excluded from the design.
    pub min_lineup_minutes: f64,
    /// Minutes horizon of the offensive-rating adjustment.
    pub adjust_horizon_minutes: f64,
    /// Prior mean of the team intercepts (105 for shooting-style runs, 110
    /// for role runs).
    pub mu_alpha: f64,
    /// Role-feature eligibility: minimum games played.
    pub role_min_games: u32,
    /// Role-feature eligibility: maximum fraction of missing playtypes.
    pub role_max_missing_fraction: f64,
    /// Z-score role features before clustering (off by default; raw
    /// percentage scale).
    pub scale_role_features: bool,
    /// Model one sigma_beta per feature instead of a shared scalar.
    pub sigma_beta_per_feature: bool,
    pub silhouette_k_min: usize,
    pub silhouette_k_max: usize,
    pub rhat_threshold: f64,
    pub mcmc: McmcConfig,
    pub synth: SynthConfig,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            pca_variance_target: 0.99,
            min_shots_per_player: 30,
            wasserstein_p: 1.0,
            n_shot_clusters: 13,
            n_role_clusters: 10,
            fuzzifier_q: 1.2,
            fcm_tol: 1e-8,
            fcm_max_iter: 500,
            kmeans_max_iter: 300,
            min_lineup_minutes: 50.0,
            adjust_horizon_minutes: 300.0,
            mu_alpha: 105.0,
            role_min_games: 20,
            role_max_missing_fraction: 0.5,
            scale_role_features: false,
            sigma_beta_per_feature: false,
            silhouette_k_min: 2,
            silhouette_k_max: 20,
            rhat_threshold: 1.1,
            mcmc: McmcConfig::default(),
            synth: SynthConfig::default(),
        }
    }
}

impl PipelineConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.pca_variance_target) {
            return Err(Error::Config(format!(
                "pca_variance_target must be in (0, 1], got {}",
                self.pca_variance_target
            )));
        }
        if self.wasserstein_p < 1.0 {
            return Err(Error::Config(format!(
                "wasserstein_p must be >= 1, got {}",
                self.wasserstein_p
            )));
        }
        if self.fuzzifier_q <= 1.0 {
            return Err(Error::Config(format!(
                "fuzzifier_q must be > 1, got {}",
                self.fuzzifier_q
            )));
        }
        if self.mcmc.chains < 2 {
            return Err(Error::Config(format!(
                "mcmc.chains must be >= 2, got {}",
                self.mcmc.chains
            )));
        }
        if self.adjust_horizon_minutes <= 0.0 {
            return Err(Error::Config(
                "adjust_horizon_minutes must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct McmcConfig {
    pub chains: usize,
    pub warmup: usize,
    pub draws: usize,
    pub seed: u64,
    pub target_accept: f64,
    pub max_tree_depth: usize,
}

impl Default for McmcConfig {
    fn default() -> Self {
        Self {
            chains: 4,
            warmup: 1000,
            draws: 1000,
            seed: 0,
            target_accept: 0.8,
            max_tree_depth: 10,
        }
    }
}

/// Parameters of the synthetic-data generator.
///
/// Each archetype is a generative template over the 17 shot features and
/// over playtype simplexes; lineup offensive ratings are generated from the
/// hierarchical linear likelihood so the inference stage has an exact
/// recovery target.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SynthConfig {
    /// Number of latent style archetypes K (>= 2).
    pub archetypes: usize,
    /// Total players, assigned round-robin to archetypes (balanced +-1).
    pub players: usize,
    pub shots_per_player: usize,
    pub teams: usize,
    pub lineups_per_team: usize,
    pub minutes_min: f64,
    pub minutes_max: f64,
    /// Gaussian noise sd of the generated offensive rating.
    pub noise_sd: f64,
    /// Location of the team-intercept distribution.
    pub alpha_base: f64,
    pub alpha_sd: f64,
    /// Scale of the random true pair effects.
    pub effect_sd: f64,
    /// Optional archetype pair (k <= k') whose true effect is forced.
    pub planted_pair: Option<(usize, usize)>,
    pub planted_effect: f64,
    /// Shot-center ring: archetype k shoots around radius
    /// base_radius + radius_step * k from the rim.
    pub base_radius: f64,
    pub radius_step: f64,
    /// Per-shot scatter around the archetype's shot center.
    pub location_jitter: f64,
    pub season: String,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            archetypes: 3,
            players: 60,
            shots_per_player: 30,
            teams: 6,
            lineups_per_team: 40,
            minutes_min: 55.0,
            minutes_max: 340.0,
            noise_sd: 2.0,
            alpha_base: 105.0,
            alpha_sd: 3.0,
            effect_sd: 1.0,
            planted_pair: None,
            planted_effect: 3.0,
            base_radius: 2.0,
            radius_step: 3.0,
            location_jitter: 0.4,
            season: "2015-16".to_string(),
        }
    }
}
