//! Bayesian hierarchical linear model fitted by NUTS, convergence
//! diagnostics, effect summaries, and the ridge baseline with
//! leave-one-team-out cross-validation.

mod baseline;
mod diagnostics;
mod effects;
mod model;
mod nuts;

pub use baseline::{baseline_fit_predict, leave_one_team_out, BaselineFold, CvMetrics};
pub use diagnostics::{split_rhat, split_rhat_value, RhatReport};
pub use effects::{effect_table, EffectRow, EffectTable};
pub use model::{log_posterior, HierarchicalModelSpec, ModelData, ParamLayout};
pub use nuts::{
    nuts_sample, sample_chains, ChainStats, LogDensity, NutsConfig, PosteriorSamples,
};
