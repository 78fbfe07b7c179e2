//! Feature pipelines: 17-dimensional shot features with standardization +
//! PCA, and playtype-based role features.

mod pca;
mod roles;
mod shot;

pub use pca::{fit_standardize_pca, pca_inverse_transform, pca_transform, PcaModel, COORD_COLUMNS};
pub use roles::{build_role_features, RoleFeatureVector, ROLE_FEATURE_NAMES};
pub use shot::{extract_shot_features, feature_matrix, ShotFeatureVector, SHOT_FEATURE_NAMES};
