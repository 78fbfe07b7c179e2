//! Clustering: Ward agglomeration on a precomputed distance matrix with
//! silhouette-based k selection, plus k-means and fuzzy C-means for the role
//! features.

mod fcm;
mod kmeans;
mod silhouette;
mod ward;

pub use fcm::{fuzzy_cmeans, FcmFit, MembershipMatrix};
pub use kmeans::{kmeans, KmeansFit};
pub use silhouette::{silhouette_mean, silhouette_sweep};
pub use ward::{cut_dendrogram, ward_linkage, Dendrogram, HardAssignment, Merge};

pub(crate) fn sq_euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}
