//! Cluster merging for the shooting-style combination analysis.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clustering::{HardAssignment, MembershipMatrix};
use crate::{Error, Result};

/// Surjective map from source cluster labels onto merged labels.
///
/// Merged labels are indexed by first appearance in `groups`; the merged
/// label names are carried for reporting.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MergeMap {
    /// merged label name -> source labels, in merged-label order.
    pub groups: Vec<(String, Vec<usize>)>,
}

impl MergeMap {
    pub fn identity(c: usize) -> Self {
        Self {
            groups: (0..c).map(|k| (format!("cluster_{k}"), vec![k])).collect(),
        }
    }

    pub fn n_merged(&self) -> usize {
        self.groups.len()
    }

    pub fn merged_names(&self) -> Vec<String> {
        self.groups.iter().map(|(name, _)| name.clone()).collect()
    }

    /// source label -> merged index, or an error if a source label in
    /// 0..n_source is unmapped (or mapped twice).
    pub fn lookup(&self, n_source: usize) -> Result<Vec<usize>> {
        let mut table: BTreeMap<usize, usize> = BTreeMap::new();
        for (merged_idx, (_, sources)) in self.groups.iter().enumerate() {
            for &s in sources {
                if table.insert(s, merged_idx).is_some() {
                    return Err(Error::Lineup(format!(
                        "source cluster {s} appears in two merge groups"
                    )));
                }
            }
        }
        (0..n_source)
            .map(|s| {
                table.get(&s).copied().ok_or_else(|| {
                    Error::Lineup(format!("source cluster {s} is not covered by the merge map"))
                })
            })
            .collect()
    }

    pub fn apply_hard(&self, a: &HardAssignment) -> Result<HardAssignment> {
        let lut = self.lookup(a.n_clusters)?;
        Ok(HardAssignment {
            labels: a.labels.iter().map(|&l| lut[l]).collect(),
            n_clusters: self.n_merged(),
        })
    }

    /// Memberships of merged clusters are the sums of their sources, so row
    /// sums are preserved. Merged centroids are the membership-mass-weighted
    /// means of the source centroids.
    pub fn apply_soft(&self, m: &MembershipMatrix) -> Result<MembershipMatrix> {
        let c_src = m.n_clusters();
        let lut = self.lookup(c_src)?;
        let c_new = self.n_merged();
        let u: Vec<Vec<f64>> = m
            .u
            .iter()
            .map(|row| {
                let mut merged = vec![0.0; c_new];
                for (k, &v) in row.iter().enumerate() {
                    merged[lut[k]] += v;
                }
                merged
            })
            .collect();

        let mut mass = vec![0.0; c_src];
        for row in &m.u {
            for (k, &v) in row.iter().enumerate() {
                mass[k] += v;
            }
        }
        let dim = m.centroids.first().map_or(0, Vec::len);
        let mut centroids = vec![vec![0.0; dim]; c_new];
        let mut merged_mass = vec![0.0; c_new];
        for (k, centroid) in m.centroids.iter().enumerate() {
            let target = lut[k];
            merged_mass[target] += mass[k];
            for (acc, &v) in centroids[target].iter_mut().zip(centroid) {
                *acc += mass[k] * v;
            }
        }
        for (centroid, &w) in centroids.iter_mut().zip(&merged_mass) {
            if w > 0.0 {
                for v in centroid.iter_mut() {
                    *v /= w;
                }
            }
        }
        Ok(MembershipMatrix { u, centroids })
    }
}

/// The 13-to-5 shooting-style merge. Source indices follow the cluster
/// numbering CB, MB, MA, MS, OA, PH, DH, S4, CS, PS, OS, DS, SA (0..13).
pub fn default_shooting_merge_map() -> MergeMap {
    MergeMap {
        groups: vec![
            ("Close-range".to_string(), vec![0]),
            ("Mid-range".to_string(), vec![1, 2, 3]),
            ("All-rounder".to_string(), vec![4, 12]),
            ("Ball-handler".to_string(), vec![5, 6, 10]),
            ("3point-shooter".to_string(), vec![7, 8, 9, 11]),
        ],
    }
}
