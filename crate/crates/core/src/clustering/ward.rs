//! Ward agglomeration via the Lance-Williams recurrence on squared input
//! distances. Heights are reported back on the distance scale. Ties in the
//! merge selection break toward the lexicographically smallest node pair, so
//! the merge sequence is deterministic.

use serde::{Deserialize, Serialize};

use crate::transport::DistanceMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Merge {
    /// Node ids: leaves are 0..n, merge step s creates node n + s.
    pub left: usize,
    pub right: usize,
    /// Ward linkage height on the distance scale.
    pub height: f64,
    /// Number of leaves under the new node.
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dendrogram {
    pub leaf_labels: Vec<String>,
    pub merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn n_leaves(&self) -> usize {
        self.leaf_labels.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardAssignment {
    /// Cluster id per leaf, in [0, n_clusters).
    pub labels: Vec<usize>,
    pub n_clusters: usize,
}

impl HardAssignment {
    /// Member indices per cluster.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut members = vec![Vec::new(); self.n_clusters];
        for (i, &l) in self.labels.iter().enumerate() {
            members[l].push(i);
        }
        members
    }
}

pub fn ward_linkage(dm: &DistanceMatrix) -> Result<Dendrogram> {
    let n = dm.len();
    if n < 2 {
        return Err(Error::Clustering(format!(
            "need at least 2 observations, got {n}"
        )));
    }
    if dm.values.iter().flatten().any(|v| v.is_nan()) {
        return Err(Error::Clustering("distance matrix contains NaN".to_string()));
    }

    let n_nodes = 2 * n - 1;
    let mut size = vec![0usize; n_nodes];
    let mut active: Vec<usize> = (0..n).collect();
    for s in size.iter_mut().take(n) {
        *s = 1;
    }

    // squared-distance table over node ids
    let mut d2 = vec![vec![0.0f64; n_nodes]; n_nodes];
    for i in 0..n {
        for j in 0..n {
            d2[i][j] = dm.values[i][j] * dm.values[i][j];
        }
    }

    let mut merges = Vec::with_capacity(n - 1);
    for step in 0..n - 1 {
        // global minimum; active is sorted, strict < keeps the smallest pair
        let mut best: Option<(f64, usize, usize)> = None;
        for (ai, &a) in active.iter().enumerate() {
            for &b in active.iter().skip(ai + 1) {
                let v = d2[a][b];
                if best.map_or(true, |(bv, _, _)| v < bv) {
                    best = Some((v, a, b));
                }
            }
        }
        let (min_d2, a, b) = best.expect("at least two active clusters");
        let new = n + step;
        size[new] = size[a] + size[b];
        merges.push(Merge {
            left: a,
            right: b,
            height: min_d2.max(0.0).sqrt(),
            size: size[new],
        });

        // Lance-Williams update with Ward coefficients
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for &c in &active {
            if c == a || c == b {
                continue;
            }
            let nc = size[c] as f64;
            let v = ((na + nc) * d2[a][c] + (nb + nc) * d2[b][c] - nc * min_d2)
                / (na + nb + nc);
            d2[new][c] = v;
            d2[c][new] = v;
        }
        active.retain(|&x| x != a && x != b);
        let pos = active.partition_point(|&x| x < new);
        active.insert(pos, new);
    }

    Ok(Dendrogram {
        leaf_labels: dm.labels.clone(),
        merges,
    })
}

/// Cut into exactly k clusters. Labels are ordered by cluster size
/// descending, then by smallest member index.
pub fn cut_dendrogram(dendrogram: &Dendrogram, k: usize) -> Result<HardAssignment> {
    let n = dendrogram.n_leaves();
    if k < 1 || k > n {
        return Err(Error::Clustering(format!(
            "cut k = {k} out of range for {n} leaves"
        )));
    }
    let mut membership: Vec<Option<Vec<usize>>> = (0..2 * n - 1).map(|_| None).collect();
    for (i, slot) in membership.iter_mut().take(n).enumerate() {
        *slot = Some(vec![i]);
    }
    for (step, merge) in dendrogram.merges.iter().take(n - k).enumerate() {
        let mut left = membership[merge.left].take().expect("active node");
        let mut right = membership[merge.right].take().expect("active node");
        left.append(&mut right);
        membership[n + step] = Some(left);
    }

    let mut clusters: Vec<Vec<usize>> = membership.into_iter().flatten().collect();
    debug_assert_eq!(clusters.len(), k);
    for members in clusters.iter_mut() {
        members.sort_unstable();
    }
    clusters.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));

    let mut labels = vec![0usize; n];
    for (cluster_id, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = cluster_id;
        }
    }
    Ok(HardAssignment {
        labels,
        n_clusters: k,
    })
}
