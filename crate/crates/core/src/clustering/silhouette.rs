//! Mean silhouette coefficient over a precomputed distance matrix.

use super::ward::{cut_dendrogram, Dendrogram, HardAssignment};
use crate::transport::DistanceMatrix;
use crate::{Error, Result};

/// Mean of the per-point silhouette values s = (b - a) / max(a, b), where a
/// is the mean distance to the point's own cluster and b the mean distance
/// to the nearest other cluster. Points in singleton clusters score 0, as
/// does the degenerate a = b = 0 case.
pub fn silhouette_mean(dm: &DistanceMatrix, assignment: &HardAssignment) -> Result<f64> {
    let k = assignment.n_clusters;
    if k < 2 {
        return Err(Error::Clustering(format!(
            "silhouette needs at least 2 clusters, got {k}"
        )));
    }
    let n = dm.len();
    if assignment.labels.len() != n {
        return Err(Error::Clustering(format!(
            "{} labels for {n} observations",
            assignment.labels.len()
        )));
    }
    let members = assignment.members();
    if members.iter().any(Vec::is_empty) {
        return Err(Error::Clustering("empty cluster in assignment".to_string()));
    }

    let mut total = 0.0;
    for i in 0..n {
        let own = assignment.labels[i];
        if members[own].len() == 1 {
            continue; // singleton: s = 0
        }
        let a = members[own]
            .iter()
            .filter(|&&j| j != i)
            .map(|&j| dm.get(i, j))
            .sum::<f64>()
            / (members[own].len() - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| {
                members[c].iter().map(|&j| dm.get(i, j)).sum::<f64>() / members[c].len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

/// One dendrogram cut and mean silhouette per k in the inclusive range.
pub fn silhouette_sweep(
    dm: &DistanceMatrix,
    dendrogram: &Dendrogram,
    k_min: usize,
    k_max: usize,
) -> Result<Vec<(usize, f64)>> {
    let k_min = k_min.max(2);
    let k_max = k_max.min(dm.len());
    let mut out = Vec::new();
    for k in k_min..=k_max {
        let assignment = cut_dendrogram(dendrogram, k)?;
        out.push((k, silhouette_mean(dm, &assignment)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::ward_linkage;

    fn matrix_from_points(points: &[f64]) -> DistanceMatrix {
        let n = points.len();
        let values = (0..n)
            .map(|i| (0..n).map(|j| (points[i] - points[j]).abs()).collect())
            .collect();
        DistanceMatrix::new((0..n).map(|i| format!("x{i}")).collect(), values).unwrap()
    }

    #[test]
    fn tight_far_clusters_score_near_one() {
        let dm = matrix_from_points(&[0.0, 0.01, 100.0, 100.01]);
        let assignment = HardAssignment {
            labels: vec![0, 0, 1, 1],
            n_clusters: 2,
        };
        let s = silhouette_mean(&dm, &assignment).unwrap();
        assert!(s >= 0.99, "got {s}");
    }

    #[test]
    fn identical_points_score_zero() {
        let dm = matrix_from_points(&[5.0, 5.0, 5.0, 5.0]);
        let assignment = HardAssignment {
            labels: vec![0, 1, 0, 1],
            n_clusters: 2,
        };
        assert_eq!(silhouette_mean(&dm, &assignment).unwrap(), 0.0);
    }

    #[test]
    fn six_point_case_matches_hand_evaluation() {
        // points 0, 1, 2 in cluster 0; 5, 6, 10 in cluster 1
        let pts = [0.0, 1.0, 2.0, 5.0, 6.0, 10.0];
        let dm = matrix_from_points(&pts);
        let assignment = HardAssignment {
            labels: vec![0, 0, 0, 1, 1, 1],
            n_clusters: 2,
        };
        // hand evaluation straight from the defining equations
        let mut expected = 0.0;
        let clusters = [vec![0usize, 1, 2], vec![3usize, 4, 5]];
        for i in 0..6 {
            let own = if i < 3 { 0 } else { 1 };
            let a: f64 = clusters[own]
                .iter()
                .filter(|&&j| j != i)
                .map(|&j| (pts[i] - pts[j]).abs())
                .sum::<f64>()
                / 2.0;
            let b: f64 = clusters[1 - own]
                .iter()
                .map(|&j| (pts[i] - pts[j]).abs())
                .sum::<f64>()
                / 3.0;
            expected += (b - a) / a.max(b);
        }
        expected /= 6.0;
        let s = silhouette_mean(&dm, &assignment).unwrap();
        assert!((s - expected).abs() < 1e-12, "{s} vs {expected}");
    }

    #[test]
    fn single_cluster_is_error() {
        let dm = matrix_from_points(&[0.0, 1.0]);
        let assignment = HardAssignment {
            labels: vec![0, 0],
            n_clusters: 1,
        };
        assert!(silhouette_mean(&dm, &assignment).is_err());
    }

    #[test]
    fn output_always_in_unit_interval() {
        // adversarial assignment mixing the clusters on purpose
        let dm = matrix_from_points(&[0.0, 0.2, 0.4, 8.0, 8.2, 8.4, 20.0]);
        for k in 2..=4 {
            let labels: Vec<usize> = (0..7).map(|i| i % k).collect();
            let assignment = HardAssignment {
                labels,
                n_clusters: k,
            };
            let s = silhouette_mean(&dm, &assignment).unwrap();
            assert!((-1.0..=1.0).contains(&s), "k = {k}: {s}");
        }
    }

    #[test]
    fn sweep_single_k() {
        let dm = matrix_from_points(&[0.0, 0.1, 9.0, 9.1]);
        let dendrogram = ward_linkage(&dm).unwrap();
        let sweep = silhouette_sweep(&dm, &dendrogram, 2, 2).unwrap();
        assert_eq!(sweep.len(), 1);
        assert_eq!(sweep[0].0, 2);
    }

    #[test]
    fn sweep_finds_two_archetypes() {
        let dm = matrix_from_points(&[0.0, 0.1, 0.2, 9.0, 9.1, 9.2]);
        let dendrogram = ward_linkage(&dm).unwrap();
        let sweep = silhouette_sweep(&dm, &dendrogram, 2, 6).unwrap();
        let best = sweep
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .map(|&(k, _)| k)
            .unwrap();
        assert_eq!(best, 2);
    }
}
