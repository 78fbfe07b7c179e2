//! Lloyd's k-means with k-means++ seeding.

use rand::prelude::*;
use rand_chacha::ChaCha20Rng;

use super::{sq_euclid, ward::HardAssignment};
use crate::{Error, Result};

#[derive(Debug, Clone)]
pub struct KmeansFit {
    pub assignment: HardAssignment,
    pub centroids: Vec<Vec<f64>>,
    /// Within-cluster sum of squares after each Lloyd iteration.
    pub inertia_history: Vec<f64>,
}

pub fn kmeans(x: &[Vec<f64>], k: usize, seed: u64, max_iter: usize) -> Result<KmeansFit> {
    let n = x.len();
    if k == 0 || n < k {
        return Err(Error::Clustering(format!(
            "k-means needs n >= k >= 1, got n = {n}, k = {k}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut centroids = kmeanspp_init(x, k, &mut rng);
    let mut labels = vec![usize::MAX; n];
    let mut inertia_history = Vec::new();

    for _ in 0..max_iter.max(1) {
        // assignment step
        let mut changed = false;
        let mut inertia = 0.0;
        for (i, point) in x.iter().enumerate() {
            let (best, d) = nearest(point, &centroids);
            inertia += d;
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        inertia_history.push(inertia);
        if !changed {
            break;
        }

        // update step
        let mut sums = vec![vec![0.0; x[0].len()]; k];
        let mut counts = vec![0usize; k];
        for (point, &label) in x.iter().zip(&labels) {
            counts[label] += 1;
            for (acc, v) in sums[label].iter_mut().zip(point) {
                *acc += v;
            }
        }
        for (c, (sum, &count)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            if count > 0 {
                *c = sum.iter().map(|v| v / count as f64).collect();
            }
        }
        // re-seed any empty cluster at the point farthest from its centroid
        for cluster in 0..k {
            if counts[cluster] == 0 {
                let far = (0..n)
                    .max_by(|&a, &b| {
                        sq_euclid(&x[a], &centroids[labels[a]])
                            .total_cmp(&sq_euclid(&x[b], &centroids[labels[b]]))
                    })
                    .expect("n >= 1");
                centroids[cluster] = x[far].clone();
            }
        }
    }

    Ok(KmeansFit {
        assignment: HardAssignment {
            labels,
            n_clusters: k,
        },
        centroids,
        inertia_history,
    })
}

fn nearest(point: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, centroid) in centroids.iter().enumerate() {
        let d = sq_euclid(point, centroid);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    (best, best_d)
}

/// k-means++ seeding: first centroid uniform, the rest proportional to the
/// squared distance from the nearest chosen centroid.
pub(crate) fn kmeanspp_init(x: &[Vec<f64>], k: usize, rng: &mut ChaCha20Rng) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(x[rng.gen_range(0..n)].clone());
    let mut d2: Vec<f64> = x.iter().map(|p| sq_euclid(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let mut target = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                target -= w;
                if target <= 0.0 {
                    chosen = i;
                    break;
                }
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(x[next].clone());
        for (slot, p) in d2.iter_mut().zip(x) {
            *slot = slot.min(sq_euclid(p, centroids.last().unwrap()));
        }
    }
    centroids
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand_distr::StandardNormal;

    fn blobs(centers: &[[f64; 2]], per: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        for c in centers {
            for _ in 0..per {
                out.push(vec![
                    c[0] + 0.05 * rng.sample::<f64, _>(StandardNormal),
                    c[1] + 0.05 * rng.sample::<f64, _>(StandardNormal),
                ]);
            }
        }
        out
    }

    #[test]
    fn single_cluster_centroid_is_mean() {
        let x = vec![vec![0.0, 0.0], vec![2.0, 0.0], vec![0.0, 4.0], vec![2.0, 4.0]];
        let fit = kmeans(&x, 1, 0, 100).unwrap();
        assert_eq!(fit.centroids.len(), 1);
        assert!((fit.centroids[0][0] - 1.0).abs() < 1e-12);
        assert!((fit.centroids[0][1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn two_far_blobs_recovered() {
        let x = blobs(&[[0.0, 0.0], [50.0, 50.0]], 20, 1);
        let fit = kmeans(&x, 2, 7, 300).unwrap();
        let first = fit.assignment.labels[0];
        assert!(fit.assignment.labels[..20].iter().all(|&l| l == first));
        assert!(fit.assignment.labels[20..].iter().all(|&l| l != first));
    }

    #[test]
    fn inertia_non_increasing() {
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let x: Vec<Vec<f64>> = (0..60)
            .map(|_| {
                (0..3)
                    .map(|_| rng.sample::<f64, _>(StandardNormal) * 4.0)
                    .collect()
            })
            .collect();
        let fit = kmeans(&x, 5, 13, 300).unwrap();
        for w in fit.inertia_history.windows(2) {
            assert!(w[1] <= w[0] + 1e-9, "{:?}", fit.inertia_history);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let x = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 10, 3);
        let a = kmeans(&x, 3, 42, 300).unwrap();
        let b = kmeans(&x, 3, 42, 300).unwrap();
        assert_eq!(a.assignment.labels, b.assignment.labels);
        assert_eq!(a.centroids, b.centroids);
    }

    #[test]
    fn k_larger_than_n_is_error() {
        let x = vec![vec![0.0], vec![1.0]];
        assert!(kmeans(&x, 3, 0, 10).is_err());
    }
}
