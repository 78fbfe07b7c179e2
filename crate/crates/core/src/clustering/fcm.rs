//! Fuzzy C-means: alternating membership / centroid updates minimizing
//! J = sum_k sum_i u_k(i)^q ||x_i - v_k||^2 with simplex-constrained
//! membership rows.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use super::kmeans::kmeanspp_init;
use super::sq_euclid;
use crate::{Error, Result};

/// A point closer than this to a centroid gets crisp membership 1 there.
const COINCIDENT_DIST: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MembershipMatrix {
    /// n x c membership coefficients; every row sums to 1.
    pub u: Vec<Vec<f64>>,
    /// c x d cluster centroids.
    pub centroids: Vec<Vec<f64>>,
}

impl MembershipMatrix {
    pub fn n_clusters(&self) -> usize {
        self.centroids.len().max(self.u.first().map_or(0, Vec::len))
    }

    /// Hard labels by maximum membership; ties go to the lowest index.
    pub fn argmax_labels(&self) -> Vec<usize> {
        self.u
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .max_by(|(_, a), (_, b)| a.total_cmp(b))
                    .map(|(k, _)| k)
                    .unwrap_or(0)
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FcmFit {
    pub memberships: MembershipMatrix,
    /// Objective J after each membership update.
    pub objective_history: Vec<f64>,
}

pub fn fuzzy_cmeans(
    x: &[Vec<f64>],
    c: usize,
    q: f64,
    seed: u64,
    tol: f64,
    max_iter: usize,
) -> Result<FcmFit> {
    if c < 2 {
        return Err(Error::Clustering(format!(
            "fuzzy C-means needs c >= 2, got {c}"
        )));
    }
    if x.len() < c {
        return Err(Error::Clustering(format!(
            "fuzzy C-means needs n >= c, got n = {}, c = {c}",
            x.len()
        )));
    }
    if q <= 1.0 {
        return Err(Error::Clustering(format!("fuzzifier q must be > 1, got {q}")));
    }

    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut centroids = kmeanspp_init(x, c, &mut rng);
    let mut memberships = vec![vec![0.0; c]; x.len()];
    let mut objective_history = Vec::new();
    let mut prev = f64::INFINITY;

    for _ in 0..max_iter.max(1) {
        for (row, point) in memberships.iter_mut().zip(x) {
            update_memberships(row, point, &centroids, q);
        }
        let objective = objective(&memberships, x, &centroids, q);
        objective_history.push(objective);
        if prev - objective < tol * prev.abs().max(1.0) {
            break;
        }
        prev = objective;
        update_centroids(&mut centroids, &memberships, x, q);
    }

    Ok(FcmFit {
        memberships: MembershipMatrix {
            u: memberships,
            centroids,
        },
        objective_history,
    })
}

/// u_k = 1 / sum_j (d_k / d_j)^(2 / (q - 1)); a point coinciding with a
/// centroid is assigned crisply to the nearest such centroid.
fn update_memberships(row: &mut [f64], point: &[f64], centroids: &[Vec<f64>], q: f64) {
    let c = centroids.len();
    let dists: Vec<f64> = centroids.iter().map(|v| sq_euclid(point, v).sqrt()).collect();
    if let Some(hit) = (0..c).find(|&k| dists[k] < COINCIDENT_DIST) {
        row.fill(0.0);
        row[hit] = 1.0;
        return;
    }
    let exponent = 2.0 / (q - 1.0);
    for k in 0..c {
        let denom: f64 = dists.iter().map(|&dj| (dists[k] / dj).powf(exponent)).sum();
        row[k] = 1.0 / denom;
    }
}

/// v_k = sum_i u_k(i)^q x_i / sum_i u_k(i)^q.
fn update_centroids(centroids: &mut [Vec<f64>], memberships: &[Vec<f64>], x: &[Vec<f64>], q: f64) {
    let dim = x[0].len();
    for (k, centroid) in centroids.iter_mut().enumerate() {
        let mut num = vec![0.0; dim];
        let mut den = 0.0;
        for (row, point) in memberships.iter().zip(x) {
            let w = row[k].powf(q);
            den += w;
            for (acc, v) in num.iter_mut().zip(point) {
                *acc += w * v;
            }
        }
        if den > 0.0 {
            for (slot, v) in centroid.iter_mut().zip(num) {
                *slot = v / den;
            }
        }
    }
}

fn objective(memberships: &[Vec<f64>], x: &[Vec<f64>], centroids: &[Vec<f64>], q: f64) -> f64 {
    memberships
        .iter()
        .zip(x)
        .map(|(row, point)| {
            row.iter()
                .zip(centroids)
                .map(|(&u, v)| u.powf(q) * sq_euclid(point, v))
                .sum::<f64>()
        })
        .sum()
}
