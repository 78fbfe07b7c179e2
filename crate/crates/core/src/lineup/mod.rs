//! Lineup explanatory variables and response construction: 5-player count
//! features, 2-player combination features, cluster merging, the minutes
//! adjustment of the offensive rating, and shot-efficiency stats.

mod design;
mod merge;
mod stats;

pub use design::{build_design, ClusterOutput, DesignMatrix, DesignMode};
pub use merge::{default_shooting_merge_map, MergeMap};
pub use stats::{adjust_offrtg, points_per_possession, true_shooting_pct};

use crate::{Error, Result};

/// Number of unordered cluster pairs with repetition: C(c+1, 2).
pub fn n_combination_features(c: usize) -> usize {
    c * (c + 1) / 2
}

/// Column labels for the unordered pairs, lexicographic with k <= k'.
pub fn pair_labels(c: usize) -> Vec<String> {
    let mut labels = Vec::with_capacity(n_combination_features(c));
    for k in 0..c {
        for k2 in k..c {
            labels.push(format!("combo_{k}_{k2}"));
        }
    }
    labels
}

/// Position of pair (k, k'), k <= k', in the lexicographic pair order.
pub fn pair_position(k: usize, k2: usize, c: usize) -> usize {
    debug_assert!(k <= k2 && k2 < c);
    // pairs (k0, *) with k0 < k fill the first sum(c - k0) slots
    let block: usize = (0..k).map(|k0| c - k0).sum();
    block + (k2 - k)
}

/// Counts of each cluster among the five lineup labels; sums to 5.
pub fn count_features_5(labels: &[usize; 5], c: usize) -> Result<Vec<f64>> {
    let mut counts = vec![0.0; c];
    for &l in labels {
        if l >= c {
            return Err(Error::Lineup(format!("label {l} out of range for c = {c}")));
        }
        counts[l] += 1.0;
    }
    Ok(counts)
}

/// Soft counts from five membership rows; sums to 5 for simplex rows.
pub fn count_features_soft(memberships: &[Vec<f64>], c: usize) -> Result<Vec<f64>> {
    check_rows(memberships, c)?;
    let mut counts = vec![0.0; c];
    for row in memberships {
        for (acc, u) in counts.iter_mut().zip(row) {
            *acc += u;
        }
    }
    Ok(counts)
}

/// Combination features over the 10 unordered player pairs.
///
/// For each pair of distinct players, the outer product M of their
/// membership rows is accumulated: M_kk into pair (k, k) and
/// M_kk' + M_k'k into pair (k, k'). With simplex rows the output always
/// sums to 10.
pub fn combo_features_2(memberships: &[Vec<f64>], c: usize) -> Result<Vec<f64>> {
    check_rows(memberships, c)?;
    if memberships.len() != 5 {
        return Err(Error::Lineup(format!(
            "expected 5 membership rows, got {}",
            memberships.len()
        )));
    }
    let mut values = vec![0.0; n_combination_features(c)];
    for a in 0..5 {
        for a2 in (a + 1)..5 {
            let (u, v) = (&memberships[a], &memberships[a2]);
            let mut idx = 0;
            for k in 0..c {
                for k2 in k..c {
                    if k == k2 {
                        values[idx] += u[k] * v[k];
                    } else {
                        values[idx] += u[k] * v[k2] + u[k2] * v[k];
                    }
                    idx += 1;
                }
            }
        }
    }
    Ok(values)
}

/// Combination features of a crisp lineup given the five hard labels.
pub fn combo_features_from_labels(labels: &[usize], c: usize) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| {
            let mut row = vec![0.0; c];
            row[l] = 1.0;
            row
        })
        .collect();
    combo_features_2(&rows, c).expect("indicator rows are simplex rows")
}

fn check_rows(memberships: &[Vec<f64>], c: usize) -> Result<()> {
    for (i, row) in memberships.iter().enumerate() {
        if row.len() != c {
            return Err(Error::Lineup(format!(
                "membership row {i} has {} entries, expected {c}",
                row.len()
            )));
        }
        let sum: f64 = row.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Lineup(format!(
                "membership row {i} sums to {sum}, expected 1"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn combination_feature_counts() {
        assert_eq!(n_combination_features(5), 15);
        assert_eq!(n_combination_features(10), 55);
        assert_eq!(n_combination_features(1), 1);
    }

    #[test]
    fn pair_labels_order() {
        assert_eq!(
            pair_labels(3),
            vec![
                "combo_0_0",
                "combo_0_1",
                "combo_0_2",
                "combo_1_1",
                "combo_1_2",
                "combo_2_2"
            ]
        );
        for c in 1..8 {
            let labels = pair_labels(c);
            assert_eq!(labels.len(), n_combination_features(c));
            let mut idx = 0;
            for k in 0..c {
                for k2 in k..c {
                    assert_eq!(pair_position(k, k2, c), idx, "({k},{k2}) in c={c}");
                    idx += 1;
                }
            }
        }
    }

    #[test]
    fn counts_sum_to_five() {
        let counts = count_features_5(&[0, 0, 1, 2, 2], 3).unwrap();
        assert_eq!(counts, vec![2.0, 1.0, 2.0]);
        let all_zero = count_features_5(&[0, 0, 0, 0, 0], 2).unwrap();
        assert_eq!(all_zero, vec![5.0, 0.0]);
    }

    #[test]
    fn crisp_combo_cases() {
        // all five in cluster 0 of 2 -> 10 same-pair combos
        let x = combo_features_from_labels(&[0, 0, 0, 0, 0], 2);
        assert_eq!(x, vec![10.0, 0.0, 0.0]);
        // 3 in k=0, 2 in k'=1 -> (3, 6, 1)
        let x = combo_features_from_labels(&[0, 0, 0, 1, 1], 2);
        assert_eq!(x, vec![3.0, 6.0, 1.0]);
    }

    #[test]
    fn uniform_memberships_split_combos() {
        let rows: Vec<Vec<f64>> = (0..5).map(|_| vec![0.5, 0.5]).collect();
        let x = combo_features_2(&rows, 2).unwrap();
        assert!((x[0] - 2.5).abs() < 1e-12);
        assert!((x[1] - 5.0).abs() < 1e-12);
        assert!((x[2] - 2.5).abs() < 1e-12);
    }

    #[test]
    fn combo_rejects_non_simplex_rows() {
        let mut rows: Vec<Vec<f64>> = (0..5).map(|_| vec![0.5, 0.5]).collect();
        rows[2] = vec![0.7, 0.5];
        assert!(combo_features_2(&rows, 2).is_err());
    }

    #[test]
    fn combo_symmetric_under_player_permutation() {
        let rows = vec![
            vec![0.9, 0.1, 0.0],
            vec![0.2, 0.5, 0.3],
            vec![0.0, 0.0, 1.0],
            vec![0.25, 0.25, 0.5],
            vec![0.1, 0.8, 0.1],
        ];
        let base = combo_features_2(&rows, 3).unwrap();
        let mut permuted = rows.clone();
        permuted.swap(0, 4);
        permuted.swap(1, 3);
        let other = combo_features_2(&permuted, 3).unwrap();
        for (a, b) in base.iter().zip(&other) {
            assert!((a - b).abs() < 1e-12);
        }
        let total: f64 = base.iter().sum();
        assert!((total - 10.0).abs() < 1e-9);
    }
}
