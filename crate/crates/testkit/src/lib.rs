//! Independent brute-force oracles for tests.
//!
//! Everything here is written from scratch against the defining equations,
//! sharing no code with the production solvers it checks.

mod lp;
mod ward;

pub use lp::{emd_lp_oracle, solve_lp_min};
pub use ward::{ward_oracle_from_points, OracleMerge};

/// Unordered cluster-pair counts of a crisp 5-player lineup by direct
/// enumeration of the 10 player pairs.
pub fn pair_count_oracle(labels: &[usize; 5], c: usize) -> Vec<f64> {
    let mut pair_index = std::collections::BTreeMap::new();
    let mut idx = 0;
    for k in 0..c {
        for k2 in k..c {
            pair_index.insert((k, k2), idx);
            idx += 1;
        }
    }
    let mut counts = vec![0.0; idx];
    for a in 0..5 {
        for b in (a + 1)..5 {
            let (k, k2) = (labels[a].min(labels[b]), labels[a].max(labels[b]));
            counts[pair_index[&(k, k2)]] += 1.0;
        }
    }
    counts
}

/// All multisets of 5 labels drawn from {0..c-1}, as sorted label vectors.
pub fn all_label_multisets(c: usize) -> Vec<[usize; 5]> {
    let mut out = Vec::new();
    fn rec(c: usize, start: usize, slot: usize, current: &mut [usize; 5], out: &mut Vec<[usize; 5]>) {
        if slot == 5 {
            out.push(*current);
            return;
        }
        for label in start..c {
            current[slot] = label;
            rec(c, label, slot + 1, current, out);
        }
    }
    rec(c, 0, 0, &mut [0; 5], &mut out);
    out
}

/// Closed-form Bayesian linear regression with prior N(0, tau^2 I) and known
/// noise sd: returns the posterior mean and marginal standard deviations.
pub fn conjugate_posterior(
    x: &[Vec<f64>],
    y: &[f64],
    prior_sd: f64,
    noise_sd: f64,
) -> (Vec<f64>, Vec<f64>) {
    let p = x[0].len();
    let s2 = noise_sd * noise_sd;
    let t2 = prior_sd * prior_sd;
    // precision = X'X / s2 + I / t2, rhs = X'y / s2
    let mut precision = vec![vec![0.0; p]; p];
    let mut rhs = vec![0.0; p];
    for (row, &yi) in x.iter().zip(y) {
        for a in 0..p {
            rhs[a] += row[a] * yi / s2;
            for b in 0..p {
                precision[a][b] += row[a] * row[b] / s2;
            }
        }
    }
    for a in 0..p {
        precision[a][a] += 1.0 / t2;
    }
    let cov = invert(&precision);
    let mean: Vec<f64> = (0..p)
        .map(|a| (0..p).map(|b| cov[a][b] * rhs[b]).sum())
        .collect();
    let sds: Vec<f64> = (0..p).map(|a| cov[a][a].sqrt()).collect();
    (mean, sds)
}

/// Dense matrix inverse by Gauss-Jordan with partial pivoting.
fn invert(a: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let n = a.len();
    let mut work: Vec<Vec<f64>> = a
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut ext = row.clone();
            ext.extend((0..n).map(|j| if i == j { 1.0 } else { 0.0 }));
            ext
        })
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&a, &b| work[a][col].abs().total_cmp(&work[b][col].abs()))
            .expect("non-empty");
        work.swap(col, pivot);
        let diag = work[col][col];
        assert!(diag.abs() > 1e-300, "singular matrix in oracle");
        for v in work[col].iter_mut() {
            *v /= diag;
        }
        for row in 0..n {
            if row != col {
                let factor = work[row][col];
                for j in 0..2 * n {
                    work[row][j] -= factor * work[col][j];
                }
            }
        }
    }
    work.into_iter().map(|row| row[n..].to_vec()).collect()
}
