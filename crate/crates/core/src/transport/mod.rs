//! Exact p-Wasserstein distances between discrete distributions.
//!
//! Each player's shot set is an empirical distribution over points in R^d;
//! the distance between two players is the optimal-transport cost under the
//! ground cost ||x - y||^p, solved exactly by a transportation-network
//! simplex. Masses are rescaled to a common integer grid before solving so
//! marginals hold without drift.

mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};
use simplex::solve_transportation;

/// A discrete probability distribution over points in R^d.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalDistribution {
    /// m support points, each of dimension d.
    pub points: Vec<Vec<f64>>,
    /// Probability mass per point; non-negative, sums to 1.
    pub mass: Vec<f64>,
}

impl EmpiricalDistribution {
    /// Uniform distribution 1/m over the given supports.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let m = points.len();
        if m == 0 {
            return Err(Error::Transport {
                pair: None,
                message: "empty support".to_string(),
            });
        }
        let mass = vec![1.0 / m as f64; m];
        Self::new(points, mass)
    }

    pub fn new(points: Vec<Vec<f64>>, mass: Vec<f64>) -> Result<Self> {
        if points.is_empty() || points.len() != mass.len() {
            return Err(Error::Transport {
                pair: None,
                message: format!(
                    "{} points vs {} masses (need >= 1 support)",
                    points.len(),
                    mass.len()
                ),
            });
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::Transport {
                pair: None,
                message: "ragged support dimensions".to_string(),
            });
        }
        if points.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Transport {
                pair: None,
                message: "non-finite support point".to_string(),
            });
        }
        if mass.iter().any(|&w| !w.is_finite() || w < 0.0) {
            return Err(Error::Transport {
                pair: None,
                message: "negative or non-finite mass".to_string(),
            });
        }
        let total: f64 = mass.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Transport {
                pair: None,
                message: format!("mass sums to {total}, expected 1"),
            });
        }
        Ok(Self { points, mass })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    fn is_uniform(&self) -> bool {
        let first = self.mass[0];
        self.mass.iter().all(|&w| w == first)
    }
}

/// Optimal transportation plan together with its pre-root objective value.
#[derive(Debug, Clone)]
pub struct TransportPlan {
    /// m x n plan; row sums equal mu, column sums equal nu.
    pub plan: Vec<Vec<f64>>,
    /// min sum_ij D_ij P_ij (not yet raised to 1/p).
    pub cost: f64,
}

/// Entry ij = ||A_i - B_j||_2 ^ p.
pub fn ground_cost(a: &[Vec<f64>], b: &[Vec<f64>], p: f64) -> Result<Vec<Vec<f64>>> {
    if p < 1.0 {
        return Err(Error::Transport {
            pair: None,
            message: format!("p must be >= 1, got {p}"),
        });
    }
    let d = a.first().map_or(0, Vec::len);
    if b.iter().chain(a.iter()).any(|row| row.len() != d) {
        return Err(Error::Transport {
            pair: None,
            message: "dimension mismatch between supports".to_string(),
        });
    }
    if a.iter().chain(b.iter()).flatten().any(|v| !v.is_finite()) {
        return Err(Error::Transport {
            pair: None,
            message: "non-finite input point".to_string(),
        });
    }
    let cost = a
        .iter()
        .map(|x| {
            b.iter()
                .map(|y| {
                    let dist2: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - yi).powi(2)).sum();
                    let dist = dist2.sqrt();
                    if p == 1.0 {
                        dist
                    } else if p == 2.0 {
                        dist2
                    } else {
                        dist.powf(p)
                    }
                })
                .collect()
        })
        .collect();
    Ok(cost)
}

/// Solve the transportation LP exactly and return the minimizing plan.
pub fn solve_emd(
    mu: &EmpiricalDistribution,
    nu: &EmpiricalDistribution,
    p: f64,
) -> Result<TransportPlan> {
    // Canonical orientation makes the solve order-independent, so
    // solve_emd(mu, nu) and solve_emd(nu, mu) agree bit for bit.
    if orientation_swapped(mu, nu) {
        let solved = solve_emd_oriented(nu, mu, p)?;
        let m = mu.len();
        let n = nu.len();
        let mut plan = vec![vec![0.0; n]; m];
        for (j, row) in solved.plan.iter().enumerate() {
            for (i, &v) in row.iter().enumerate() {
                plan[i][j] = v;
            }
        }
        return Ok(TransportPlan {
            plan,
            cost: solved.cost,
        });
    }
    solve_emd_oriented(mu, nu, p)
}

fn solve_emd_oriented(
    mu: &EmpiricalDistribution,
    nu: &EmpiricalDistribution,
    p: f64,
) -> Result<TransportPlan> {
    if mu.dim() != nu.dim() {
        return Err(Error::Transport {
            pair: None,
            message: format!("dimension mismatch: {} vs {}", mu.dim(), nu.dim()),
        });
    }
    let cost = ground_cost(&mu.points, &nu.points, p)?;
    let (supply, demand, grid) = common_grid(mu, nu);
    let flat_cost: Vec<f64> = cost.iter().flatten().copied().collect();
    let solution = solve_transportation(&supply, &demand, &flat_cost).map_err(|message| {
        Error::Transport {
            pair: None,
            message,
        }
    })?;

    let m = mu.len();
    let n = nu.len();
    let mut plan = vec![vec![0.0; n]; m];
    let mut objective = 0.0;
    for &(i, j, flow) in &solution.flows {
        let mass = flow as f64 / grid;
        plan[i][j] = mass;
        objective += cost[i][j] * mass;
    }
    Ok(TransportPlan {
        plan,
        cost: objective,
    })
}

/// W_p = (min transport cost)^(1/p); p = 1 is the Earth Mover's Distance.
pub fn wasserstein_distance(
    mu: &EmpiricalDistribution,
    nu: &EmpiricalDistribution,
    p: f64,
) -> Result<f64> {
    let plan = solve_emd(mu, nu, p)?;
    Ok(if p == 1.0 {
        plan.cost
    } else {
        plan.cost.powf(1.0 / p)
    })
}

/// Symmetric matrix with zero diagonal and non-negative entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistanceMatrix {
    pub labels: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn new(labels: Vec<String>, values: Vec<Vec<f64>>) -> Result<Self> {
        let n = labels.len();
        if values.len() != n || values.iter().any(|r| r.len() != n) {
            return Err(Error::Data(format!("distance matrix is not {n} x {n}")));
        }
        for i in 0..n {
            if values[i][i] != 0.0 {
                return Err(Error::Data(format!("diagonal entry {i} is not zero")));
            }
            for j in 0..n {
                let v = values[i][j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::Data(format!("entry ({i}, {j}) = {v} invalid")));
                }
                if v != values[j][i] {
                    return Err(Error::Data(format!("entry ({i}, {j}) not symmetric")));
                }
            }
        }
        Ok(Self { labels, values })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Full-precision CSV: header row of labels, then the square matrix.
    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(&self.labels)?;
        for row in &self.values {
            w.write_record(row.iter().map(|v| format!("{v}")))?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let labels: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let mut values = Vec::with_capacity(labels.len());
        for record in r.records() {
            let record = record?;
            let row: Vec<f64> = record
                .iter()
                .map(|cell| {
                    cell.parse().map_err(|_| Error::Parse {
                        locator: "distance_matrix.csv".to_string(),
                        message: format!("bad value '{cell}'"),
                    })
                })
                .collect::<Result<_>>()?;
            values.push(row);
        }
        Self::new(labels, values)
    }
}

/// All unordered pairwise W_p distances; each pair is solved once and
/// mirrored, so the result is symmetric by construction.
pub fn pairwise_distance_matrix(
    players: &[(String, EmpiricalDistribution)],
    p: f64,
) -> Result<DistanceMatrix> {
    let n = players.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let distances: Vec<Result<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| {
            wasserstein_distance(&players[i].1, &players[j].1, p).map_err(|e| Error::Transport {
                pair: Some((players[i].0.clone(), players[j].0.clone())),
                message: e.to_string(),
            })
        })
        .collect();

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), dist) in pairs.iter().zip(distances) {
        let d = dist?;
        values[i][j] = d;
        values[j][i] = d;
    }
    DistanceMatrix::new(players.iter().map(|(id, _)| id.clone()).collect(), values)
}

/// True when (nu, mu) is the canonical orientation for this pair.
fn orientation_swapped(mu: &EmpiricalDistribution, nu: &EmpiricalDistribution) -> bool {
    use std::cmp::Ordering;
    let key = |d: &EmpiricalDistribution| (d.len(), d.dim());
    match key(mu).cmp(&key(nu)) {
        Ordering::Less => false,
        Ordering::Greater => true,
        Ordering::Equal => {
            let bits = |d: &EmpiricalDistribution| -> Vec<u64> {
                d.points
                    .iter()
                    .flatten()
                    .chain(d.mass.iter())
                    .map(|v| v.to_bits())
                    .collect()
            };
            bits(mu) > bits(nu)
        }
    }
}

/// Rescale both mass vectors to a shared integer grid. Uniform masses use
/// the exact grid lcm(m, n); general masses are rounded on a 2^40 grid with
/// the largest entry absorbing the rounding drift.
fn common_grid(mu: &EmpiricalDistribution, nu: &EmpiricalDistribution) -> (Vec<i64>, Vec<i64>, f64) {
    let m = mu.len() as i64;
    let n = nu.len() as i64;
    if mu.is_uniform() && nu.is_uniform() {
        let l = lcm(m, n);
        return (
            vec![l / m; mu.len()],
            vec![l / n; nu.len()],
            l as f64,
        );
    }
    const GRID: f64 = (1u64 << 40) as f64;
    let quantize = |mass: &[f64]| -> Vec<i64> {
        let mut q: Vec<i64> = mass.iter().map(|&w| (w * GRID).round() as i64).collect();
        let drift = GRID as i64 - q.iter().sum::<i64>();
        let argmax = q
            .iter()
            .enumerate()
            .max_by_key(|(_, &v)| v)
            .map(|(i, _)| i)
            .unwrap_or(0);
        q[argmax] += drift;
        q
    };
    (quantize(&mu.mass), quantize(&nu.mass), GRID)
}

fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
