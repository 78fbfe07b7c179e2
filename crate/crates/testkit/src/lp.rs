//! Two-phase dense tableau simplex with Bland's rule, written only for
//! oracle checks. Slow and simple on purpose.

/// Minimize c.x subject to A x = b, x >= 0. Returns (x, objective).
pub fn solve_lp_min(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> Result<(Vec<f64>, f64), String> {
    let m = a.len();
    let n = c.len();
    if b.len() != m || a.iter().any(|row| row.len() != n) {
        return Err("inconsistent LP shapes".to_string());
    }

    // rows scaled so b >= 0, then one artificial per row
    let total = n + m;
    let mut tableau: Vec<Vec<f64>> = Vec::with_capacity(m);
    let mut basis: Vec<usize> = Vec::with_capacity(m);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        let mut row: Vec<f64> = a[i].iter().map(|&v| sign * v).collect();
        row.extend((0..m).map(|j| if j == i { 1.0 } else { 0.0 }));
        row.push(sign * b[i]);
        tableau.push(row);
        basis.push(n + i);
    }

    // phase 1: minimize the artificial sum
    let mut phase1_cost = vec![0.0; total + 1];
    for j in n..total {
        phase1_cost[j] = 1.0;
    }
    simplex(&mut tableau, &mut basis, &phase1_cost, total)?;
    let artificial_sum: f64 = basis
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= n)
        .map(|(i, _)| tableau[i][total])
        .sum();
    if artificial_sum > 1e-7 {
        return Err(format!("infeasible LP (artificial sum {artificial_sum:e})"));
    }

    // phase 2 on the original objective; artificials pinned at zero
    let mut phase2_cost = vec![0.0; total + 1];
    phase2_cost[..n].copy_from_slice(c);
    for j in n..total {
        phase2_cost[j] = 1e30; // artificials must never re-enter
    }
    simplex(&mut tableau, &mut basis, &phase2_cost, n)?;

    let mut x = vec![0.0; n];
    for (i, &var) in basis.iter().enumerate() {
        if var < n {
            x[var] = tableau[i][total];
        }
    }
    let objective = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    Ok((x, objective))
}

/// Bland's rule simplex on the tableau; only columns < n_enterable may enter.
fn simplex(
    tableau: &mut [Vec<f64>],
    basis: &mut [usize],
    cost: &[f64],
    n_enterable: usize,
) -> Result<(), String> {
    let m = tableau.len();
    let width = tableau[0].len();
    let rhs = width - 1;
    for _iter in 0..200_000 {
        // reduced costs via the basic-cost multipliers
        let mut entering = None;
        for j in 0..n_enterable {
            if basis.contains(&j) {
                continue;
            }
            let mut reduced = cost[j];
            for i in 0..m {
                reduced -= cost[basis[i]] * tableau[i][j];
            }
            if reduced < -1e-9 {
                entering = Some(j); // Bland: first improving index
                break;
            }
        }
        let Some(enter) = entering else {
            return Ok(());
        };

        let mut leave: Option<(usize, f64)> = None;
        for i in 0..m {
            if tableau[i][enter] > 1e-12 {
                let ratio = tableau[i][rhs] / tableau[i][enter];
                let better = match leave {
                    None => true,
                    Some((li, lr)) => {
                        ratio < lr - 1e-15 || ((ratio - lr).abs() <= 1e-15 && basis[i] < basis[li])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        let Some((pivot_row, _)) = leave else {
            return Err("unbounded LP".to_string());
        };

        let pivot = tableau[pivot_row][enter];
        for v in tableau[pivot_row].iter_mut() {
            *v /= pivot;
        }
        for i in 0..m {
            if i != pivot_row {
                let factor = tableau[i][enter];
                if factor != 0.0 {
                    for j in 0..width {
                        tableau[i][j] -= factor * tableau[pivot_row][j];
                    }
                }
            }
        }
        basis[pivot_row] = enter;
    }
    Err("simplex iteration limit".to_string())
}

/// Exact transportation objective for the EMD instance, via the dense LP.
pub fn emd_lp_oracle(
    points_a: &[Vec<f64>],
    points_b: &[Vec<f64>],
    mass_a: &[f64],
    mass_b: &[f64],
    p: f64,
) -> f64 {
    let m = points_a.len();
    let n = points_b.len();
    let mut cost = Vec::with_capacity(m * n);
    for xa in points_a {
        for xb in points_b {
            let d2: f64 = xa.iter().zip(xb).map(|(u, v)| (u - v).powi(2)).sum();
            cost.push(d2.sqrt().powf(p));
        }
    }
    // row-sum and column-sum constraints over the m*n plan variables
    let mut a = Vec::with_capacity(m + n);
    let mut b = Vec::with_capacity(m + n);
    for i in 0..m {
        let mut row = vec![0.0; m * n];
        for j in 0..n {
            row[i * n + j] = 1.0;
        }
        a.push(row);
        b.push(mass_a[i]);
    }
    for j in 0..n {
        let mut row = vec![0.0; m * n];
        for i in 0..m {
            row[i * n + j] = 1.0;
        }
        a.push(row);
        b.push(mass_b[j]);
    }
    let (_, objective) = solve_lp_min(&cost, &a, &b).expect("transportation LP is feasible");
    objective
}
