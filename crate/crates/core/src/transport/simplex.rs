//! Transportation-network simplex with integer flows.
//!
//! Supplies and demands arrive on a common integer grid, so every basic
//! feasible solution has integral flows and marginals are exact. Pivots use
//! the most-negative reduced cost with ties broken by lowest (i, j);
//! after a degeneracy budget is spent the entering rule switches to Bland's
//! rule, which cannot cycle.

pub(crate) struct TransportSolution {
    /// Basic cells (i, j, flow); zero-flow basics may appear.
    pub flows: Vec<(usize, usize, i64)>,
}

pub(crate) fn solve_transportation(
    supply: &[i64],
    demand: &[i64],
    cost: &[f64],
) -> Result<TransportSolution, String> {
    let m = supply.len();
    let n = demand.len();
    if m == 0 || n == 0 {
        return Err("empty support".to_string());
    }
    debug_assert_eq!(cost.len(), m * n);
    let total_supply: i64 = supply.iter().sum();
    let total_demand: i64 = demand.iter().sum();
    if total_supply != total_demand {
        return Err(format!(
            "unbalanced problem: supply {total_supply} vs demand {total_demand}"
        ));
    }
    if supply.iter().chain(demand.iter()).any(|&v| v < 0) {
        return Err("negative supply or demand".to_string());
    }

    let cost_scale = cost.iter().fold(0.0f64, |acc, &c| acc.max(c.abs()));
    let tol = 1e-12 * cost_scale.max(1.0);

    let mut state = State::northwest_corner(supply, demand, cost, m, n);

    let bland_after = 5 * m * n + 500;
    let max_iter = 50 * m * n + 5000;
    for iter in 0..max_iter {
        state.compute_potentials()?;
        let entering = if iter < bland_after {
            state.most_negative_entering(tol)
        } else {
            state.bland_entering(tol)
        };
        let Some((ei, ej)) = entering else {
            return Ok(TransportSolution {
                flows: state.basic_flows(),
            });
        };
        state.pivot(ei, ej)?;
    }
    Err(format!(
        "network simplex did not converge within {max_iter} pivots \
         (m = {m}, n = {n}, cost scale = {cost_scale:e})"
    ))
}

struct State<'a> {
    m: usize,
    n: usize,
    cost: &'a [f64],
    basic: Vec<bool>,
    flow: Vec<i64>,
    u: Vec<f64>,
    v: Vec<f64>,
}

impl<'a> State<'a> {
    fn northwest_corner(
        supply: &[i64],
        demand: &[i64],
        cost: &'a [f64],
        m: usize,
        n: usize,
    ) -> Self {
        let mut basic = vec![false; m * n];
        let mut flow = vec![0i64; m * n];
        let mut s = supply.to_vec();
        let mut d = demand.to_vec();
        let (mut i, mut j) = (0usize, 0usize);
        loop {
            let f = s[i].min(d[j]);
            basic[i * n + j] = true;
            flow[i * n + j] = f;
            s[i] -= f;
            d[j] -= f;
            if i == m - 1 && j == n - 1 {
                break;
            }
            if s[i] == 0 && i < m - 1 {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self {
            m,
            n,
            cost,
            basic,
            flow,
            u: vec![0.0; m],
            v: vec![0.0; n],
        }
    }

    /// Solve u_i + v_j = c_ij over the basis tree, rooted at row 0.
    fn compute_potentials(&mut self) -> Result<(), String> {
        let (m, n) = (self.m, self.n);
        let mut adj_row: Vec<Vec<usize>> = vec![Vec::new(); m];
        let mut adj_col: Vec<Vec<usize>> = vec![Vec::new(); n];
        for i in 0..m {
            for j in 0..n {
                if self.basic[i * n + j] {
                    adj_row[i].push(j);
                    adj_col[j].push(i);
                }
            }
        }
        let mut row_set = vec![false; m];
        let mut col_set = vec![false; n];
        self.u[0] = 0.0;
        row_set[0] = true;
        // nodes: rows are 0..m, columns are m..m+n
        let mut stack = vec![0usize];
        while let Some(node) = stack.pop() {
            if node < m {
                for &j in &adj_row[node] {
                    if !col_set[j] {
                        self.v[j] = self.cost[node * n + j] - self.u[node];
                        col_set[j] = true;
                        stack.push(m + j);
                    }
                }
            } else {
                let j = node - m;
                for &i in &adj_col[j] {
                    if !row_set[i] {
                        self.u[i] = self.cost[i * n + j] - self.v[j];
                        row_set[i] = true;
                        stack.push(i);
                    }
                }
            }
        }
        if row_set.iter().any(|&s| !s) || col_set.iter().any(|&s| !s) {
            return Err("basis is not a spanning tree".to_string());
        }
        Ok(())
    }

    fn most_negative_entering(&self, tol: f64) -> Option<(usize, usize)> {
        let mut best: Option<(f64, usize, usize)> = None;
        for i in 0..self.m {
            for j in 0..self.n {
                if self.basic[i * self.n + j] {
                    continue;
                }
                let r = self.cost[i * self.n + j] - self.u[i] - self.v[j];
                if r < -tol {
                    let better = match best {
                        None => true,
                        Some((br, _, _)) => r < br,
                    };
                    if better {
                        best = Some((r, i, j));
                    }
                }
            }
        }
        best.map(|(_, i, j)| (i, j))
    }

    fn bland_entering(&self, tol: f64) -> Option<(usize, usize)> {
        for i in 0..self.m {
            for j in 0..self.n {
                if !self.basic[i * self.n + j]
                    && self.cost[i * self.n + j] - self.u[i] - self.v[j] < -tol
                {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// Tree path from row `start` to column `goal`, as the list of basic
    /// cells traversed.
    fn tree_path(&self, start_row: usize, goal_col: usize) -> Result<Vec<(usize, usize)>, String> {
        let (m, n) = (self.m, self.n);
        let n_nodes = m + n;
        let mut parent = vec![usize::MAX; n_nodes];
        let mut seen = vec![false; n_nodes];
        let mut queue = std::collections::VecDeque::new();
        seen[start_row] = true;
        queue.push_back(start_row);
        'bfs: while let Some(node) = queue.pop_front() {
            if node < m {
                let i = node;
                for j in 0..n {
                    let col_node = m + j;
                    if self.basic[i * n + j] && !seen[col_node] {
                        seen[col_node] = true;
                        parent[col_node] = node;
                        if j == goal_col {
                            break 'bfs;
                        }
                        queue.push_back(col_node);
                    }
                }
            } else {
                let j = node - m;
                for i in 0..m {
                    if self.basic[i * n + j] && !seen[i] {
                        seen[i] = true;
                        parent[i] = node;
                        queue.push_back(i);
                    }
                }
            }
        }
        let goal = m + goal_col;
        if !seen[goal] {
            return Err("no path in basis tree".to_string());
        }
        let mut nodes = vec![goal];
        while *nodes.last().unwrap() != start_row {
            nodes.push(parent[*nodes.last().unwrap()]);
        }
        nodes.reverse();
        let cells = nodes
            .windows(2)
            .map(|w| {
                let (a, b) = (w[0], w[1]);
                if a < m {
                    (a, b - m)
                } else {
                    (b, a - m)
                }
            })
            .collect();
        Ok(cells)
    }

    fn pivot(&mut self, ei: usize, ej: usize) -> Result<(), String> {
        let path = self.tree_path(ei, ej)?;
        // entering cell gains theta; path cells alternate starting with a loss
        let minus: Vec<(usize, usize)> = path.iter().copied().step_by(2).collect();
        let plus: Vec<(usize, usize)> = path.iter().copied().skip(1).step_by(2).collect();

        let mut theta = i64::MAX;
        let mut leaving: Option<(usize, usize)> = None;
        for &(i, j) in &minus {
            let f = self.flow[i * self.n + j];
            let better = match leaving {
                None => true,
                Some(l) => f < theta || (f == theta && (i, j) < l),
            };
            if better {
                theta = f;
                leaving = Some((i, j));
            }
        }
        let (li, lj) = leaving.ok_or("empty pivot cycle")?;

        self.flow[ei * self.n + ej] = theta;
        self.basic[ei * self.n + ej] = true;
        for &(i, j) in &minus {
            self.flow[i * self.n + j] -= theta;
        }
        for &(i, j) in &plus {
            self.flow[i * self.n + j] += theta;
        }
        self.basic[li * self.n + lj] = false;
        debug_assert_eq!(self.flow[li * self.n + lj], 0);
        Ok(())
    }

    fn basic_flows(&self) -> Vec<(usize, usize, i64)> {
        let mut flows = Vec::new();
        for i in 0..self.m {
            for j in 0..self.n {
                if self.basic[i * self.n + j] {
                    flows.push((i, j, self.flow[i * self.n + j]));
                }
            }
        }
        flows
    }
}
