//! Naive O(n^3) Ward oracle: at every step the merge cost of every active
//! cluster pair is recomputed from scratch as the increase in within-cluster
//! sum of squared deviations, straight from the raw points.

#[derive(Debug, Clone, PartialEq)]
pub struct OracleMerge {
    pub left: usize,
    pub right: usize,
    /// sqrt(2 * SSE increase), the Ward height on the distance scale.
    pub height: f64,
    pub size: usize,
}

pub fn ward_oracle_from_points(points: &[Vec<f64>]) -> Vec<OracleMerge> {
    let n = points.len();
    // active clusters: (node id, member indices); merges create node n + step
    let mut active: Vec<(usize, Vec<usize>)> = (0..n).map(|i| (i, vec![i])).collect();
    let mut merges = Vec::with_capacity(n - 1);

    for step in 0..n - 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..active.len() {
            for b in (a + 1)..active.len() {
                let delta = merge_cost(points, &active[a].1, &active[b].1);
                // node ids in `active` are ascending, so the first strict
                // minimum is the lexicographically smallest pair
                if best.map_or(true, |(bv, _, _)| delta < bv) {
                    best = Some((delta, a, b));
                }
            }
        }
        let (delta, ai, bi) = best.expect("at least two clusters");
        let (left_id, left_members) = active[ai].clone();
        let (right_id, right_members) = active[bi].clone();
        let mut members = left_members;
        members.extend(right_members);
        merges.push(OracleMerge {
            left: left_id,
            right: right_id,
            height: (2.0 * delta).max(0.0).sqrt(),
            size: members.len(),
        });
        active.remove(bi);
        active.remove(ai);
        active.push((n + step, members));
        active.sort_by_key(|(id, _)| *id);
    }
    merges
}

/// SSE(A u B) - SSE(A) - SSE(B).
fn merge_cost(points: &[Vec<f64>], a: &[usize], b: &[usize]) -> f64 {
    let union: Vec<usize> = a.iter().chain(b).copied().collect();
    sse(points, &union) - sse(points, a) - sse(points, b)
}

fn sse(points: &[Vec<f64>], members: &[usize]) -> f64 {
    let dim = points[0].len();
    let mut centroid = vec![0.0; dim];
    for &i in members {
        for (c, v) in centroid.iter_mut().zip(&points[i]) {
            *c += v;
        }
    }
    for c in centroid.iter_mut() {
        *c /= members.len() as f64;
    }
    members
        .iter()
        .map(|&i| {
            points[i]
                .iter()
                .zip(&centroid)
                .map(|(v, c)| (v - c).powi(2))
                .sum::<f64>()
        })
        .sum()
}
