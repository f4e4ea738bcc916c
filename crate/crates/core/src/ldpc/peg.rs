use std::collections::VecDeque;

use rand::Rng;

use super::code::{LdpcCode, SparseMatrix};
use super::degree::DegreeDistribution;
use crate::{rng, Error, Result};

/// Dimensions and seed of a PEG construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PegConfig {
    pub dist: DegreeDistribution,
    pub n_code: usize,
    pub n_checks: usize,
    pub seed: u64,
}

impl PegConfig {
    /// The half-rate (512, 256) IRA instance.
    pub fn ira_512_256(seed: u64) -> Self {
        Self { dist: DegreeDistribution::ira_half_rate(), n_code: 512, n_checks: 256, seed }
    }
}

/// Builds an IRA code: the `n_checks` parity columns form a fixed
/// accumulator staircase (column `j` touches rows `j` and `j + 1`, the last
/// column only its own row) and the information columns are placed by
/// progressive edge growth. Codewords are laid out as `[info | parity]`.
pub fn peg_construct(cfg: &PegConfig) -> Result<LdpcCode> {
    let (n, m) = (cfg.n_code, cfg.n_checks);
    if m == 0 || m >= n {
        return Err(Error::InfeasibleDegrees(format!("need 0 < checks < n, got n = {n}, checks = {m}")));
    }
    let k = n - m;
    let var_counts = cfg.dist.lambda.node_counts(n);
    let two = var_counts.iter().find(|c| c.0 == 2).map_or(0, |c| c.1);
    if two < m {
        return Err(Error::InfeasibleDegrees(format!(
            "the accumulator needs {m} degree-2 variable nodes, the distribution yields {two}"
        )));
    }
    // information column degrees, lowest first as PEG prescribes
    let mut info_degrees = Vec::with_capacity(k);
    for &(d, c) in &var_counts {
        let c = if d == 2 { c - m } else { c };
        info_degrees.extend(std::iter::repeat_n(d, c));
    }
    info_degrees.sort_unstable();
    if let Some(&d) = info_degrees.iter().find(|&&d| d > m) {
        return Err(Error::InfeasibleDegrees(format!("variable degree {d} exceeds the {m} check nodes")));
    }
    let capacity: Vec<usize> = {
        let counts = cfg.dist.rho.node_counts(m);
        counts.iter().flat_map(|&(d, c)| std::iter::repeat_n(d, c)).collect()
    };
    let info_edges: usize = info_degrees.iter().sum();
    // staircase: 2 edges per row except row 0
    let free: usize = capacity.iter().enumerate().map(|(i, &c)| c.saturating_sub(if i == 0 { 1 } else { 2 })).sum();
    if info_edges > free {
        return Err(Error::InfeasibleDegrees(format!(
            "{info_edges} information edges do not fit the {free} free check sockets"
        )));
    }

    let mut check_adj: Vec<Vec<usize>> = vec![Vec::new(); m];
    let mut var_adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for j in 0..m {
        let v = k + j;
        let rows: &[usize] = if j + 1 < m { &[j, j + 1] } else { &[j] };
        for &r in rows {
            check_adj[r].push(v);
            var_adj[v].push(r);
        }
    }

    let mut rng = rng::stream(cfg.seed, 0);
    for (v, &deg) in info_degrees.iter().enumerate() {
        for e in 0..deg {
            let open = |c: usize| check_adj[c].len() < capacity[c] && !var_adj[v].contains(&c);
            let mut candidates: Vec<usize> = if e == 0 {
                (0..m).filter(|&c| open(c)).collect()
            } else {
                let excluded = expand(v, &var_adj, &check_adj);
                (0..m).filter(|&c| !excluded[c] && open(c)).collect()
            };
            if candidates.is_empty() {
                candidates = (0..m).filter(|&c| open(c)).collect();
            }
            let best = candidates
                .iter()
                .map(|&c| check_adj[c].len())
                .min()
                .ok_or_else(|| Error::InfeasibleDegrees(format!("no free check node for variable {v}")))?;
            let ties: Vec<usize> = candidates.into_iter().filter(|&c| check_adj[c].len() == best).collect();
            let c = ties[rng.random_range(0..ties.len())];
            check_adj[c].push(v);
            var_adj[v].push(c);
        }
    }
    let h = SparseMatrix::from_columns(m, var_adj)?;
    LdpcCode::new(h, k, cfg.seed)
}

/// Expands the tree from variable `v` level by level and returns the checks
/// that must not receive the new edge: every reached check when the
/// expansion stalls, otherwise all checks above the level that completes
/// the cover.
fn expand(v: usize, var_adj: &[Vec<usize>], check_adj: &[Vec<usize>]) -> Vec<bool> {
    let m = check_adj.len();
    let mut depth = vec![usize::MAX; m];
    let mut seen_var = vec![false; var_adj.len()];
    seen_var[v] = true;
    let mut frontier = vec![v];
    let mut reached = 0usize;
    let mut level = 0usize;
    loop {
        let mut checks = Vec::new();
        for &u in &frontier {
            for &c in &var_adj[u] {
                if depth[c] == usize::MAX {
                    depth[c] = level;
                    checks.push(c);
                }
            }
        }
        if checks.is_empty() {
            return depth.iter().map(|&d| d != usize::MAX).collect();
        }
        reached += checks.len();
        if reached == m {
            return depth.iter().map(|&d| d < level).collect();
        }
        frontier.clear();
        for &c in &checks {
            for &u in &check_adj[c] {
                if !seen_var[u] {
                    seen_var[u] = true;
                    frontier.push(u);
                }
            }
        }
        level += 1;
    }
}

/// Length of the shortest cycle of the Tanner graph, `None` if acyclic.
pub fn girth(h: &SparseMatrix) -> Option<usize> {
    let (n, m) = (h.cols(), h.rows());
    let total = n + m;
    let neighbors = |u: usize| -> Vec<usize> {
        if u < n {
            h.col(u).iter().map(|&c| n + c).collect()
        } else {
            h.row(u - n).to_vec()
        }
    };
    let mut best = usize::MAX;
    let mut dist = vec![usize::MAX; total];
    let mut parent = vec![usize::MAX; total];
    for root in 0..n {
        dist.iter_mut().for_each(|d| *d = usize::MAX);
        dist[root] = 0;
        parent[root] = usize::MAX;
        let mut queue = VecDeque::from([root]);
        while let Some(u) = queue.pop_front() {
            if 2 * dist[u] + 1 >= best {
                break;
            }
            for w in neighbors(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn girth_of_small_graphs() {
        // two columns sharing two rows form a 4-cycle
        let h = SparseMatrix::from_columns(2, vec![vec![0, 1], vec![0, 1]]).unwrap();
        assert_eq!(girth(&h), Some(4));
        let tree = SparseMatrix::from_columns(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(girth(&tree), None);
        // hexagon: 3 columns, 3 rows
        let hex = SparseMatrix::from_columns(3, vec![vec![0, 1], vec![1, 2], vec![0, 2]]).unwrap();
        assert_eq!(girth(&hex), Some(6));
    }

    #[test]
    fn small_ira_instance() {
        let cfg = PegConfig { n_code: 96, n_checks: 48, ..PegConfig::ira_512_256(3) };
        let code = peg_construct(&cfg).unwrap();
        let h = code.parity_check();
        assert_eq!(h.edges(), 48 * 4 + 47 * 2 + 1);
        assert!(h.row_degrees().iter().all(|&d| d <= 6));
        assert!(girth(h).unwrap() >= 6);
    }

    #[test]
    fn infeasible_dimensions() {
        let cfg = PegConfig { n_checks: 0, ..PegConfig::ira_512_256(1) };
        assert!(matches!(peg_construct(&cfg), Err(Error::InfeasibleDegrees(_))));
        let cfg = PegConfig {
            dist: DegreeDistribution::new(
                super::super::degree::Polynomial(vec![(3, 1.0)]),
                super::super::degree::Polynomial(vec![(6, 1.0)]),
            )
            .unwrap(),
            ..PegConfig::ira_512_256(1)
        };
        assert!(matches!(peg_construct(&cfg), Err(Error::InfeasibleDegrees(_))));
    }
}
