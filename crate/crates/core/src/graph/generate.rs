//! Seeded random graph models: Erdős–Rényi, Barabási–Albert and Watts–Strogatz.

use std::collections::BTreeSet;

use rand::Rng;

use super::{Graph, GraphError, NodeId};
use crate::rng::{stream_rng, Stream};

fn check_probability(name: &str, p: f64) -> Result<(), GraphError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(GraphError::InvalidParameter(format!("{name} = {p} is not in [0, 1]")))
    }
}

/// G(n, p): every unordered pair is an edge independently with probability `p`.
pub fn generate_er(n: usize, p: f64, seed: u64) -> Result<Graph, GraphError> {
    check_probability("p", p)?;
    let mut rng = stream_rng(seed, Stream::Generation);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_unweighted_edges(n, edges)
}

/// Preferential attachment starting from a clique on `m_attach + 1` nodes.
/// Each later node attaches to `m_attach` distinct existing nodes chosen with
/// probability proportional to degree, for a total of
/// `C(m+1, 2) + m (n - m - 1)` edges.
pub fn generate_ba(n: usize, m_attach: usize, seed: u64) -> Result<Graph, GraphError> {
    if m_attach < 1 {
        return Err(GraphError::InvalidParameter("m_attach must be at least 1".into()));
    }
    if n < m_attach + 1 {
        return Err(GraphError::InvalidParameter(format!(
            "n = {n} must be at least m_attach + 1 = {}",
            m_attach + 1
        )));
    }
    let mut rng = stream_rng(seed, Stream::Generation);
    let clique = m_attach + 1;
    let mut edges = Vec::with_capacity(clique * m_attach / 2 + m_attach * (n - clique));
    // Every endpoint occurrence; sampling an index is degree-proportional.
    let mut endpoints: Vec<NodeId> = Vec::with_capacity(2 * edges.capacity());
    for u in 0..clique {
        for v in (u + 1)..clique {
            edges.push((u, v));
            endpoints.extend([u, v]);
        }
    }
    let mut chosen: Vec<NodeId> = Vec::with_capacity(m_attach);
    for t in clique..n {
        chosen.clear();
        while chosen.len() < m_attach {
            let target = endpoints[rng.gen_range(0..endpoints.len())];
            if !chosen.contains(&target) {
                chosen.push(target);
            }
        }
        for &target in &chosen {
            edges.push((target, t));
            endpoints.extend([target, t]);
        }
    }
    Graph::from_unweighted_edges(n, edges)
}

/// Ring lattice where each node links to its `k / 2` nearest neighbors on each
/// side; every lattice edge then has its far endpoint rewired with
/// probability `beta` to a uniformly random node, avoiding self-loops and
/// duplicate edges.
pub fn generate_ws(n: usize, k: usize, beta: f64, seed: u64) -> Result<Graph, GraphError> {
    check_probability("beta", beta)?;
    if k % 2 != 0 {
        return Err(GraphError::InvalidParameter(format!("k = {k} must be even")));
    }
    if k >= n {
        return Err(GraphError::InvalidParameter(format!("k = {k} must be less than n = {n}")));
    }
    let mut rng = stream_rng(seed, Stream::Generation);
    let mut adj: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); n];
    for u in 0..n {
        for j in 1..=k / 2 {
            let v = (u + j) % n;
            adj[u].insert(v);
            adj[v].insert(u);
        }
    }
    for j in 1..=k / 2 {
        for u in 0..n {
            let v = (u + j) % n;
            if !rng.gen_bool(beta) || adj[u].len() >= n - 1 || !adj[u].contains(&v) {
                continue;
            }
            let mut w = rng.gen_range(0..n);
            while w == u || adj[u].contains(&w) {
                w = rng.gen_range(0..n);
            }
            adj[u].remove(&v);
            adj[v].remove(&u);
            adj[u].insert(w);
            adj[w].insert(u);
        }
    }
    let edges = adj
        .iter()
        .enumerate()
        .flat_map(|(u, set)| set.iter().filter(move |&&v| u < v).map(move |&v| (u, v)));
    Graph::from_unweighted_edges(n, edges)
}
