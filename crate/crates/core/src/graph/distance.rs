//! Shortest-path distances between small node sets, with a radius cap.

use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{Graph, GraphError, NodeId};

/// Exact shortest-path distances from every source to every target.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    pub sources: Vec<NodeId>,
    pub targets: Vec<NodeId>,
    /// Row-major, `sources.len() x targets.len()`.
    pub dist: Vec<f64>,
}

impl DistanceTable {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.targets.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let m = self.targets.len();
        &self.dist[i * m..(i + 1) * m]
    }

    /// Same distances with sources and targets swapped.
    pub fn transposed(&self) -> Self {
        let (n, m) = (self.sources.len(), self.targets.len());
        let mut dist = vec![0.0; n * m];
        for i in 0..n {
            for j in 0..m {
                dist[j * n + i] = self.dist[i * m + j];
            }
        }
        Self { sources: self.targets.clone(), targets: self.sources.clone(), dist }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapKey(f64);

impl Eq for HeapKey {}

impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Reusable scratch space sized to the graph, so per-edge searches cost only
/// what they explore.
#[derive(Debug, Default)]
pub struct DistanceWorkspace {
    visit_epoch: u32,
    visit_stamp: Vec<u32>,
    best: Vec<f64>,
    target_epoch: u32,
    target_stamp: Vec<u32>,
    target_slot: Vec<u32>,
    heap: BinaryHeap<Reverse<(HeapKey, NodeId)>>,
    source_pairs: Vec<(NodeId, u32)>,
    target_pairs: Vec<(NodeId, u32)>,
    target_nodes: Vec<(NodeId, u32)>,
}

impl DistanceWorkspace {
    pub fn new() -> Self {
        Self::default()
    }

    fn prepare(&mut self, node_count: usize) {
        if self.visit_stamp.len() < node_count {
            self.visit_stamp.resize(node_count, 0);
            self.best.resize(node_count, 0.0);
            self.target_stamp.resize(node_count, 0);
            self.target_slot.resize(node_count, 0);
        }
    }

    fn next_visit_epoch(&mut self) {
        self.visit_epoch = self.visit_epoch.wrapping_add(1);
        if self.visit_epoch == 0 {
            self.visit_stamp.fill(0);
            self.visit_epoch = 1;
        }
    }

    fn index_targets(&mut self, targets: &[NodeId]) -> Result<(), GraphError> {
        self.target_epoch = self.target_epoch.wrapping_add(1);
        if self.target_epoch == 0 {
            self.target_stamp.fill(0);
            self.target_epoch = 1;
        }
        for (j, &t) in targets.iter().enumerate() {
            if self.target_stamp[t] == self.target_epoch {
                return Err(GraphError::InvalidParameter(format!("duplicate target node {t}")));
            }
            self.target_stamp[t] = self.target_epoch;
            self.target_slot[t] = j as u32;
        }
        Ok(())
    }

    #[inline]
    fn slot(&self, node: NodeId) -> Option<usize> {
        (self.target_stamp[node] == self.target_epoch).then(|| self.target_slot[node] as usize)
    }

    /// See [`truncated_distances`].
    pub fn truncated_distances(
        &mut self,
        g: &Graph,
        sources: &[NodeId],
        targets: &[NodeId],
        radius_cap: f64,
    ) -> Result<DistanceTable, GraphError> {
        self.validate(g, sources, targets, radius_cap)?;
        if g.is_unweighted() && radius_cap == 3.0 {
            self.two_hop(g, sources, targets)
        } else {
            self.dijkstra(g, sources, targets, radius_cap)
        }
    }

    /// See [`bounded_dijkstra_distances`].
    pub fn bounded_dijkstra(
        &mut self,
        g: &Graph,
        sources: &[NodeId],
        targets: &[NodeId],
        radius_cap: f64,
    ) -> Result<DistanceTable, GraphError> {
        self.validate(g, sources, targets, radius_cap)?;
        self.dijkstra(g, sources, targets, radius_cap)
    }

    fn validate(
        &mut self,
        g: &Graph,
        sources: &[NodeId],
        targets: &[NodeId],
        radius_cap: f64,
    ) -> Result<(), GraphError> {
        let node_count = g.node_count();
        if let Some(&node) = sources.iter().chain(targets).find(|&&x| x >= node_count) {
            return Err(GraphError::NodeOutOfRange { node, node_count });
        }
        if radius_cap.is_nan() || radius_cap < 0.0 {
            return Err(GraphError::InvalidParameter(format!("radius cap {radius_cap}")));
        }
        Ok(())
    }

    fn dijkstra(
        &mut self,
        g: &Graph,
        sources: &[NodeId],
        targets: &[NodeId],
        cap: f64,
    ) -> Result<DistanceTable, GraphError> {
        self.prepare(g.node_count());
        self.index_targets(targets)?;
        let m = targets.len();
        let mut dist = vec![cap; sources.len() * m];
        for (i, &src) in sources.iter().enumerate() {
            let row = &mut dist[i * m..(i + 1) * m];
            let mut remaining = m;
            self.next_visit_epoch();
            self.heap.clear();
            self.visit_stamp[src] = self.visit_epoch;
            self.best[src] = 0.0;
            self.heap.push(Reverse((HeapKey(0.0), src)));
            while let Some(Reverse((HeapKey(d), x))) = self.heap.pop() {
                if d > self.best[x] {
                    continue;
                }
                if d > cap {
                    break;
                }
                if let Some(j) = self.slot(x) {
                    row[j] = d;
                    remaining -= 1;
                    if remaining == 0 {
                        break;
                    }
                }
                for nb in g.neighbors(x) {
                    let nd = d + nb.length;
                    if nd > cap {
                        continue;
                    }
                    let y = nb.node;
                    if self.visit_stamp[y] != self.visit_epoch || nd < self.best[y] {
                        self.visit_stamp[y] = self.visit_epoch;
                        self.best[y] = nd;
                        self.heap.push(Reverse((HeapKey(nd), y)));
                    }
                }
            }
        }
        Ok(DistanceTable { sources: sources.to_vec(), targets: targets.to_vec(), dist })
    }

    /// Unweighted graphs with cap 3: distances 0, 1 and 2 are decided by
    /// identity, adjacency and a common neighbor; everything else is 3.
    ///
    /// Works as sort-merge joins over the adjacency lists of the sources and
    /// targets alone, so it never reads the rest of the graph. That keeps the
    /// cost per edge flat as the graph grows.
    fn two_hop(
        &mut self,
        g: &Graph,
        sources: &[NodeId],
        targets: &[NodeId],
    ) -> Result<DistanceTable, GraphError> {
        let m = targets.len();
        let Self { source_pairs, target_pairs, target_nodes, .. } = self;

        target_nodes.clear();
        target_nodes.extend(targets.iter().enumerate().map(|(j, &y)| (y, j as u32)));
        target_nodes.sort_unstable();
        if let Some(w) = target_nodes.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(GraphError::InvalidParameter(format!("duplicate target node {}", w[0].0)));
        }
        source_pairs.clear();
        for (i, &x) in sources.iter().enumerate() {
            source_pairs.extend(g.neighbors(x).iter().map(|nb| (nb.node, i as u32)));
        }
        source_pairs.sort_unstable();
        target_pairs.clear();
        for (j, &y) in targets.iter().enumerate() {
            target_pairs.extend(g.neighbors(y).iter().map(|nb| (nb.node, j as u32)));
        }
        target_pairs.sort_unstable();

        let mut dist = vec![3.0; sources.len() * m];
        // Common neighbor z: every (x, y) with z in N(x) and z in N(y).
        merge_join(source_pairs, target_pairs, |i, j| dist[i * m + j] = 2.0);
        // y itself in N(x).
        merge_join(source_pairs, target_nodes, |i, j| dist[i * m + j] = 1.0);
        for (i, &x) in sources.iter().enumerate() {
            if let Ok(k) = target_nodes.binary_search_by_key(&x, |t| t.0) {
                dist[i * m + target_nodes[k].1 as usize] = 0.0;
            }
        }
        Ok(DistanceTable { sources: sources.to_vec(), targets: targets.to_vec(), dist })
    }
}

/// Calls `hit(a, b)` for every pair of entries of the two key-sorted lists
/// that share a key.
fn merge_join(left: &[(NodeId, u32)], right: &[(NodeId, u32)], mut hit: impl FnMut(usize, usize)) {
    let (mut i, mut j) = (0, 0);
    while i < left.len() && j < right.len() {
        let key = left[i].0;
        match key.cmp(&right[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let i_end = i + left[i..].iter().take_while(|p| p.0 == key).count();
                let j_end = j + right[j..].iter().take_while(|p| p.0 == key).count();
                for a in &left[i..i_end] {
                    for b in &right[j..j_end] {
                        hit(a.1 as usize, b.1 as usize);
                    }
                }
                i = i_end;
                j = j_end;
            }
        }
    }
}

/// Shortest-path distances for the requested pairs, exploring no farther than
/// `radius_cap` from each source. Pairs farther apart than the cap are
/// reported as the cap itself.
///
/// Unweighted graphs with a cap of exactly 3 use a two-hop neighborhood
/// intersection instead of a search; the result is identical.
pub fn truncated_distances(
    g: &Graph,
    sources: &[NodeId],
    targets: &[NodeId],
    radius_cap: f64,
) -> Result<DistanceTable, GraphError> {
    DistanceWorkspace::new().truncated_distances(g, sources, targets, radius_cap)
}

/// Capped Dijkstra from every source, stopping once all targets are settled.
pub fn bounded_dijkstra_distances(
    g: &Graph,
    sources: &[NodeId],
    targets: &[NodeId],
    radius_cap: f64,
) -> Result<DistanceTable, GraphError> {
    DistanceWorkspace::new().bounded_dijkstra(g, sources, targets, radius_cap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::generate_er;

    /// Floyd–Warshall over the whole graph.
    fn all_pairs(g: &Graph) -> Vec<Vec<f64>> {
        let n = g.node_count();
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (x, row) in d.iter_mut().enumerate() {
            row[x] = 0.0;
        }
        for e in g.edges() {
            d[e.u][e.v] = e.length;
            d[e.v][e.u] = e.length;
        }
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let via = d[i][k] + d[k][j];
                    if via < d[i][j] {
                        d[i][j] = via;
                    }
                }
            }
        }
        d
    }

    #[test]
    fn path_distances() {
        // a=0 - u=1 - v=2 - b=3
        let g = Graph::from_unweighted_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let t = truncated_distances(&g, &[0, 1, 2], &[2, 1, 3], 3.0).unwrap();
        assert_eq!(t.get(0, 2), 3.0);
        assert_eq!(t.get(1, 1), 0.0);
        assert_eq!(t.get(2, 0), 0.0);
        assert_eq!(t.get(0, 0), 2.0);
        let d = bounded_dijkstra_distances(&g, &[0, 1, 2], &[2, 1, 3], 3.0).unwrap();
        assert_eq!(t, d);
    }

    #[test]
    fn unreachable_gets_cap() {
        let g = Graph::from_unweighted_edges(4, [(0, 1), (2, 3)]).unwrap();
        let t = truncated_distances(&g, &[0], &[3, 1], 5.0).unwrap();
        assert_eq!(t.row(0), &[5.0, 1.0]);
    }

    #[test]
    fn weighted_uses_lengths() {
        let g = Graph::from_edges(3, [(0, 1, 0.5), (1, 2, 0.25), (0, 2, 2.0)]).unwrap();
        let t = truncated_distances(&g, &[0], &[2], f64::INFINITY).unwrap();
        assert_eq!(t.get(0, 0), 0.75);
    }

    #[test]
    fn matches_exhaustive_oracle_on_small_graphs() {
        let mut ws = DistanceWorkspace::new();
        for seed in 0..300u64 {
            let n = 2 + (seed % 7) as usize;
            let g = generate_er(n, 0.15 + (seed % 5) as f64 * 0.15, seed).unwrap();
            let full = all_pairs(&g);
            let nodes: Vec<_> = (0..n).collect();
            for cap in [3.0, 2.0, 10.0] {
                let fast = ws.truncated_distances(&g, &nodes, &nodes, cap).unwrap();
                let slow = ws.bounded_dijkstra(&g, &nodes, &nodes, cap).unwrap();
                assert_eq!(fast, slow);
                for i in 0..n {
                    for j in 0..n {
                        assert_eq!(fast.get(i, j), full[i][j].min(cap), "seed {seed} cap {cap}");
                    }
                }
            }
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let g = Graph::from_unweighted_edges(2, [(0, 1)]).unwrap();
        assert!(truncated_distances(&g, &[0], &[2], 3.0).is_err());
        assert!(truncated_distances(&g, &[0], &[1, 1], 3.0).is_err());
        assert!(truncated_distances(&g, &[0], &[1], -1.0).is_err());
    }
}
